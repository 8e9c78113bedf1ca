//! Weight lists, their assignment to elements, arrival orders, and the
//! offline greedy optimum.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::matroid::{ElementId, Matroid, MatroidError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("weights must be strictly decreasing (position {0})")]
    NotStrictlyDecreasing(usize),
    #[error("weights must be nonnegative (position {0})")]
    Negative(usize),
    #[error("assignment is not a bijection onto the weight list")]
    NotBijection,
    #[error("{weights} weights for a ground set of {elements} elements")]
    SizeMismatch { weights: usize, elements: usize },
}

/// A strictly decreasing weight list `w_1 > w_2 > ... > w_n` together with
/// a bijection from elements to positions in that list.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment<W> {
    weights: Vec<W>,
    assignment: Vec<usize>,
}

pub fn check_weight_list<W: Scalar>(weights: &[W]) -> Result<(), WeightError> {
    for (i, w) in weights.iter().enumerate() {
        if !matches!(w.partial_cmp(&W::zero()), Some(std::cmp::Ordering::Greater | std::cmp::Ordering::Equal)) {
            return Err(WeightError::Negative(i));
        }
        if i > 0 && weights[i - 1] <= *w {
            return Err(WeightError::NotStrictlyDecreasing(i));
        }
    }
    Ok(())
}

impl<W: Scalar> WeightAssignment<W> {
    /// `assignment[e]` is the index in `weights` given to element `e`.
    pub fn new(weights: Vec<W>, assignment: Vec<usize>) -> Result<Self, WeightError> {
        check_weight_list(&weights)?;
        if weights.len() != assignment.len() {
            return Err(WeightError::SizeMismatch { weights: weights.len(), elements: assignment.len() });
        }
        let mut hit = vec![false; weights.len()];
        for &a in &assignment {
            if a >= weights.len() || std::mem::replace(&mut hit[a], true) {
                return Err(WeightError::NotBijection);
            }
        }
        Ok(Self { weights, assignment })
    }

    /// Element `e` receives `w_{e+1}`.
    pub fn identity(weights: Vec<W>) -> Result<Self, WeightError> {
        let n = weights.len();
        Self::new(weights, (0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(weights: Vec<W>, rng: &mut R) -> Result<Self, WeightError> {
        let mut assignment: Vec<usize> = (0..weights.len()).collect();
        assignment.shuffle(rng);
        Self::new(weights, assignment)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn weight_of(&self, e: ElementId) -> &W {
        &self.weights[self.assignment[e]]
    }

    /// 0 for the heaviest element.
    pub fn position_of(&self, e: ElementId) -> usize {
        self.assignment[e]
    }

    pub fn element_with_position(&self, pos: usize) -> ElementId {
        self.assignment.iter().position(|&a| a == pos).expect("bijection")
    }

    /// Elements from heaviest to lightest.
    pub fn elements_by_weight(&self) -> Vec<ElementId> {
        let mut by_pos = vec![0; self.len()];
        for (e, &a) in self.assignment.iter().enumerate() {
            by_pos[a] = e;
        }
        by_pos
    }

    pub fn total(&self, set: &[ElementId]) -> W {
        set.iter().fold(W::zero(), |acc, &e| acc + self.weight_of(e).clone())
    }

    /// Sum of the `k` largest weights in the list.
    pub fn top_sum(&self, k: usize) -> W {
        self.weights.iter().take(k).fold(W::zero(), |acc, w| acc + w.clone())
    }
}

/// The max-weight independent set, by the matroid greedy algorithm. Sorted.
pub fn greedy_opt<W: Scalar>(m: &dyn Matroid, w: &WeightAssignment<W>) -> Result<Vec<ElementId>, MatroidError> {
    if w.len() != m.ground_size() {
        return Err(MatroidError::Invalid(format!("{} weights for a ground set of {}", w.len(), m.ground_size())));
    }
    let mut kept = Vec::new();
    for e in w.elements_by_weight() {
        kept.push(e);
        if !m.is_independent(&kept)? {
            kept.pop();
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// A permutation of the ground set, in presentation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalOrder(Vec<ElementId>);

impl ArrivalOrder {
    pub fn new(order: Vec<ElementId>) -> Result<Self, WeightError> {
        let mut hit = vec![false; order.len()];
        for &e in &order {
            if e >= order.len() || std::mem::replace(&mut hit[e], true) {
                return Err(WeightError::NotBijection);
            }
        }
        Ok(Self(order))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v: Vec<ElementId> = (0..n).collect();
        v.shuffle(rng);
        Self(v)
    }

    pub fn as_slice(&self) -> &[ElementId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<ElementId> {
        self.0
    }
}
