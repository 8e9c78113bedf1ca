use crate::classical::one_over_e_cutoff;
use crate::matroid::{ElementId, Matroid, MatroidOracle};
use crate::principal::is_uniformly_dense;
use crate::scalar::Scalar;

use super::{can_add, Coins, OnlinePolicy, OracleMode, PolicyError};

/// Rank below which the sample-half threshold is replaced by the classical
/// single-choice rule.
pub(crate) const SMALL_RANK: usize = 12;

/// Thresholding for loop-free uniformly dense matroids with the matroid
/// known in advance.
///
/// For rank below 12 it picks one element with the classical `1/e` rule.
/// Otherwise it watches the first `ceil(n/2)` arrivals, sets `w*` to the
/// `(floor(r/4)+1)`-th largest weight among them, and afterwards takes
/// every element above `w*` that keeps the selection independent.
#[derive(Debug, Clone)]
pub struct Alg1<W> {
    m: MatroidOracle,
    n: usize,
    rank: usize,
    seen: usize,
    sample: Vec<W>,
    /// `Some(None)` is an infinite threshold.
    threshold: Option<Option<W>>,
    best: Option<W>,
    accepted: Vec<ElementId>,
}

impl<W: Scalar> Alg1<W> {
    pub fn new(m: MatroidOracle) -> Result<Self, PolicyError> {
        if m.ground_size() == 0 {
            return Err(PolicyError::EmptyInput);
        }
        if !is_uniformly_dense(&m)? {
            return Err(PolicyError::NotUniformlyDense);
        }
        Self::new_unchecked(m)
    }

    /// For minors already known to be loop-free and uniformly dense.
    pub(crate) fn new_unchecked(m: MatroidOracle) -> Result<Self, PolicyError> {
        let rank = m.rank()?;
        Ok(Self {
            n: m.ground_size(),
            m,
            rank,
            seen: 0,
            sample: Vec::new(),
            threshold: None,
            best: None,
            accepted: Vec::new(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn sample_size(&self) -> usize {
        self.n.div_ceil(2)
    }

    /// Threshold after the sampling half; `Some(None)` means nothing can
    /// pass. `None` before the sample is complete or for small rank.
    pub fn threshold(&self) -> Option<Option<&W>> {
        self.threshold.as_ref().map(Option::as_ref)
    }

    pub fn accepted(&self) -> &[ElementId] {
        &self.accepted
    }

    /// Decision for element `e` of this policy's own matroid.
    pub fn step(&mut self, e: ElementId, w: &W) -> Result<bool, PolicyError> {
        self.seen += 1;
        let take = if self.rank < SMALL_RANK {
            let record = self.best.as_ref().is_none_or(|b| w > b);
            if record {
                self.best = Some(w.clone());
            }
            self.accepted.is_empty() && record && self.seen > one_over_e_cutoff(self.n)
        } else if self.seen <= self.sample_size() {
            self.sample.push(w.clone());
            if self.seen == self.sample_size() {
                self.sample.sort_by(|a, b| b.partial_cmp(a).expect("weights are ordered"));
                self.threshold = Some(self.sample.get(self.rank / 4).cloned());
            }
            false
        } else {
            match &self.threshold {
                Some(Some(t)) => w > t && can_add(&self.m, &self.accepted, e)?,
                _ => false,
            }
        };
        if take {
            self.accepted.push(e);
        }
        Ok(take)
    }
}

impl<W: Scalar> OnlinePolicy<W> for Alg1<W> {
    fn name(&self) -> &'static str {
        "alg1"
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Known
    }

    fn on_arrival(&mut self, _: &dyn Matroid, _: &mut dyn Coins, e: ElementId, w: &W) -> Result<bool, PolicyError> {
        self.step(e, w)
    }
}
