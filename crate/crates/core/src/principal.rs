//! Densities, densest subsets and the principal-minor decomposition.
//!
//! The density of a set is `|S| / rank(S)`. A matroid is uniformly dense
//! when no subset is denser than the whole ground set. Repeatedly taking
//! the densest set of the current contraction yields a sequence of
//! uniformly dense minors with non-increasing densities.
//!
//! Densest sets are found by closed forms where the family allows it
//! (uniform, partition, graphic with at most [`MAX_GRAPH_VERTICES`]
//! vertices) and by brute force over all subsets otherwise, up to
//! [`MAX_BRUTE_FORCE`] elements. All density arithmetic is exact.

use num_bigint::BigInt;
use thiserror::Error;

use crate::enumerate::mask_elements;
use crate::matroid::{DisjointSets, ElementId, Matroid, MatroidError, MatroidOracle};
use crate::Rational;

pub const MAX_BRUTE_FORCE: usize = 20;
pub const MAX_GRAPH_VERTICES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    #[error("density is undefined for a set of rank zero")]
    ZeroRank,
    #[error("every element is a loop")]
    AllLoops,
    #[error("no closed form applies and {0} elements exceed the brute-force limit of {MAX_BRUTE_FORCE}")]
    TooLarge(usize),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
}

fn frac(num: usize, den: usize) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `|s| / rank(s)` as an exact rational.
pub fn density(m: &dyn Matroid, s: &[ElementId]) -> Result<Rational, DensityError> {
    let r = m.rank_of(s)?;
    if r == 0 {
        return Err(DensityError::ZeroRank);
    }
    Ok(frac(s.len(), r))
}

/// Candidate ordering for densest sets: higher density, then more
/// elements, then lexicographically smaller.
fn better(a: (usize, usize, &[ElementId]), b: (usize, usize, &[ElementId])) -> bool {
    let (sa, ra, ea) = a;
    let (sb, rb, eb) = b;
    let lhs = sa as u128 * rb as u128;
    let rhs = sb as u128 * ra as u128;
    lhs > rhs || (lhs == rhs && (sa > sb || (sa == sb && ea < eb)))
}

/// Densest subset by enumerating every nonempty subset of positive rank.
pub fn densest_subset_brute_force(m: &dyn Matroid) -> Result<(Vec<ElementId>, Rational), DensityError> {
    let n = m.ground_size();
    if n > MAX_BRUTE_FORCE {
        return Err(DensityError::TooLarge(n));
    }
    let mut best: Option<(usize, usize, Vec<ElementId>)> = None;
    for mask in 1..1u64 << n {
        let s = mask_elements(mask);
        let r = m.rank_of(&s)?;
        if r == 0 {
            continue;
        }
        let replace = match &best {
            None => true,
            Some((bs, br, be)) => better((s.len(), r, &s), (*bs, *br, be)),
        };
        if replace {
            best = Some((s.len(), r, s));
        }
    }
    let (size, rank, set) = best.ok_or(DensityError::AllLoops)?;
    Ok((set, frac(size, rank)))
}

/// Loop-free partition matroid: the union of all blocks with the largest
/// `size / min(size, capacity)`.
fn densest_partition(blocks: &[Vec<ElementId>], caps: &[usize]) -> (Vec<ElementId>, Rational) {
    let ratio = |b: usize| (blocks[b].len(), blocks[b].len().min(caps[b]));
    let best = (0..blocks.len())
        .max_by(|&a, &b| {
            let (sa, ra) = ratio(a);
            let (sb, rb) = ratio(b);
            (sa * rb).cmp(&(sb * ra))
        })
        .expect("nonempty matroid");
    let (bs, br) = ratio(best);
    let mut set: Vec<ElementId> = (0..blocks.len())
        .filter(|&b| {
            let (s, r) = ratio(b);
            s * br == bs * r
        })
        .flat_map(|b| blocks[b].iter().copied())
        .collect();
    set.sort_unstable();
    let rank: usize = (0..blocks.len()).filter(|&b| set.contains(&blocks[b][0])).map(|b| ratio(b).1).sum();
    let size = set.len();
    (set, frac(size, rank))
}

/// Loop-free graph: the densest edge sets are unions of induced edge sets
/// `E[U]`, so enumerating vertex subsets finds the optimum density and the
/// union of all optimal `E[U]` is the largest densest set.
fn densest_graph(vertices: usize, edges: &[(usize, usize)]) -> (Vec<ElementId>, Rational) {
    let mut best: (usize, usize) = (0, 1);
    let mut union_mask = vec![false; edges.len()];
    for vmask in 1u64..1 << vertices {
        if vmask.count_ones() < 2 {
            continue;
        }
        let inside: Vec<usize> =
            (0..edges.len()).filter(|&e| vmask >> edges[e].0 & 1 == 1 && vmask >> edges[e].1 & 1 == 1).collect();
        if inside.is_empty() {
            continue;
        }
        let mut dsu = DisjointSets::new(vertices);
        let rank = inside.iter().filter(|&&e| dsu.union(edges[e].0, edges[e].1)).count();
        let (size, r) = (inside.len(), rank);
        let lhs = size * best.1;
        let rhs = best.0 * r;
        if lhs > rhs {
            best = (size, r);
            union_mask.iter_mut().for_each(|x| *x = false);
        }
        if lhs >= rhs {
            for e in inside {
                union_mask[e] = true;
            }
        }
    }
    let set: Vec<ElementId> = (0..edges.len()).filter(|&e| union_mask[e]).collect();
    (set, frac(best.0, best.1))
}

/// The densest subset of `m`, ties broken by larger cardinality and then
/// lexicographically.
pub fn densest_subset(m: &MatroidOracle) -> Result<(Vec<ElementId>, Rational), DensityError> {
    let n = m.ground_size();
    let loops = m.loops()?;
    if loops.len() == n {
        return Err(DensityError::AllLoops);
    }
    if loops.is_empty() {
        if m.as_uniform().is_some() {
            let all: Vec<ElementId> = (0..n).collect();
            let d = density(m, &all)?;
            return Ok((all, d));
        }
        if let Some((blocks, caps)) = m.as_partition() {
            return Ok(densest_partition(&blocks, &caps));
        }
        if let Some((vertices, edges)) = m.as_graph() {
            if vertices <= MAX_GRAPH_VERTICES {
                return Ok(densest_graph(vertices, &edges));
            }
        }
    }
    densest_subset_brute_force(m)
}

/// True iff `m` has no loops and no subset is denser than the ground set.
pub fn is_uniformly_dense(m: &MatroidOracle) -> Result<bool, DensityError> {
    let n = m.ground_size();
    if n == 0 || !m.loops()?.is_empty() {
        return Ok(false);
    }
    let all: Vec<ElementId> = (0..n).collect();
    let whole = density(m, &all)?;
    let (_, best) = densest_subset(m)?;
    Ok(best == whole)
}

/// One step of the principal sequence.
#[derive(Debug, Clone)]
pub struct PrincipalPart {
    /// Elements of the part, as ids of the decomposed matroid.
    pub elements: Vec<ElementId>,
    /// The minor `(M / earlier parts) | elements`; its element `i` is
    /// `elements[i]`.
    pub minor: MatroidOracle,
    pub rank: usize,
    pub density: Rational,
}

#[derive(Debug, Clone)]
pub struct PrincipalDecomposition {
    pub parts: Vec<PrincipalPart>,
    /// Zero-rank remainder: loops of the matroid, never assigned to a part.
    pub loops: Vec<ElementId>,
    pub ground_size: usize,
}

/// Restrict to the densest set of the current contraction, contract it,
/// and repeat until every non-loop element belongs to a part.
pub fn principal_minors(m: &MatroidOracle) -> Result<PrincipalDecomposition, DensityError> {
    let n = m.ground_size();
    let mut loops = Vec::new();
    let mut contracted: Vec<ElementId> = Vec::new();
    let mut remaining: Vec<ElementId> = (0..n).collect();
    let mut parts = Vec::new();
    while !remaining.is_empty() {
        let current = m.minor(&contracted, &remaining)?;
        let new_loops = current.loops()?;
        if !new_loops.is_empty() {
            loops.extend(new_loops.iter().map(|&i| remaining[i]));
            let keep: Vec<ElementId> =
                remaining.iter().enumerate().filter(|(i, _)| !new_loops.contains(i)).map(|(_, &e)| e).collect();
            remaining = keep;
            continue;
        }
        let (local, dens) = densest_subset(&current)?;
        let elements: Vec<ElementId> = local.iter().map(|&i| remaining[i]).collect();
        let minor = m.minor(&contracted, &elements)?;
        let rank = minor.rank()?;
        contracted.extend(&elements);
        remaining.retain(|e| !elements.contains(e));
        parts.push(PrincipalPart { elements, minor, rank, density: dens });
    }
    loops.sort_unstable();
    Ok(PrincipalDecomposition { parts, loops, ground_size: n })
}

impl PrincipalDecomposition {
    /// For every element, the index of its part (`None` for loops).
    pub fn part_of(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.ground_size];
        for (i, p) in self.parts.iter().enumerate() {
            for &e in &p.elements {
                out[e] = Some(i);
            }
        }
        out
    }

    pub fn densities_non_increasing(&self) -> bool {
        self.parts.windows(2).all(|w| w[0].density >= w[1].density)
    }
}

/// Partition matroid whose blocks are the parts of the decomposition, each
/// with capacity equal to the part's rank. Loops form a capacity-0 block.
pub fn principal_partition_matroid(d: &PrincipalDecomposition) -> Result<MatroidOracle, MatroidError> {
    let mut blocks: Vec<Vec<ElementId>> = d.parts.iter().map(|p| p.elements.clone()).collect();
    let mut caps: Vec<usize> = d.parts.iter().map(|p| p.rank).collect();
    if !d.loops.is_empty() {
        blocks.push(d.loops.clone());
        caps.push(0);
    }
    MatroidOracle::partition(blocks, caps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::for_each_permutation;
    use crate::instances::{partition_by_sizes, triangle, triangle_with_pendant};
    use crate::scalar::rational;
    use crate::weights::{greedy_opt, WeightAssignment};
    use num_traits::Zero;
    use proptest::prelude::*;

    #[test]
    fn density_examples() {
        assert_eq!(density(&triangle(), &[0, 1, 2]).unwrap(), rational(3, 2));
        let u = MatroidOracle::uniform(4, 2).unwrap();
        assert_eq!(density(&u, &[0, 1, 2, 3]).unwrap(), rational(2, 1));
        assert_eq!(density(&u, &[3]).unwrap(), rational(1, 1));
        let p = partition_by_sizes(&[1, 1], &[1, 0]).unwrap();
        assert_eq!(density(&p, &[1]).unwrap_err(), DensityError::ZeroRank);
    }

    #[test]
    fn densest_examples() {
        let (s, d) = densest_subset(&triangle_with_pendant()).unwrap();
        assert_eq!((s, d), (vec![0, 1, 2], rational(3, 2)));
        let (s, d) = densest_subset(&MatroidOracle::uniform(4, 2).unwrap()).unwrap();
        assert_eq!((s, d), (vec![0, 1, 2, 3], rational(2, 1)));
        let (s, d) = densest_subset(&partition_by_sizes(&[3, 1], &[1, 1]).unwrap()).unwrap();
        assert_eq!((s, d), (vec![0, 1, 2], rational(3, 1)));
        let all_loops = partition_by_sizes(&[2], &[0]).unwrap();
        assert_eq!(densest_subset(&all_loops).unwrap_err(), DensityError::AllLoops);
    }

    #[test]
    fn brute_force_agrees_on_examples() {
        let (s, d) = densest_subset_brute_force(&triangle_with_pendant()).unwrap();
        assert_eq!((s, d), (vec![0, 1, 2], rational(3, 2)));
        let (s, d) = densest_subset_brute_force(&partition_by_sizes(&[3, 1], &[1, 1]).unwrap()).unwrap();
        assert_eq!((s, d), (vec![0, 1, 2], rational(3, 1)));
    }

    #[test]
    fn uniform_density_examples() {
        assert!(is_uniformly_dense(&MatroidOracle::uniform(7, 3).unwrap()).unwrap());
        assert!(!is_uniformly_dense(&triangle_with_pendant()).unwrap());
        assert!(is_uniformly_dense(&partition_by_sizes(&[2, 2], &[1, 1]).unwrap()).unwrap());
        assert!(!is_uniformly_dense(&partition_by_sizes(&[2, 1], &[1, 0]).unwrap()).unwrap());
    }

    #[test]
    fn too_large_without_closed_form() {
        let x = MatroidOracle::uniform(25, 3).unwrap();
        assert_eq!(densest_subset_brute_force(&x).unwrap_err(), DensityError::TooLarge(25));
        // a loop forces brute force, which then refuses
        let p = partition_by_sizes(&[24, 1], &[2, 0]).unwrap();
        assert_eq!(densest_subset(&p).unwrap_err(), DensityError::TooLarge(25));
    }

    #[test]
    fn decomposition_examples() {
        let d = principal_minors(&triangle_with_pendant()).unwrap();
        assert_eq!(d.parts.len(), 2);
        assert_eq!(d.parts[0].elements, vec![0, 1, 2]);
        assert_eq!((d.parts[0].rank, d.parts[0].density.clone()), (2, rational(3, 2)));
        assert_eq!(d.parts[1].elements, vec![3]);
        assert_eq!((d.parts[1].rank, d.parts[1].density.clone()), (1, rational(1, 1)));
        assert!(d.loops.is_empty());

        let u = MatroidOracle::uniform(5, 2).unwrap();
        let d = principal_minors(&u).unwrap();
        assert_eq!(d.parts.len(), 1);
        assert_eq!(d.parts[0].elements, vec![0, 1, 2, 3, 4]);

        let d = principal_minors(&partition_by_sizes(&[4, 2], &[1, 1]).unwrap()).unwrap();
        assert_eq!(d.parts[0].elements, vec![0, 1, 2, 3]);
        assert_eq!(d.parts[0].density, rational(4, 1));
        assert_eq!(d.parts[1].elements, vec![4, 5]);
        assert_eq!(d.parts[1].density, rational(2, 1));
    }

    #[test]
    fn loops_go_to_remainder() {
        let p = partition_by_sizes(&[3, 2, 1], &[1, 0, 1]).unwrap();
        let d = principal_minors(&p).unwrap();
        assert_eq!(d.loops, vec![3, 4]);
        assert!(d.parts.iter().all(|part| part.minor.loops().unwrap().is_empty()));
    }

    #[test]
    fn partition_matroid_of_decomposition() {
        let d = principal_minors(&triangle_with_pendant()).unwrap();
        let p = principal_partition_matroid(&d).unwrap();
        assert_eq!(p.as_partition().unwrap(), (vec![vec![0, 1, 2], vec![3]], vec![2, 1]));

        let d = principal_minors(&MatroidOracle::uniform(4, 3).unwrap()).unwrap();
        let p = principal_partition_matroid(&d).unwrap();
        assert_eq!(p.as_partition().unwrap(), (vec![vec![0, 1, 2, 3]], vec![3]));
    }

    /// Exact `E[w(OPT)]` over every bijection of `weights` onto the ground set.
    fn expected_opt(m: &MatroidOracle, weights: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        let mut count = 0u64;
        for_each_permutation(weights.len(), |p| {
            let w = WeightAssignment::new(weights.to_vec(), p.to_vec()).unwrap();
            total += w.total(&greedy_opt(m, &w).unwrap());
            count += 1;
        });
        total / Rational::from_integer(count.into())
    }

    #[test]
    fn partition_optimum_within_constant_of_matroid_optimum() {
        let weights: Vec<Rational> = [4, 3, 2, 1].iter().map(|&w| rational(w, 1)).collect();
        let m = triangle_with_pendant();
        let p = principal_partition_matroid(&principal_minors(&m).unwrap()).unwrap();
        let (opt_p, opt_m) = (expected_opt(&p, &weights), expected_opt(&m, &weights));
        // the pendant is always in OPT; the triangle contributes its top two
        assert_eq!(opt_m, rational(35, 4));
        assert!(opt_p.as_f64() >= (1.0 - (-1.0f64).exp()) * opt_m.as_f64());

        let others = [
            MatroidOracle::graphic(4, vec![(0, 1), (1, 2), (0, 2), (2, 3), (3, 0), (1, 3)]).unwrap(),
            MatroidOracle::graphic(5, vec![(0, 1), (1, 2), (0, 2), (0, 1), (2, 3), (3, 4), (4, 2)]).unwrap(),
            partition_by_sizes(&[3, 2, 2], &[1, 2, 0]).unwrap(),
        ];
        for m in others {
            let n = m.ground_size();
            let weights: Vec<Rational> = (0..n).map(|i| rational(1 << (n - i), 1)).collect();
            let p = principal_partition_matroid(&principal_minors(&m).unwrap()).unwrap();
            let (opt_p, opt_m) = (expected_opt(&p, &weights), expected_opt(&m, &weights));
            assert!(opt_p.as_f64() >= (1.0 - (-1.0f64).exp()) * opt_m.as_f64(), "{m:?}");
        }
    }

    use crate::scalar::Scalar;

    fn check_decomposition(m: &MatroidOracle) {
        let d = principal_minors(m).unwrap();
        assert!(d.densities_non_increasing());
        let mut seen = vec![0u8; m.ground_size()];
        for part in &d.parts {
            assert!(is_uniformly_dense(&part.minor).unwrap());
            for &e in &part.elements {
                seen[e] += 1;
            }
        }
        for &e in &d.loops {
            seen[e] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    proptest! {
        #[test]
        fn graph_closed_form_matches_brute_force(edges in proptest::collection::vec((0usize..5, 0usize..5), 1..10)) {
            let edges: Vec<_> = edges.into_iter().filter(|(u, v)| u != v).collect();
            prop_assume!(!edges.is_empty());
            let m = MatroidOracle::graphic(5, edges).unwrap();
            prop_assert_eq!(densest_subset(&m).unwrap(), densest_subset_brute_force(&m).unwrap());
            check_decomposition(&m);
        }

        #[test]
        fn partition_closed_form_matches_brute_force(
            blocks in proptest::collection::vec((1usize..4, 0usize..4), 1..5)
        ) {
            let sizes: Vec<usize> = blocks.iter().map(|b| b.0).collect();
            let caps: Vec<usize> = blocks.iter().map(|b| b.1).collect();
            let m = partition_by_sizes(&sizes, &caps).unwrap();
            prop_assume!(m.rank().unwrap() > 0);
            prop_assert_eq!(densest_subset(&m).unwrap(), densest_subset_brute_force(&m).unwrap());
            check_decomposition(&m);
        }

        #[test]
        fn minors_of_partitions_use_closed_form(cmask in 0u64..64) {
            let m = partition_by_sizes(&[3, 2, 1], &[2, 1, 1]).unwrap();
            let contract = mask_elements(cmask);
            let restrict: Vec<_> = (0..6).filter(|e| !contract.contains(e)).collect();
            prop_assume!(!restrict.is_empty());
            let minor = m.minor(&contract, &restrict).unwrap();
            prop_assume!(minor.rank().unwrap() > 0);
            prop_assert_eq!(densest_subset(&minor).unwrap(), densest_subset_brute_force(&minor).unwrap());
        }
    }
}
