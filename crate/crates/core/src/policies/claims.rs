//! Top-weight sets behind the sample-half analysis.

use num_bigint::BigInt;
use num_traits::One;

use crate::matroid::{ElementId, Matroid};
use crate::scalar::Scalar;
use crate::weights::{ArrivalOrder, WeightAssignment};
use crate::Rational;

use super::alg1::SMALL_RANK;
use super::PolicyError;

/// For index `i`: the elements holding the top `t = 2 floor(r/4) + 2`
/// weights other than `w_i`, split by which half of the order they arrive
/// in. All lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopWeightSets {
    pub t: usize,
    pub c: Vec<ElementId>,
    pub a: Vec<ElementId>,
    pub b: Vec<ElementId>,
}

fn check(n: usize, r: usize) -> Result<usize, PolicyError> {
    if n % 2 == 1 {
        return Err(PolicyError::InvalidInput(format!("n = {n} must be even")));
    }
    if r < SMALL_RANK {
        return Err(PolicyError::InvalidInput(format!("rank {r} is below {SMALL_RANK}")));
    }
    let t = 2 * (r / 4) + 2;
    if n < t {
        return Err(PolicyError::InvalidInput(format!("n = {n} is smaller than t = {t}")));
    }
    Ok(t)
}

/// `i` is 1-based and at most `floor(r/4)`.
pub fn compute_claim_sets<W: Scalar>(
    m: &dyn Matroid,
    w: &WeightAssignment<W>,
    order: &ArrivalOrder,
    i: usize,
) -> Result<TopWeightSets, PolicyError> {
    let n = m.ground_size();
    let r = m.rank()?;
    let t = check(n, r)?;
    if i == 0 || i > r / 4 {
        return Err(PolicyError::InvalidInput(format!("index {i} outside 1..={}", r / 4)));
    }
    if w.len() != n || order.len() != n {
        return Err(PolicyError::InvalidInput("weights and order must cover the ground set".into()));
    }
    let mut in_a = vec![false; n];
    for &e in &order.as_slice()[..n / 2] {
        in_a[e] = true;
    }
    let mut c: Vec<ElementId> = (0..t).filter(|&p| p != i - 1).map(|p| w.element_with_position(p)).collect();
    c.sort_unstable();
    let (a, b) = c.iter().partition(|&&e| in_a[e]);
    Ok(TopWeightSets { t, c, a, b })
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    (0..k).fold(BigInt::one(), |acc, j| acc * BigInt::from(n - j) / BigInt::from(j + 1))
}

/// Probability that a uniformly random `(t-1)`-subset of `n` elements has
/// at most `floor(r/4)` members in the second half.
pub fn claim_probability_exact(n: usize, r: usize) -> Result<Rational, PolicyError> {
    let t = check(n, r)?;
    let half = n / 2;
    let good: BigInt = (0..=r / 4).map(|k| binomial(half, k) * binomial(half, t - 1 - k)).sum();
    Ok(Rational::new(good, binomial(n, t - 1)))
}

/// The same probability by listing every `(t-1)`-subset. `n <= 24`.
pub fn claim_probability_enumerated(n: usize, r: usize) -> Result<Rational, PolicyError> {
    let t = check(n, r)?;
    if n > 24 {
        return Err(PolicyError::InvalidInput(format!("n = {n} is too large to enumerate")));
    }
    let second_half: u32 = ((1u32 << n) - 1) & !((1u32 << (n / 2)) - 1);
    let (mut good, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != t - 1 {
            continue;
        }
        total += 1;
        good += u64::from((mask & second_half).count_ones() as usize <= r / 4);
    }
    Ok(Rational::new(BigInt::from(good), BigInt::from(total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::MatroidOracle;
    use crate::scalar::rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn half_exactly_for_even_n() {
        assert_eq!(claim_probability_exact(16, 12).unwrap(), rational(1, 2));
        assert_eq!(claim_probability_enumerated(16, 12).unwrap(), rational(1, 2));
        for (n, r) in [(20, 12), (24, 16), (40, 20), (64, 16)] {
            assert_eq!(claim_probability_exact(n, r).unwrap(), rational(1, 2), "n={n} r={r}");
        }
        assert_eq!(claim_probability_enumerated(20, 13).unwrap(), claim_probability_exact(20, 13).unwrap());
    }

    #[test]
    fn rejects_odd_or_small() {
        assert!(claim_probability_exact(15, 12).is_err());
        assert!(claim_probability_exact(16, 8).is_err());
    }

    #[test]
    fn sets_are_well_formed() {
        let m = MatroidOracle::uniform(16, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ws: Vec<f64> = (1..=16).rev().map(f64::from).collect();
        for _ in 0..100 {
            let w = WeightAssignment::random(ws.clone(), &mut rng).unwrap();
            let order = ArrivalOrder::random(16, &mut rng);
            for i in 1..=3 {
                let s = compute_claim_sets(&m, &w, &order, i).unwrap();
                assert_eq!(s.t, 8);
                assert_eq!(s.c.len(), 7);
                assert!(s.a.iter().all(|e| !s.b.contains(e)));
                let mut u = [s.a.clone(), s.b.clone()].concat();
                u.sort_unstable();
                assert_eq!(u, s.c);
                assert!(!s.c.contains(&w.element_with_position(i - 1)));
            }
        }
        let w = WeightAssignment::identity(ws).unwrap();
        assert!(compute_claim_sets(&m, &w, &ArrivalOrder::identity(16), 4).is_err());
    }
}
