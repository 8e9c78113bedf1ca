//! Classical secretary policies on best-so-far records.
//!
//! A policy is an [`AcceptanceSchedule`]: when the `i`-th candidate is the
//! best seen so far and nothing has been taken yet, take it with
//! probability `q_i`. Candidates that are not records are never taken;
//! every rank-based algorithm can be put in this form without losing
//! success probability.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::enumerate::for_each_permutation;
use crate::scalar::{harmonic, Scalar};

/// Largest `n` accepted by [`evaluate_policy_enumeration`].
pub const MAX_ENUMERATION: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassicalError {
    #[error("the horizon must contain at least one candidate")]
    EmptyHorizon,
    #[error("acceptance probability q_{0} is outside [0, 1]")]
    InvalidProbability(usize),
    #[error("schedule has {len} entries but n = {n}")]
    HorizonTooShort { n: usize, len: usize },
    #[error("enumeration over {0}! orders exceeds the limit n <= {MAX_ENUMERATION}")]
    EnumerationTooLarge(usize),
    #[error("profile violates feasibility at position {0}")]
    InfeasibleProfile(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceSchedule<T> {
    q: Vec<T>,
}

impl<T: Scalar> AcceptanceSchedule<T> {
    pub fn new(q: Vec<T>) -> Result<Self, ClassicalError> {
        if let Some(i) = q.iter().position(|x| !(*x >= T::zero() && *x <= T::one())) {
            return Err(ClassicalError::InvalidProbability(i + 1));
        }
        Ok(Self { q })
    }

    pub fn probabilities(&self) -> &[T] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `q_i` with 1-based `i`.
    pub fn q(&self, i: usize) -> &T {
        &self.q[i - 1]
    }

    /// The induced profile: `p_i = (q_i / i) * prod_{j<i} (1 - q_j / j)`.
    pub fn profile(&self) -> PolicyProfile<T> {
        let mut p = Vec::with_capacity(self.q.len());
        let mut survive = T::one();
        for (idx, q) in self.q.iter().enumerate() {
            let i = T::from_usize_lossless(idx + 1);
            let take = q.clone() / i;
            p.push(take.clone() * survive.clone());
            survive = survive * (T::one() - take);
        }
        PolicyProfile { p }
    }
}

/// `p_i` = probability of skipping the first `i-1` candidates and taking
/// candidate `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyProfile<T> {
    p: Vec<T>,
}

impl<T: Scalar> PolicyProfile<T> {
    pub fn new(p: Vec<T>) -> Self {
        Self { p }
    }

    pub fn probabilities(&self) -> &[T] {
        &self.p
    }

    /// First 1-based position where `sum_{j<i} p_j + i p_i <= 1` or
    /// `p_i >= 0` fails.
    pub fn first_infeasible(&self) -> Option<usize> {
        let mut prefix = T::zero();
        for (idx, p) in self.p.iter().enumerate() {
            let lhs = prefix.clone() + T::from_usize_lossless(idx + 1) * p.clone();
            let excess = lhs - T::one();
            if p.is_negative() && !p.is_negligible() || excess.is_positive() && !excess.is_negligible() {
                return Some(idx + 1);
            }
            prefix = prefix + p.clone();
        }
        None
    }

    pub fn is_feasible(&self) -> bool {
        self.first_infeasible().is_none()
    }

    pub fn total(&self) -> T {
        self.p.iter().fold(T::zero(), |a, b| a + b.clone())
    }

    /// `(1/n) sum_{i<=n} i p_i`: success probability when there are `n`
    /// candidates.
    pub fn success_at(&self, n: usize) -> T {
        let sum = self.p[..n]
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (idx, p)| acc + T::from_usize_lossless(idx + 1) * p.clone());
        sum / T::from_usize_lossless(n)
    }

    /// Schedule realising this profile: `q_i = i p_i / (1 - sum_{j<i} p_j)`,
    /// and `q_i = 0` once nothing is left to take.
    pub fn to_schedule(&self) -> Result<AcceptanceSchedule<T>, ClassicalError> {
        if let Some(i) = self.first_infeasible() {
            return Err(ClassicalError::InfeasibleProfile(i));
        }
        let mut prefix = T::zero();
        let mut q = Vec::with_capacity(self.p.len());
        for (idx, p) in self.p.iter().enumerate() {
            let rest = T::one() - prefix.clone();
            if rest.is_negligible() {
                q.push(T::zero());
            } else {
                let v = T::from_usize_lossless(idx + 1) * p.clone() / rest;
                q.push(if v > T::one() { T::one() } else { v });
            }
            prefix = prefix + p.clone();
        }
        AcceptanceSchedule::new(q)
    }
}

/// `q_i = 1 / (H_{N-1} + 1 - H_{i-1})`: succeeds with probability
/// exactly `1 / (H_{N-1} + 1)` for every `n <= N`.
pub fn harmonic_policy<T: Scalar>(horizon: usize) -> Result<AcceptanceSchedule<T>, ClassicalError> {
    if horizon == 0 {
        return Err(ClassicalError::EmptyHorizon);
    }
    let top = harmonic::<T>(horizon - 1) + T::one();
    let mut h = T::zero();
    let mut q = Vec::with_capacity(horizon);
    for i in 1..=horizon {
        let v = T::one() / (top.clone() - h.clone());
        // rounding can push the last entry a hair above one
        q.push(if v > T::one() { T::one() } else { v });
        h = h + T::one() / T::from_usize_lossless(i);
    }
    AcceptanceSchedule::new(q)
}

/// `p_i = 1 / (i (H_{N-1} + 1))`.
pub fn harmonic_profile<T: Scalar>(horizon: usize) -> Result<PolicyProfile<T>, ClassicalError> {
    if horizon == 0 {
        return Err(ClassicalError::EmptyHorizon);
    }
    let top = harmonic::<T>(horizon - 1) + T::one();
    Ok(PolicyProfile::new((1..=horizon).map(|i| T::one() / (T::from_usize_lossless(i) * top.clone())).collect()))
}

/// Skip `floor(n / e)` candidates, then take the first record.
pub fn one_over_e_policy<T: Scalar>(n: usize) -> Result<AcceptanceSchedule<T>, ClassicalError> {
    if n == 0 {
        return Err(ClassicalError::EmptyHorizon);
    }
    let skip = one_over_e_cutoff(n);
    AcceptanceSchedule::new((1..=n).map(|i| if i <= skip { T::zero() } else { T::one() }).collect())
}

pub fn one_over_e_cutoff(n: usize) -> usize {
    (n as f64 / std::f64::consts::E).floor() as usize
}

/// Success probability on `n` candidates via independence of the record
/// indicators.
pub fn evaluate_policy_exact<T: Scalar>(s: &AcceptanceSchedule<T>, n: usize) -> Result<T, ClassicalError> {
    if n == 0 {
        return Err(ClassicalError::EmptyHorizon);
    }
    if n > s.len() {
        return Err(ClassicalError::HorizonTooShort { n, len: s.len() });
    }
    Ok(s.profile().success_at(n))
}

/// Success probability on `n` candidates by walking every relative-rank
/// order and the policy's accept/reject branches.
pub fn evaluate_policy_enumeration<T: Scalar>(s: &AcceptanceSchedule<T>, n: usize) -> Result<T, ClassicalError> {
    if n == 0 {
        return Err(ClassicalError::EmptyHorizon);
    }
    if n > MAX_ENUMERATION {
        return Err(ClassicalError::EnumerationTooLarge(n));
    }
    if n > s.len() {
        return Err(ClassicalError::HorizonTooShort { n, len: s.len() });
    }
    // Orders that share the record pattern branch identically, so count
    // the orders per pattern and branch once per pattern.
    let mut pattern_counts = std::collections::BTreeMap::<Vec<bool>, u64>::new();
    let mut orders = 0u64;
    for_each_permutation(n, |perm| {
        let mut best = None;
        let records: Vec<bool> = perm
            .iter()
            .map(|&v| {
                let rec = best.is_none_or(|b| v > b);
                if rec {
                    best = Some(v);
                }
                rec
            })
            .collect();
        *pattern_counts.entry(records).or_default() += 1;
        orders += 1;
    });
    let mut total = T::zero();
    for (records, count) in pattern_counts {
        let last_record = records.iter().rposition(|&r| r).expect("first candidate is a record");
        total = total + T::from_u64(count).expect("fits") * branch(s, &records, 0, last_record);
    }
    Ok(total / T::from_u64(orders).expect("fits"))
}

/// Probability of ending with the overall best (the last record) when the
/// walk is at position `pos` with nothing taken yet.
fn branch<T: Scalar>(s: &AcceptanceSchedule<T>, records: &[bool], pos: usize, best: usize) -> T {
    if pos == records.len() {
        return T::zero();
    }
    if !records[pos] {
        return branch(s, records, pos + 1, best);
    }
    let q = s.q(pos + 1).clone();
    let accept = if pos == best { T::one() } else { T::zero() };
    let reject = branch(s, records, pos + 1, best);
    q.clone() * accept + (T::one() - q) * reject
}

/// Monte Carlo success count over `trials` uniformly random orders.
pub fn simulate_policy<T: Scalar>(
    s: &AcceptanceSchedule<T>,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<u64, ClassicalError> {
    if n == 0 {
        return Err(ClassicalError::EmptyHorizon);
    }
    if n > s.len() {
        return Err(ClassicalError::HorizonTooShort { n, len: s.len() });
    }
    let q: Vec<f64> = s.probabilities().iter().map(Scalar::as_f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<usize> = (0..n).collect();
    let mut wins = 0;
    for _ in 0..trials {
        values.shuffle(&mut rng);
        let mut best = None;
        for (i, &v) in values.iter().enumerate() {
            if best.is_none_or(|b| v > b) {
                best = Some(v);
                if rng.gen::<f64>() < q[i] {
                    wins += u64::from(v == n - 1);
                    break;
                }
            }
        }
    }
    Ok(wins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use crate::Rational;
    use proptest::prelude::*;

    fn exact(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(a, b)| rational(a, b)).collect()
    }

    #[test]
    fn harmonic_examples() {
        let s = harmonic_policy::<Rational>(3).unwrap();
        assert_eq!(s.probabilities(), exact(&[(2, 5), (2, 3), (1, 1)]).as_slice());
        let one = harmonic_policy::<Rational>(1).unwrap();
        assert_eq!(one.probabilities(), exact(&[(1, 1)]).as_slice());
        assert_eq!(s.profile().probabilities(), exact(&[(2, 5), (1, 5), (2, 15)]).as_slice());
        assert_eq!(harmonic_profile::<Rational>(3).unwrap(), s.profile());
        assert_eq!(harmonic_policy::<Rational>(0).unwrap_err(), ClassicalError::EmptyHorizon);
    }

    #[test]
    fn one_over_e_examples() {
        let s = one_over_e_policy::<Rational>(3).unwrap();
        assert_eq!(s.probabilities(), exact(&[(0, 1), (1, 1), (1, 1)]).as_slice());
        assert_eq!(one_over_e_policy::<Rational>(1).unwrap().probabilities(), exact(&[(1, 1)]).as_slice());
        assert_eq!(evaluate_policy_enumeration(&s, 3).unwrap(), rational(1, 2));
        assert_eq!(evaluate_policy_exact(&s, 3).unwrap(), rational(1, 2));
    }

    #[test]
    fn exact_evaluation_examples() {
        let s = harmonic_policy::<Rational>(3).unwrap();
        for n in 1..=3 {
            assert_eq!(evaluate_policy_exact(&s, n).unwrap(), rational(2, 5));
        }
        let zeros = AcceptanceSchedule::new(vec![Rational::from_integer(0.into()); 4]).unwrap();
        assert_eq!(evaluate_policy_exact(&zeros, 4).unwrap(), rational(0, 1));
        assert_eq!(evaluate_policy_exact(&s, 4).unwrap_err(), ClassicalError::HorizonTooShort { n: 4, len: 3 });
    }

    #[test]
    fn enumeration_examples() {
        let s = harmonic_policy::<Rational>(4).unwrap();
        assert_eq!(evaluate_policy_enumeration(&s, 3).unwrap(), evaluate_policy_exact(&s, 3).unwrap());
        let q1 = AcceptanceSchedule::new(exact(&[(3, 7)])).unwrap();
        assert_eq!(evaluate_policy_enumeration(&q1, 1).unwrap(), rational(3, 7));
        let always = AcceptanceSchedule::new(exact(&[(1, 1); 6])).unwrap();
        for n in 1..=6 {
            assert_eq!(evaluate_policy_enumeration(&always, n).unwrap(), rational(1, n as i64));
        }
        let long = AcceptanceSchedule::new(exact(&[(1, 1); 9])).unwrap();
        assert_eq!(evaluate_policy_enumeration(&long, 9).unwrap_err(), ClassicalError::EnumerationTooLarge(9));
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert_eq!(
            AcceptanceSchedule::new(exact(&[(1, 2), (3, 2)])).unwrap_err(),
            ClassicalError::InvalidProbability(2)
        );
        assert!(AcceptanceSchedule::new(vec![-0.1]).is_err());
    }

    #[test]
    fn harmonic_profile_is_feasible_and_tight_only_at_end() {
        for big_n in 1..=12 {
            let profile = harmonic_profile::<Rational>(big_n).unwrap();
            assert!(profile.is_feasible());
            let mut prefix = Rational::from_integer(0.into());
            for (idx, p) in profile.probabilities().iter().enumerate() {
                let lhs = prefix.clone() + Rational::from_integer((idx as i64 + 1).into()) * p;
                let tight = lhs == Rational::from_integer(1.into());
                assert_eq!(tight, idx + 1 == big_n || big_n == 1, "N={big_n} i={}", idx + 1);
                prefix += p;
            }
        }
    }

    #[test]
    fn harmonic_guarantee_decreases_with_horizon() {
        let values: Vec<Rational> =
            (1..=15).map(|n| evaluate_policy_exact(&harmonic_policy(n).unwrap(), n).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn profile_round_trips_to_schedule() {
        let s = harmonic_policy::<Rational>(6).unwrap();
        assert_eq!(s.profile().to_schedule().unwrap(), s);
        let bad = PolicyProfile::new(exact(&[(1, 2), (1, 2)]));
        assert_eq!(bad.to_schedule().unwrap_err(), ClassicalError::InfeasibleProfile(2));
    }

    #[test]
    fn simulation_tracks_exact_value() {
        let s = one_over_e_policy::<f64>(5).unwrap();
        let exact = evaluate_policy_exact(&s, 5).unwrap();
        let trials = 200_000;
        let wins = simulate_policy(&s, 5, trials, 11).unwrap();
        let est = wins as f64 / trials as f64;
        let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!((est - exact).abs() < 4.0 * sd, "{est} vs {exact}");
    }

    #[test]
    fn float_and_exact_agree() {
        let f = evaluate_policy_exact(&harmonic_policy::<f64>(20).unwrap(), 7).unwrap();
        let q = evaluate_policy_exact(&harmonic_policy::<Rational>(20).unwrap(), 7).unwrap();
        assert!((f - q.as_f64()).abs() < 1e-12);
    }

    fn schedule_strategy() -> impl Strategy<Value = AcceptanceSchedule<Rational>> {
        proptest::collection::vec((0i64..=12, 1i64..=12), 1..=8).prop_map(|v| {
            let q = v.into_iter().map(|(a, b)| rational(a.min(b), b)).collect();
            AcceptanceSchedule::new(q).unwrap()
        })
    }

    proptest! {
        #[test]
        fn induced_profile_sums_to_at_most_one(s in schedule_strategy()) {
            let p = s.profile();
            prop_assert!(p.total() <= Rational::from_integer(1.into()));
            prop_assert!(p.is_feasible());
        }

        #[test]
        fn exact_matches_enumeration(s in schedule_strategy()) {
            let n = s.len();
            prop_assert_eq!(evaluate_policy_exact(&s, n).unwrap(), evaluate_policy_enumeration(&s, n).unwrap());
        }
    }
}
