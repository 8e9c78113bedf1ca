//! Online matroid policies.
//!
//! A policy sees elements one at a time and must accept or reject each
//! before the next arrives. What it may ask the matroid depends on its
//! [`OracleMode`]: the full oracle, or only sets of elements that have
//! already arrived. The runner enforces both the query restriction and
//! independence of the accepted set after every event.

mod alg1;
mod alg2;
mod alg3;
mod alg4;
mod claims;
mod coins;
mod schedule;
mod threshold_price;
mod unknown_n;

pub use alg1::Alg1;
pub use alg2::Alg2;
pub use alg3::{Alg3, Alg3Trace};
pub use alg4::Alg4;
pub use claims::{claim_probability_enumerated, claim_probability_exact, compute_claim_sets, TopWeightSets};
pub use coins::{Coins, ExhaustiveCoins, RngCoins};
pub use schedule::SchedulePolicy;
pub use threshold_price::ThresholdPrice;
pub use unknown_n::{guess_mass_upper_bound, guess_probability, PolicyFactory, UnknownN, MAX_GUESS_EXPONENT};

use thiserror::Error;

use crate::matroid::{ArrivedOracle, ElementId, Matroid, MatroidError};
use crate::principal::DensityError;
use crate::scalar::Scalar;
use crate::weights::{ArrivalOrder, WeightAssignment, WeightError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("matroid is not loop-free and uniformly dense")]
    NotUniformlyDense,
    #[error("weight bound must be positive")]
    InvalidBound,
    #[error("epsilon must lie in (0, 1]")]
    InvalidEpsilon,
    #[error("the number of elements must be positive")]
    EmptyInput,
    #[error("accepting element {0} made the accepted set dependent")]
    DependentAcceptance(ElementId),
    #[error("continuous random draw cannot be enumerated exactly")]
    ContinuousDraw,
    #[error("base policy needs the full matroid, which this reduction cannot provide")]
    BaseNeedsFullOracle,
    #[error("{0}")]
    InvalidInput(String),
}

/// What a policy may query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Full matroid known in advance.
    Known,
    /// Only `n` known; queries restricted to arrived elements.
    SizeOnly,
    /// Nothing known; queries restricted to arrived elements.
    Unknown,
}

pub trait OnlinePolicy<W: Scalar>: Send {
    fn name(&self) -> &'static str;

    fn mode(&self) -> OracleMode;

    /// Called once before the first arrival.
    fn start(&mut self, _coins: &mut dyn Coins) -> Result<(), PolicyError> {
        Ok(())
    }

    /// Decide on `e`. `oracle` is the full matroid in [`OracleMode::Known`]
    /// and an arrived-only guard otherwise.
    fn on_arrival(
        &mut self,
        oracle: &dyn Matroid,
        coins: &mut dyn Coins,
        e: ElementId,
        weight: &W,
    ) -> Result<bool, PolicyError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome<W> {
    /// Accepted elements in acceptance order.
    pub accepted: Vec<ElementId>,
    pub weight: W,
}

/// Feeds `order` to `policy` and returns what it accepted.
pub fn run_policy<W: Scalar>(
    policy: &mut dyn OnlinePolicy<W>,
    m: &dyn Matroid,
    w: &WeightAssignment<W>,
    order: &ArrivalOrder,
    coins: &mut dyn Coins,
) -> Result<RunOutcome<W>, PolicyError> {
    if w.len() != m.ground_size() {
        return Err(WeightError::SizeMismatch { weights: w.len(), elements: m.ground_size() }.into());
    }
    if order.len() != m.ground_size() {
        return Err(PolicyError::InvalidInput(format!(
            "order has {} elements, ground set has {}",
            order.len(),
            m.ground_size()
        )));
    }
    policy.start(coins)?;
    let mut guard = ArrivedOracle::new(m);
    let mut accepted = Vec::new();
    for &e in order.as_slice() {
        guard.mark_arrived(e);
        let oracle: &dyn Matroid = match policy.mode() {
            OracleMode::Known => m,
            OracleMode::SizeOnly | OracleMode::Unknown => &guard,
        };
        if policy.on_arrival(oracle, coins, e, w.weight_of(e))? {
            accepted.push(e);
            if !m.is_independent(&accepted)? {
                return Err(PolicyError::DependentAcceptance(e));
            }
        }
    }
    let weight = w.total(&accepted);
    Ok(RunOutcome { accepted, weight })
}

/// `log2` of a power of two, or `floor(log2 n)` in general.
pub(crate) fn floor_log2(n: usize) -> u32 {
    usize::BITS - 1 - n.leading_zeros()
}

pub(crate) fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        floor_log2(n - 1) + 1
    }
}

/// Grows `basis` by `e` if `e` is independent of it; returns whether it did.
pub(crate) fn extend_basis(
    oracle: &dyn Matroid,
    basis: &mut Vec<ElementId>,
    e: ElementId,
) -> Result<bool, MatroidError> {
    basis.push(e);
    if oracle.is_independent(basis)? {
        Ok(true)
    } else {
        basis.pop();
        Ok(false)
    }
}

/// True when `accepted + e` is independent.
pub(crate) fn can_add(oracle: &dyn Matroid, accepted: &[ElementId], e: ElementId) -> Result<bool, MatroidError> {
    let mut set = accepted.to_vec();
    set.push(e);
    oracle.is_independent(&set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::MatroidOracle;

    struct Greedy;

    impl OnlinePolicy<f64> for Greedy {
        fn name(&self) -> &'static str {
            "greedy"
        }

        fn mode(&self) -> OracleMode {
            OracleMode::Unknown
        }

        fn on_arrival(
            &mut self,
            _: &dyn Matroid,
            _: &mut dyn Coins,
            _: ElementId,
            _: &f64,
        ) -> Result<bool, PolicyError> {
            Ok(true)
        }
    }

    struct Peeker;

    impl OnlinePolicy<f64> for Peeker {
        fn name(&self) -> &'static str {
            "peeker"
        }

        fn mode(&self) -> OracleMode {
            OracleMode::Unknown
        }

        fn on_arrival(
            &mut self,
            oracle: &dyn Matroid,
            _: &mut dyn Coins,
            e: ElementId,
            _: &f64,
        ) -> Result<bool, PolicyError> {
            oracle.rank_of(&[e, (e + 1) % oracle.ground_size()])?;
            Ok(false)
        }
    }

    #[test]
    fn runner_rejects_dependent_acceptance() {
        let m = MatroidOracle::uniform(3, 1).unwrap();
        let w = WeightAssignment::identity(vec![3.0, 2.0, 1.0]).unwrap();
        let err = run_policy(&mut Greedy, &m, &w, &ArrivalOrder::identity(3), &mut RngCoins::new(0)).unwrap_err();
        assert_eq!(err, PolicyError::DependentAcceptance(1));
    }

    #[test]
    fn runner_guards_unseen_elements() {
        let m = MatroidOracle::uniform(3, 2).unwrap();
        let w = WeightAssignment::identity(vec![3.0, 2.0, 1.0]).unwrap();
        let err = run_policy(&mut Peeker, &m, &w, &ArrivalOrder::identity(3), &mut RngCoins::new(0)).unwrap_err();
        assert_eq!(err, PolicyError::Matroid(MatroidError::UnseenElement(1)));
    }

    #[test]
    fn log_helpers() {
        assert_eq!((floor_log2(1), floor_log2(7), floor_log2(8)), (0, 2, 3));
        assert_eq!((ceil_log2(1), ceil_log2(2), ceil_log2(5), ceil_log2(8)), (0, 1, 3, 3));
    }
}
