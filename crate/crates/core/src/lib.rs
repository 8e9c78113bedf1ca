//! Online matroid secretary algorithms with exact oracles.
//!
//! The crate is generic over the numeric type through [`Scalar`]: Monte
//! Carlo experiments run on `f64`, while every statement that has to hold
//! exactly (LP optima, success probabilities, exhaustive expectations) is
//! checked on [`Rational`].

pub mod classical;
pub mod enumerate;
pub mod harness;
pub mod instances;
pub mod lp;
pub mod matroid;
pub mod policies;
pub mod principal;
pub mod scalar;
pub mod weights;

pub use matroid::{ArrivedOracle, ElementId, FamilyKind, Matroid, MatroidError, MatroidOracle, MatroidSpec};
pub use scalar::Scalar;
pub use weights::{greedy_opt, ArrivalOrder, WeightAssignment, WeightError};

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;
/// Weight assignment over `f64`, used by Monte Carlo runs.
pub type Weights64 = WeightAssignment<f64>;
/// Weight assignment over exact rationals, used by exhaustive evaluation.
pub type ExactWeights = WeightAssignment<Rational>;
