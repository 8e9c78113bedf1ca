use std::sync::Arc;

use crate::matroid::{ElementId, Matroid};
use crate::scalar::Scalar;

use super::{Coins, OnlinePolicy, OracleMode, PolicyError};

/// Largest guessed exponent: `2^62` already exceeds any stream this crate
/// can hold. The mass beyond it is treated as "select nothing".
pub const MAX_GUESS_EXPONENT: u32 = 62;

/// Builds the base policy for a guessed size `n'`.
pub type PolicyFactory<W> = Arc<dyn Fn(usize) -> Result<Box<dyn OnlinePolicy<W>>, PolicyError> + Send + Sync>;

/// `p_i = (eps / (1 + eps)) / (1 + i)^(1 + eps)`.
pub fn guess_probability(eps: f64, i: u32) -> f64 {
    eps / (1.0 + eps) / (1.0 + f64::from(i)).powf(1.0 + eps)
}

/// Upper bound on `sum_{i >= 0} p_i`: the exact partial sum up to
/// [`MAX_GUESS_EXPONENT`] plus an integral bound on the tail.
pub fn guess_mass_upper_bound(eps: f64) -> f64 {
    let k = f64::from(MAX_GUESS_EXPONENT);
    let partial: f64 = (0..=MAX_GUESS_EXPONENT).map(|i| guess_probability(eps, i)).sum();
    partial + (1.0 + k).powf(-eps) / (1.0 + eps)
}

/// Size-free wrapper: guesses `n' = 2^i` with probability `p_i`, runs the
/// base policy built for `n'` on the first `n'` arrivals, and ignores the
/// rest. With the leftover probability nothing is selected.
pub struct UnknownN<W> {
    eps: f64,
    factory: PolicyFactory<W>,
    guess: Option<u32>,
    base: Option<Box<dyn OnlinePolicy<W>>>,
    seen: usize,
}

impl<W: Scalar> UnknownN<W> {
    pub fn new(eps: f64, factory: PolicyFactory<W>) -> Result<Self, PolicyError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(PolicyError::InvalidEpsilon);
        }
        Ok(Self { eps, factory, guess: None, base: None, seen: 0 })
    }

    /// The exponent drawn at start, `None` if the draw selected nothing.
    pub fn guess(&self) -> Option<u32> {
        self.guess
    }

    fn sample(&self, u: f64) -> Option<u32> {
        let mut acc = 0.0;
        for i in 0..=MAX_GUESS_EXPONENT {
            acc += guess_probability(self.eps, i);
            if u < acc {
                return Some(i);
            }
        }
        None
    }
}

impl<W: Scalar> OnlinePolicy<W> for UnknownN<W> {
    fn name(&self) -> &'static str {
        "unknown-n-reduction"
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Unknown
    }

    fn start(&mut self, coins: &mut dyn Coins) -> Result<(), PolicyError> {
        self.guess = self.sample(coins.unit()?);
        if let Some(i) = self.guess {
            let mut base = (self.factory)(1usize << i)?;
            if base.mode() == OracleMode::Known {
                return Err(PolicyError::BaseNeedsFullOracle);
            }
            base.start(coins)?;
            self.base = Some(base);
        }
        Ok(())
    }

    fn on_arrival(
        &mut self,
        oracle: &dyn Matroid,
        coins: &mut dyn Coins,
        e: ElementId,
        w: &W,
    ) -> Result<bool, PolicyError> {
        self.seen += 1;
        match (&mut self.base, self.guess) {
            (Some(base), Some(i)) if self.seen <= 1usize << i => base.on_arrival(oracle, coins, e, w),
            _ => Ok(false),
        }
    }
}
