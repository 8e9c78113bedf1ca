use crate::classical::AcceptanceSchedule;
use crate::matroid::{ElementId, Matroid};
use crate::scalar::Scalar;
use crate::Rational;

use super::{Coins, OnlinePolicy, OracleMode, PolicyError};

/// Horizons up to this size get an exact harmonic schedule; longer ones
/// are evaluated lazily in floating point.
const EXACT_HARMONIC_LIMIT: usize = 256;

#[derive(Debug, Clone)]
enum Source {
    Exact(Vec<Rational>),
    /// `H_{N-1} + 1`, with `q_i = 1 / (top - H_{i-1})`.
    Harmonic {
        horizon: usize,
        top: f64,
    },
}

/// A classical record policy applied to the non-loop arrivals of a matroid
/// stream: the `i`-th non-loop element is taken with probability `q_i` if
/// it is heavier than every earlier non-loop element and nothing has been
/// taken yet.
#[derive(Debug, Clone)]
pub struct SchedulePolicy<W> {
    source: Source,
    position: usize,
    h_prev: f64,
    best: Option<W>,
    done: bool,
}

impl<W: Scalar> SchedulePolicy<W> {
    pub fn new(schedule: AcceptanceSchedule<Rational>) -> Self {
        Self::from_source(Source::Exact(schedule.probabilities().to_vec()))
    }

    /// The harmonic schedule for horizon `N`, valid for huge `N`.
    pub fn harmonic(horizon: usize) -> Result<Self, PolicyError> {
        if horizon == 0 {
            return Err(PolicyError::EmptyInput);
        }
        if horizon <= EXACT_HARMONIC_LIMIT {
            let s = crate::classical::harmonic_policy(horizon).expect("horizon is positive");
            return Ok(Self::new(s));
        }
        let k = (horizon - 1) as f64;
        // Asymptotic expansion of H_k; the error is below 1e-15 here.
        let h = k.ln() + 0.577_215_664_901_532_9 + 1.0 / (2.0 * k) - 1.0 / (12.0 * k * k);
        Ok(Self::from_source(Source::Harmonic { horizon, top: h + 1.0 }))
    }

    fn from_source(source: Source) -> Self {
        Self { source, position: 0, h_prev: 0.0, best: None, done: false }
    }

    fn probability(&self, i: usize) -> Option<Rational> {
        match &self.source {
            Source::Exact(q) => q.get(i - 1).cloned(),
            Source::Harmonic { horizon, top } => {
                (i <= *horizon).then(|| Rational::from_float((1.0 / (top - self.h_prev)).min(1.0)).expect("finite"))
            }
        }
    }
}

impl<W: Scalar> OnlinePolicy<W> for SchedulePolicy<W> {
    fn name(&self) -> &'static str {
        "schedule"
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Unknown
    }

    fn on_arrival(
        &mut self,
        oracle: &dyn Matroid,
        coins: &mut dyn Coins,
        e: ElementId,
        w: &W,
    ) -> Result<bool, PolicyError> {
        if self.done || oracle.rank_of(&[e])? == 0 {
            return Ok(false);
        }
        self.position += 1;
        let record = self.best.as_ref().is_none_or(|b| w > b);
        let q = self.probability(self.position);
        self.h_prev += 1.0 / self.position as f64;
        if !record {
            return Ok(false);
        }
        self.best = Some(w.clone());
        let take = match q {
            Some(q) => coins.bernoulli(&q),
            None => false,
        };
        self.done = take;
        Ok(take)
    }
}
