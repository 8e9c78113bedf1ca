use crate::matroid::{ElementId, Matroid};
use crate::scalar::Scalar;

use super::{can_add, ceil_log2, extend_basis, Coins, OnlinePolicy, OracleMode, PolicyError};

/// Sample-half random-threshold baseline for random order, known `n`.
///
/// Observes the first `ceil(n/2)` elements, takes their largest weight
/// `w_max` and their rank `r_seen` (at least 1), draws `j` uniformly from
/// `0..=ceil(log2 r_seen)`, and then greedily takes independent elements
/// heavier than `w_max / 2^j`.
#[derive(Debug, Clone)]
pub struct ThresholdPrice<W> {
    n: usize,
    seen: usize,
    w_max: Option<W>,
    basis: Vec<ElementId>,
    threshold: Option<W>,
    accepted: Vec<ElementId>,
}

impl<W: Scalar> ThresholdPrice<W> {
    pub fn new(n: usize) -> Result<Self, PolicyError> {
        if n == 0 {
            return Err(PolicyError::EmptyInput);
        }
        Ok(Self { n, seen: 0, w_max: None, basis: Vec::new(), threshold: None, accepted: Vec::new() })
    }

    pub fn threshold(&self) -> Option<&W> {
        self.threshold.as_ref()
    }
}

impl<W: Scalar> OnlinePolicy<W> for ThresholdPrice<W> {
    fn name(&self) -> &'static str {
        "threshold-price"
    }

    fn mode(&self) -> OracleMode {
        OracleMode::SizeOnly
    }

    fn on_arrival(
        &mut self,
        oracle: &dyn Matroid,
        coins: &mut dyn Coins,
        e: ElementId,
        w: &W,
    ) -> Result<bool, PolicyError> {
        self.seen += 1;
        let half = self.n.div_ceil(2);
        if self.seen <= half {
            if self.w_max.as_ref().is_none_or(|m| w > m) {
                self.w_max = Some(w.clone());
            }
            extend_basis(oracle, &mut self.basis, e)?;
            if self.seen == half {
                let levels = ceil_log2(self.basis.len().max(1)) + 1;
                let j = coins.uniform(levels as usize) as u32;
                self.threshold = Some(self.w_max.clone().expect("sample is nonempty") / W::pow2(j));
            }
            return Ok(false);
        }
        let take = match &self.threshold {
            Some(t) => w > t && can_add(oracle, &self.accepted, e)?,
            None => false,
        };
        if take {
            self.accepted.push(e);
        }
        Ok(take)
    }
}
