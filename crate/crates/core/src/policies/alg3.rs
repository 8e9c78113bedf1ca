use crate::matroid::{ElementId, Matroid};
use crate::scalar::{rational, Scalar};

use super::{can_add, extend_basis, Coins, OnlinePolicy, OracleMode, PolicyError};

/// What a run of [`Alg3`] did.
#[derive(Debug, Clone, PartialEq)]
pub struct Alg3Trace<W> {
    pub e1_branch: bool,
    /// `(r*, w*)` after each arrival.
    pub levels: Vec<(usize, W)>,
    /// Arrival index (1-based) and new `r*` of every doubling.
    pub doublings: Vec<(usize, usize)>,
    /// Arrival index and new `w*` of every threshold reset.
    pub resets: Vec<(usize, W)>,
}

/// Dynamic thresholding given a bound `L` on the largest weight, with
/// queries restricted to arrived elements.
///
/// With probability 1/2 it takes the first non-loop element heavier than
/// `L` and stops. Otherwise it starts at `w* = L/2`, `r* = 2`, takes every
/// element above `w*` that keeps the selection independent, and whenever
/// the rank of the elements seen reaches `r*` it lowers `w*` to
/// `L/(2r*)` with probability `1/log2(2r*)` and doubles `r*`.
#[derive(Debug, Clone)]
pub struct Alg3<W> {
    bound: W,
    w_star: W,
    r_star: usize,
    seen: usize,
    seen_basis: Vec<ElementId>,
    accepted: Vec<ElementId>,
    done: bool,
    trace: Alg3Trace<W>,
}

impl<W: Scalar> Alg3<W> {
    pub fn new(bound: W) -> Result<Self, PolicyError> {
        if bound.partial_cmp(&W::zero()) != Some(std::cmp::Ordering::Greater) {
            return Err(PolicyError::InvalidBound);
        }
        Ok(Self::with_bound(bound))
    }

    /// Allows `L = 0`, which arises when every skipped weight is zero.
    pub(crate) fn with_bound(bound: W) -> Self {
        let w_star = bound.clone() / W::from_usize_lossless(2);
        Self {
            bound,
            w_star,
            r_star: 2,
            seen: 0,
            seen_basis: Vec::new(),
            accepted: Vec::new(),
            done: false,
            trace: Alg3Trace { e1_branch: false, levels: Vec::new(), doublings: Vec::new(), resets: Vec::new() },
        }
    }

    pub fn trace(&self) -> &Alg3Trace<W> {
        &self.trace
    }

    pub fn threshold(&self) -> &W {
        &self.w_star
    }

    pub fn r_star(&self) -> usize {
        self.r_star
    }

    pub fn bound(&self) -> &W {
        &self.bound
    }
}

impl<W: Scalar> OnlinePolicy<W> for Alg3<W> {
    fn name(&self) -> &'static str {
        "alg3"
    }

    fn mode(&self) -> OracleMode {
        OracleMode::Unknown
    }

    fn start(&mut self, coins: &mut dyn Coins) -> Result<(), PolicyError> {
        self.trace.e1_branch = coins.coin(1, 2);
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
        let take = if self.trace.e1_branch {
            let take = !self.done && *w > self.bound && oracle.rank_of(&[e])? == 1;
            self.done |= take;
            take
        } else {
            let take = *w > self.w_star && can_add(oracle, &self.accepted, e)?;
            extend_basis(oracle, &mut self.seen_basis, e)?;
            if self.seen_basis.len() >= self.r_star {
                // log2(2 r*) for r* a power of two.
                let levels = self.r_star.trailing_zeros() as i64 + 1;
                if coins.bernoulli(&rational(1, levels)) {
                    self.w_star = self.bound.clone() / W::from_usize_lossless(2 * self.r_star);
                    self.trace.resets.push((self.seen, self.w_star.clone()));
                }
                self.r_star *= 2;
                self.trace.doublings.push((self.seen, self.r_star));
            }
            take
        };
        if take {
            self.accepted.push(e);
        }
        self.trace.levels.push((self.r_star, self.w_star.clone()));
        Ok(take)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{partition_by_sizes, rank_one_with_loop_tail};
    use crate::matroid::MatroidOracle;
    use crate::policies::{run_policy, ExhaustiveCoins, RngCoins};
    use crate::weights::{greedy_opt, ArrivalOrder, WeightAssignment};
    use crate::Rational;

    fn desc(n: usize) -> Vec<Rational> {
        (0..n).map(|i| rational((n - i) as i64, 1)).collect()
    }

    #[test]
    fn rejects_nonpositive_bound() {
        assert_eq!(Alg3::new(0.0).unwrap_err(), PolicyError::InvalidBound);
        assert_eq!(Alg3::new(-1.0).unwrap_err(), PolicyError::InvalidBound);
    }

    #[test]
    fn e1_branch_takes_first_heavy_non_loop() {
        let m = rank_one_with_loop_tail(2, 2);
        // Loop 2 carries the heaviest weight and arrives first.
        let w = WeightAssignment::new(vec![9.0, 5.0, 2.0, 1.0], vec![2, 1, 0, 3]).unwrap();
        let order = ArrivalOrder::new(vec![2, 1, 0, 3]).unwrap();
        for seed in 0..40 {
            let mut alg = Alg3::new(3.0).unwrap();
            let out = run_policy(&mut alg, &m, &w, &order, &mut RngCoins::new(seed)).unwrap();
            if alg.trace().e1_branch {
                assert_eq!(out.accepted, vec![1]);
            }
        }
    }

    #[test]
    fn final_level_is_smallest_power_above_rank() {
        for rank in 1..=20 {
            let m = MatroidOracle::uniform(rank + 3, rank).unwrap();
            let n = m.ground_size();
            let w = WeightAssignment::identity((0..n).map(|i| (n - i) as f64).collect()).unwrap();
            for seed in 0..20 {
                let mut alg = Alg3::new(n as f64 + 0.5).unwrap();
                run_policy(&mut alg, &m, &w, &ArrivalOrder::identity(n), &mut RngCoins::new(seed)).unwrap();
                if alg.trace().e1_branch {
                    continue;
                }
                let r = alg.r_star();
                assert!(r.is_power_of_two() && r > rank && r / 2 <= rank.max(1), "rank {rank} r* {r}");
                assert!(r <= 2 * rank.max(1));
                let ws: Vec<f64> = alg.trace().levels.iter().map(|(_, w)| *w).collect();
                assert!(ws.windows(2).all(|p| p[0] >= p[1]));
            }
        }
    }

    #[test]
    fn threshold_levels_equally_likely() {
        // Exact distribution of the final threshold given not-E1.
        let m = MatroidOracle::uniform(9, 8).unwrap();
        let w = WeightAssignment::identity(desc(9)).unwrap();
        let bound = rational(10, 1);
        let mut mass = [rational(0, 1), rational(0, 1), rational(0, 1), rational(0, 1)];
        for (i, slot) in mass.iter_mut().enumerate() {
            let target = bound.clone() / rational(1 << (i + 1), 1);
            *slot = ExhaustiveCoins::expectation::<Rational>(|c| {
                let mut alg = Alg3::new(bound.clone()).unwrap();
                run_policy(&mut alg, &m, &w, &ArrivalOrder::identity(9), c)?;
                let hit = !alg.trace().e1_branch && *alg.threshold() == target;
                Ok(rational(i64::from(hit), 1))
            })
            .unwrap();
        }
        // rank 8 drives r* to 16, so four levels each with mass 1/2 * 1/4.
        for v in mass {
            assert_eq!(v, rational(1, 8));
        }
    }

    #[test]
    fn exact_guarantee_with_valid_bound() {
        let m = partition_by_sizes(&[3, 3, 2], &[2, 1, 1]).unwrap();
        let n = m.ground_size();
        let w = WeightAssignment::new(desc(n), vec![0, 3, 5, 1, 6, 2, 4, 7]).unwrap();
        let opt = w.total(&greedy_opt(&m, &w).unwrap());
        // w(e*_2) = 7 < L < 8 = w(e*_1).
        let bound = rational(15, 2);
        for order in [ArrivalOrder::identity(n), ArrivalOrder::new((0..n).rev().collect()).unwrap()] {
            let value = ExhaustiveCoins::expectation::<Rational>(|c| {
                Ok(run_policy(&mut Alg3::new(bound.clone()).unwrap(), &m, &w, &order, c)?.weight)
            })
            .unwrap();
            let log_r = rational(2, 1);
            assert!(value >= opt.clone() / (rational(16, 1) * log_r));
            assert!(value >= rational(8, 2));
        }
    }
}
