use crate::matroid::{ElementId, Matroid};
use crate::scalar::Scalar;

use super::{floor_log2, Alg3, Alg3Trace, Coins, OnlinePolicy, OracleMode, PolicyError};

/// Block doubling when only `n` is known.
///
/// Draws `b` uniformly from `0..=floor(log2 n)`, skips the first `2^b - 1`
/// non-loop elements while recording their largest weight `L`, and runs
/// [`Alg3`] with bound `L` on the next `2^b` non-loop elements. Loops are
/// recognised on arrival and ignored. For `b = 0` there is nothing to
/// skip, and the first non-loop element is taken.
#[derive(Debug, Clone)]
pub struct Alg4<W> {
    n: usize,
    b: Option<u32>,
    non_loops: usize,
    bound: Option<W>,
    sub: Option<Alg3<W>>,
}

impl<W: Scalar> Alg4<W> {
    pub fn new(n: usize) -> Result<Self, PolicyError> {
        if n == 0 {
            return Err(PolicyError::EmptyInput);
        }
        Ok(Self { n, b: None, non_loops: 0, bound: None, sub: None })
    }

    /// The block index drawn at start.
    pub fn block(&self) -> Option<u32> {
        self.b
    }

    pub fn bound(&self) -> Option<&W> {
        self.bound.as_ref()
    }

    pub fn sub_trace(&self) -> Option<&Alg3Trace<W>> {
        self.sub.as_ref().map(Alg3::trace)
    }
}

impl<W: Scalar> OnlinePolicy<W> for Alg4<W> {
    fn name(&self) -> &'static str {
        "alg4"
    }

    fn mode(&self) -> OracleMode {
        OracleMode::SizeOnly
    }

    fn start(&mut self, coins: &mut dyn Coins) -> Result<(), PolicyError> {
        self.b = Some(coins.uniform(floor_log2(self.n) as usize + 1) as u32);
        Ok(())
    }

    fn on_arrival(
        &mut self,
        oracle: &dyn Matroid,
        coins: &mut dyn Coins,
        e: ElementId,
        w: &W,
    ) -> Result<bool, PolicyError> {
        let b = self.b.ok_or_else(|| PolicyError::InvalidInput("policy not started".into()))?;
        if oracle.rank_of(&[e])? == 0 {
            return Ok(false);
        }
        let idx = self.non_loops;
        self.non_loops += 1;
        let skip = (1usize << b) - 1;
        if idx < skip {
            if self.bound.as_ref().is_none_or(|l| w > l) {
                self.bound = Some(w.clone());
            }
            return Ok(false);
        }
        if idx >= skip + (1usize << b) {
            return Ok(false);
        }
        if b == 0 {
            return Ok(true);
        }
        if self.sub.is_none() {
            let mut sub = Alg3::with_bound(self.bound.clone().expect("b > 0 skips at least one element"));
            sub.start(coins)?;
            self.sub = Some(sub);
        }
        self.sub.as_mut().expect("created above").on_arrival(oracle, coins, e, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::for_each_permutation;
    use crate::instances::rank_one_with_loop_tail;
    use crate::matroid::MatroidOracle;
    use crate::policies::{run_policy, ExhaustiveCoins, RngCoins};
    use crate::scalar::rational;
    use crate::weights::{greedy_opt, ArrivalOrder, WeightAssignment};
    use crate::Rational;

    #[test]
    fn single_element_always_taken() {
        let m = MatroidOracle::uniform(1, 1).unwrap();
        let w = WeightAssignment::identity(vec![rational(3, 1)]).unwrap();
        let p = ExhaustiveCoins::expectation::<Rational>(|c| {
            let out = run_policy(&mut Alg4::new(1).unwrap(), &m, &w, &ArrivalOrder::identity(1), c)?;
            Ok(rational(out.accepted.len() as i64, 1))
        })
        .unwrap();
        assert!(p >= rational(1, 2));
        assert_eq!(p, rational(1, 1));
    }

    #[test]
    fn lone_non_loop_among_loops() {
        // Element 0 is the only non-loop; it arrives last.
        let m = MatroidOracle::partition(vec![vec![0], vec![1, 2, 3, 4, 5, 6, 7]], vec![1, 0]).unwrap();
        let w = WeightAssignment::identity((1..=8).rev().map(|v| rational(v, 1)).collect()).unwrap();
        let order = ArrivalOrder::new(vec![1, 2, 3, 4, 5, 6, 7, 0]).unwrap();
        let p = ExhaustiveCoins::expectation::<Rational>(|c| {
            let out = run_policy(&mut Alg4::new(8).unwrap(), &m, &w, &order, c)?;
            Ok(rational(out.accepted.len() as i64, 1))
        })
        .unwrap();
        assert_eq!(p, rational(1, 4));
    }

    #[test]
    fn block_draw_covers_range() {
        let m = MatroidOracle::uniform(12, 3).unwrap();
        let w = WeightAssignment::identity((1..=12).rev().map(f64::from).collect()).unwrap();
        let mut seen = [false; 4];
        for seed in 0..200 {
            let mut alg = Alg4::new(12).unwrap();
            run_policy(&mut alg, &m, &w, &ArrivalOrder::identity(12), &mut RngCoins::new(seed)).unwrap();
            seen[alg.block().unwrap() as usize] = true;
            if let (Some(b), Some(l)) = (alg.block(), alg.bound()) {
                // Identity order: the skipped prefix holds the heaviest weights.
                assert_eq!(*l, 12.0);
                assert!(b > 0);
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn exact_rank_one_guarantee() {
        let m = rank_one_with_loop_tail(8, 0);
        let ws: Vec<Rational> = (1..=8).rev().map(|v| rational(v, 1)).collect();
        let order = ArrivalOrder::identity(8);
        let mut alg_total = rational(0, 1);
        let mut opt_total = rational(0, 1);
        let mut count = 0;
        for_each_permutation(8, |assign| {
            let w = WeightAssignment::new(ws.clone(), assign.to_vec()).unwrap();
            alg_total += ExhaustiveCoins::expectation::<Rational>(|c| {
                Ok(run_policy(&mut Alg4::new(8).unwrap(), &m, &w, &order, c)?.weight)
            })
            .unwrap();
            opt_total += w.total(&greedy_opt(&m, &w).unwrap());
            count += 1;
        });
        let (alg, opt) = (alg_total / rational(count, 1), opt_total / rational(count, 1));
        // log r is taken as 1 at r = 1; log 2n = 4.
        assert!(alg * rational(2500 * 4, 1) >= opt);
    }
}
