use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{rational, Scalar};
use crate::Rational;

use super::PolicyError;

/// Source of a policy's internal randomness.
pub trait Coins {
    /// `true` with probability `p`.
    fn bernoulli(&mut self, p: &Rational) -> bool;

    /// Uniform integer in `0..k`.
    fn uniform(&mut self, k: usize) -> usize;

    /// Uniform real in `[0, 1)`.
    fn unit(&mut self) -> Result<f64, PolicyError>;

    fn coin(&mut self, num: i64, den: i64) -> bool {
        self.bernoulli(&rational(num, den))
    }
}

/// Seeded pseudo-random coins. Rational probabilities are compared in
/// double precision.
#[derive(Debug, Clone)]
pub struct RngCoins {
    rng: ChaCha8Rng,
}

impl RngCoins {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Coins for RngCoins {
    fn bernoulli(&mut self, p: &Rational) -> bool {
        self.rng.gen::<f64>() < p.as_f64()
    }

    fn uniform(&mut self, k: usize) -> usize {
        self.rng.gen_range(0..k)
    }

    fn unit(&mut self) -> Result<f64, PolicyError> {
        Ok(self.rng.gen())
    }
}

#[derive(Debug, Clone)]
struct Draw {
    choice: usize,
    probs: Vec<Rational>,
    /// Outcome values for each branch.
    values: Vec<usize>,
}

/// Walks every branch of a policy's discrete randomness in depth-first
/// order. Each pass replays the recorded prefix and opens new draws at
/// their first positive-probability outcome.
#[derive(Debug, Clone, Default)]
pub struct ExhaustiveCoins {
    path: Vec<Draw>,
    cursor: usize,
}

impl ExhaustiveCoins {
    fn draw(&mut self, outcomes: Vec<(usize, Rational)>) -> usize {
        if self.cursor < self.path.len() {
            let d = &self.path[self.cursor];
            self.cursor += 1;
            return d.values[d.choice];
        }
        let (values, probs): (Vec<usize>, Vec<Rational>) =
            outcomes.into_iter().filter(|(_, p)| p > &Rational::from_integer(0.into())).unzip();
        let v = values[0];
        self.path.push(Draw { choice: 0, probs, values });
        self.cursor += 1;
        v
    }

    fn path_probability(&self) -> Rational {
        self.path.iter().fold(rational(1, 1), |acc, d| acc * &d.probs[d.choice])
    }

    /// Moves to the next unexplored branch; `false` once all are done.
    fn advance(&mut self) -> bool {
        self.cursor = 0;
        while let Some(last) = self.path.last_mut() {
            if last.choice + 1 < last.values.len() {
                last.choice += 1;
                return true;
            }
            self.path.pop();
        }
        false
    }

    /// Exact expectation of `run` over all coin outcomes.
    pub fn expectation<T: Scalar>(
        mut run: impl FnMut(&mut dyn Coins) -> Result<T, PolicyError>,
    ) -> Result<T, PolicyError> {
        let mut out = Self::expectations(1, |c| Ok(vec![run(c)?]))?;
        Ok(out.pop().expect("one slot"))
    }

    /// Expectations of `k` quantities measured on the same runs.
    pub fn expectations<T: Scalar>(
        k: usize,
        mut run: impl FnMut(&mut dyn Coins) -> Result<Vec<T>, PolicyError>,
    ) -> Result<Vec<T>, PolicyError> {
        let mut coins = ExhaustiveCoins::default();
        let mut total = vec![T::zero(); k];
        loop {
            let values = run(&mut coins)?;
            if coins.cursor != coins.path.len() {
                return Err(PolicyError::InvalidInput("run consumed fewer draws than recorded".into()));
            }
            if values.len() != k {
                return Err(PolicyError::InvalidInput(format!("run returned {} values, expected {k}", values.len())));
            }
            let p = T::from_rational(&coins.path_probability());
            for (t, v) in total.iter_mut().zip(values) {
                *t = t.clone() + p.clone() * v;
            }
            if !coins.advance() {
                return Ok(total);
            }
        }
    }
}

impl Coins for ExhaustiveCoins {
    fn bernoulli(&mut self, p: &Rational) -> bool {
        let one = rational(1, 1);
        self.draw(vec![(1, p.clone()), (0, one - p)]) == 1
    }

    fn uniform(&mut self, k: usize) -> usize {
        let p = rational(1, k as i64);
        self.draw((0..k).map(|i| (i, p.clone())).collect())
    }

    fn unit(&mut self) -> Result<f64, PolicyError> {
        Err(PolicyError::ContinuousDraw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_nested_draws() {
        // Flip a fair coin; on heads roll a die in 0..3. Expected value of
        // the roll (0 on tails) is 1/2 * 1 = 1/2.
        let e = ExhaustiveCoins::expectation::<Rational>(|c| {
            Ok(if c.coin(1, 2) { rational(c.uniform(3) as i64, 1) } else { rational(0, 1) })
        })
        .unwrap();
        assert_eq!(e, rational(1, 2));
        let mut paths = 0;
        let total = ExhaustiveCoins::expectation::<Rational>(|c| {
            paths += 1;
            c.coin(1, 3);
            c.uniform(2);
            Ok(rational(1, 1))
        })
        .unwrap();
        assert_eq!((paths, total), (4, rational(1, 1)));
    }

    #[test]
    fn zero_probability_branches_are_skipped() {
        let mut paths = 0;
        ExhaustiveCoins::expectation::<Rational>(|c| {
            paths += 1;
            assert!(c.coin(1, 1));
            Ok(rational(0, 1))
        })
        .unwrap();
        assert_eq!(paths, 1);
    }

    #[test]
    fn continuous_draws_are_refused() {
        let err = ExhaustiveCoins::expectation::<f64>(|c| c.unit()).unwrap_err();
        assert_eq!(err, PolicyError::ContinuousDraw);
    }

    #[test]
    fn seeded_coins_reproduce() {
        let mut a = RngCoins::new(5);
        let mut b = RngCoins::new(5);
        let xs: Vec<usize> = (0..20).map(|_| a.uniform(10)).collect();
        let ys: Vec<usize> = (0..20).map(|_| b.uniform(10)).collect();
        assert_eq!(xs, ys);
    }
}
