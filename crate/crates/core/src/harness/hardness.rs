//! The i.i.d. weight distribution `w_j = 2^(gamma j)` with probability
//! `2^-j`, streamed in blocks of size `2, 4, 8, ...`, against which
//! single-choice policies degrade when the stream may stop after any block.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::weights::WeightAssignment;

use super::run::trial_seed;
use super::HarnessError;

/// Target relative error of the default truncation.
const TRUNCATION_TOLERANCE: f64 = 1e-12;
/// Relative gap separating tied draws; far below the `2^gamma` level gap.
const TIE_BREAK: f64 = 1.0 / (1u64 << 40) as f64;

/// `1 / log2(log2 N)`.
pub fn gamma_for_horizon(horizon: f64) -> f64 {
    1.0 / horizon.log2().log2()
}

/// Smallest `j_max` whose dropped tail is below `1e-12` of the mean of the
/// maximum of `m` draws.
pub fn default_truncation(gamma: f64, m: f64) -> u32 {
    // Tail / E[w] <= m 2^((gamma-1) j_max).
    let bits = m.max(1.0).log2() - TRUNCATION_TOLERANCE.log2();
    (bits / (1.0 - gamma)).ceil().max(1.0) as u32
}

fn check_gamma(gamma: f64) -> Result<(), HarnessError> {
    if gamma > 0.0 && gamma < 1.0 / 3.0 {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("gamma = {gamma} must lie in (0, 1/3)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardDistribution {
    pub gamma: f64,
    pub j_max: u32,
}

impl HardDistribution {
    /// `j_max` defaults to [`default_truncation`] for a single draw.
    pub fn new(gamma: f64, j_max: Option<u32>) -> Result<Self, HarnessError> {
        check_gamma(gamma)?;
        let j_max = j_max.unwrap_or_else(|| default_truncation(gamma, 1.0));
        if j_max == 0 {
            return Err(HarnessError::Config("j_max must be positive".into()));
        }
        Ok(Self { gamma, j_max })
    }

    pub fn weight(&self, j: u32) -> f64 {
        (self.gamma * f64::from(j)).exp2()
    }

    /// Probability of level `j` after truncation; the dropped tail goes to
    /// level 1.
    pub fn probability(&self, j: u32) -> f64 {
        match j {
            0 => 0.0,
            1 => 0.5 + (-f64::from(self.j_max)).exp2(),
            j if j <= self.j_max => (-f64::from(j)).exp2(),
            _ => 0.0,
        }
    }

    /// Draws a level: the position of the first set bit in a fair bit
    /// stream, so level `j` has probability exactly `2^-j`.
    pub fn sample_level<R: RngCore + ?Sized>(&self, rng: &mut R) -> u32 {
        let mut zeros = 0u32;
        loop {
            let bits = rng.next_u64();
            if bits != 0 {
                zeros += bits.trailing_zeros();
                break;
            }
            zeros += 64;
            if zeros >= self.j_max {
                break;
            }
        }
        match zeros + 1 {
            j if j > self.j_max => 1,
            j => j,
        }
    }

    /// One i.i.d. draw per element of `order`. Equal draws are ranked by
    /// arrival, earlier heavier, through a relative nudge of `2^-40` per
    /// position.
    pub fn assignment<R: RngCore + ?Sized>(&self, order: &[usize], rng: &mut R) -> WeightAssignment<f64> {
        let n = order.len();
        let mut draws: Vec<(f64, usize)> = order
            .iter()
            .enumerate()
            .map(|(pos, &e)| (self.weight(self.sample_level(rng)) * (1.0 + (n - pos) as f64 * TIE_BREAK), e))
            .collect();
        draws.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut assignment = vec![0; n];
        for (rank, &(_, e)) in draws.iter().enumerate() {
            assignment[e] = rank;
        }
        WeightAssignment::new(draws.into_iter().map(|d| d.0).collect(), assignment).expect("draws are distinct")
    }
}

/// Hard distribution plus the block layout of the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardInstance {
    pub distribution: HardDistribution,
    /// `|B_i| = 2^i` for `i = 1..=levels`.
    pub blocks: Vec<usize>,
    /// Stream length after block `l`: `2^(l+1) - 2`.
    pub stopping_points: Vec<usize>,
}

pub fn stopping_point(level: u32) -> usize {
    (1usize << (level + 1)) - 2
}

/// Largest level whose stopping point fits in `horizon`.
pub fn levels_within(horizon: usize) -> u32 {
    (1..usize::BITS - 1).take_while(|&l| stopping_point(l) <= horizon).last().unwrap_or(0)
}

pub fn hard_instance(gamma: f64, levels: u32, j_max: Option<u32>) -> Result<HardInstance, HarnessError> {
    if levels == 0 || levels >= usize::BITS - 2 {
        return Err(HarnessError::Config(format!("levels = {levels} out of range")));
    }
    Ok(HardInstance {
        distribution: HardDistribution::new(gamma, j_max)?,
        blocks: (1..=levels).map(|i| 1usize << i).collect(),
        stopping_points: (1..=levels).map(stopping_point).collect(),
    })
}

/// A truncated series value and a bound on what was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncated {
    pub value: f64,
    pub tail_bound: f64,
    pub j_max: u32,
}

/// `E[max of m draws] = sum_j w_j (F(j)^m - F(j-1)^m)` with
/// `F(j) = 1 - 2^-j`, summed to `j_max`.
pub fn expected_max_exact(gamma: f64, m: f64, j_max: Option<u32>) -> Result<Truncated, HarnessError> {
    check_gamma(gamma)?;
    let j_max = j_max.unwrap_or_else(|| default_truncation(gamma, m));
    // ln F(j)^m, with F(0) = 0.
    let log_cdf = |j: u32| if j == 0 { f64::NEG_INFINITY } else { m * (-(-f64::from(j)).exp2()).ln_1p() };
    let mut value = 0.0;
    for j in 1..=j_max {
        let (hi, lo) = (log_cdf(j), log_cdf(j - 1));
        // e^hi - e^lo without cancellation.
        let mass = hi.exp() * -(lo - hi).exp_m1();
        value += (gamma * f64::from(j)).exp2() * mass;
    }
    let q = (gamma - 1.0).exp2();
    let tail_bound = m * q.powf(f64::from(j_max + 1)) / (1.0 - q);
    Ok(Truncated { value, tail_bound, j_max })
}

/// Best expected value of a single choice from `n` draws with `n` known,
/// by backward induction over the truncated distribution.
pub fn optimal_stopping_value(gamma: f64, n: usize, j_max: Option<u32>) -> Result<f64, HarnessError> {
    let d = HardDistribution::new(gamma, j_max)?;
    let mut v = 0.0f64;
    for _ in 0..n {
        v = (1..=d.j_max).map(|j| d.probability(j) * d.weight(j).max(v)).sum();
    }
    Ok(v)
}

/// Single-choice rules swept against the hard instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum SingleChoice {
    /// Records taken with the harmonic schedule for horizon `N`.
    Harmonic,
    /// First draw at level `level` or above.
    FixedThreshold { level: u32 },
}

impl SingleChoice {
    pub fn label(&self) -> String {
        match self {
            SingleChoice::Harmonic => "harmonic".into(),
            SingleChoice::FixedThreshold { level } => format!("threshold:{level}"),
        }
    }

    /// Parses `harmonic` or `threshold:J`.
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s.trim().split_once(':') {
            None if s.trim() == "harmonic" => Ok(SingleChoice::Harmonic),
            Some(("threshold", j)) => j
                .parse()
                .ok()
                .filter(|&level| level >= 1)
                .map(|level| SingleChoice::FixedThreshold { level })
                .ok_or_else(|| HarnessError::Config(format!("bad threshold level in {s:?}"))),
            _ => Err(HarnessError::Config(format!("unknown single-choice policy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: u32,
    pub stop: usize,
    pub opt: f64,
    pub alg_mean: f64,
    pub alg_stderr: f64,
    /// `opt / alg_mean`; infinite when the policy never took anything.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySweep {
    pub policy: String,
    pub rows: Vec<LevelRow>,
    pub worst_level: u32,
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessReport {
    pub gamma: f64,
    pub horizon: usize,
    pub levels: u32,
    pub trials: u64,
    pub seed: u64,
    pub j_max: u32,
    pub policies: Vec<PolicySweep>,
}

/// Runs `policy` over one stream of length `len`; returns the position
/// (1-based) and weight of the pick.
fn pick(policy: SingleChoice, d: &HardDistribution, horizon: usize, len: usize, seed: u64) -> Option<(usize, f64)> {
    let mut stream = ChaCha8Rng::seed_from_u64(seed);
    let mut coins = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_F42D_4C95_7F2D);
    // H_{N-1} + 1 and the running H_{t-1}.
    let top = (1..horizon).map(|i| 1.0 / i as f64).sum::<f64>() + 1.0;
    let mut h = 0.0;
    let mut best = 0u32;
    for t in 1..=len {
        let j = d.sample_level(&mut stream);
        let take = match policy {
            SingleChoice::FixedThreshold { level } => j >= level,
            // Ties go to the earlier draw, so only strict improvements are records.
            SingleChoice::Harmonic => j > best && coins.gen::<f64>() < (1.0 / (top - h)).min(1.0),
        };
        best = best.max(j);
        h += 1.0 / t as f64;
        if take {
            return Some((t, d.weight(j)));
        }
    }
    None
}

/// Monte Carlo ratio `E[OPT_l] / E[ALG_l]` for every stopping level that
/// fits in `horizon`, per policy, together with the worst level.
pub fn hardness_sweep(
    gamma: f64,
    horizon: usize,
    policies: &[SingleChoice],
    trials: u64,
    seed: u64,
) -> Result<HardnessReport, HarnessError> {
    let levels = levels_within(horizon);
    if levels == 0 {
        return Err(HarnessError::Config(format!("horizon {horizon} holds no complete block")));
    }
    if trials < 2 {
        return Err(HarnessError::Config("a sweep needs at least two trials".into()));
    }
    let len = stopping_point(levels);
    let d = HardDistribution::new(gamma, Some(default_truncation(gamma, len as f64)))?;
    let opts: Vec<f64> = (1..=levels)
        .map(|l| expected_max_exact(gamma, stopping_point(l) as f64, None).map(|t| t.value))
        .collect::<Result<_, _>>()?;
    let mut sweeps = Vec::new();
    for &policy in policies {
        let picks: Vec<Option<(usize, f64)>> =
            (0..trials).into_par_iter().map(|k| pick(policy, &d, horizon, len, trial_seed(seed, k))).collect();
        let rows: Vec<LevelRow> = (1..=levels)
            .map(|l| {
                let stop = stopping_point(l);
                let vals: Vec<f64> =
                    picks.iter().map(|p| p.filter(|&(t, _)| t <= stop).map_or(0.0, |(_, w)| w)).collect();
                let k = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / k;
                let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
                let opt = opts[l as usize - 1];
                let ratio = if mean > 0.0 { opt / mean } else { f64::INFINITY };
                LevelRow { level: l, stop, opt, alg_mean: mean, alg_stderr: (var / k).sqrt(), ratio }
            })
            .collect();
        let worst = rows.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio)).expect("levels >= 1");
        sweeps.push(PolicySweep { policy: policy.label(), worst_level: worst.level, worst_ratio: worst.ratio, rows });
    }
    Ok(HardnessReport { gamma, horizon, levels, trials, seed, j_max: d.j_max, policies: sweeps })
}
