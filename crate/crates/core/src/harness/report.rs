use serde::{Deserialize, Serialize};

use crate::scalar::parse_fraction;
use crate::Rational;

use super::config::{BoundKind, Evaluation, ExperimentConfig};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub policy: String,
    pub value: f64,
    pub opt: f64,
    pub ratio: f64,
    pub seed: u64,
    /// 1-based weight ranks of the accepted elements, ascending.
    pub accepted_ranks: Vec<usize>,
}

impl TrialRecord {
    pub fn new(trial: u64, policy: &str, value: f64, opt: f64, seed: u64, accepted_ranks: Vec<usize>) -> Self {
        let ratio = if opt > 0.0 { value / opt } else { 1.0 };
        Self { trial, policy: policy.to_string(), value, opt, ratio, seed, accepted_ranks }
    }
}

/// Exact results, rendered as `"num/den"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSummary {
    pub value: String,
    pub opt: String,
    pub top_hit: String,
    /// Number of (assignment, order) pairs averaged.
    pub runs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config_echo: ExperimentConfig,
    pub policy: String,
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    pub opt_mean: f64,
    /// `mean / opt_mean`.
    pub ratio: f64,
    /// Fraction of trials that accepted the heaviest element.
    pub top_hit_rate: f64,
    pub exact: Option<ExactSummary>,
    /// Threshold the mean is compared against.
    pub bound: Option<f64>,
    pub bound_source: Option<String>,
    pub pass: Option<bool>,
    pub records: Vec<TrialRecord>,
}

fn mean_and_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let k = xs.clone().count();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.clone().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

impl Report {
    pub(crate) fn monte_carlo(config: ExperimentConfig, policy: &str, records: Vec<TrialRecord>) -> Self {
        let mut r = Self::empty(config, policy, records, None);
        r.recompute();
        r
    }

    pub(crate) fn exact(
        config: ExperimentConfig,
        policy: &str,
        value: &Rational,
        opt: &Rational,
        top: &Rational,
        runs: u64,
    ) -> Self {
        let f = |q: &Rational| crate::scalar::Scalar::as_f64(q);
        let record = TrialRecord::new(0, policy, f(value), f(opt), config.seed, Vec::new());
        let summary = ExactSummary {
            value: crate::scalar::fraction_string(value),
            opt: crate::scalar::fraction_string(opt),
            top_hit: crate::scalar::fraction_string(top),
            runs,
        };
        let mut r = Self::empty(config, policy, vec![record], Some(summary));
        r.recompute();
        r
    }

    fn empty(config: ExperimentConfig, policy: &str, records: Vec<TrialRecord>, exact: Option<ExactSummary>) -> Self {
        Self {
            config_echo: config,
            policy: policy.to_string(),
            trials: 0,
            mean: 0.0,
            stderr: 0.0,
            opt_mean: 0.0,
            ratio: 0.0,
            top_hit_rate: 0.0,
            exact,
            bound: None,
            bound_source: None,
            pass: None,
            records,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_value(&self) -> Option<Rational> {
        self.exact.as_ref().and_then(|e| parse_fraction(&e.value))
    }

    pub fn exact_opt(&self) -> Option<Rational> {
        self.exact.as_ref().and_then(|e| parse_fraction(&e.opt))
    }

    pub fn exact_top_hit(&self) -> Option<Rational> {
        self.exact.as_ref().and_then(|e| parse_fraction(&e.top_hit))
    }

    /// Share of trials that accepted the element of weight rank `i` (1-based).
    pub fn acceptance_rate(&self, i: usize) -> f64 {
        let hits = self.records.iter().filter(|r| r.accepted_ranks.binary_search(&i).is_ok()).count();
        hits as f64 / self.records.len() as f64
    }

    /// Rebuilds every aggregate from the records, in trial order.
    pub fn recompute(&mut self) {
        self.records.sort_by_key(|r| r.trial);
        self.trials = self.records.len() as u64;
        let values = self.records.iter().map(|r| r.value);
        (self.mean, self.stderr) = mean_and_stderr(values);
        self.opt_mean = mean_and_stderr(self.records.iter().map(|r| r.opt)).0;
        self.ratio = if self.opt_mean > 0.0 { self.mean / self.opt_mean } else { 1.0 };
        if self.exact.is_some() {
            self.stderr = 0.0;
            self.top_hit_rate = self.exact_top_hit().map_or(f64::NAN, |q| crate::scalar::Scalar::as_f64(&q));
        } else {
            self.top_hit_rate = self.acceptance_rate(1);
        }
        self.evaluate_bound();
    }

    fn evaluate_bound(&mut self) {
        let Some(b) = self.config_echo.bound.clone() else {
            (self.bound, self.bound_source, self.pass) = (None, None, None);
            return;
        };
        self.bound_source = b.source.clone();
        let (f, offset) = match b.kind {
            BoundKind::FractionOfOpt => (b.value, 0.0),
            BoundKind::AtLeast => (0.0, b.value),
        };
        self.bound = Some(f * self.opt_mean + offset);
        let pass = match (self.config_echo.evaluation, self.exact_value(), self.exact_opt()) {
            (Evaluation::Exact, Some(v), Some(opt)) => {
                let exact = |x: f64| Rational::from_float(x).expect("validated finite");
                v >= exact(f) * opt + exact(offset)
            }
            _ => {
                // Per-trial slack keeps the correlation between value and OPT.
                let slack = self.records.iter().map(|r| r.value - f * r.opt - offset);
                let (m, se) = mean_and_stderr(slack);
                m + b.sigmas * se >= 0.0
            }
        };
        self.pass = Some(pass);
    }

    /// Combines shards of one experiment. Associative and independent of
    /// argument order.
    pub fn merge(mut self, other: Report) -> Result<Report, HarnessError> {
        if self.is_exact() || other.is_exact() {
            return Err(HarnessError::Merge("exact reports cover the whole experiment".into()));
        }
        if self.config_echo != other.config_echo || self.policy != other.policy {
            return Err(HarnessError::Merge("reports come from different experiments".into()));
        }
        self.records.extend(other.records);
        self.records.sort_by_key(|r| r.trial);
        if let Some(w) = self.records.windows(2).find(|w| w[0].trial == w[1].trial) {
            return Err(HarnessError::Merge(format!("trial {} appears twice", w[0].trial)));
        }
        self.recompute();
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// One row per trial: `trial,policy,value,opt,ratio,seed`.
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "policy", "value", "opt", "ratio", "seed"])?;
        for r in &self.records {
            w.serialize((r.trial, &r.policy, r.value, r.opt, r.ratio, r.seed))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
