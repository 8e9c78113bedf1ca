use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::matroid::{Matroid, MatroidOracle, MatroidSpec};
use crate::policies::{
    Alg1, Alg2, Alg3, Alg4, OnlinePolicy, OracleMode, PolicyError, PolicyFactory, SchedulePolicy, ThresholdPrice,
    UnknownN,
};
use crate::scalar::{parse_fraction, Scalar};
use crate::weights::check_weight_list;
use crate::Rational;

use super::HarnessError;

/// Largest ground set for exhaustive order enumeration.
pub const MAX_EXHAUSTIVE_ORDERS: usize = 7;
/// Largest ground set for exhaustive assignment enumeration.
pub const MAX_EXHAUSTIVE_ASSIGNMENTS: usize = 8;

/// A number written either as a JSON number or as `"num/den"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_rational(&self) -> Result<Rational, HarnessError> {
        match self {
            Number::Float(v) => Rational::from_f64_value(*v),
            Number::Text(s) => parse_fraction(s),
        }
        .ok_or_else(|| HarnessError::Config(format!("cannot read {self:?} as a number")))
    }

    pub fn to_scalar<W: Scalar>(&self) -> Result<W, HarnessError> {
        Ok(W::from_rational(&self.to_rational()?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatroidSource {
    File { file: PathBuf },
    Inline(MatroidSpec),
}

impl MatroidSource {
    pub fn load(&self) -> Result<MatroidOracle, HarnessError> {
        match self {
            MatroidSource::File { file } => {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| HarnessError::Config(format!("reading {}: {e}", file.display())))?;
                Ok(MatroidOracle::from_json(&text)?)
            }
            MatroidSource::Inline(spec) => Ok(MatroidOracle::from_spec(spec)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightModel {
    /// A strictly decreasing list, one weight per element.
    Explicit { values: Vec<Number> },
    /// `n, n-1, ..., 1`.
    Linear,
    /// I.i.d. draws of `2^(gamma j)` with probability `2^-j`.
    Hard { gamma: f64, j_max: Option<u32> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssignmentModel {
    /// Uniformly random bijection, fresh per trial.
    #[default]
    Random,
    /// Element `e` gets the `(e+1)`-th largest weight.
    Identity,
    /// `fixed[e]` is the weight index of element `e`.
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    Identity,
    Reverse,
    LoopsFirst,
    LoopsLast,
    Alternating,
    DescendingWeight,
    MinRankPrefix,
    MaxRankPrefix,
}

impl Adversary {
    pub const ALL: [Adversary; 8] = [
        Adversary::Identity,
        Adversary::Reverse,
        Adversary::LoopsFirst,
        Adversary::LoopsLast,
        Adversary::Alternating,
        Adversary::DescendingWeight,
        Adversary::MinRankPrefix,
        Adversary::MaxRankPrefix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Adversary::Identity => "identity",
            Adversary::Reverse => "reverse",
            Adversary::LoopsFirst => "loops-first",
            Adversary::LoopsLast => "loops-last",
            Adversary::Alternating => "alternating",
            Adversary::DescendingWeight => "descending-weight",
            Adversary::MinRankPrefix => "min-rank-prefix",
            Adversary::MaxRankPrefix => "max-rank-prefix",
        }
    }

    /// Whether the order depends on the realised weights.
    pub fn sees_weights(self) -> bool {
        self == Adversary::DescendingWeight
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderModel {
    #[default]
    Random,
    /// Every order, averaged. Exact evaluation only.
    Exhaustive,
    Fixed(Vec<usize>),
    Adversary(Adversary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BasePolicy {
    ThresholdPrice,
    Harmonic,
    Alg4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Alg1,
    Alg2,
    Alg3 {
        #[serde(rename = "L")]
        bound: Number,
    },
    Alg4,
    ThresholdPrice,
    UnknownNReduction {
        eps: f64,
        base: BasePolicy,
    },
    /// Harmonic record policy for horizon `N`, over non-loop arrivals.
    Harmonic {
        #[serde(rename = "N")]
        horizon: usize,
    },
    /// Classical `1/e` rule for the known ground-set size.
    OneOverE,
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Alg1 => "alg1",
            PolicySpec::Alg2 => "alg2",
            PolicySpec::Alg3 { .. } => "alg3",
            PolicySpec::Alg4 => "alg4",
            PolicySpec::ThresholdPrice => "threshold-price",
            PolicySpec::UnknownNReduction { .. } => "unknown-n-reduction",
            PolicySpec::Harmonic { .. } => "harmonic",
            PolicySpec::OneOverE => "one-over-e",
        }
    }

    /// Least information the policy needs.
    pub fn required_mode(&self) -> InfoMode {
        match self {
            PolicySpec::Alg1 | PolicySpec::Alg2 => InfoMode::Mk,
            PolicySpec::Alg4 | PolicySpec::ThresholdPrice | PolicySpec::OneOverE => InfoMode::Mn,
            PolicySpec::Alg3 { .. } | PolicySpec::UnknownNReduction { .. } | PolicySpec::Harmonic { .. } => {
                InfoMode::Mu
            }
        }
    }

    /// Whether the policy draws continuous randomness.
    pub fn needs_continuous_coins(&self) -> bool {
        matches!(self, PolicySpec::UnknownNReduction { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InfoMode {
    #[serde(rename = "MU")]
    Mu,
    #[serde(rename = "MN")]
    Mn,
    #[serde(rename = "MK")]
    Mk,
}

impl From<OracleMode> for InfoMode {
    fn from(m: OracleMode) -> Self {
        match m {
            OracleMode::Known => InfoMode::Mk,
            OracleMode::SizeOnly => InfoMode::Mn,
            OracleMode::Unknown => InfoMode::Mu,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evaluation {
    #[default]
    MonteCarlo,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `mean >= value * mean(OPT)`.
    FractionOfOpt,
    /// `mean >= value`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    pub kind: BoundKind,
    pub value: f64,
    #[serde(default)]
    pub source: Option<String>,
    /// Monte Carlo slack in standard errors.
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
}

fn default_sigmas() -> f64 {
    3.0
}

fn default_trials() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub matroid: MatroidSource,
    pub weights: WeightModel,
    #[serde(default)]
    pub assignment: AssignmentModel,
    #[serde(default)]
    pub order: OrderModel,
    pub policy: PolicySpec,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Option<InfoMode>,
    #[serde(default)]
    pub evaluation: Evaluation,
    #[serde(default)]
    pub bound: Option<BoundSpec>,
}

fn is_permutation(v: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    v.len() == n && v.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Checks the config against the matroid and returns the loaded matroid.
    pub fn validate(&self) -> Result<MatroidOracle, HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let m = self.matroid.load()?;
        let n = m.ground_size();
        if n == 0 {
            return bad("the matroid has no elements".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        match &self.weights {
            WeightModel::Explicit { values } => {
                if values.len() != n {
                    return bad(format!("{} weights for {n} elements", values.len()));
                }
                let exact: Vec<Rational> = values.iter().map(Number::to_rational).collect::<Result<_, _>>()?;
                check_weight_list(&exact).map_err(|e| HarnessError::Config(format!("weights: {e}")))?;
            }
            WeightModel::Linear => {}
            WeightModel::Hard { gamma, j_max } => {
                if !(*gamma > 0.0 && *gamma < 1.0 / 3.0) {
                    return bad(format!("gamma = {gamma} must lie in (0, 1/3)"));
                }
                if j_max == &Some(0) {
                    return bad("j_max must be positive".into());
                }
                if self.evaluation == Evaluation::Exact {
                    return bad("the hard weight model has no exact evaluation".into());
                }
                if self.assignment != AssignmentModel::Random {
                    return bad("the hard weight model draws weights independently; use the random assignment".into());
                }
            }
        }
        if let AssignmentModel::Fixed(a) = &self.assignment {
            if !is_permutation(a, n) {
                return bad("fixed assignment must be a permutation of 0..n".into());
            }
        }
        match &self.order {
            OrderModel::Fixed(o) if !is_permutation(o, n) => {
                return bad("fixed order must be a permutation of 0..n".into());
            }
            OrderModel::Exhaustive if n > MAX_EXHAUSTIVE_ORDERS => {
                return bad(format!("exhaustive orders need n <= {MAX_EXHAUSTIVE_ORDERS}, got {n}"));
            }
            OrderModel::Exhaustive if self.evaluation != Evaluation::Exact => {
                return bad("exhaustive orders require exact evaluation".into());
            }
            OrderModel::Adversary(a) if a.sees_weights() && self.assignment == AssignmentModel::Random => {
                return bad(format!("adversary {} needs a fixed weight assignment", a.name()));
            }
            _ => {}
        }
        if self.evaluation == Evaluation::Exact {
            if self.policy.needs_continuous_coins() {
                return bad(format!("{} draws continuous randomness and has no exact evaluation", self.policy.name()));
            }
            if self.assignment == AssignmentModel::Random && n > MAX_EXHAUSTIVE_ASSIGNMENTS {
                return bad(format!("exact random assignment needs n <= {MAX_EXHAUSTIVE_ASSIGNMENTS}, got {n}"));
            }
            if self.order == OrderModel::Random && n > MAX_EXHAUSTIVE_ORDERS {
                return bad(format!("exact random order needs n <= {MAX_EXHAUSTIVE_ORDERS}, got {n}"));
            }
        }
        if let Some(mode) = self.mode {
            let need = self.policy.required_mode();
            if mode < need {
                return bad(format!("{} needs {need:?} information, config grants {mode:?}", self.policy.name()));
            }
        }
        match &self.policy {
            PolicySpec::UnknownNReduction { eps, .. } if !(*eps > 0.0 && *eps <= 1.0) => {
                return bad(format!("eps = {eps} must lie in (0, 1]"));
            }
            PolicySpec::Harmonic { horizon } if *horizon == 0 => return bad("N must be positive".into()),
            PolicySpec::Alg3 { bound } if !(bound.to_rational()? > Rational::from_integer(0.into())) => {
                return bad("L must be positive".into());
            }
            _ => {}
        }
        if let Some(b) = &self.bound {
            if !b.value.is_finite() || !b.sigmas.is_finite() || b.sigmas < 0.0 {
                return bad("bound value and sigmas must be finite, sigmas nonnegative".into());
            }
        }
        // Construct once to surface policy-specific errors.
        build_prototype::<f64>(&self.policy, &m)?;
        Ok(m)
    }
}

/// Makes fresh policy instances for one experiment.
pub type PolicyMaker<W> = Arc<dyn Fn() -> Box<dyn OnlinePolicy<W>> + Send + Sync>;

fn boxed<W: Scalar, P: OnlinePolicy<W> + Clone + Sync + 'static>(p: P) -> PolicyMaker<W> {
    Arc::new(move || Box::new(p.clone()))
}

fn base_factory<W: Scalar>(base: &BasePolicy) -> PolicyFactory<W> {
    match base {
        BasePolicy::ThresholdPrice => {
            Arc::new(|n| Ok(Box::new(ThresholdPrice::<W>::new(n)?) as Box<dyn OnlinePolicy<W>>))
        }
        BasePolicy::Harmonic => {
            Arc::new(|n| Ok(Box::new(SchedulePolicy::<W>::harmonic(n)?) as Box<dyn OnlinePolicy<W>>))
        }
        BasePolicy::Alg4 => Arc::new(|n| Ok(Box::new(Alg4::<W>::new(n)?) as Box<dyn OnlinePolicy<W>>)),
    }
}

/// Builds the (expensive) policy state once; the maker clones it.
pub fn build_prototype<W: Scalar>(spec: &PolicySpec, m: &MatroidOracle) -> Result<PolicyMaker<W>, HarnessError> {
    let n = m.ground_size();
    Ok(match spec {
        PolicySpec::Alg1 => boxed(Alg1::<W>::new(m.clone())?),
        PolicySpec::Alg2 => boxed(Alg2::<W>::new(m)?),
        PolicySpec::Alg3 { bound } => boxed(Alg3::<W>::new(bound.to_scalar()?)?),
        PolicySpec::Alg4 => boxed(Alg4::<W>::new(n)?),
        PolicySpec::ThresholdPrice => boxed(ThresholdPrice::<W>::new(n)?),
        PolicySpec::Harmonic { horizon } => boxed(SchedulePolicy::<W>::harmonic(*horizon)?),
        PolicySpec::OneOverE => boxed(SchedulePolicy::<W>::new(
            crate::classical::one_over_e_policy(n)
                .map_err(|e| HarnessError::Policy(PolicyError::InvalidInput(e.to_string())))?,
        )),
        PolicySpec::UnknownNReduction { eps, base } => {
            let (eps, base) = (*eps, base.clone());
            UnknownN::<W>::new(eps, base_factory(&base))?;
            Arc::new(move || Box::new(UnknownN::<W>::new(eps, base_factory(&base)).expect("eps validated")))
        }
    })
}
