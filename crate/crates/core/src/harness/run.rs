use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enumerate::{factorial, for_each_permutation};
use crate::matroid::{Matroid, MatroidOracle};
use crate::policies::{run_policy, ExhaustiveCoins, RngCoins};
use crate::scalar::{rational, Scalar};
use crate::weights::{greedy_opt, ArrivalOrder, WeightAssignment};
use crate::Rational;

use super::adversary::adversary_order;
use super::config::{
    build_prototype, AssignmentModel, Evaluation, ExperimentConfig, OrderModel, PolicyMaker, WeightModel,
};
use super::hardness::HardDistribution;
use super::report::{Report, TrialRecord};
use super::HarnessError;

/// Cap on (assignment, order) pairs in one exact evaluation.
pub const MAX_EXACT_RUNS: u64 = 2_000_000;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `k` under master seed `seed`.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ splitmix64(trial))
}

fn weight_list<W: Scalar>(model: &WeightModel, n: usize) -> Result<Vec<W>, HarnessError> {
    match model {
        WeightModel::Explicit { values } => values.iter().map(|v| v.to_scalar()).collect(),
        WeightModel::Linear => Ok((0..n).map(|i| W::from_usize_lossless(n - i)).collect()),
        WeightModel::Hard { .. } => Ok(Vec::new()),
    }
}

fn fixed_assignment<W: Scalar>(model: &AssignmentModel, list: &[W]) -> Option<WeightAssignment<W>> {
    match model {
        AssignmentModel::Random => None,
        AssignmentModel::Identity => Some(WeightAssignment::identity(list.to_vec()).expect("validated")),
        AssignmentModel::Fixed(a) => Some(WeightAssignment::new(list.to_vec(), a.clone()).expect("validated")),
    }
}

/// Order fixed for the whole experiment, if any.
fn static_order(c: &ExperimentConfig, m: &MatroidOracle) -> Result<Option<ArrivalOrder>, HarnessError> {
    Ok(match &c.order {
        OrderModel::Fixed(o) => Some(ArrivalOrder::new(o.clone()).expect("validated")),
        OrderModel::Adversary(a) if !a.sees_weights() => Some(adversary_order::<f64>(*a, m, None)?),
        _ => None,
    })
}

fn ranks<W: Scalar>(w: &WeightAssignment<W>, accepted: &[usize]) -> Vec<usize> {
    let mut r: Vec<usize> = accepted.iter().map(|&e| w.position_of(e) + 1).collect();
    r.sort_unstable();
    r
}

struct MonteCarlo {
    config: ExperimentConfig,
    m: MatroidOracle,
    list: Vec<f64>,
    hard: Option<HardDistribution>,
    fixed: Option<WeightAssignment<f64>>,
    order: Option<ArrivalOrder>,
    maker: PolicyMaker<f64>,
    name: &'static str,
}

impl MonteCarlo {
    fn trial(&self, k: u64) -> Result<TrialRecord, HarnessError> {
        let c = &self.config;
        let n = self.m.ground_size();
        let seed = trial_seed(c.seed, k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order = match &c.order {
            OrderModel::Random => Some(ArrivalOrder::random(n, &mut rng)),
            _ => self.order.clone(),
        };
        let w = match (&self.hard, &self.fixed) {
            (Some(h), _) => {
                let o = order.as_ref().expect("hard weights use weight-blind orders");
                h.assignment(o.as_slice(), &mut rng)
            }
            (None, Some(w)) => w.clone(),
            (None, None) => WeightAssignment::random(self.list.clone(), &mut rng).expect("validated"),
        };
        let order = match order.take() {
            Some(o) => o,
            None => match &c.order {
                OrderModel::Adversary(a) => adversary_order(*a, &self.m, Some(&w))?,
                _ => unreachable!("only weight-aware adversaries defer the order"),
            },
        };
        let mut coins = RngCoins::new(rng.gen());
        let mut policy = (self.maker)();
        let out = run_policy(policy.as_mut(), &self.m, &w, &order, &mut coins)?;
        let opt = w.total(&greedy_opt(&self.m, &w)?);
        Ok(TrialRecord::new(k, self.name, out.weight, opt, seed, ranks(&w, &out.accepted)))
    }
}

/// Runs a validated experiment. Monte Carlo trials run in parallel; the
/// report does not depend on scheduling.
pub fn run_experiment(c: &ExperimentConfig) -> Result<Report, HarnessError> {
    match c.evaluation {
        Evaluation::MonteCarlo => run_experiment_range(c, 0..c.trials),
        Evaluation::Exact => run_exact(c),
    }
}

/// Monte Carlo trials `range` only, for sharding. Shards merge with
/// [`Report::merge`].
pub fn run_experiment_range(c: &ExperimentConfig, range: Range<u64>) -> Result<Report, HarnessError> {
    if c.evaluation != Evaluation::MonteCarlo {
        return Err(HarnessError::Config("only Monte Carlo experiments can be sharded".into()));
    }
    if range.end > c.trials {
        return Err(HarnessError::Config(format!("trial range ends at {} but trials = {}", range.end, c.trials)));
    }
    let m = c.validate()?;
    let n = m.ground_size();
    let hard = match &c.weights {
        WeightModel::Hard { gamma, j_max } => Some(HardDistribution::new(*gamma, *j_max)?),
        _ => None,
    };
    let list = weight_list::<f64>(&c.weights, n)?;
    let fixed = if hard.is_some() { None } else { fixed_assignment(&c.assignment, &list) };
    let job = MonteCarlo {
        order: static_order(c, &m)?,
        maker: build_prototype(&c.policy, &m)?,
        name: c.policy.name(),
        config: c.clone(),
        m,
        list,
        hard,
        fixed,
    };
    let records = range.into_par_iter().map(|k| job.trial(k)).collect::<Result<Vec<_>, _>>()?;
    Ok(Report::monte_carlo(c.clone(), job.name, records))
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(factorial(n) as usize);
    for_each_permutation(n, |p| out.push(p.to_vec()));
    out
}

/// Sums of (value, top hit, OPT) over every order for one assignment.
type Sums = (Rational, Rational, Rational);

fn exact_for_assignment(
    c: &ExperimentConfig,
    m: &MatroidOracle,
    maker: &PolicyMaker<Rational>,
    w: &WeightAssignment<Rational>,
    orders: &[Vec<usize>],
) -> Result<Sums, HarnessError> {
    let opt = w.total(&greedy_opt(m, w)?);
    let adversarial;
    let orders: &[Vec<usize>] = match &c.order {
        OrderModel::Adversary(a) => {
            adversarial = [adversary_order(*a, m, Some(w))?.into_vec()];
            &adversarial
        }
        _ => orders,
    };
    let top = w.element_with_position(0);
    let mut value = rational(0, 1);
    let mut hits = rational(0, 1);
    for o in orders {
        let order = ArrivalOrder::new(o.clone()).expect("permutation");
        let e = ExhaustiveCoins::expectations::<Rational>(2, |coins| {
            let mut policy = maker();
            let out = run_policy(policy.as_mut(), m, w, &order, coins)?;
            Ok(vec![out.weight, rational(i64::from(out.accepted.contains(&top)), 1)])
        })?;
        value += &e[0];
        hits += &e[1];
    }
    Ok((value, hits, opt * rational(orders.len() as i64, 1)))
}

fn run_exact(c: &ExperimentConfig) -> Result<Report, HarnessError> {
    let m = c.validate()?;
    let n = m.ground_size();
    let list = weight_list::<Rational>(&c.weights, n)?;
    let assignments: Vec<WeightAssignment<Rational>> = match fixed_assignment(&c.assignment, &list) {
        Some(w) => vec![w],
        None => all_permutations(n)
            .into_iter()
            .map(|a| WeightAssignment::new(list.clone(), a).expect("permutation"))
            .collect(),
    };
    let orders: Vec<Vec<usize>> = match &c.order {
        OrderModel::Random | OrderModel::Exhaustive => all_permutations(n),
        OrderModel::Fixed(o) => vec![o.clone()],
        OrderModel::Adversary(_) => Vec::new(),
    };
    let per_assignment = orders.len().max(1) as u64;
    let runs = assignments.len() as u64 * per_assignment;
    if runs > MAX_EXACT_RUNS {
        return Err(HarnessError::Config(format!("exact evaluation needs {runs} runs, limit is {MAX_EXACT_RUNS}")));
    }
    let maker = build_prototype::<Rational>(&c.policy, &m)?;
    let sums = assignments
        .par_iter()
        .map(|w| exact_for_assignment(c, &m, &maker, w, &orders))
        .collect::<Result<Vec<_>, _>>()?;
    let zero = || rational(0, 1);
    let (value, hits, opt) =
        sums.into_iter().fold((zero(), zero(), zero()), |(a, b, c), (x, y, z)| (a + x, b + y, c + z));
    let total = rational(runs as i64, 1);
    Ok(Report::exact(c.clone(), c.policy.name(), &(value / &total), &(opt / &total), &(hits / &total), runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{evaluate_policy_exact, harmonic_policy};

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|k| trial_seed(7, k)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(trial_seed(1, 0), trial_seed(2, 0));
    }

    #[test]
    fn harmonic_exact_success_on_rank_one_stream() {
        let c = config(
            r#"{"matroid": {"type":"uniform","n":5,"r":1}, "weights": {"model":"linear"},
                "order": "exhaustive", "evaluation": "exact", "policy": {"name":"harmonic","N":5}}"#,
        );
        let r = run_experiment(&c).unwrap();
        let expect: Rational = evaluate_policy_exact(&harmonic_policy(5).unwrap(), 5).unwrap();
        assert_eq!(r.exact_top_hit().unwrap(), expect);
        assert_eq!(expect, rational(12, 37));
        assert_eq!(r.exact.as_ref().unwrap().runs, 14_400);
        assert_eq!(r.exact_opt().unwrap(), rational(5, 1));
    }

    #[test]
    fn deterministic_and_shardable() {
        let c = config(
            r#"{"matroid": {"type":"uniform","n":12,"r":3}, "weights": {"model":"linear"},
                "policy": {"name":"threshold-price"}, "trials": 300, "seed": 9,
                "bound": {"kind":"fraction-of-opt","value":0.01}}"#,
        );
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let parts: Vec<Report> =
            [0..70, 70..71, 71..300].into_iter().map(|r| run_experiment_range(&c, r).unwrap()).collect();
        let [p, q, s]: [Report; 3] = parts.try_into().unwrap();
        let left = p.clone().merge(q.clone()).unwrap().merge(s.clone()).unwrap();
        let right = s.merge(p.merge(q).unwrap()).unwrap();
        assert_eq!(left.to_json(), a.to_json());
        assert_eq!(right.to_json(), a.to_json());
        assert_eq!(a.pass, Some(true));
    }

    #[test]
    fn merge_rejects_overlap_and_mismatch() {
        let c = config(
            r#"{"matroid": {"type":"uniform","n":4,"r":1}, "weights": {"model":"linear"},
                "policy": {"name":"alg4"}, "trials": 10}"#,
        );
        let a = run_experiment_range(&c, 0..5).unwrap();
        assert!(matches!(a.clone().merge(a.clone()), Err(HarnessError::Merge(_))));
        let mut d = c.clone();
        d.seed = 1;
        let b = run_experiment_range(&d, 5..10).unwrap();
        assert!(matches!(a.merge(b), Err(HarnessError::Merge(_))));
        assert!(run_experiment_range(&c, 0..11).is_err());
    }

    #[test]
    fn monte_carlo_converges_to_exact() {
        let text = |eval: &str, trials: u64| {
            format!(
                r#"{{"matroid": {{"type":"partition","blocks":[[0,1,2],[3,4]],"capacities":[1,1]}},
                    "weights": {{"model":"explicit","values":[5,4,3,2,1]}},
                    "policy": {{"name":"alg4"}}, "evaluation": "{eval}", "trials": {trials}, "seed": 4}}"#
            )
        };
        let exact = run_experiment(&config(&text("exact", 1))).unwrap();
        let mc = run_experiment(&config(&text("monte-carlo", 40_000))).unwrap();
        let target = exact.exact_value().unwrap().as_f64();
        assert!((mc.mean - target).abs() <= 4.0 * mc.stderr, "{} vs {target}", mc.mean);
    }

    #[test]
    fn csv_has_one_row_per_trial() {
        let c = config(
            r#"{"matroid": {"type":"uniform","n":4,"r":2}, "weights": {"model":"linear"},
                "policy": {"name":"alg3","L":10}, "trials": 3}"#,
        );
        let csv = run_experiment(&c).unwrap().to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "trial,policy,value,opt,ratio,seed");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,alg3,"));
    }

    #[test]
    fn hard_weights_respect_order_ties() {
        let c = config(
            r#"{"matroid": {"type":"uniform","n":30,"r":1}, "weights": {"model":"hard","gamma":0.25},
                "order": {"fixed": [29,28,27,26,25,24,23,22,21,20,19,18,17,16,15,14,13,12,11,10,9,8,7,6,5,4,3,2,1,0]},
                "policy": {"name":"harmonic","N":30}, "trials": 50}"#,
        );
        let r = run_experiment(&c).unwrap();
        assert!(r.records.iter().all(|t| t.value <= t.opt && t.opt >= 2f64.powf(0.25)));
    }

    #[test]
    fn exact_bound_uses_rationals() {
        let c = config(
            r#"{"matroid": {"type":"uniform","n":3,"r":3}, "weights": {"model":"linear"},
                "evaluation": "exact", "policy": {"name":"alg3","L":"7/2"},
                "bound": {"kind":"at-least","value":1.5}}"#,
        );
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.pass, Some(r.exact_value().unwrap() >= rational(3, 2)));
        assert_eq!(r.stderr, 0.0);
    }
}
