use rayon::prelude::*;

use crate::enumerate::factorial;
use crate::matroid::{ElementId, Matroid, MatroidOracle};
use crate::scalar::Scalar;
use crate::weights::{ArrivalOrder, WeightAssignment};

use super::config::{Adversary, AssignmentModel, Evaluation, ExperimentConfig, OrderModel, MAX_EXHAUSTIVE_ORDERS};
use super::report::Report;
use super::run::run_experiment;
use super::HarnessError;

/// Cap on total (order, assignment) pairs in an exhaustive search.
pub const MAX_SEARCH_RUNS: u64 = 2_000_000;

fn is_loop(m: &dyn Matroid, e: ElementId) -> Result<bool, HarnessError> {
    Ok(m.rank_of(&[e])? == 0)
}

/// Builds the order greedily: at each step the smallest remaining element
/// that raises (or, with `grow = false`, keeps) the prefix rank, falling back
/// to the smallest remaining element.
fn rank_greedy(m: &dyn Matroid, grow: bool) -> Result<Vec<ElementId>, HarnessError> {
    let n = m.ground_size();
    let mut prefix = Vec::with_capacity(n);
    let mut left: Vec<ElementId> = (0..n).collect();
    let mut rank = 0;
    while !left.is_empty() {
        let mut pick = 0;
        for (i, &e) in left.iter().enumerate() {
            prefix.push(e);
            let raises = m.rank_of(&prefix)? > rank;
            prefix.pop();
            if raises == grow {
                pick = i;
                break;
            }
        }
        prefix.push(left.remove(pick));
        rank = m.rank_of(&prefix)?;
    }
    Ok(prefix)
}

/// The order a static heuristic adversary presents. `weights` is needed
/// only by weight-aware adversaries.
pub fn adversary_order<W: Scalar>(
    a: Adversary,
    m: &dyn Matroid,
    weights: Option<&WeightAssignment<W>>,
) -> Result<ArrivalOrder, HarnessError> {
    let n = m.ground_size();
    let split = || -> Result<(Vec<ElementId>, Vec<ElementId>), HarnessError> {
        let mut loops = Vec::new();
        let mut rest = Vec::new();
        for e in 0..n {
            if is_loop(m, e)? {
                loops.push(e)
            } else {
                rest.push(e)
            }
        }
        Ok((loops, rest))
    };
    let order = match a {
        Adversary::Identity => (0..n).collect(),
        Adversary::Reverse => (0..n).rev().collect(),
        Adversary::LoopsFirst => {
            let (loops, rest) = split()?;
            [loops, rest].concat()
        }
        Adversary::LoopsLast => {
            let (loops, rest) = split()?;
            [rest, loops].concat()
        }
        Adversary::Alternating => {
            let (loops, rest) = split()?;
            let mut out = Vec::with_capacity(n);
            let (mut l, mut r) = (loops.into_iter(), rest.into_iter());
            loop {
                match (l.next(), r.next()) {
                    (None, None) => break,
                    (x, y) => out.extend(x.into_iter().chain(y)),
                }
            }
            out
        }
        Adversary::DescendingWeight => {
            let w = weights.ok_or_else(|| HarnessError::Config("descending-weight needs the weights".into()))?;
            w.elements_by_weight()
        }
        Adversary::MinRankPrefix => rank_greedy(m, false)?,
        Adversary::MaxRankPrefix => rank_greedy(m, true)?,
    };
    Ok(ArrivalOrder::new(order).expect("adversaries emit permutations"))
}

/// Outcome of [`worstcase_order_search`].
#[derive(Debug, Clone)]
pub struct WorstCase {
    pub order: Vec<ElementId>,
    /// Adversary name, or `"exhaustive"`.
    pub label: String,
    pub report: Report,
    /// Mean value under every order tried, in search order.
    pub candidates: Vec<(String, f64)>,
}

fn label_of(order: &[ElementId]) -> String {
    order.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Finds the order minimising the policy's expected value. Exhaustive mode
/// tries all `n!` orders with exact evaluation; otherwise every static
/// heuristic adversary is tried with the config's evaluation.
pub fn worstcase_order_search(c: &ExperimentConfig, exhaustive: bool) -> Result<WorstCase, HarnessError> {
    let m: MatroidOracle = c.matroid.load()?;
    let n = m.ground_size();
    if exhaustive {
        if n > MAX_EXHAUSTIVE_ORDERS {
            return Err(HarnessError::Config(format!(
                "exhaustive order search needs n <= {MAX_EXHAUSTIVE_ORDERS}, got {n}"
            )));
        }
        let per_order = match c.assignment {
            AssignmentModel::Random => factorial(n),
            _ => 1,
        };
        if factorial(n) * per_order > MAX_SEARCH_RUNS {
            return Err(HarnessError::Config(format!(
                "exhaustive search needs {} runs, limit is {MAX_SEARCH_RUNS}",
                factorial(n) * per_order
            )));
        }
        let mut orders = Vec::new();
        crate::enumerate::for_each_permutation(n, |p| orders.push(p.to_vec()));
        let reports = orders
            .par_iter()
            .map(|o| {
                let mut cfg = c.clone();
                cfg.order = OrderModel::Fixed(o.clone());
                cfg.evaluation = Evaluation::Exact;
                run_experiment(&cfg)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let candidates = orders.iter().zip(&reports).map(|(o, r)| (label_of(o), r.mean)).collect();
        let best = (0..reports.len())
            .min_by(|&i, &j| reports[i].exact_value().cmp(&reports[j].exact_value()))
            .expect("n >= 1 gives at least one order");
        return Ok(WorstCase {
            order: orders[best].clone(),
            label: "exhaustive".into(),
            report: reports[best].clone(),
            candidates,
        });
    }
    let mut best: Option<WorstCase> = None;
    let mut candidates = Vec::new();
    for a in Adversary::ALL {
        if a.sees_weights() && c.assignment == AssignmentModel::Random {
            continue;
        }
        let mut cfg = c.clone();
        cfg.order = OrderModel::Adversary(a);
        let report = run_experiment(&cfg)?;
        candidates.push((a.name().to_string(), report.mean));
        if best.as_ref().is_none_or(|b| report.mean < b.report.mean) {
            let order = if a.sees_weights() { Vec::new() } else { adversary_order::<f64>(a, &m, None)?.into_vec() };
            best = Some(WorstCase { order, label: a.name().into(), report, candidates: Vec::new() });
        }
    }
    let mut best = best.expect("weight-blind adversaries always apply");
    best.candidates = candidates;
    Ok(best)
}
