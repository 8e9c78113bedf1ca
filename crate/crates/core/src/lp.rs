//! Secretary linear programs and a small dense simplex solver.
//!
//! Variables are `p_1..p_N` followed by `alpha`, all nonnegative. The
//! objective is `max alpha`. Guarantee rows say `(1/n) sum_{i<=n} i p_i >=
//! alpha` for every `n <= N`; the full program adds the feasibility rows
//! `sum_{j<i} p_j + i p_i <= 1`, the weakened one only `sum p_i <= 1`.

use thiserror::Error;

use crate::classical::{AcceptanceSchedule, ClassicalError, PolicyProfile};
use crate::scalar::{harmonic, Scalar};

/// Largest horizon accepted by [`build_secretary_lp`].
pub const MAX_LP_HORIZON: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("the horizon must contain at least one candidate")]
    EmptyHorizon,
    #[error("horizon {0} exceeds the limit {MAX_LP_HORIZON}")]
    HorizonTooLarge(usize),
    #[error("constraint {0} has the wrong number of coefficients")]
    Malformed(usize),
    #[error("solver returned a point violating constraint {0}")]
    VerificationFailed(usize),
    #[error("LP status is {0:?}, no solution to convert")]
    NotOptimal(LpStatus),
    #[error(transparent)]
    Policy(#[from] ClassicalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn lhs(&self, x: &[T]) -> T {
        self.coeffs.iter().zip(x).fold(T::zero(), |acc, (a, v)| acc + a.clone() * v.clone())
    }

    pub fn is_satisfied(&self, x: &[T]) -> bool {
        let slack = self.lhs(x) - self.rhs.clone();
        let ok_le = !slack.is_positive() || slack.is_negligible();
        let ok_ge = !slack.is_negative() || slack.is_negligible();
        match self.relation {
            Relation::Le => ok_le,
            Relation::Ge => ok_ge,
            Relation::Eq => ok_le && ok_ge,
        }
    }
}

/// `max objective . x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

pub type RationalLp = LinearProgram<crate::Rational>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Zero unless optimal.
    pub objective: T,
    /// Empty unless optimal.
    pub values: Vec<T>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn check_shape(&self) -> Result<(), LpError> {
        match self.constraints.iter().position(|c| c.coeffs.len() != self.num_vars()) {
            Some(i) => Err(LpError::Malformed(i)),
            None => Ok(()),
        }
    }
}

/// Exact (or tolerance-based, for floats) two-phase simplex with Bland's
/// rule. The returned point is checked against every row.
pub fn solve_lp_exact<T: Scalar>(lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
    lp.check_shape()?;
    let n = lp.num_vars();

    // Normalise to nonnegative right-hand sides.
    let rows: Vec<Constraint<T>> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs < T::zero() {
                Constraint {
                    coeffs: c.coeffs.iter().map(|a| -a.clone()).collect(),
                    relation: match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    },
                    rhs: -c.rhs.clone(),
                }
            } else if c.relation == Relation::Ge && c.rhs.is_zero() {
                // `a.x >= 0` is `-a.x <= 0`, which has a slack basis.
                Constraint {
                    coeffs: c.coeffs.iter().map(|a| -a.clone()).collect(),
                    relation: Relation::Le,
                    rhs: T::zero(),
                }
            } else {
                c.clone()
            }
        })
        .collect();

    let slack_count = rows.iter().filter(|c| c.relation != Relation::Eq).count();
    let art_count = rows.iter().filter(|c| c.relation != Relation::Le).count();
    let cols = n + slack_count + art_count;
    let art_start = n + slack_count;

    let mut tab: Vec<Vec<T>> = Vec::with_capacity(rows.len());
    let mut basis = Vec::with_capacity(rows.len());
    let (mut next_slack, mut next_art) = (n, art_start);
    for c in &rows {
        let mut row = vec![T::zero(); cols + 1];
        row[..n].clone_from_slice(&c.coeffs);
        row[cols] = c.rhs.clone();
        match c.relation {
            Relation::Le => {
                row[next_slack] = T::one();
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -T::one();
                next_slack += 1;
                row[next_art] = T::one();
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = T::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        tab.push(row);
    }

    let infeasible = || LpSolution { status: LpStatus::Infeasible, objective: T::zero(), values: Vec::new() };

    if art_count > 0 {
        let mut cost = vec![T::zero(); cols];
        for c in cost.iter_mut().skip(art_start) {
            *c = -T::one();
        }
        let allowed = vec![true; cols];
        let mut z = reduced_costs(&tab, &basis, &cost);
        run_simplex(&mut tab, &mut z, &mut basis, &allowed).expect("phase one is bounded");
        let value = -z[cols].clone();
        if value.is_negative() && !value.is_negligible() {
            return Ok(infeasible());
        }
        // Pivot artificials out of the basis, dropping redundant rows.
        let mut i = 0;
        while i < tab.len() {
            if basis[i] >= art_start {
                match (0..art_start).find(|&j| !tab[i][j].is_negligible()) {
                    Some(j) => {
                        pivot(&mut tab, &mut z, i, j);
                        basis[i] = j;
                    }
                    None => {
                        tab.remove(i);
                        basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost = vec![T::zero(); cols];
    cost[..n].clone_from_slice(&lp.objective);
    let allowed: Vec<bool> = (0..cols).map(|j| j < art_start).collect();
    let mut z = reduced_costs(&tab, &basis, &cost);
    if run_simplex(&mut tab, &mut z, &mut basis, &allowed).is_err() {
        return Ok(LpSolution { status: LpStatus::Unbounded, objective: T::zero(), values: Vec::new() });
    }

    let mut values = vec![T::zero(); n];
    for (row, &b) in tab.iter().zip(&basis) {
        if b < n {
            values[b] = row[cols].clone();
        }
    }
    if let Some(j) = values.iter().position(|v| v.is_negative() && !v.is_negligible()) {
        return Err(LpError::VerificationFailed(lp.constraints.len() + j));
    }
    if let Some(i) = lp.constraints.iter().position(|c| !c.is_satisfied(&values)) {
        return Err(LpError::VerificationFailed(i));
    }
    let objective = lp.objective.iter().zip(&values).fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
    Ok(LpSolution { status: LpStatus::Optimal, objective, values })
}

fn reduced_costs<T: Scalar>(tab: &[Vec<T>], basis: &[usize], cost: &[T]) -> Vec<T> {
    let width = cost.len() + 1;
    let mut z: Vec<T> = cost.iter().cloned().chain(std::iter::once(T::zero())).collect();
    for (row, &b) in tab.iter().zip(basis) {
        if cost[b].is_zero() {
            continue;
        }
        for j in 0..width {
            z[j] = z[j].clone() - cost[b].clone() * row[j].clone();
        }
    }
    z
}

fn pivot<T: Scalar>(tab: &mut [Vec<T>], z: &mut [T], r: usize, c: usize) {
    let piv = tab[r][c].clone();
    for v in tab[r].iter_mut() {
        *v = v.clone() / piv.clone();
    }
    let prow = tab[r].clone();
    let eliminate = |row: &mut [T]| {
        let f = row[c].clone();
        if f.is_zero() {
            return;
        }
        for (x, p) in row.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *x = x.clone() - f.clone() * p.clone();
            }
        }
    };
    for (i, row) in tab.iter_mut().enumerate() {
        if i != r {
            eliminate(row);
        }
    }
    eliminate(z);
}

/// Maximises until no allowed column has a positive reduced cost.
/// `Err(())` means the objective is unbounded.
fn run_simplex<T: Scalar>(tab: &mut [Vec<T>], z: &mut [T], basis: &mut [usize], allowed: &[bool]) -> Result<(), ()> {
    let rhs = z.len() - 1;
    loop {
        let Some(c) = (0..rhs).find(|&j| allowed[j] && z[j].is_positive() && !z[j].is_negligible()) else {
            return Ok(());
        };
        let mut best: Option<(usize, T)> = None;
        for (i, row) in tab.iter().enumerate() {
            let a = &row[c];
            if !a.is_positive() || a.is_negligible() {
                continue;
            }
            let ratio = row[rhs].clone() / a.clone();
            let better = match &best {
                None => true,
                Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        let Some((r, _)) = best else {
            return Err(());
        };
        pivot(tab, z, r, c);
        basis[r] = c;
    }
}

/// The secretary LP over horizon `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecretaryLp<T> {
    pub horizon: usize,
    pub weakened: bool,
    pub program: LinearProgram<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecretarySolution<T> {
    pub status: LpStatus,
    pub alpha: T,
    pub p: Vec<T>,
}

pub fn build_secretary_lp<T: Scalar>(horizon: usize, weakened: bool) -> Result<SecretaryLp<T>, LpError> {
    if horizon == 0 {
        return Err(LpError::EmptyHorizon);
    }
    if horizon > MAX_LP_HORIZON {
        return Err(LpError::HorizonTooLarge(horizon));
    }
    let vars = horizon + 1;
    let mut objective = vec![T::zero(); vars];
    objective[horizon] = T::one();
    let mut constraints = Vec::new();
    for n in 1..=horizon {
        let mut coeffs = vec![T::zero(); vars];
        for (i, c) in coeffs.iter_mut().enumerate().take(n) {
            *c = T::ratio(i as i64 + 1, n as i64);
        }
        coeffs[horizon] = -T::one();
        constraints.push(Constraint { coeffs, relation: Relation::Ge, rhs: T::zero() });
    }
    if weakened {
        let mut coeffs = vec![T::one(); vars];
        coeffs[horizon] = T::zero();
        constraints.push(Constraint { coeffs, relation: Relation::Le, rhs: T::one() });
    } else {
        for i in 1..=horizon {
            let mut coeffs = vec![T::zero(); vars];
            for c in coeffs.iter_mut().take(i - 1) {
                *c = T::one();
            }
            coeffs[i - 1] = T::from_usize_lossless(i);
            constraints.push(Constraint { coeffs, relation: Relation::Le, rhs: T::one() });
        }
    }
    Ok(SecretaryLp { horizon, weakened, program: LinearProgram { objective, constraints } })
}

impl<T: Scalar> SecretaryLp<T> {
    pub fn solve(&self) -> Result<SecretarySolution<T>, LpError> {
        let sol = solve_lp_exact(&self.program)?;
        if sol.status != LpStatus::Optimal {
            return Ok(SecretarySolution { status: sol.status, alpha: T::zero(), p: Vec::new() });
        }
        let mut values = sol.values;
        let alpha = values.pop().expect("alpha column");
        Ok(SecretarySolution { status: LpStatus::Optimal, alpha, p: values })
    }
}

/// Lower and upper analytic bounds on the full-LP optimum:
/// `1/(H_{N-1}+1)` and `1/H_N`.
pub fn lp_bounds<T: Scalar>(horizon: usize) -> (T, T) {
    assert!(horizon >= 1, "horizon must be positive");
    (T::one() / (harmonic::<T>(horizon - 1) + T::one()), T::one() / harmonic::<T>(horizon))
}

/// Executable schedule from an LP profile:
/// `q_i = i p_i / (1 - sum_{j<i} p_j)`, zero once no mass remains.
pub fn policy_from_lp<T: Scalar>(sol: &SecretarySolution<T>) -> Result<AcceptanceSchedule<T>, LpError> {
    if sol.status != LpStatus::Optimal {
        return Err(LpError::NotOptimal(sol.status));
    }
    policy_from_profile(&sol.p)
}

pub fn policy_from_profile<T: Scalar>(p: &[T]) -> Result<AcceptanceSchedule<T>, LpError> {
    Ok(PolicyProfile::new(p.to_vec()).to_schedule()?)
}
