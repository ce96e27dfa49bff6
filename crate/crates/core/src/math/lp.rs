//! Dense two-phase tableau simplex.
//!
//! Variables are non-negative with optional upper bounds. Problems in this crate
//! have at most a few hundred columns, so a dense tableau is adequate. Pivoting
//! uses Dantzig's rule and falls back to Bland's rule after a run of degenerate
//! pivots, which rules out cycling on the highly degenerate feasibility programs
//! built by the overwritability deciders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const OPT_TOL: f64 = 1e-11;
const PHASE1_TOL: f64 = 1e-9;
const CHECK_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// Sparse `(variable, coefficient)` pairs.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    num_vars: usize,
    objective: Vec<f64>,
    sense: Sense,
    constraints: Vec<Constraint>,
    upper: Vec<Option<f64>>,
}

impl LpProblem {
    /// A feasibility problem (zero objective) over `num_vars` non-negative variables.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            sense: Sense::Minimize,
            constraints: Vec::new(),
            upper: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_objective(&mut self, sense: Sense, coeffs: Vec<f64>) {
        assert_eq!(coeffs.len(), self.num_vars, "objective length");
        self.sense = sense;
        self.objective = coeffs;
    }

    pub fn set_objective_coeff(&mut self, var: usize, c: f64) {
        self.objective[var] = c;
    }

    pub fn set_sense(&mut self, sense: Sense) {
        self.sense = sense;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|(v, _)| *v < self.num_vars));
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn set_upper_bound(&mut self, var: usize, bound: f64) {
        self.upper[var] = Some(bound);
    }

    /// Largest violation of any constraint, bound, or sign restriction at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|(v, a)| a * x[*v]).sum();
            let viol = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for (j, xj) in x.iter().enumerate() {
            worst = worst.max(-xj);
            if let Some(u) = self.upper[j] {
                worst = worst.max(xj - u);
            }
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value at `point`; NaN unless optimal.
    pub value: f64,
    /// Optimizer; empty unless optimal.
    pub point: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn is_feasible(&self) -> bool {
        self.status != LpStatus::Infeasible
    }

    fn without_point(status: LpStatus) -> Self {
        Self {
            status,
            value: f64::NAN,
            point: Vec::new(),
        }
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Reduced-cost row; the final entry holds minus the objective value.
    cost: Vec<f64>,
    ncols: usize,
    /// Columns that may not enter the basis.
    blocked: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn run(&mut self) -> Result<Step> {
        let mut degenerate = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::Lp(format!(
                    "no convergence after {} pivots",
                    self.max_iterations
                )));
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = -OPT_TOL;
            for j in 0..self.ncols {
                if self.blocked[j] {
                    continue;
                }
                let d = self.cost[j];
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = entering else {
                return Ok(Step::Optimal);
            };

            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leaving {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - 1e-14
                                || (ratio <= lr + 1e-14 && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leaving else {
                return Ok(Step::Unbounded);
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }
}

fn clamp_small_negatives(x: &mut [f64]) {
    for v in x.iter_mut() {
        if *v < 0.0 && *v > -CHECK_TOL {
            *v = 0.0;
        }
    }
}

/// Solves `B x_B = b` on the unpivoted rows for the final basis.
fn resolve_basis(original: &[Vec<f64>], rows: &[usize], basis: &[usize], n: usize, ncols: usize) -> Option<Vec<f64>> {
    let columns: Vec<Vec<f64>> = basis.iter().map(|&b| rows.iter().map(|&i| original[i][b]).collect()).collect();
    let rhs: Vec<f64> = rows.iter().map(|&i| original[i][ncols]).collect();
    let xb = super::linalg::solve_columns(&columns, &rhs, 1e-12)?;
    let mut x = vec![0.0; n];
    for (&b, v) in basis.iter().zip(xb) {
        if b < n {
            x[b] = v;
        }
    }
    clamp_small_negatives(&mut x);
    Some(x)
}

/// Solves `problem`. Infeasible and unbounded problems are reported through the
/// returned status; numerical breakdown is an error.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    let n = problem.num_vars;

    // (dense row, relation, rhs) with rhs made non-negative
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &problem.constraints {
        let mut dense = vec![0.0; n];
        for &(v, a) in &c.coeffs {
            dense[v] += a;
        }
        rows.push((dense, c.relation, c.rhs));
    }
    for (j, u) in problem.upper.iter().enumerate() {
        if let Some(u) = u {
            let mut dense = vec![0.0; n];
            dense[j] = 1.0;
            rows.push((dense, Relation::Le, *u));
        }
    }
    for (dense, rel, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            dense.iter_mut().for_each(|a| *a = -*a);
            *rhs = -*rhs;
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let ncols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut table = vec![vec![0.0; ncols + 1]; m];
    let mut basis = vec![0usize; m];
    let mut next_slack = n;
    let mut next_art = art_start;
    for (i, (dense, rel, rhs)) in rows.iter().enumerate() {
        table[i][..n].copy_from_slice(dense);
        table[i][ncols] = *rhs;
        match rel {
            Relation::Le => {
                table[i][next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                table[i][next_slack] = -1.0;
                next_slack += 1;
                table[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                table[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }

    let original = table.clone();
    let mut kept_rows: Vec<usize> = (0..m).collect();
    let mut tab = Tableau {
        rows: table,
        basis,
        cost: vec![0.0; ncols + 1],
        ncols,
        blocked: vec![false; ncols],
        iterations: 0,
        max_iterations: 200 * (m + ncols).max(10),
    };

    if n_art > 0 {
        // phase 1: minimize the sum of artificials
        for j in art_start..ncols {
            tab.cost[j] = 1.0;
        }
        for i in 0..m {
            if tab.basis[i] >= art_start {
                let row = tab.rows[i].clone();
                for (cv, rv) in tab.cost.iter_mut().zip(&row) {
                    *cv -= rv;
                }
            }
        }
        tab.run()?;
        let infeasibility = -tab.cost[ncols];
        if infeasibility > PHASE1_TOL {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        // drive remaining artificials out of the basis; drop redundant rows
        let mut keep = vec![true; m];
        for i in 0..m {
            if tab.basis[i] >= art_start {
                let col = (0..art_start).find(|&j| tab.rows[i][j].abs() > 1e-9);
                match col {
                    Some(j) => tab.pivot(i, j),
                    None => keep[i] = false,
                }
            }
        }
        kept_rows.retain(|&i| keep[i]);
        let mut k = 0;
        tab.rows.retain(|_| {
            let kept = keep[k];
            k += 1;
            kept
        });
        let mut k = 0;
        tab.basis.retain(|_| {
            let kept = keep[k];
            k += 1;
            kept
        });
        for j in art_start..ncols {
            tab.blocked[j] = true;
        }
    }

    // phase 2
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; ncols + 1];
    for j in 0..n {
        cost[j] = sign * problem.objective[j];
    }
    for (i, &b) in tab.basis.iter().enumerate() {
        let cb = cost[b];
        if cb != 0.0 {
            for (cv, rv) in cost.iter_mut().zip(&tab.rows[i]) {
                *cv -= cb * rv;
            }
            // keep the basic column exactly zero
            cost[b] = 0.0;
        }
    }
    for j in art_start..ncols {
        cost[j] = 0.0;
    }
    tab.cost = cost;
    if let Step::Unbounded = tab.run()? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rows[i][ncols];
        }
    }
    clamp_small_negatives(&mut x);
    let mut violation = problem.max_violation(&x);
    if violation > 0.0 {
        // pivoting drift: recompute the basic solution from the original rows
        if let Some(refined) = resolve_basis(&original, &kept_rows, &tab.basis, n, ncols) {
            let v = problem.max_violation(&refined);
            if v < violation {
                x = refined;
                violation = v;
            }
        }
    }
    if violation > CHECK_TOL {
        return Err(Error::Lp(format!(
            "optimizer violates constraints by {violation:.3e}"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: problem.objective_value(&x),
        point: x,
    })
}
