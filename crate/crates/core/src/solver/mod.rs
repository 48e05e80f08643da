//! Bundled LP solver and an outer-approximation loop for second-order cone
//! rows.

mod certificate;
mod lu;
mod simplex;

pub use certificate::{check_certificate, duality_gap, CertificateReport, Violation, ViolationKind};

use crate::error::{Error, Result};
use crate::model::{ConicModel, ObjectiveSense, Sense};
use simplex::{StdLp, StdStatus, Tolerances, WarmStart};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Primal feasibility tolerance for rows and bounds.
    pub feas_tol: f64,
    /// Largest `||members|| - head` the cut loop accepts.
    pub cone_tol: f64,
    pub max_pivots: usize,
    pub max_cuts_per_cone: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            cone_tol: 1e-6,
            max_pivots: 5_000_000,
            max_cuts_per_cone: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.feas_tol > 0.0 && self.feas_tol.is_finite()) {
            return Err(Error::Domain {
                what: "feas_tol",
                value: self.feas_tol,
                domain: "(0, inf)",
            });
        }
        if !(self.cone_tol > 0.0 && self.cone_tol.is_finite()) {
            return Err(Error::Domain {
                what: "cone_tol",
                value: self.cone_tol,
                domain: "(0, inf)",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "Optimal",
            Status::Infeasible => "Infeasible",
            Status::Unbounded => "Unbounded",
            Status::IterationLimit => "IterationLimit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub x: Vec<f64>,
    /// Objective at `x`, including the model's constant term.
    pub objective: f64,
    /// Simplex pivots, summed over all LP solves.
    pub iterations: usize,
    /// Cuts added by the cone loop.
    pub cut_count: usize,
    /// Shadow prices of the model rows: rate of change of the optimal
    /// objective per unit increase of the row's right-hand side. Cut rows
    /// added by the cone loop are not reported.
    pub row_duals: Vec<f64>,
}

struct Scaling {
    row: Vec<f64>,
    col: Vec<f64>,
    cost: f64,
}

fn pow2_round(v: f64) -> f64 {
    if !(v.is_finite() && v > 0.0) {
        return 1.0;
    }
    2f64.powi(v.log2().round().clamp(-60.0, 60.0) as i32)
}

/// Geometric-mean scaling with power-of-two factors, followed by a
/// power-of-two normalization of the cost vector.
fn scale(lp: &mut StdLp) -> Scaling {
    let (n, m) = (lp.n, lp.m);
    let mut row = vec![1.0; m];
    let mut col = vec![1.0; n];
    for _ in 0..6 {
        let mut rmin = vec![f64::INFINITY; m];
        let mut rmax = vec![0.0f64; m];
        for j in 0..n {
            for t in lp.col_start[j]..lp.col_start[j + 1] {
                let i = lp.col_row[t];
                let a = (lp.col_val[t] * row[i] * col[j]).abs();
                rmin[i] = rmin[i].min(a);
                rmax[i] = rmax[i].max(a);
            }
        }
        for i in 0..m {
            if rmax[i] > 0.0 {
                row[i] *= pow2_round(1.0 / (rmin[i] * rmax[i]).sqrt());
            }
        }
        for j in 0..n {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for t in lp.col_start[j]..lp.col_start[j + 1] {
                let a = (lp.col_val[t] * row[lp.col_row[t]] * col[j]).abs();
                lo = lo.min(a);
                hi = hi.max(a);
            }
            if hi > 0.0 {
                col[j] *= pow2_round(1.0 / (lo * hi).sqrt());
            }
        }
    }
    for j in 0..n {
        for t in lp.col_start[j]..lp.col_start[j + 1] {
            lp.col_val[t] *= row[lp.col_row[t]] * col[j];
        }
        lp.lo[j] /= col[j];
        lp.hi[j] /= col[j];
        lp.cost[j] *= col[j];
    }
    for i in 0..m {
        lp.lo[n + i] *= row[i];
        lp.hi[n + i] *= row[i];
    }
    let cmax = lp.cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let cost = if cmax > 0.0 { pow2_round(1.0 / cmax) } else { 1.0 };
    lp.cost.iter_mut().for_each(|c| *c *= cost);
    Scaling { row, col, cost }
}

fn to_std(model: &ConicModel) -> StdLp {
    let n = model.num_vars();
    let m = model.num_rows();
    let mut counts = vec![0usize; n + 1];
    for r in model.rows() {
        for (v, _) in &r.terms {
            counts[v.index() + 1] += 1;
        }
    }
    for j in 0..n {
        counts[j + 1] += counts[j];
    }
    let col_start = counts.clone();
    let mut fill = counts;
    let nnz = col_start[n];
    let mut col_row = vec![0; nnz];
    let mut col_val = vec![0.0; nnz];
    for (i, r) in model.rows().iter().enumerate() {
        for &(v, c) in &r.terms {
            let t = fill[v.index()];
            col_row[t] = i;
            col_val[t] = c;
            fill[v.index()] += 1;
        }
    }
    let mut lo: Vec<f64> = model.vars().iter().map(|v| v.lower).collect();
    let mut hi: Vec<f64> = model.vars().iter().map(|v| v.upper).collect();
    for r in model.rows() {
        let (l, h) = match r.sense {
            Sense::Le => (f64::NEG_INFINITY, r.rhs),
            Sense::Ge => (r.rhs, f64::INFINITY),
            Sense::Eq => (r.rhs, r.rhs),
        };
        lo.push(l);
        hi.push(h);
    }
    let sign = match model.sense() {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    StdLp {
        n,
        m,
        col_start,
        col_row,
        col_val,
        lo,
        hi,
        cost: model.objective_coeffs().iter().map(|c| sign * c).collect(),
    }
}

/// LP solve in model units. Returns the result together with the final
/// basis and all variable values (structural then row activities) for warm
/// starting.
fn solve_lp_inner(model: &ConicModel, cfg: &SolverConfig, warm: Option<&WarmStart>, pivot_budget: usize) -> (SolveResult, WarmStart) {
    let mut lp = to_std(model);
    let sc = scale(&mut lp);
    let (n, m) = (lp.n, lp.m);
    let warm_scaled = warm.map(|w| {
        let mut x = w.x.clone();
        for j in 0..n.min(x.len()) {
            x[j] /= sc.col[j];
        }
        for (i, v) in x.iter_mut().skip(n).enumerate().take(m) {
            *v *= sc.row[i];
        }
        WarmStart {
            x,
            basis: w.basis.clone(),
        }
    });
    let tol = Tolerances {
        feas: cfg.feas_tol,
        opt: 1e-9,
        max_pivots: pivot_budget,
    };
    let sol = simplex::solve(&lp, tol, warm_scaled.as_ref());

    let mut x_all = sol.x.clone();
    for j in 0..n {
        x_all[j] *= sc.col[j];
    }
    for i in 0..m {
        x_all[n + i] /= sc.row[i];
    }
    let x: Vec<f64> = x_all[..n].to_vec();
    let sign = match model.sense() {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let row_duals = (0..m).map(|i| sign * sol.y[i] * sc.row[i] / sc.cost).collect();
    let status = match sol.status {
        StdStatus::Optimal => Status::Optimal,
        StdStatus::Infeasible => Status::Infeasible,
        StdStatus::Unbounded => Status::Unbounded,
        StdStatus::IterationLimit => Status::IterationLimit,
    };
    let result = SolveResult {
        status,
        objective: model.objective_value(&x),
        x,
        iterations: sol.iterations,
        cut_count: 0,
        row_duals,
    };
    (
        result,
        WarmStart {
            x: x_all,
            basis: sol.basis,
        },
    )
}

/// Solves a model without cone rows.
pub fn solve_lp(model: &ConicModel, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if !model.cones().is_empty() {
        return Err(Error::Usage(format!(
            "solve_lp called on a model with {} cone rows; use solve_conic",
            model.cones().len()
        )));
    }
    Ok(solve_lp_inner(model, cfg, None, cfg.max_pivots).0)
}

/// Final basis of an LP solve, reusable as the starting point of a solve on
/// a model with the same variables and rows but different coefficients or
/// bounds.
#[derive(Debug, Clone)]
pub struct Basis(WarmStart);

/// Like [`solve_lp`], starting from `start` when given. A start whose basis
/// is singular or infeasible for the new data falls back to a crash from
/// its point.
pub fn solve_lp_warm(model: &ConicModel, cfg: &SolverConfig, start: Option<&Basis>) -> Result<(SolveResult, Basis)> {
    cfg.validate()?;
    if !model.cones().is_empty() {
        return Err(Error::Usage("solve_lp_warm called on a model with cone rows".into()));
    }
    if let Some(b) = start {
        if b.0.x.len() != model.num_vars() + model.num_rows() {
            return Err(Error::Usage("warm start basis does not match the model shape".into()));
        }
    }
    let (res, ws) = solve_lp_inner(model, cfg, start.map(|b| &b.0), cfg.max_pivots);
    Ok((res, Basis(ws)))
}

/// Solves a model with second-order cone rows by linear outer
/// approximation. Without cones this is a single LP solve.
pub fn solve_conic(model: &ConicModel, cfg: &SolverConfig) -> SolveResult {
    let base_rows = model.num_rows();
    let mut work = model.without_cones();
    let cones = model.cones();
    for (k, cone) in cones.iter().enumerate() {
        let head = cone.head;
        let lo = work.var(head).lower.max(0.0);
        let hi = work.var(head).upper;
        if lo > hi {
            work.add_row(format!("cone{k}.head"), vec![(head, 1.0)], Sense::Ge, 0.0);
        } else {
            work.set_bounds(head, lo, hi);
        }
        for (t, &u) in cone.members.iter().enumerate() {
            work.add_row(format!("cone{k}.up[{t}]"), vec![(head, 1.0), (u, -1.0)], Sense::Ge, 0.0);
            work.add_row(format!("cone{k}.dn[{t}]"), vec![(head, 1.0), (u, 1.0)], Sense::Ge, 0.0);
        }
    }
    let mut cuts_per_cone = vec![0usize; cones.len()];
    let mut iterations = 0usize;
    let mut cut_count = 0usize;
    let mut warm: Option<WarmStart> = None;
    loop {
        let budget = cfg.max_pivots.saturating_sub(iterations);
        let (mut res, basis) = solve_lp_inner(&work, cfg, warm.as_ref(), budget);
        iterations += res.iterations;
        res.iterations = iterations;
        res.cut_count = cut_count;
        res.row_duals.truncate(base_rows);
        if res.status != Status::Optimal {
            return res;
        }
        let mut added = false;
        for (k, cone) in cones.iter().enumerate() {
            let norm = cone.member_norm(&res.x);
            let head = res.x[cone.head.index()];
            if norm - head <= cfg.cone_tol {
                continue;
            }
            if cuts_per_cone[k] >= cfg.max_cuts_per_cone {
                res.status = Status::IterationLimit;
                return res;
            }
            let mut terms = vec![(cone.head, 1.0)];
            terms.extend(cone.members.iter().map(|&u| (u, -res.x[u.index()] / norm)));
            work.add_row(format!("cone{k}.cut[{}]", cuts_per_cone[k]), terms, Sense::Ge, 0.0);
            cuts_per_cone[k] += 1;
            cut_count += 1;
            added = true;
        }
        if !added {
            return res;
        }
        warm = Some(basis);
    }
}
