//! Bounded-variable primal revised simplex on the computational form
//! `A x - s = 0`, `lo <= (x, s) <= hi`.
//!
//! Phase 1 drives artificial variables (one per row whose slack starts out
//! of bounds) to zero; phase 2 optimizes the true costs. Pricing uses Devex
//! weights with a Harris two-pass ratio test; after a run of degenerate pivots
//! the method switches to Bland's smallest-index rule until it makes
//! progress again.

use super::lu::{self, Eta, LuFactors};

const REFACTOR_EVERY: usize = 100;
const PIVOT_TOL: f64 = 1e-9;
/// Devex weights above this trigger a reset to one.
const DEVEX_RESET: f64 = 1e6;
/// Relative agreement required between the row-wise and column-wise pivot.
const PIVOT_AGREE: f64 = 1e-6;
const DEGENERATE_STEP: f64 = 1e-12;

/// Problem in computational form. Columns `0..n` are structural, column
/// `n + i` is the slack of row `i` with coefficient `-1`.
#[derive(Debug, Clone)]
pub(crate) struct StdLp {
    pub n: usize,
    pub m: usize,
    pub col_start: Vec<usize>,
    pub col_row: Vec<usize>,
    pub col_val: Vec<f64>,
    /// Bounds of the `n + m` structural and slack variables.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Costs of the structural variables (minimization).
    pub cost: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StdStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct StdSolution {
    pub status: StdStatus,
    /// Values of the `n + m` structural and slack variables.
    pub x: Vec<f64>,
    /// Row duals `y` with reduced costs `d = c - A^T y`.
    pub y: Vec<f64>,
    pub iterations: usize,
    /// Basic variables (indices below `n + m`) at termination.
    pub basis: Vec<usize>,
}

/// Starting point: values for all `n + m` variables and the variables to
/// place in the basis for the first rows (slacks of later rows are added
/// automatically).
#[derive(Debug, Clone)]
pub(crate) struct WarmStart {
    pub x: Vec<f64>,
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub feas: f64,
    pub opt: f64,
    pub max_pivots: usize,
}

enum Phase {
    Optimal,
    Unbounded,
    IterationLimit,
    Restart,
}

struct Simplex<'a> {
    lp: &'a StdLp,
    tol: Tolerances,
    nvar: usize,
    art_row: Vec<usize>,
    art_sign: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    pos_of: Vec<usize>,
    lu: LuFactors,
    etas: Vec<Eta>,
    iterations: usize,
    devex: Vec<f64>,
    d: Vec<f64>,
    dtol: Vec<f64>,
    rows: &'a RowForm,
    art_of_row: Vec<Option<usize>>,
    prow: Vec<f64>,
    prow_mark: Vec<bool>,
    prow_idx: Vec<usize>,
    rho: Vec<f64>,
    y: Vec<f64>,
    alpha: Vec<f64>,
    work: Vec<f64>,
}

pub(crate) fn solve(lp: &StdLp, tol: Tolerances, warm: Option<&WarmStart>) -> StdSolution {
    let mut start = match warm {
        Some(w) => Start::Warm(w.clone()),
        None => Start::Cold(home_values(lp)),
    };
    let mut iterations = 0;
    let rows = RowForm::new(lp);
    loop {
        let mut s = Simplex::new(lp, &rows, tol, iterations);
        let ok = match &start {
            Start::Warm(w) => s.init_warm(w),
            Start::Cold(x) => {
                s.init_cold(x);
                true
            }
        };
        if !ok {
            start = Start::Cold(warm.map_or_else(|| home_values(lp), |w| w.x[..lp.n].to_vec()));
            continue;
        }
        match s.run() {
            Ok(sol) => return sol,
            Err(x) => {
                iterations = s.iterations;
                start = Start::Cold(x);
            }
        }
    }
}

/// Row-wise copy of the structural columns.
struct RowForm {
    start: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl RowForm {
    fn new(lp: &StdLp) -> Self {
        let mut start = vec![0usize; lp.m + 1];
        for &i in &lp.col_row {
            start[i + 1] += 1;
        }
        for i in 0..lp.m {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut col = vec![0; lp.col_row.len()];
        let mut val = vec![0.0; lp.col_row.len()];
        for j in 0..lp.n {
            for t in lp.col_start[j]..lp.col_start[j + 1] {
                let i = lp.col_row[t];
                col[fill[i]] = j;
                val[fill[i]] = lp.col_val[t];
                fill[i] += 1;
            }
        }
        Self { start, col, val }
    }
}

enum Start {
    Warm(WarmStart),
    Cold(Vec<f64>),
}

fn home_values(lp: &StdLp) -> Vec<f64> {
    (0..lp.n)
        .map(|j| {
            if lp.lo[j].is_finite() {
                lp.lo[j]
            } else if lp.hi[j].is_finite() {
                lp.hi[j]
            } else {
                0.0
            }
        })
        .collect()
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a StdLp, rows: &'a RowForm, tol: Tolerances, iterations: usize) -> Self {
        let nvar = lp.n + lp.m;
        Simplex {
            lp,
            tol,
            nvar,
            art_row: Vec::new(),
            art_sign: Vec::new(),
            lo: lp.lo.clone(),
            hi: lp.hi.clone(),
            cost: vec![0.0; nvar],
            x: vec![0.0; nvar],
            basis: Vec::with_capacity(lp.m),
            pos_of: vec![usize::MAX; nvar],
            lu: LuFactors::default(),
            etas: Vec::new(),
            iterations,
            devex: Vec::new(),
            d: Vec::new(),
            dtol: Vec::new(),
            rows,
            art_of_row: vec![None; lp.m],
            prow: Vec::new(),
            prow_mark: Vec::new(),
            prow_idx: Vec::new(),
            rho: vec![0.0; lp.m],
            y: vec![0.0; lp.m],
            alpha: vec![0.0; lp.m],
            work: vec![0.0; lp.m],
        }
    }

    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        let n = self.lp.n;
        if j < n {
            for t in self.lp.col_start[j]..self.lp.col_start[j + 1] {
                f(self.lp.col_row[t], self.lp.col_val[t]);
            }
        } else if j < n + self.lp.m {
            f(j - n, -1.0);
        } else {
            let k = j - n - self.lp.m;
            f(self.art_row[k], self.art_sign[k]);
        }
    }

    fn row_activities(&self) -> Vec<f64> {
        let mut act = vec![0.0; self.lp.m];
        for j in 0..self.lp.n {
            let xj = self.x[j];
            if xj != 0.0 {
                self.for_column(j, |i, v| act[i] += v * xj);
            }
        }
        act
    }

    fn add_artificial(&mut self, row: usize, sign: f64) -> usize {
        self.art_of_row[row] = Some(self.art_row.len());
        self.art_row.push(row);
        self.art_sign.push(sign);
        self.lo.push(0.0);
        self.hi.push(f64::INFINITY);
        self.cost.push(0.0);
        self.x.push(0.0);
        self.pos_of.push(usize::MAX);
        self.nvar += 1;
        self.nvar - 1
    }

    /// Slack (or artificial) basis for row `i` given its activity.
    fn seat_row(&mut self, i: usize, activity: f64) {
        let s = self.lp.n + i;
        let (lo, hi) = (self.lo[s], self.hi[s]);
        if activity >= lo - self.tol.feas && activity <= hi + self.tol.feas {
            self.x[s] = activity;
            self.basis.push(s);
        } else {
            let target = if activity < lo { lo } else { hi };
            self.x[s] = target;
            let sign = if target > activity { 1.0 } else { -1.0 };
            let a = self.add_artificial(i, sign);
            self.x[a] = (target - activity) * sign;
            self.basis.push(a);
        }
    }

    fn init_cold(&mut self, xs: &[f64]) {
        for j in 0..self.lp.n {
            self.x[j] = xs[j].clamp(self.lo[j], self.hi[j]);
        }
        let act = self.row_activities();
        for (i, &a) in act.iter().enumerate() {
            self.seat_row(i, a);
        }
        self.finish_init();
    }

    fn init_warm(&mut self, w: &WarmStart) -> bool {
        let lp = self.lp;
        let old_m = w.basis.len();
        if old_m > lp.m || w.x.len() < lp.n + old_m {
            return false;
        }
        for j in 0..lp.n + old_m {
            self.x[j] = w.x[j].clamp(self.lo[j], self.hi[j]);
        }
        self.basis.extend_from_slice(&w.basis);
        for (p, &b) in self.basis.iter().enumerate() {
            if b >= lp.n + old_m || self.pos_of[b] != usize::MAX {
                return false;
            }
            self.pos_of[b] = p;
        }
        let act = self.row_activities();
        for (i, &a) in act.iter().enumerate().skip(old_m) {
            self.seat_row(i, a);
        }
        self.finish_init();
        self.refactor();
        self.recompute_basics();
        self.basics_feasible()
    }

    fn finish_init(&mut self) {
        for (p, &b) in self.basis.iter().enumerate() {
            self.pos_of[b] = p;
        }
    }

    fn basis_columns(&self) -> Vec<Vec<(usize, f64)>> {
        self.basis
            .iter()
            .map(|&j| {
                let mut c = Vec::new();
                self.for_column(j, |i, v| c.push((i, v)));
                c
            })
            .collect()
    }

    /// Refactorizes the basis. Columns that turn out dependent are replaced
    /// by the slacks of the unpivoted rows; returns whether that happened.
    fn refactor(&mut self) -> bool {
        self.etas.clear();
        let mut repaired = false;
        loop {
            match lu::factorize(self.lp.m, &self.basis_columns()) {
                Ok(f) => {
                    self.lu = f;
                    return repaired;
                }
                Err(sing) => {
                    repaired = true;
                    for (&r, &p) in sing.rows.iter().zip(&sing.positions) {
                        let leaving = self.basis[p];
                        self.pos_of[leaving] = usize::MAX;
                        self.x[leaving] = self.x[leaving].clamp(self.lo[leaving], self.hi[leaving]);
                        let slack = self.lp.n + r;
                        self.basis[p] = slack;
                        self.pos_of[slack] = p;
                    }
                }
            }
        }
    }

    fn ftran(&self, rhs: &mut [f64], out: &mut [f64]) {
        self.lu.solve(rhs, out);
        for e in &self.etas {
            e.apply(out);
        }
    }

    fn btran(&self, c: &mut [f64], out: &mut [f64]) {
        for e in self.etas.iter().rev() {
            e.apply_transpose(c);
        }
        self.lu.solve_transpose(c, out);
    }

    fn recompute_basics(&mut self) {
        let m = self.lp.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.nvar {
            if self.pos_of[j] == usize::MAX && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.for_column(j, |i, v| rhs[i] -= v * xj);
            }
        }
        let mut xb = vec![0.0; m];
        self.ftran(&mut rhs, &mut xb);
        for (p, &b) in self.basis.iter().enumerate() {
            self.x[b] = xb[p];
        }
    }

    /// One step of iterative refinement: solves `B dx = -r` for the
    /// residual `r` of `[A | -I] x = 0` and corrects the basics.
    fn refine_basics(&mut self) {
        let m = self.lp.m;
        let mut r = vec![0.0; m];
        for j in 0..self.nvar {
            let xj = self.x[j];
            if xj != 0.0 {
                self.for_column(j, |i, v| r[i] -= v * xj);
            }
        }
        if r.iter().all(|&v| v == 0.0) {
            return;
        }
        let mut dx = vec![0.0; m];
        self.ftran(&mut r, &mut dx);
        for (p, &b) in self.basis.iter().enumerate() {
            self.x[b] += dx[p];
        }
    }

    fn basics_feasible(&self) -> bool {
        self.basis.iter().all(|&b| self.x[b] >= self.lo[b] - 10.0 * self.tol.feas && self.x[b] <= self.hi[b] + 10.0 * self.tol.feas)
    }

    fn compute_duals(&mut self) {
        let m = self.lp.m;
        let mut cb: Vec<f64> = self.basis.iter().map(|&b| self.cost[b]).collect();
        let mut y = std::mem::take(&mut self.y);
        self.btran(&mut cb, &mut y);
        self.y = y;
        debug_assert_eq!(self.y.len(), m);
    }

    /// Returns the solution, or a point to restart from after a basis
    /// repair left the basis infeasible.
    fn run(&mut self) -> Result<StdSolution, Vec<f64>> {
        let n = self.lp.n;
        let n_art = self.art_row.len();
        self.refactor();
        self.recompute_basics();
        if !self.basics_feasible() {
            return Err(self.x[..n].to_vec());
        }

        if n_art > 0 {
            for k in 0..n_art {
                self.cost[n + self.lp.m + k] = 1.0;
            }
            match self.phase() {
                Phase::Optimal => {}
                Phase::Restart => return Err(self.x[..n].to_vec()),
                Phase::IterationLimit => return Ok(self.finish(StdStatus::IterationLimit)),
                Phase::Unbounded => unreachable!("phase 1 objective is bounded below"),
            }
            let infeas: f64 = (0..n_art).map(|k| self.x[n + self.lp.m + k].max(0.0)).sum();
            let scale = 1.0
                + (n..n + self.lp.m)
                    .flat_map(|s| [self.lo[s], self.hi[s]])
                    .filter(|v| v.is_finite())
                    .fold(0.0_f64, |a, v| a.max(v.abs()));
            if infeas > self.tol.feas * scale {
                return Ok(self.finish(StdStatus::Infeasible));
            }
            for k in 0..n_art {
                let a = n + self.lp.m + k;
                self.cost[a] = 0.0;
                self.hi[a] = 0.0;
                if self.pos_of[a] == usize::MAX {
                    self.x[a] = 0.0;
                }
            }
        }
        self.cost[..n].copy_from_slice(&self.lp.cost);
        let status = match self.phase() {
            Phase::Optimal => StdStatus::Optimal,
            Phase::Unbounded => StdStatus::Unbounded,
            Phase::IterationLimit => StdStatus::IterationLimit,
            Phase::Restart => return Err(self.x[..n].to_vec()),
        };
        if status == StdStatus::Optimal {
            if !self.etas.is_empty() {
                if self.refactor() {
                    return Err(self.x[..n].to_vec());
                }
                self.recompute_basics();
            }
            self.refine_basics();
        }
        Ok(self.finish(status))
    }

    fn finish(&mut self, status: StdStatus) -> StdSolution {
        self.compute_duals();
        let keep = self.lp.n + self.lp.m;
        StdSolution {
            status,
            x: self.x[..keep].to_vec(),
            y: self.y.clone(),
            iterations: self.iterations,
            basis: self.basis.iter().copied().filter(|&b| b < keep).collect(),
        }
    }

    /// Reduced costs of all variables from fresh duals, with their
    /// roundoff tolerances.
    fn fresh_reduced_costs(&mut self) {
        self.compute_duals();
        for j in 0..self.nvar {
            let mut dot = 0.0;
            let mut mag = self.cost[j].abs();
            self.for_column(j, |i, v| {
                dot += v * self.y[i];
                mag += (v * self.y[i]).abs();
            });
            self.d[j] = if self.pos_of[j] == usize::MAX { self.cost[j] - dot } else { 0.0 };
            self.dtol[j] = self.tol.opt * (1.0 + mag);
        }
    }

    /// Row `p` of `B^{-1} [A | -I | artificials]`, stored sparsely in
    /// `prow` / `prow_idx`.
    fn pivot_row(&mut self, p: usize) {
        let m = self.lp.m;
        for &j in &self.prow_idx {
            self.prow[j] = 0.0;
            self.prow_mark[j] = false;
        }
        self.prow_idx.clear();
        let mut e = std::mem::take(&mut self.work);
        e.iter_mut().for_each(|v| *v = 0.0);
        e[p] = 1.0;
        let mut rho = std::mem::take(&mut self.rho);
        self.btran(&mut e, &mut rho);
        self.work = e;
        let n = self.lp.n;
        for i in 0..m {
            let r = rho[i];
            if r == 0.0 {
                continue;
            }
            for t in self.rows.start[i]..self.rows.start[i + 1] {
                let j = self.rows.col[t];
                if !self.prow_mark[j] {
                    self.prow_mark[j] = true;
                    self.prow_idx.push(j);
                }
                self.prow[j] += r * self.rows.val[t];
            }
            let s = n + i;
            self.prow_mark[s] = true;
            self.prow_idx.push(s);
            self.prow[s] = -r;
            if let Some(k) = self.art_of_row[i] {
                let a = n + m + k;
                self.prow_mark[a] = true;
                self.prow_idx.push(a);
                self.prow[a] = self.art_sign[k] * r;
            }
        }
        self.rho = rho;
    }

    fn phase(&mut self) -> Phase {
        let m = self.lp.m;
        let stall_limit = 50 + m / 20;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let phase1 = (0..self.art_row.len()).any(|k| self.cost[self.lp.n + m + k] != 0.0);
        let mut rejected = vec![false; self.nvar];
        let mut any_rejected = false;
        self.devex = vec![1.0; self.nvar];
        self.d = vec![0.0; self.nvar];
        self.dtol = vec![0.0; self.nvar];
        self.prow = vec![0.0; self.nvar];
        self.prow_mark = vec![false; self.nvar];
        self.prow_idx.clear();
        self.fresh_reduced_costs();
        let mut stale = false;
        loop {
            if self.iterations >= self.tol.max_pivots {
                return Phase::IterationLimit;
            }
            if self.etas.len() >= REFACTOR_EVERY {
                let repaired = self.refactor();
                self.recompute_basics();
                if repaired && !self.basics_feasible() {
                    return Phase::Restart;
                }
                self.fresh_reduced_costs();
                stale = false;
            }
            let q = match self.price(bland, &rejected) {
                Some(q) => q,
                // Optimality is only declared on fresh factors and duals.
                None if stale || !self.etas.is_empty() => {
                    if !self.etas.is_empty() {
                        self.refactor();
                        self.recompute_basics();
                        // Drift may have pushed basics out of bounds; never
                        // call such a point optimal.
                        if !self.basics_feasible() {
                            return Phase::Restart;
                        }
                    }
                    self.fresh_reduced_costs();
                    stale = false;
                    continue;
                }
                None => return Phase::Optimal,
            };
            let d_q = self.d[q];

            let mut rhs = std::mem::take(&mut self.work);
            rhs.iter_mut().for_each(|v| *v = 0.0);
            self.for_column(q, |i, v| rhs[i] = v);
            let mut alpha = std::mem::take(&mut self.alpha);
            self.ftran(&mut rhs, &mut alpha);
            self.work = rhs;

            let dir = if d_q < 0.0 { 1.0 } else { -1.0 };
            let step = if bland { self.ratio_bland(q, dir, &alpha) } else { self.ratio_harris(q, dir, &alpha) };
            let Some((theta, leave)) = step else {
                self.alpha = alpha;
                // A ray is trusted only on fresh factors and reduced costs;
                // in phase 1 (whose objective is bounded) it marks a
                // spurious reduced cost.
                if !self.etas.is_empty() || stale {
                    self.refactor();
                    self.recompute_basics();
                    self.fresh_reduced_costs();
                    stale = false;
                    continue;
                }
                if !phase1 {
                    return Phase::Unbounded;
                }
                rejected[q] = true;
                any_rejected = true;
                continue;
            };

            if let Some((p, _)) = leave {
                // The pivot seen from the row side must agree with the
                // column side; disagreement means the factors have drifted.
                self.pivot_row(p);
                if (self.prow[q] - alpha[p]).abs() > PIVOT_AGREE * (1.0 + alpha[p].abs()) && !self.etas.is_empty() {
                    self.alpha = alpha;
                    self.refactor();
                    self.recompute_basics();
                    self.fresh_reduced_costs();
                    stale = false;
                    continue;
                }
            }

            self.x[q] += dir * theta;
            if theta != 0.0 {
                for p in 0..m {
                    if alpha[p] != 0.0 {
                        let b = self.basis[p];
                        self.x[b] -= dir * theta * alpha[p];
                    }
                }
            }
            if let Some((p, to_upper)) = leave {
                let pivot = alpha[p];
                let theta_d = d_q / pivot;
                let wq = self.devex[q];
                let leaving = self.basis[p];
                for k in 0..self.prow_idx.len() {
                    let j = self.prow_idx[k];
                    if j == q || self.pos_of[j] != usize::MAX {
                        continue;
                    }
                    let a = self.prow[j];
                    if a != 0.0 {
                        self.d[j] -= theta_d * a;
                        let r = a / pivot;
                        self.devex[j] = self.devex[j].max(r * r * wq);
                    }
                }
                self.d[q] = 0.0;
                self.d[leaving] = -theta_d;
                self.devex[leaving] = (wq / (pivot * pivot)).max(1.0);
                // Restart the reference framework once weights lose scale.
                if self.devex[leaving] > DEVEX_RESET || self.prow_idx.iter().any(|&j| self.devex[j] > DEVEX_RESET) {
                    self.devex.iter_mut().for_each(|w| *w = 1.0);
                }
                stale = true;

                self.x[leaving] = if to_upper { self.hi[leaving] } else { self.lo[leaving] };
                self.pos_of[leaving] = usize::MAX;
                self.basis[p] = q;
                self.pos_of[q] = p;
                self.etas.push(Eta::from_dense(p, &alpha));
            }
            self.alpha = alpha;
            self.iterations += 1;
            if any_rejected {
                rejected.iter_mut().for_each(|r| *r = false);
                any_rejected = false;
            }

            if theta <= DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run > stall_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    fn price(&self, bland: bool, rejected: &[bool]) -> Option<usize> {
        let ftol = self.tol.feas;
        let mut best = None;
        let mut best_score = 0.0;
        for j in 0..self.nvar {
            if self.pos_of[j] != usize::MAX || self.lo[j] == self.hi[j] || rejected[j] {
                continue;
            }
            let d = self.d[j];
            let tol = self.dtol[j];
            let eligible = (d < -tol && self.x[j] < self.hi[j] - ftol) || (d > tol && self.x[j] > self.lo[j] + ftol);
            if !eligible {
                continue;
            }
            if bland {
                return Some(j);
            }
            let score = d * d / self.devex[j];
            if score > best_score {
                best_score = score;
                best = Some(j);
            }
        }
        best
    }

    fn entering_range(&self, q: usize, dir: f64) -> f64 {
        if dir > 0.0 {
            self.hi[q] - self.x[q]
        } else {
            self.x[q] - self.lo[q]
        }
    }

    /// Exact step to the bound the basic variable at `p` moves toward, or
    /// `None` when that bound is infinite. Also reports whether it is the
    /// upper bound.
    fn exact_ratio(&self, p: usize, rate: f64, relax: f64) -> Option<(f64, bool)> {
        let b = self.basis[p];
        if rate < 0.0 {
            self.lo[b].is_finite().then(|| (((self.x[b] - self.lo[b] + relax) / -rate).max(0.0), false))
        } else {
            self.hi[b].is_finite().then(|| (((self.hi[b] - self.x[b] + relax) / rate).max(0.0), true))
        }
    }

    fn ratio_harris(&self, q: usize, dir: f64, alpha: &[f64]) -> Option<(f64, Option<(usize, bool)>)> {
        let range = self.entering_range(q, dir);
        let mut theta_max = f64::INFINITY;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some((t, _)) = self.exact_ratio(p, -dir * a, self.tol.feas) {
                theta_max = theta_max.min(t);
            }
        }
        if range <= theta_max {
            return range.is_finite().then_some((range, None));
        }
        let mut chosen: Option<(usize, f64, bool)> = None;
        let mut best_abs = 0.0;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some((t, up)) = self.exact_ratio(p, -dir * a, 0.0) {
                if t <= theta_max && a.abs() > best_abs {
                    best_abs = a.abs();
                    chosen = Some((p, t, up));
                }
            }
        }
        chosen.map(|(p, t, up)| (t, Some((p, up))))
    }

    fn ratio_bland(&self, q: usize, dir: f64, alpha: &[f64]) -> Option<(f64, Option<(usize, bool)>)> {
        let range = self.entering_range(q, dir);
        let mut chosen: Option<(usize, f64, bool)> = None;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            if let Some((t, up)) = self.exact_ratio(p, -dir * a, 0.0) {
                let better = match chosen {
                    None => true,
                    Some((cp, ct, _)) => t < ct - 1e-12 || (t <= ct + 1e-12 && self.basis[p] < self.basis[cp]),
                };
                if better {
                    chosen = Some((p, t, up));
                }
            }
        }
        match chosen {
            Some((_, t, _)) if range <= t => Some((range, None)),
            Some((p, t, up)) => Some((t, Some((p, up)))),
            None => range.is_finite().then_some((range, None)),
        }
    }
}
