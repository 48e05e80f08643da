use super::{SolveResult, SolverConfig};
use crate::model::{ConicModel, ObjectiveSense, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Bound,
    Row,
    Cone,
    Objective,
    Dimension,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Name of the offending variable, row or cone.
    pub name: String,
    pub amount: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CertificateReport {
    pub violations: Vec<Violation>,
}

impl CertificateReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a claimed solution against the model: bounds and rows within
/// `feas_tol`, cones within `cone_tol`, and the reported objective against
/// a recomputation. Row and bound tolerances are relative to the magnitude
/// of the quantities involved (`1 + max(|rhs|, |a_j x_j|)` for rows, `1 + |x_j|` for bounds).
pub fn check_certificate(model: &ConicModel, result: &SolveResult, cfg: &SolverConfig) -> CertificateReport {
    let mut report = CertificateReport::default();
    let x = &result.x;
    if x.len() != model.num_vars() {
        report.violations.push(Violation {
            kind: ViolationKind::Dimension,
            name: "x".into(),
            amount: (x.len() as f64 - model.num_vars() as f64).abs(),
        });
        return report;
    }
    for (v, &xv) in model.vars().iter().zip(x) {
        let over = (v.lower - xv).max(xv - v.upper).max(0.0);
        let scale = 1.0 + xv.abs();
        if over > cfg.feas_tol * scale || xv.is_nan() {
            report.violations.push(Violation {
                kind: ViolationKind::Bound,
                name: v.name.clone(),
                amount: over,
            });
        }
    }
    for row in model.rows() {
        let viol = row.violation(x);
        let scale = 1.0 + row.terms.iter().fold(row.rhs.abs(), |a, (v, c)| a.max((c * x[v.index()]).abs()));
        if viol > cfg.feas_tol * scale || viol.is_nan() {
            report.violations.push(Violation {
                kind: ViolationKind::Row,
                name: row.name.clone(),
                amount: viol,
            });
        }
    }
    for cone in model.cones() {
        let viol = cone.violation(x);
        if viol > cfg.cone_tol * (1.0 + x[cone.head.index()].abs()) || viol.is_nan() {
            report.violations.push(Violation {
                kind: ViolationKind::Cone,
                name: cone.name.clone(),
                amount: viol,
            });
        }
    }
    let recomputed = model.objective_value(x);
    let diff = (recomputed - result.objective).abs();
    if diff > 1e-9 * recomputed.abs().max(1.0) || diff.is_nan() {
        report.violations.push(Violation {
            kind: ViolationKind::Objective,
            name: "objective".into(),
            amount: diff,
        });
    }
    report
}

/// Gap between the primal objective and the dual bound implied by the
/// reported row duals, in the model's objective units. Each variable and
/// each row contributes its reduced cost times the distance to the bound
/// that cost points at; a nonzero reduced cost toward an infinite bound
/// gives an infinite gap.
/// Meaningful for models without cones.
pub fn duality_gap(model: &ConicModel, result: &SolveResult) -> f64 {
    if result.row_duals.len() != model.num_rows() || result.x.len() != model.num_vars() {
        return f64::INFINITY;
    }
    let sign = match model.sense() {
        ObjectiveSense::Minimize => 1.0,
        ObjectiveSense::Maximize => -1.0,
    };
    let y: Vec<f64> = result.row_duals.iter().map(|p| sign * p).collect();
    let mut reduced: Vec<f64> = model.objective_coeffs().iter().map(|c| sign * c).collect();
    for (row, &yi) in model.rows().iter().zip(&y) {
        for &(v, c) in &row.terms {
            reduced[v.index()] -= c * yi;
        }
    }
    // Reduced costs at roundoff level toward an infinite bound are zero.
    let term = |d: f64, val: f64, lo: f64, hi: f64| -> f64 {
        let dist = if d > 0.0 { val - lo } else { hi - val };
        if dist.is_infinite() && d.abs() <= 1e-9 {
            0.0
        } else {
            d.abs() * dist
        }
    };
    let mut gap = 0.0;
    for ((v, &xv), &d) in model.vars().iter().zip(&result.x).zip(&reduced) {
        gap += term(d, xv, v.lower, v.upper);
    }
    for (row, &yi) in model.rows().iter().zip(&y) {
        let act = row.activity(&result.x);
        let (lo, hi) = match row.sense {
            Sense::Le => (f64::NEG_INFINITY, row.rhs),
            Sense::Ge => (row.rhs, f64::INFINITY),
            Sense::Eq => (row.rhs, row.rhs),
        };
        gap += term(yi, act, lo, hi);
    }
    gap
}
