//! Deterministic conic programs: bounded variables, linear rows,
//! second-order cone rows and a linear objective.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * x[v.0]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// `||members||_2 <= head`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub name: String,
    pub head: VarId,
    pub members: Vec<VarId>,
}

impl Cone {
    pub fn member_norm(&self, x: &[f64]) -> f64 {
        self.members.iter().map(|m| x[m.0] * x[m.0]).sum::<f64>().sqrt()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        (self.member_norm(x) - x[self.head.0]).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicModel {
    sense: ObjectiveSense,
    vars: Vec<Variable>,
    rows: Vec<Row>,
    cones: Vec<Cone>,
    objective: Vec<f64>,
    objective_constant: f64,
}

impl ConicModel {
    pub fn new(sense: ObjectiveSense) -> Self {
        Self {
            sense,
            vars: Vec::new(),
            rows: Vec::new(),
            cones: Vec::new(),
            objective: Vec::new(),
            objective_constant: 0.0,
        }
    }

    pub fn sense(&self) -> ObjectiveSense {
        self.sense
    }

    pub fn set_sense(&mut self, sense: ObjectiveSense) {
        self.sense = sense;
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        assert!(lower <= upper, "variable bounds out of order");
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        self.objective.push(0.0);
        VarId(self.vars.len() - 1)
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        assert!(lower <= upper, "variable bounds out of order");
        self.vars[var.0].lower = lower;
        self.vars[var.0].upper = upper;
    }

    /// Appends a row, merging repeated variables and dropping zero
    /// coefficients. Returns the row index.
    pub fn add_row(&mut self, name: impl Into<String>, terms: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> usize {
        let mut merged: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            assert!(v.0 < self.vars.len(), "row references an unregistered variable");
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(slot) => slot.1 += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|(_, c)| *c != 0.0);
        self.rows.push(Row {
            name: name.into(),
            terms: merged,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn add_cone(&mut self, name: impl Into<String>, head: VarId, members: Vec<VarId>) -> usize {
        assert!(head.0 < self.vars.len() && members.iter().all(|m| m.0 < self.vars.len()));
        self.cones.push(Cone {
            name: name.into(),
            head,
            members,
        });
        self.cones.len() - 1
    }

    pub fn set_objective_coeff(&mut self, var: VarId, coeff: f64) {
        self.objective[var.0] = coeff;
    }

    pub fn set_objective_constant(&mut self, c: f64) {
        self.objective_constant = c;
    }

    pub fn objective_constant(&self) -> f64 {
        self.objective_constant
    }

    pub fn objective_coeffs(&self) -> &[f64] {
        &self.objective
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    /// Copy of the model with the cone rows dropped.
    pub fn without_cones(&self) -> ConicModel {
        ConicModel {
            cones: Vec::new(),
            ..self.clone()
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Plain-text LP-style listing with a cone section, for audit with
    /// external tools.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        let name = |v: VarId| self.vars[v.0].name.as_str();
        let fmt = |x: f64| format!("{x:.16e}");
        let terms = |out: &mut String, ts: &mut dyn Iterator<Item = (VarId, f64)>| {
            for (v, c) in ts {
                let sign = if c < 0.0 { '-' } else { '+' };
                let _ = write!(out, " {sign} {} {}", fmt(c.abs()), name(v));
            }
        };
        let _ = writeln!(
            out,
            "\\ {} variables, {} rows, {} cones",
            self.vars.len(),
            self.rows.len(),
            self.cones.len()
        );
        out.push_str(match self.sense {
            ObjectiveSense::Minimize => "minimize\n",
            ObjectiveSense::Maximize => "maximize\n",
        });
        out.push_str(" obj:");
        terms(
            &mut out,
            &mut self.objective.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, c)| (VarId(i), *c)),
        );
        if self.objective_constant != 0.0 {
            let _ = write!(out, " + {}", fmt(self.objective_constant));
        }
        out.push_str("\nsubject to\n");
        for row in &self.rows {
            let _ = write!(out, " {}:", row.name);
            terms(&mut out, &mut row.terms.iter().copied());
            let _ = writeln!(out, " {} {}", row.sense.symbol(), fmt(row.rhs));
        }
        out.push_str("bounds\n");
        for v in &self.vars {
            let lo = if v.lower == f64::NEG_INFINITY { "-inf".to_string() } else { fmt(v.lower) };
            let hi = if v.upper == f64::INFINITY { "+inf".to_string() } else { fmt(v.upper) };
            let _ = writeln!(out, " {lo} <= {} <= {hi}", v.name);
        }
        if !self.cones.is_empty() {
            out.push_str("cones\n");
            for c in &self.cones {
                let members: Vec<&str> = c.members.iter().map(|m| name(*m)).collect();
                let _ = writeln!(out, " {}: {} >= norm2({})", c.name, name(c.head), members.join(", "));
            }
        }
        out.push_str("end\n");
        out
    }
}
