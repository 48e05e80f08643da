//! Deterministic equivalents of worst-case CVaR constraints over the
//! discrete possibilistic ambiguity set.
//!
//! A block bounds `sup_P CVaR_P^eps[g(a^T x)]` by a right-hand side using
//! level variables `v_i`, scalars `w, t` and, per level, the dual of the
//! inner maximization of `a^T x` over the confidence set `C(lambda_i)`.

use crate::ambiguity::{LambdaGrid, Norm, PossibilityModel};
use crate::error::{Error, Result};
use crate::fuzzy::FuzzyInterval;
use crate::model::{ConicModel, ObjectiveSense, Sense, VarId};
use crate::solver::{self, SolveResult, SolverConfig, Status};

const INF: f64 = f64::INFINITY;

/// One affine piece `slope * y + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePiece {
    pub slope: f64,
    pub intercept: f64,
}

/// Nondecreasing convex disutility applied to the uncertain quantity.
#[derive(Debug, Clone, PartialEq)]
pub enum Disutility {
    Identity,
    /// Pointwise maximum of the pieces, sorted by slope.
    PiecewiseAffine(Vec<AffinePiece>),
}

impl Disutility {
    /// Maximum of affine pieces. Every slope must be finite and
    /// nonnegative; pieces are stored sorted by slope.
    pub fn piecewise(mut pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Validation("a piecewise disutility needs at least one piece".into()));
        }
        for p in &pieces {
            if !(p.slope.is_finite() && p.intercept.is_finite()) {
                return Err(Error::Validation("disutility pieces must be finite".into()));
            }
            if p.slope < 0.0 {
                return Err(Error::Validation(format!(
                    "disutility slope {} is negative; the function must be nondecreasing",
                    p.slope
                )));
            }
        }
        pieces.sort_by(|a, b| a.slope.total_cmp(&b.slope));
        Ok(Disutility::PiecewiseAffine(pieces))
    }

    /// Pieces as used in the emitted rows; the identity is the single piece
    /// `(1, 0)`.
    pub fn pieces(&self) -> Vec<AffinePiece> {
        match self {
            Disutility::Identity => vec![AffinePiece {
                slope: 1.0,
                intercept: 0.0,
            }],
            Disutility::PiecewiseAffine(p) => p.clone(),
        }
    }

    pub fn piece_count(&self) -> usize {
        match self {
            Disutility::Identity => 1,
            Disutility::PiecewiseAffine(p) => p.len(),
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Disutility::Identity => y,
            Disutility::PiecewiseAffine(p) => p.iter().map(|q| q.slope * y + q.intercept).fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Tangents of `exp` at the given points: `(e^y_k, e^y_k (1 - y_k))`.
pub fn exp_tangents_at(points: &[f64]) -> Result<Disutility> {
    Disutility::piecewise(
        points
            .iter()
            .map(|&y| AffinePiece {
                slope: y.exp(),
                intercept: y.exp() * (1.0 - y),
            })
            .collect(),
    )
}

/// `sup_P CVaR_P^eps[g(a^T x)] <= rhs` over the discrete ambiguity set of
/// `coeffs` on `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct CvarConstraintSpec {
    pub coeffs: PossibilityModel,
    pub g: Disutility,
    pub eps: f64,
    pub rhs: f64,
    pub grid: LambdaGrid,
    /// When set, the last coordinate of `coeffs` is the negated right-hand
    /// side and multiplies an auxiliary variable fixed to one; `rhs` is then
    /// normally 0.
    pub uncertain_rhs: bool,
}

impl CvarConstraintSpec {
    pub fn new(coeffs: PossibilityModel, g: Disutility, eps: f64, rhs: f64, grid: LambdaGrid) -> Result<Self> {
        let spec = Self {
            coeffs,
            g,
            eps,
            rhs,
            grid,
            uncertain_rhs: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Constraint `a^T x <= b` with fuzzy `b`: the coefficient model is
    /// extended by the coordinate `-b` (on the same deviation norm, with the
    /// identity matrix extended by one) and the bound becomes 0.
    pub fn with_uncertain_rhs(coeffs: PossibilityModel, b: FuzzyInterval, g: Disutility, eps: f64, grid: LambdaGrid) -> Result<Self> {
        let neg_b = FuzzyInterval::new(-b.nominal(), b.dev_hi(), b.dev_lo(), b.shape_hi(), b.shape_lo())?;
        let dev = coeffs.deviation();
        let n = coeffs.dim();
        let mut rows = dev.matrix().to_rows();
        for r in rows.iter_mut() {
            r.push(0.0);
        }
        let mut last = vec![0.0; n + 1];
        last[n] = 1.0;
        rows.push(last);
        let matrix = crate::linalg::Matrix::from_rows(&rows)?;
        let deviation = crate::ambiguity::DeviationSpec::new(dev.norm(), matrix, dev.dev())?;
        let mut marginals = coeffs.marginals().to_vec();
        marginals.push(neg_b);
        let spec = Self {
            coeffs: PossibilityModel::new(marginals, deviation)?,
            g,
            eps,
            rhs: 0.0,
            grid,
            uncertain_rhs: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eps) {
            return Err(Error::Domain {
                what: "eps",
                value: self.eps,
                domain: "[0, 1)",
            });
        }
        if !self.rhs.is_finite() {
            return Err(Error::Domain {
                what: "rhs",
                value: self.rhs,
                domain: "finite reals",
            });
        }
        Ok(())
    }

    /// Number of decision variables the block multiplies (excluding the
    /// auxiliary one for an uncertain right-hand side).
    pub fn decision_dim(&self) -> usize {
        self.coeffs.dim() - usize::from(self.uncertain_rhs)
    }
}

/// Right-hand side of the budget row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockBound {
    Fixed(f64),
    /// Epigraph variable `h` standing for the worst-case CVaR.
    Epigraph(VarId),
}

/// Dual variables of one level.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LevelDuals {
    pub alpha: Vec<VarId>,
    pub beta: Vec<VarId>,
    /// Empty for L2 blocks.
    pub phi: Vec<VarId>,
    /// Empty for L2 blocks.
    pub xi: Vec<VarId>,
    /// `n` entries for Linf, one for L1 and L2.
    pub gamma: Vec<VarId>,
    /// L2 only.
    pub u: Vec<VarId>,
}

/// Handles to the variables and rows of an emitted block.
#[derive(Debug, Clone, PartialEq)]
pub struct CvarBlock {
    pub norm: Norm,
    pub w: VarId,
    pub t: VarId,
    pub v: Vec<VarId>,
    pub levels: Vec<LevelDuals>,
    pub budget_row: usize,
    pub ring_rows: Vec<usize>,
    /// `dual_rows[i][z]`: dual-objective row of level `i` and piece `z`.
    pub dual_rows: Vec<Vec<usize>>,
    pub equality_rows: Vec<usize>,
    pub gamma_rows: Vec<usize>,
    pub cones: Vec<usize>,
}

impl CvarBlock {
    pub fn dual_var_count(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.alpha.len() + l.beta.len() + l.phi.len() + l.xi.len() + l.gamma.len() + l.u.len())
            .sum()
    }
}

/// Emits the block for `spec` over decision variables `x` (one per
/// coefficient, including the auxiliary variable for an uncertain
/// right-hand side) and returns its handles. Variables are named with the
/// prefix `tag`.
pub fn emit_block(model: &mut ConicModel, spec: &CvarConstraintSpec, x: &[VarId], bound: BlockBound, tag: &str) -> Result<CvarBlock> {
    spec.validate()?;
    let n = spec.coeffs.dim();
    if x.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x.len(),
            context: "block decision variables",
        });
    }
    let norm = spec.coeffs.deviation().norm();
    if norm == Norm::L2 && !spec.coeffs.deviation().matrix().is_square() {
        return Err(Error::Model("an L2 block needs a square deviation matrix".into()));
    }
    let grid = spec.grid;
    let levels = grid.len();
    let pieces = spec.g.pieces();
    let one_minus_eps = 1.0 - spec.eps;
    let nominal = spec.coeffs.nominal();

    let w = model.add_var(format!("{tag}.w"), -INF, INF);
    let t = model.add_var(format!("{tag}.t"), -INF, INF);
    let v: Vec<VarId> = (0..levels).map(|i| model.add_var(format!("{tag}.v[{i}]"), 0.0, INF)).collect();

    let mut duals = Vec::with_capacity(levels);
    for i in 0..levels {
        let vec_var = |m: &mut ConicModel, name: &str, lo: f64| -> Vec<VarId> {
            (0..n).map(|j| m.add_var(format!("{tag}.{name}[{i},{j}]"), lo, INF)).collect()
        };
        let mut d = LevelDuals {
            alpha: vec_var(model, "alpha", 0.0),
            beta: vec_var(model, "beta", 0.0),
            ..Default::default()
        };
        match norm {
            Norm::Linf => {
                d.phi = vec_var(model, "phi", 0.0);
                d.xi = vec_var(model, "xi", 0.0);
                d.gamma = vec_var(model, "gamma", 0.0);
            }
            Norm::L1 => {
                d.phi = vec_var(model, "phi", 0.0);
                d.xi = vec_var(model, "xi", 0.0);
                d.gamma = vec![model.add_var(format!("{tag}.gamma[{i}]"), 0.0, INF)];
            }
            Norm::L2 => {
                d.gamma = vec![model.add_var(format!("{tag}.gamma[{i}]"), 0.0, INF)];
                d.u = vec_var(model, "u", -INF);
            }
        }
        duals.push(d);
    }

    // Budget row: w + sum (lambda_i - 1) v_i + (1 - eps) t <= (1 - eps) b.
    let mut terms = vec![(w, 1.0)];
    terms.extend((0..levels).map(|i| (v[i], grid.level(i) - 1.0)));
    terms.push((t, one_minus_eps));
    let budget_row = match bound {
        BlockBound::Fixed(b) => model.add_row(format!("{tag}.budget"), terms, Sense::Le, one_minus_eps * b),
        BlockBound::Epigraph(h) => {
            terms.push((h, -one_minus_eps));
            model.add_row(format!("{tag}.budget"), terms, Sense::Le, 0.0)
        }
    };

    let ring = |i: usize| -> Vec<(VarId, f64)> {
        let mut r = vec![(w, 1.0)];
        r.extend((0..=i).map(|j| (v[j], -1.0)));
        r
    };
    let ring_rows = (0..levels)
        .map(|i| model.add_row(format!("{tag}.ring[{i}]"), ring(i), Sense::Ge, 0.0))
        .collect();

    let mut dual_rows = Vec::with_capacity(levels);
    for (i, d) in duals.iter().enumerate() {
        let cs = spec.coeffs.confidence_set(grid.level(i))?;
        let (lo, hi, radius) = (cs.lower(), cs.upper(), cs.radius());
        // Dual objective as (variable, coefficient) terms.
        let mut dual_obj: Vec<(VarId, f64)> = Vec::new();
        match norm {
            Norm::Linf | Norm::L1 => {
                for j in 0..n {
                    dual_obj.push((d.alpha[j], hi[j]));
                    dual_obj.push((d.beta[j], -lo[j]));
                    dual_obj.push((d.phi[j], nominal[j]));
                    dual_obj.push((d.xi[j], -nominal[j]));
                }
                dual_obj.extend(d.gamma.iter().map(|&g| (g, radius)));
            }
            Norm::L2 => {
                for j in 0..n {
                    dual_obj.push((d.alpha[j], hi[j] - nominal[j]));
                    dual_obj.push((d.beta[j], nominal[j] - lo[j]));
                    dual_obj.push((x[j], nominal[j]));
                }
                dual_obj.push((d.gamma[0], radius));
            }
        }
        let rows = pieces
            .iter()
            .enumerate()
            .map(|(z, p)| {
                let mut terms = ring(i);
                terms.push((t, 1.0));
                terms.extend(dual_obj.iter().map(|&(var, c)| (var, -p.slope * c)));
                model.add_row(format!("{tag}.dual[{i},{z}]"), terms, Sense::Ge, p.intercept)
            })
            .collect();
        dual_rows.push(rows);
    }

    let mut equality_rows = Vec::with_capacity(levels * n);
    let bmat = spec.coeffs.deviation().matrix();
    for (i, d) in duals.iter().enumerate() {
        for j in 0..n {
            let mut terms = vec![(d.alpha[j], 1.0), (d.beta[j], -1.0)];
            match norm {
                Norm::Linf | Norm::L1 => {
                    terms.push((d.phi[j], 1.0));
                    terms.push((d.xi[j], -1.0));
                }
                Norm::L2 => {
                    terms.extend((0..bmat.rows()).filter(|&k| bmat[(k, j)] != 0.0).map(|k| (d.u[k], bmat[(k, j)])));
                }
            }
            terms.push((x[j], -1.0));
            equality_rows.push(model.add_row(format!("{tag}.link[{i},{j}]"), terms, Sense::Eq, 0.0));
        }
    }

    let mut gamma_rows = Vec::new();
    let mut cones = Vec::new();
    for (i, d) in duals.iter().enumerate() {
        match norm {
            Norm::Linf | Norm::L1 => {
                for j in 0..n {
                    let g = if norm == Norm::Linf { d.gamma[j] } else { d.gamma[0] };
                    let terms = vec![(g, 1.0), (d.phi[j], -1.0), (d.xi[j], -1.0)];
                    gamma_rows.push(model.add_row(format!("{tag}.gamma[{i},{j}]"), terms, Sense::Ge, 0.0));
                }
            }
            Norm::L2 => cones.push(model.add_cone(format!("{tag}.cone[{i}]"), d.gamma[0], d.u.clone())),
        }
    }

    Ok(CvarBlock {
        norm,
        w,
        t,
        v,
        levels: duals,
        budget_row,
        ring_rows,
        dual_rows,
        equality_rows,
        gamma_rows,
        cones,
    })
}

fn expect_norm(spec: &CvarConstraintSpec, norm: Norm) -> Result<()> {
    let got = spec.coeffs.deviation().norm();
    if got != norm {
        return Err(Error::Usage(format!("block emitter for {norm} called on a {got} model")));
    }
    Ok(())
}

pub fn emit_block_linf(model: &mut ConicModel, spec: &CvarConstraintSpec, x: &[VarId], bound: BlockBound, tag: &str) -> Result<CvarBlock> {
    expect_norm(spec, Norm::Linf)?;
    emit_block(model, spec, x, bound, tag)
}

pub fn emit_block_l1(model: &mut ConicModel, spec: &CvarConstraintSpec, x: &[VarId], bound: BlockBound, tag: &str) -> Result<CvarBlock> {
    expect_norm(spec, Norm::L1)?;
    emit_block(model, spec, x, bound, tag)
}

pub fn emit_block_l2(model: &mut ConicModel, spec: &CvarConstraintSpec, x: &[VarId], bound: BlockBound, tag: &str) -> Result<CvarBlock> {
    expect_norm(spec, Norm::L2)?;
    emit_block(model, spec, x, bound, tag)
}

/// Objective of an assembled problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Deterministic linear objective.
    Crisp { costs: Vec<f64>, sense: ObjectiveSense },
    /// Minimize the worst-case CVaR of the uncertain cost; its `rhs` is
    /// ignored.
    Robust(CvarConstraintSpec),
}

/// Polyhedral feasible set `X`: variable bounds plus dense linear rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
}

impl Domain {
    pub fn free(n: usize) -> Self {
        Self {
            lower: vec![-INF; n],
            upper: vec![INF; n],
            rows: Vec::new(),
        }
    }

    pub fn boxed(n: usize, lower: f64, upper: f64) -> Self {
        Self {
            lower: vec![lower; n],
            upper: vec![upper; n],
            rows: Vec::new(),
        }
    }

    /// `x >= 0, sum x = 1`.
    pub fn simplex(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            upper: vec![INF; n],
            rows: vec![(vec![1.0; n], Sense::Eq, 1.0)],
        }
    }

    /// Every variable fixed to the given point.
    pub fn point(x: &[f64]) -> Self {
        Self {
            lower: x.to_vec(),
            upper: x.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

/// Assembled problem with handles.
#[derive(Debug, Clone)]
pub struct Built {
    pub model: ConicModel,
    pub x: Vec<VarId>,
    /// Epigraph variable of a robust objective.
    pub h: Option<VarId>,
    /// Auxiliary variable fixed to one, present when some block has an
    /// uncertain right-hand side.
    pub x0: Option<VarId>,
    /// Objective block (if robust) first, then one per constraint.
    pub blocks: Vec<CvarBlock>,
}

impl Built {
    pub fn decision(&self, result: &SolveResult) -> Vec<f64> {
        self.x.iter().map(|v| result.x[v.index()]).collect()
    }
}

/// Assembles `min/max objective` over `x in X` subject to one worst-case
/// CVaR block per constraint.
pub fn build_problem(objective: &Objective, constraints: &[CvarConstraintSpec], domain: &Domain) -> Result<Built> {
    let n = domain.dim();
    if domain.upper.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: domain.upper.len(),
            context: "domain upper bounds",
        });
    }
    for (lo, hi) in domain.lower.iter().zip(&domain.upper) {
        if lo > hi || lo.is_nan() || hi.is_nan() {
            return Err(Error::Model(format!("domain bounds [{lo}, {hi}] are empty")));
        }
    }
    let sense = match objective {
        Objective::Crisp { sense, .. } => *sense,
        Objective::Robust(_) => ObjectiveSense::Minimize,
    };
    let mut model = ConicModel::new(sense);
    let x: Vec<VarId> = (0..n).map(|j| model.add_var(format!("x[{j}]"), domain.lower[j], domain.upper[j])).collect();
    for (k, (coeffs, s, rhs)) in domain.rows.iter().enumerate() {
        if coeffs.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: coeffs.len(),
                context: "domain row",
            });
        }
        let terms = x.iter().zip(coeffs).map(|(&v, &c)| (v, c)).collect();
        model.add_row(format!("domain[{k}]"), terms, *s, *rhs);
    }

    let specs: Vec<&CvarConstraintSpec> = match objective {
        Objective::Robust(s) => std::iter::once(s).chain(constraints).collect(),
        Objective::Crisp { .. } => constraints.iter().collect(),
    };
    let mut x0 = None;
    if specs.iter().any(|s| s.uncertain_rhs) {
        x0 = Some(model.add_var("x0", 1.0, 1.0));
    }
    for s in &specs {
        if s.decision_dim() != n {
            return Err(Error::Dimension {
                expected: n,
                got: s.decision_dim(),
                context: "block coefficient dimension",
            });
        }
    }

    let mut blocks = Vec::with_capacity(specs.len());
    let mut h = None;
    match objective {
        Objective::Crisp { costs, .. } => {
            if costs.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: costs.len(),
                    context: "objective costs",
                });
            }
            for (&v, &c) in x.iter().zip(costs) {
                model.set_objective_coeff(v, c);
            }
        }
        Objective::Robust(_) => {
            let hv = model.add_var("h", -INF, INF);
            model.set_objective_coeff(hv, 1.0);
            h = Some(hv);
        }
    }
    for (k, s) in specs.iter().enumerate() {
        let mut xs = x.clone();
        if s.uncertain_rhs {
            xs.push(x0.expect("auxiliary variable registered"));
        }
        let bound = match (k, h) {
            (0, Some(hv)) => BlockBound::Epigraph(hv),
            _ => BlockBound::Fixed(s.rhs),
        };
        let tag = match (k, h) {
            (0, Some(_)) => "obj".to_string(),
            _ => format!("c{}", if h.is_some() { k - 1 } else { k }),
        };
        blocks.push(emit_block(&mut model, s, &xs, bound, &tag)?);
    }
    Ok(Built { model, x, h, x0, blocks })
}

/// Worst-case CVaR of `g(a^T x)` at a fixed decision `x`, obtained by
/// minimizing the epigraph variable of the emitted block.
pub fn block_value(spec: &CvarConstraintSpec, x: &[f64], cfg: &SolverConfig) -> Result<f64> {
    let built = build_problem(&Objective::Robust(spec.clone()), &[], &Domain::point(x))?;
    let res = solver::solve_conic(&built.model, cfg);
    if res.status != Status::Optimal {
        return Err(Error::Model(format!("block evaluation ended with status {}", res.status)));
    }
    Ok(res.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::DeviationSpec;
    use crate::fuzzy::DeviationInterval;
    use crate::linalg::Matrix;

    fn one_dim(norm: Norm) -> PossibilityModel {
        let fi = FuzzyInterval::new(5.0, 2.0, 2.0, 1.0, 1.0).unwrap();
        let dev = DeviationSpec::identity(norm, 1, DeviationInterval::new(2.0, 1.0).unwrap()).unwrap();
        PossibilityModel::new(vec![fi], dev).unwrap()
    }

    fn spec(norm: Norm, eps: f64, ell: usize) -> CvarConstraintSpec {
        CvarConstraintSpec::new(one_dim(norm), Disutility::Identity, eps, 0.0, LambdaGrid::new(ell).unwrap()).unwrap()
    }

    #[test]
    fn linf_counts() {
        let s = spec(Norm::Linf, 0.0, 1);
        let mut m = ConicModel::new(ObjectiveSense::Minimize);
        let x = m.add_var("x", 0.0, 1.0);
        let b = emit_block_linf(&mut m, &s, &[x], BlockBound::Fixed(10.0), "c0").unwrap();
        assert_eq!(m.num_rows(), 9);
        assert_eq!(b.dual_var_count(), 10);
        assert_eq!(b.v.len(), 2);
        assert_eq!(m.num_vars(), 1 + 2 + 2 + 10);
        assert!(emit_block_l1(&mut m, &s, &[x], BlockBound::Fixed(10.0), "c1").is_err());
    }

    #[test]
    fn l1_and_l2_counts() {
        let s = spec(Norm::L1, 0.0, 1);
        let mut m = ConicModel::new(ObjectiveSense::Minimize);
        let x = m.add_var("x", 0.0, 1.0);
        let b = emit_block_l1(&mut m, &s, &[x], BlockBound::Fixed(10.0), "c0").unwrap();
        assert_eq!(b.dual_var_count(), 10);

        let s = spec(Norm::L2, 0.0, 2);
        let mut m = ConicModel::new(ObjectiveSense::Minimize);
        let x = m.add_var("x", 0.0, 1.0);
        let b = emit_block_l2(&mut m, &s, &[x], BlockBound::Fixed(10.0), "c0").unwrap();
        assert_eq!(b.cones.len(), 3);
        assert_eq!(m.cones().len(), 3);
    }

    #[test]
    fn piece_rows_scale_with_levels() {
        let mut s = spec(Norm::Linf, 0.0, 4);
        s.g = exp_tangents_at(&[0.0, 1.0, 2.0]).unwrap();
        let mut m = ConicModel::new(ObjectiveSense::Minimize);
        let x = m.add_var("x", 0.0, 1.0);
        let b = emit_block(&mut m, &s, &[x], BlockBound::Fixed(10.0), "c0").unwrap();
        assert_eq!(b.dual_rows.iter().map(Vec::len).sum::<usize>(), 3 * 5);
    }

    #[test]
    fn one_dimensional_values() {
        let cfg = SolverConfig::default();
        for norm in [Norm::Linf, Norm::L1, Norm::L2] {
            let v0 = block_value(&spec(norm, 0.0, 2), &[1.0], &cfg).unwrap();
            let v5 = block_value(&spec(norm, 0.5, 2), &[1.0], &cfg).unwrap();
            assert!((v0 - 6.5).abs() < 1e-6, "{norm}: {v0}");
            assert!((v5 - 7.0).abs() < 1e-6, "{norm}: {v5}");
            let v1 = block_value(&spec(norm, 0.0, 1), &[1.0], &cfg).unwrap();
            assert!((v1 - 7.0).abs() < 1e-6, "{norm}: {v1}");
        }
    }

    #[test]
    fn zero_decision_gives_zero() {
        let cfg = SolverConfig::default();
        for norm in [Norm::Linf, Norm::L1, Norm::L2] {
            assert!(block_value(&spec(norm, 0.3, 3), &[0.0], &cfg).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn single_unit_piece_matches_identity() {
        let cfg = SolverConfig::default();
        let mut s = spec(Norm::Linf, 0.2, 3);
        let a = block_value(&s, &[0.7], &cfg).unwrap();
        s.g = Disutility::piecewise(vec![AffinePiece {
            slope: 1.0,
            intercept: 0.0,
        }])
        .unwrap();
        let b = block_value(&s, &[0.7], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tangents_touch_exp() {
        let pts = [-1.0, 0.0, 0.5, 2.0];
        let g = exp_tangents_at(&pts).unwrap();
        for &y in &pts {
            assert!((g.eval(y) - y.exp()).abs() < 1e-12);
        }
        assert!(g.eval(1.0) <= 1f64.exp());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Disutility::piecewise(vec![]).is_err());
        assert!(Disutility::piecewise(vec![AffinePiece {
            slope: -1.0,
            intercept: 0.0
        }])
        .is_err());
        assert!(CvarConstraintSpec::new(one_dim(Norm::L1), Disutility::Identity, 1.0, 0.0, LambdaGrid::new(2).unwrap()).is_err());
        let s = spec(Norm::L1, 0.0, 2);
        let domain = Domain::boxed(2, 0.0, 1.0);
        assert!(build_problem(&Objective::Robust(s), &[], &domain).is_err());
    }

    #[test]
    fn crisp_problem_without_blocks() {
        let domain = Domain {
            lower: vec![0.0, 0.0],
            upper: vec![INF, INF],
            rows: vec![(vec![1.0, 2.0], Sense::Le, 4.0), (vec![1.0, 0.0], Sense::Le, 3.0)],
        };
        let built = build_problem(
            &Objective::Crisp {
                costs: vec![1.0, 1.0],
                sense: ObjectiveSense::Maximize,
            },
            &[],
            &domain,
        )
        .unwrap();
        assert!(built.blocks.is_empty());
        let r = solver::solve_lp(&built.model, &SolverConfig::default()).unwrap();
        assert!((r.objective - 3.5).abs() < 1e-12);
    }

    #[test]
    fn uncertain_rhs_folds_into_auxiliary_variable() {
        // a x <= b with a = <1,0,0> crisp-ish and b = <4,1,1>: worst case of
        // x - b at x = 2 with eps = 0 and ell = 1 is 2 - 3 = -1.
        let fi = FuzzyInterval::new(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let dev = DeviationSpec::identity(Norm::Linf, 1, DeviationInterval::new(5.0, 1.0).unwrap()).unwrap();
        let coeffs = PossibilityModel::new(vec![fi], dev).unwrap();
        let b = FuzzyInterval::new(4.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let s = CvarConstraintSpec::with_uncertain_rhs(coeffs, b, Disutility::Identity, 0.0, LambdaGrid::new(1).unwrap()).unwrap();
        assert_eq!(s.decision_dim(), 1);
        let built = build_problem(&Objective::Robust(s), &[], &Domain::point(&[2.0])).unwrap();
        assert!(built.x0.is_some());
        let r = solver::solve_lp(&built.model, &SolverConfig::default()).unwrap();
        assert!((r.objective + 1.0).abs() < 1e-9, "{}", r.objective);
    }

    #[test]
    fn l2_with_general_matrix() {
        let marg = vec![FuzzyInterval::symmetric(1.0, 10.0, 1.0).unwrap(); 2];
        let b = Matrix::from_rows(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let dev = DeviationSpec::new(Norm::L2, b, DeviationInterval::new(1.0, 1.0).unwrap()).unwrap();
        let coeffs = PossibilityModel::new(marg, dev).unwrap();
        let s = CvarConstraintSpec::new(coeffs.clone(), Disutility::Identity, 0.0, 0.0, LambdaGrid::new(1).unwrap()).unwrap();
        let x = [1.0, -0.5];
        let v = block_value(&s, &x, &SolverConfig::default()).unwrap();
        let (want, _) = coeffs.confidence_set(0.0).unwrap().max_linear(&x).unwrap();
        assert!((v - want).abs() < 1e-5 * (1.0 + want.abs()), "{v} vs {want}");
    }
}
