//! JSON model documents: a decision box with optional linear rows, a crisp
//! or uncertain objective and a list of worst-case CVaR constraints.
//!
//! Field-level checks run while deserializing, so a bad value is reported
//! with the line and column where the parser stood.

use serde::{Deserialize, Serialize};

use crate::ambiguity::{DeviationSpec, LambdaGrid, Norm, PossibilityModel};
use crate::error::{Error, Result};
use crate::fuzzy::{DeviationInterval, FuzzyInterval};
use crate::linalg::Matrix;
use crate::model::{ObjectiveSense, Sense};
use crate::problems::{KnapsackInstance, PortfolioInstance};
use crate::reform::{AffinePiece, CvarConstraintSpec, Disutility, Domain, Objective};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawDocument")]
pub struct ModelDocument {
    pub dimension: usize,
    /// Lower bounds; `null` entries are unbounded. Defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Bounds>,
    /// Upper bounds; `null` entries are unbounded. Defaults to unbounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Bounds>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<LinearRow>,
    pub objective: ObjectiveDoc,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<UncertainDoc>,
}

/// A bound shared by every variable, or one per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bounds {
    All(Option<f64>),
    Each(Vec<Option<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearRow {
    pub coeffs: Vec<f64>,
    pub sense: SenseDoc,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SenseDoc {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseName {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveDoc {
    Crisp { sense: SenseName, costs: Vec<f64> },
    /// Minimize the worst-case CVaR of the uncertain cost. `rhs` is ignored.
    Uncertain(UncertainDoc),
}

/// One worst-case CVaR constraint `CVaR_eps(g(a^T x)) <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertainDoc {
    pub marginals: Vec<MarginalDoc>,
    pub deviation: DeviationDoc,
    pub eps: Eps,
    pub ell: Resolution,
    #[serde(default)]
    pub rhs: RhsDoc,
    #[serde(default)]
    pub disutility: DisutilityDoc,
}

/// Fuzzy interval: nominal value, left and right spreads, left and right
/// shape exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawMarginal")]
pub struct MarginalDoc {
    pub nominal: f64,
    pub dev_lo: f64,
    pub dev_hi: f64,
    pub z1: f64,
    pub z2: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarginal {
    nominal: f64,
    dev_lo: f64,
    dev_hi: f64,
    z1: f64,
    z2: f64,
}

impl TryFrom<RawMarginal> for MarginalDoc {
    type Error = Error;
    fn try_from(r: RawMarginal) -> Result<Self> {
        let m = MarginalDoc {
            nominal: r.nominal,
            dev_lo: r.dev_lo,
            dev_hi: r.dev_hi,
            z1: r.z1,
            z2: r.z2,
        };
        m.interval()?;
        Ok(m)
    }
}

impl MarginalDoc {
    pub fn interval(&self) -> Result<FuzzyInterval> {
        FuzzyInterval::new(self.nominal, self.dev_lo, self.dev_hi, self.z1, self.z2)
    }

    pub fn from_interval(f: &FuzzyInterval) -> Self {
        Self {
            nominal: f.nominal(),
            dev_lo: f.dev_lo(),
            dev_hi: f.dev_hi(),
            z1: f.shape_lo(),
            z2: f.shape_hi(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationDoc {
    pub norm: NormDoc,
    pub budget: f64,
    /// Shape exponent of the deviation distribution.
    pub z: f64,
    /// Row-major scaling matrix; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormDoc {
    L1,
    L2,
    Linf,
}

impl From<NormDoc> for Norm {
    fn from(n: NormDoc) -> Norm {
        match n {
            NormDoc::L1 => Norm::L1,
            NormDoc::L2 => Norm::L2,
            NormDoc::Linf => Norm::Linf,
        }
    }
}

impl From<Norm> for NormDoc {
    fn from(n: Norm) -> NormDoc {
        match n {
            Norm::L1 => NormDoc::L1,
            Norm::L2 => NormDoc::L2,
            Norm::Linf => NormDoc::Linf,
        }
    }
}

/// Risk level in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Eps(f64);

impl Eps {
    pub fn new(v: f64) -> Result<Self> {
        if (0.0..1.0).contains(&v) {
            Ok(Eps(v))
        } else {
            Err(Error::Domain {
                what: "eps",
                value: v,
                domain: "[0, 1)",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Eps {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Eps::new(v)
    }
}

impl From<Eps> for f64 {
    fn from(e: Eps) -> f64 {
        e.0
    }
}

/// Number of possibility levels, at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Resolution(usize);

impl Resolution {
    pub fn new(v: usize) -> Result<Self> {
        if v >= 1 {
            Ok(Resolution(v))
        } else {
            Err(Error::Validation("ell must be at least 1".into()))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for Resolution {
    type Error = Error;
    fn try_from(v: usize) -> Result<Self> {
        Resolution::new(v)
    }
}

impl From<Resolution> for usize {
    fn from(r: Resolution) -> usize {
        r.0
    }
}

/// Crisp bound, or a fuzzy one given as a marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhsDoc {
    Crisp(f64),
    Fuzzy(MarginalDoc),
}

impl Default for RhsDoc {
    fn default() -> Self {
        RhsDoc::Crisp(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DisutilityDoc {
    #[default]
    Identity,
    /// Maximum of `slope * y + intercept`.
    Pieces(Vec<PieceDoc>),
    /// Tangents of `exp` at `count` equispaced points of `[lo, hi]`.
    ExpTangents { lo: f64, hi: f64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub slope: f64,
    pub intercept: f64,
}

impl DisutilityDoc {
    pub fn build(&self) -> Result<Disutility> {
        match self {
            DisutilityDoc::Identity => Ok(Disutility::Identity),
            DisutilityDoc::Pieces(p) => Disutility::piecewise(
                p.iter()
                    .map(|p| AffinePiece {
                        slope: p.slope,
                        intercept: p.intercept,
                    })
                    .collect(),
            ),
            DisutilityDoc::ExpTangents { lo, hi, count } => crate::problems::exp_tangents(*lo, *hi, *count),
        }
    }
}

impl UncertainDoc {
    pub fn build(&self) -> Result<CvarConstraintSpec> {
        let n = self.marginals.len();
        let marginals = self.marginals.iter().map(MarginalDoc::interval).collect::<Result<Vec<_>>>()?;
        let matrix = match &self.deviation.matrix {
            Some(rows) => Matrix::from_rows(rows)?,
            None => Matrix::identity(n),
        };
        let dev = DeviationSpec::new(
            self.deviation.norm.into(),
            matrix,
            DeviationInterval::new(self.deviation.budget, self.deviation.z)?,
        )?;
        let coeffs = PossibilityModel::new(marginals, dev)?;
        let g = self.disutility.build()?;
        let grid = LambdaGrid::new(self.ell.get())?;
        match &self.rhs {
            RhsDoc::Crisp(b) => CvarConstraintSpec::new(coeffs, g, self.eps.get(), *b, grid),
            RhsDoc::Fuzzy(b) => CvarConstraintSpec::with_uncertain_rhs(coeffs, b.interval()?, g, self.eps.get(), grid),
        }
    }

    /// Document form of a constraint spec. Fails for specs carrying an
    /// uncertain right-hand side, whose original marginal is folded into
    /// the coefficient model.
    pub fn from_spec(spec: &CvarConstraintSpec) -> Result<Self> {
        if spec.uncertain_rhs {
            return Err(Error::Usage("specs with a fuzzy right-hand side have no direct document form".into()));
        }
        let dev = spec.coeffs.deviation();
        let matrix = dev.matrix();
        let identity = matrix.is_square() && matrix.is_identity(0.0);
        let disutility = match &spec.g {
            Disutility::Identity => DisutilityDoc::Identity,
            Disutility::PiecewiseAffine(p) => DisutilityDoc::Pieces(
                p.iter()
                    .map(|p| PieceDoc {
                        slope: p.slope,
                        intercept: p.intercept,
                    })
                    .collect(),
            ),
        };
        Ok(UncertainDoc {
            marginals: spec.coeffs.marginals().iter().map(MarginalDoc::from_interval).collect(),
            deviation: DeviationDoc {
                norm: dev.norm().into(),
                budget: dev.dev().budget(),
                z: dev.dev().shape(),
                matrix: (!identity).then(|| matrix.to_rows()),
            },
            eps: Eps::new(spec.eps)?,
            ell: Resolution::new(spec.grid.resolution())?,
            rhs: RhsDoc::Crisp(spec.rhs),
            disutility,
        })
    }

    fn check(&self, n: usize, path: &str) -> Result<()> {
        if self.marginals.len() != n {
            return Err(Error::Validation(format!(
                "{path}.marginals has {} entries but the dimension is {n}",
                self.marginals.len()
            )));
        }
        if let Some(rows) = &self.deviation.matrix {
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::Validation(format!("{path}.deviation.matrix rows must have {n} entries")));
            }
        }
        if let DisutilityDoc::ExpTangents { lo, hi, count } = self.disutility {
            if !(lo < hi) || count < 2 {
                return Err(Error::Validation(format!(
                    "{path}.disutility.exp_tangents needs lo < hi and count >= 2"
                )));
            }
        }
        self.build().map(|_| ()).map_err(|e| Error::Validation(format!("{path}: {e}")))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    dimension: usize,
    #[serde(default)]
    lower: Option<Bounds>,
    #[serde(default)]
    upper: Option<Bounds>,
    #[serde(default)]
    rows: Vec<LinearRow>,
    objective: ObjectiveDoc,
    #[serde(default)]
    constraints: Vec<UncertainDoc>,
}

impl TryFrom<RawDocument> for ModelDocument {
    type Error = Error;
    fn try_from(r: RawDocument) -> Result<Self> {
        let doc = ModelDocument {
            dimension: r.dimension,
            lower: r.lower,
            upper: r.upper,
            rows: r.rows,
            objective: r.objective,
            constraints: r.constraints,
        };
        doc.check()?;
        Ok(doc)
    }
}

fn expand(b: &Option<Bounds>, n: usize, default: f64, what: &str) -> Result<Vec<f64>> {
    let fill = |v: Option<f64>| v.unwrap_or(default);
    match b {
        None => Ok(vec![default; n]),
        Some(Bounds::All(v)) => Ok(vec![fill(*v); n]),
        Some(Bounds::Each(v)) if v.len() == n => Ok(v.iter().map(|&x| fill(x)).collect()),
        Some(Bounds::Each(v)) => Err(Error::Validation(format!("{what} has {} entries but the dimension is {n}", v.len()))),
    }
}

impl ModelDocument {
    /// Parses and validates a document. Errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents contain only finite numbers")
    }

    fn check(&self) -> Result<()> {
        let n = self.dimension;
        if n == 0 {
            return Err(Error::Validation("dimension must be at least 1".into()));
        }
        let lo = expand(&self.lower, n, 0.0, "lower")?;
        let hi = expand(&self.upper, n, f64::INFINITY, "upper")?;
        if let Some(j) = (0..n).find(|&j| lo[j] > hi[j]) {
            return Err(Error::Validation(format!("bounds of variable {j} are empty: [{}, {}]", lo[j], hi[j])));
        }
        for (k, r) in self.rows.iter().enumerate() {
            if r.coeffs.len() != n {
                return Err(Error::Validation(format!(
                    "rows[{k}].coeffs has {} entries but the dimension is {n}",
                    r.coeffs.len()
                )));
            }
        }
        match &self.objective {
            ObjectiveDoc::Crisp { costs, .. } if costs.len() != n => {
                return Err(Error::Validation(format!(
                    "objective.crisp.costs has {} entries but the dimension is {n}",
                    costs.len()
                )));
            }
            ObjectiveDoc::Crisp { .. } => {}
            ObjectiveDoc::Uncertain(u) => {
                if matches!(u.rhs, RhsDoc::Fuzzy(_)) {
                    return Err(Error::Validation("objective.uncertain cannot have a fuzzy rhs".into()));
                }
                u.check(n, "objective.uncertain")?;
            }
        }
        for (k, c) in self.constraints.iter().enumerate() {
            c.check(n, &format!("constraints[{k}]"))?;
        }
        Ok(())
    }

    /// Objective, constraint specs and domain ready for assembly.
    pub fn to_problem(&self) -> Result<(Objective, Vec<CvarConstraintSpec>, Domain)> {
        let n = self.dimension;
        let domain = Domain {
            lower: expand(&self.lower, n, 0.0, "lower")?,
            upper: expand(&self.upper, n, f64::INFINITY, "upper")?,
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let s = match r.sense {
                        SenseDoc::Le => Sense::Le,
                        SenseDoc::Ge => Sense::Ge,
                        SenseDoc::Eq => Sense::Eq,
                    };
                    (r.coeffs.clone(), s, r.rhs)
                })
                .collect(),
        };
        let objective = match &self.objective {
            ObjectiveDoc::Crisp { sense, costs } => Objective::Crisp {
                costs: costs.clone(),
                sense: match sense {
                    SenseName::Min => ObjectiveSense::Minimize,
                    SenseName::Max => ObjectiveSense::Maximize,
                },
            },
            ObjectiveDoc::Uncertain(u) => Objective::Robust(u.build()?),
        };
        let constraints = self.constraints.iter().map(UncertainDoc::build).collect::<Result<Vec<_>>>()?;
        Ok((objective, constraints, domain))
    }

    /// Portfolio instance: minimize the worst-case CVaR of the tangent
    /// approximation of `exp(loss)` over the simplex.
    pub fn portfolio(inst: &PortfolioInstance) -> Result<Self> {
        let n = inst.data.mean.len();
        let mut obj = UncertainDoc::from_spec(&inst.spec()?)?;
        obj.disutility = DisutilityDoc::ExpTangents {
            lo: inst.tangent_range.0,
            hi: inst.tangent_range.1,
            count: inst.params.pieces,
        };
        Ok(ModelDocument {
            dimension: n,
            lower: Some(Bounds::All(Some(0.0))),
            upper: None,
            rows: vec![LinearRow {
                coeffs: vec![1.0; n],
                sense: SenseDoc::Eq,
                rhs: 1.0,
            }],
            objective: ObjectiveDoc::Uncertain(obj),
            constraints: Vec::new(),
        })
    }

    /// Knapsack instance: maximize profit subject to one worst-case CVaR
    /// weight constraint, items in `[0, 1]`.
    pub fn knapsack(inst: &KnapsackInstance) -> Result<Self> {
        let n = inst.weights.len();
        let p = &inst.params;
        let marginals = inst
            .weights
            .iter()
            .map(|&a| MarginalDoc {
                nominal: a,
                dev_lo: p.q * a,
                dev_hi: p.q * a,
                z1: 0.5,
                z2: 0.5,
            })
            .collect();
        Ok(ModelDocument {
            dimension: n,
            lower: Some(Bounds::All(Some(0.0))),
            upper: Some(Bounds::All(Some(1.0))),
            rows: Vec::new(),
            objective: ObjectiveDoc::Crisp {
                sense: SenseName::Max,
                costs: inst.profits.clone(),
            },
            constraints: vec![UncertainDoc {
                marginals,
                deviation: DeviationDoc {
                    norm: NormDoc::L1,
                    budget: inst.budget,
                    z: 1.0,
                    matrix: None,
                },
                eps: Eps::new(p.eps)?,
                ell: Resolution::new(p.ell)?,
                rhs: RhsDoc::Crisp(inst.capacity),
                disutility: DisutilityDoc::Identity,
            }],
        })
    }
}

/// serde_json appends " at line L column C"; the position is kept in
/// separate fields instead.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
