//! Joint possibility distributions over scenario vectors, their lambda-cuts
//! (confidence sets) and the linear maximization over a confidence set.

use rand::Rng;

use crate::error::{check_unit_interval, Error, Result};
use crate::fuzzy::{DeviationInterval, FuzzyInterval};
use crate::linalg::Matrix;
use crate::solver::{self, SolverConfig, Status};

/// Norm used to measure the distance of a scenario from the nominal one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

impl std::fmt::Display for Norm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        })
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "inf" | "l_inf" => Ok(Norm::Linf),
            other => Err(Error::Validation(format!("unknown norm '{other}' (expected l1, l2 or linf)"))),
        }
    }
}

/// Deviation `||B (a - a_hat)||_p` together with its possibility distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationSpec {
    norm: Norm,
    matrix: Matrix,
    dev: DeviationInterval,
}

impl DeviationSpec {
    /// L1 and Linf deviations require `B = I`; L2 requires a square,
    /// nonsingular `B`.
    pub fn new(norm: Norm, matrix: Matrix, dev: DeviationInterval) -> Result<Self> {
        match norm {
            Norm::L1 | Norm::Linf => {
                if !matrix.is_identity(0.0) {
                    return Err(Error::Model(format!(
                        "{norm} deviation supports only the identity matrix"
                    )));
                }
            }
            Norm::L2 => {
                if !matrix.is_square() {
                    return Err(Error::Model(format!(
                        "l2 deviation matrix must be square, got {}x{}",
                        matrix.rows(),
                        matrix.cols()
                    )));
                }
                if matrix.rows() == 0 || matrix.relative_min_pivot() < 1e-12 {
                    return Err(Error::Model("l2 deviation matrix is singular".into()));
                }
            }
        }
        Ok(Self { norm, matrix, dev })
    }

    pub fn identity(norm: Norm, n: usize, dev: DeviationInterval) -> Result<Self> {
        Self::new(norm, Matrix::identity(n), dev)
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dev(&self) -> DeviationInterval {
        self.dev
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    /// `||B d||_p` for a displacement `d = a - a_hat`.
    pub fn distance(&self, displacement: &[f64]) -> f64 {
        if self.norm == Norm::L2 {
            self.norm.eval(&self.matrix.mul_vec(displacement))
        } else {
            self.norm.eval(displacement)
        }
    }
}

/// Joint possibility distribution `pi(a) = min(mu_1(a_1), ..., mu_n(a_n), mu_delta(||B(a - a_hat)||))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PossibilityModel {
    marginals: Vec<FuzzyInterval>,
    deviation: DeviationSpec,
}

impl PossibilityModel {
    pub fn new(marginals: Vec<FuzzyInterval>, deviation: DeviationSpec) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::Model("a possibility model needs at least one coefficient".into()));
        }
        if deviation.dim() != marginals.len() {
            return Err(Error::Dimension {
                expected: marginals.len(),
                got: deviation.dim(),
                context: "deviation matrix columns",
            });
        }
        Ok(Self { marginals, deviation })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[FuzzyInterval] {
        &self.marginals
    }

    pub fn deviation(&self) -> &DeviationSpec {
        &self.deviation
    }

    pub fn nominal(&self) -> Vec<f64> {
        self.marginals.iter().map(FuzzyInterval::nominal).collect()
    }

    /// Componentwise support bounds (the box `I`).
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        self.marginals.iter().map(FuzzyInterval::support).unzip()
    }

    /// Same model with a different deviation budget.
    pub fn with_budget(&self, budget: f64) -> Result<Self> {
        let dev = DeviationInterval::new(budget, self.deviation.dev.shape())?;
        Ok(Self {
            marginals: self.marginals.clone(),
            deviation: DeviationSpec {
                dev,
                ..self.deviation.clone()
            },
        })
    }

    /// Possibility degree of scenario `a`.
    pub fn joint_possibility(&self, a: &[f64]) -> f64 {
        assert_eq!(a.len(), self.dim(), "scenario dimension");
        let mut deg = 1.0_f64;
        for (fi, &aj) in self.marginals.iter().zip(a) {
            deg = deg.min(fi.membership(aj));
            if deg == 0.0 {
                return 0.0;
            }
        }
        let displacement: Vec<f64> = a.iter().zip(&self.marginals).map(|(x, fi)| x - fi.nominal()).collect();
        deg.min(self.deviation.dev.membership(self.deviation.distance(&displacement)))
    }

    /// The confidence set `C(lambda)`; `C(0)` is the support `I ∩ D`.
    pub fn confidence_set(&self, lambda: f64) -> Result<ConfidenceSet> {
        check_unit_interval("lambda", lambda)?;
        let mut lower = Vec::with_capacity(self.dim());
        let mut upper = Vec::with_capacity(self.dim());
        for fi in &self.marginals {
            let (lo, hi) = fi.cut(lambda)?;
            lower.push(lo);
            upper.push(hi);
        }
        Ok(ConfidenceSet {
            level: lambda,
            nominal: self.nominal(),
            lower,
            upper,
            radius: self.deviation.dev.dev_cut(lambda)?,
            deviation: self.deviation.clone(),
        })
    }
}

/// Uniform grid `lambda_i = i / resolution`, `i = 0..=resolution`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LambdaGrid {
    resolution: usize,
}

impl LambdaGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::Validation("lambda grid resolution must be at least 1".into()));
        }
        Ok(Self { resolution })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Number of levels, `resolution + 1`.
    pub fn len(&self) -> usize {
        self.resolution + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn level(&self, i: usize) -> f64 {
        assert!(i <= self.resolution);
        i as f64 / self.resolution as f64
    }

    pub fn levels(&self) -> Vec<f64> {
        (0..=self.resolution).map(|i| self.level(i)).collect()
    }
}

/// `C(lambda) = { a : lower <= a <= upper, ||B (a - a_hat)||_p <= radius }`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceSet {
    level: f64,
    nominal: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    radius: f64,
    deviation: DeviationSpec,
}

impl ConfidenceSet {
    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nominal(&self) -> &[f64] {
        &self.nominal
    }

    pub fn deviation(&self) -> &DeviationSpec {
        &self.deviation
    }

    pub fn dim(&self) -> usize {
        self.nominal.len()
    }

    pub fn contains(&self, a: &[f64], tol: f64) -> bool {
        if a.len() != self.dim() {
            return false;
        }
        let in_box = a
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (lo, hi))| *x >= lo - tol && *x <= hi + tol);
        in_box && {
            let d: Vec<f64> = a.iter().zip(&self.nominal).map(|(x, n)| x - n).collect();
            self.deviation.distance(&d) <= self.radius + tol
        }
    }

    /// Exact maximizer of `a^T x` over the set (L1, Linf and L2 with
    /// `B = I`); for L2 with a general `B` the value is the conic solver's
    /// outer-approximation optimum, which is an upper bound accurate to the
    /// solver's cone tolerance.
    pub fn max_linear(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
                context: "max_linear objective",
            });
        }
        let argmax = match self.deviation.norm {
            Norm::Linf => self.argmax_linf(x),
            Norm::L1 => self.argmax_l1(x),
            Norm::L2 if self.deviation.matrix.is_identity(0.0) => self.argmax_l2_identity(x),
            Norm::L2 => return self.max_l2_conic(x),
        };
        Ok((dot(&argmax, x), argmax))
    }

    fn argmax_linf(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|j| {
                let n = self.nominal[j];
                if x[j] > 0.0 {
                    self.upper[j].min(n + self.radius)
                } else if x[j] < 0.0 {
                    self.lower[j].max(n - self.radius)
                } else {
                    n
                }
            })
            .collect()
    }

    fn argmax_l1(&self, x: &[f64]) -> Vec<f64> {
        let mut a = self.nominal.clone();
        let mut order: Vec<usize> = (0..self.dim()).filter(|&j| x[j] != 0.0).collect();
        // stable sort keeps the lowest index first among equal |x_j|
        order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()));
        let mut budget = self.radius;
        for j in order {
            if budget <= 0.0 {
                break;
            }
            let room = if x[j] > 0.0 {
                self.upper[j] - self.nominal[j]
            } else {
                self.nominal[j] - self.lower[j]
            };
            let step = room.min(budget);
            a[j] += step * x[j].signum();
            budget -= step;
        }
        a
    }

    fn argmax_l2_identity(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let lo: Vec<f64> = (0..n).map(|j| self.lower[j] - self.nominal[j]).collect();
        let hi: Vec<f64> = (0..n).map(|j| self.upper[j] - self.nominal[j]).collect();
        let clip = |tau: f64| -> Vec<f64> {
            (0..n)
                .map(|j| {
                    if x[j] == 0.0 {
                        0.0
                    } else {
                        (tau * x[j]).clamp(lo[j], hi[j])
                    }
                })
                .collect()
        };
        let corner: Vec<f64> = (0..n)
            .map(|j| if x[j] > 0.0 { hi[j] } else if x[j] < 0.0 { lo[j] } else { 0.0 })
            .collect();
        let d = if Norm::L2.eval(&corner) <= self.radius {
            corner
        } else {
            // ||clip(tau x)|| is continuous and nondecreasing in tau
            let (mut a, mut b) = (0.0_f64, 1.0_f64);
            while Norm::L2.eval(&clip(b)) < self.radius {
                b *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if Norm::L2.eval(&clip(mid)) < self.radius {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            clip(a)
        };
        d.iter().zip(&self.nominal).map(|(d, n)| d + n).collect()
    }

    fn max_l2_conic(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        use crate::model::{ConicModel, ObjectiveSense, Sense};
        let n = self.dim();
        let b = &self.deviation.matrix;
        let mut m = ConicModel::new(ObjectiveSense::Maximize);
        let d: Vec<_> = (0..n)
            .map(|j| m.add_var(format!("d[{j}]"), self.lower[j] - self.nominal[j], self.upper[j] - self.nominal[j]))
            .collect();
        let e: Vec<_> = (0..b.rows())
            .map(|k| m.add_var(format!("e[{k}]"), f64::NEG_INFINITY, f64::INFINITY))
            .collect();
        let r = m.add_var("r", self.radius, self.radius);
        for k in 0..b.rows() {
            let mut terms = vec![(e[k], -1.0)];
            terms.extend((0..n).filter(|&j| b[(k, j)] != 0.0).map(|j| (d[j], b[(k, j)])));
            m.add_row(format!("ball[{k}]"), terms, Sense::Eq, 0.0);
        }
        m.add_cone("ball", r, e.clone());
        for j in 0..n {
            m.set_objective_coeff(d[j], x[j]);
        }
        let res = solver::solve_conic(&m, &SolverConfig::default());
        if res.status != Status::Optimal {
            return Err(Error::Model(format!("inner l2 maximization ended with status {:?}", res.status)));
        }
        let argmax: Vec<f64> = (0..n).map(|j| res.x[d[j].index()] + self.nominal[j]).collect();
        Ok((res.objective + dot(&self.nominal, x), argmax))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Monte Carlo estimate of the necessity `N(C(lambda)) = 1 - sup_{a not in C(lambda)} pi(a)`,
/// sampling the bounding box of the support uniformly.
pub fn necessity_of_cut<R: Rng + ?Sized>(
    model: &PossibilityModel,
    lambda: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let cs = model.confidence_set(lambda)?;
    let (lo, hi) = model.support_box();
    let mut point = vec![0.0; model.dim()];
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        for j in 0..point.len() {
            point[j] = if hi[j] > lo[j] { rng.gen_range(lo[j]..=hi[j]) } else { lo[j] };
        }
        if !cs.contains(&point, 0.0) {
            worst = worst.max(model.joint_possibility(&point));
        }
    }
    Ok(1.0 - worst)
}
