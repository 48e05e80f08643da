//! The two case studies: a continuous knapsack with uncertain weights and
//! a portfolio selection with uncertain returns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::ambiguity::{DeviationSpec, LambdaGrid, Norm, PossibilityModel};
use crate::error::{Error, Result};
use crate::fuzzy::{DeviationInterval, FuzzyInterval};
use crate::linalg::Matrix;
use crate::model::ObjectiveSense;
use crate::reform::{build_problem, exp_tangents_at, Built, CvarConstraintSpec, Disutility, Domain, Objective};

pub use crate::linalg::inv_sqrt_cov;

/// Name of the generator behind every seeded instance.
pub const PRNG_NAME: &str = "ChaCha8";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnapsackParams {
    pub n: usize,
    pub seed: u64,
    /// Relative weight deviation.
    pub q: f64,
    /// Deviation budget as a fraction of the total nominal weight.
    pub delta: f64,
    pub eps: f64,
    pub ell: usize,
}

impl Default for KnapsackParams {
    fn default() -> Self {
        Self {
            n: 50,
            seed: 1,
            q: 0.4,
            delta: 0.0,
            eps: 0.0,
            ell: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    pub params: KnapsackParams,
    pub profits: Vec<f64>,
    pub weights: Vec<f64>,
    /// `0.3 * sum(weights)`.
    pub capacity: f64,
    /// `delta * sum(weights)`.
    pub budget: f64,
}

/// Nominal weights uniform on `[1, 100]`, then profits uniform on
/// `[10, 100]`, both drawn from one seeded stream.
pub fn knapsack_data(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..=100.0)).collect();
    let profits: Vec<f64> = (0..n).map(|_| rng.gen_range(10.0..=100.0)).collect();
    (profits, weights)
}

/// `max c^T x` subject to a worst-case CVaR bound on the total weight and
/// `0 <= x <= 1`. Weights are `<a, q a, q a>_{0.5-0.5}` with an L1 deviation
/// budget `delta * sum(a)` of shape 1.
pub fn gen_knapsack(p: &KnapsackParams) -> Result<(KnapsackInstance, Built)> {
    if !(0.0..=1.0).contains(&p.delta) {
        return Err(Error::Domain {
            what: "delta",
            value: p.delta,
            domain: "[0, 1]",
        });
    }
    if !(0.0..=1.0).contains(&p.q) {
        return Err(Error::Domain {
            what: "q",
            value: p.q,
            domain: "[0, 1]",
        });
    }
    if p.n == 0 {
        return Err(Error::Validation("a knapsack needs at least one item".into()));
    }
    let (profits, weights) = knapsack_data(p.n, p.seed);
    let total: f64 = weights.iter().sum();
    let capacity = 0.3 * total;
    let budget = p.delta * total;
    let marginals = weights
        .iter()
        .map(|&a| FuzzyInterval::new(a, p.q * a, p.q * a, 0.5, 0.5))
        .collect::<Result<Vec<_>>>()?;
    let dev = DeviationSpec::identity(Norm::L1, p.n, DeviationInterval::new(budget, 1.0)?)?;
    let spec = CvarConstraintSpec::new(
        PossibilityModel::new(marginals, dev)?,
        Disutility::Identity,
        p.eps,
        capacity,
        LambdaGrid::new(p.ell)?,
    )?;
    let built = build_problem(
        &Objective::Crisp {
            costs: profits.clone(),
            sense: ObjectiveSense::Maximize,
        },
        &[spec],
        &Domain::boxed(p.n, 0.0, 1.0),
    )?;
    Ok((
        KnapsackInstance {
            params: *p,
            profits,
            weights,
            capacity,
            budget,
        },
        built,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioData {
    pub mean: Vec<f64>,
    pub cov: Matrix,
}

#[derive(Deserialize)]
struct PortfolioFile {
    assets: usize,
    mean_return: Vec<f64>,
    covariance_upper: Vec<Vec<f64>>,
}

impl PortfolioData {
    /// Six bank stocks: mean returns and covariance (upper triangle in the
    /// bundled file).
    pub fn bundled() -> Self {
        Self::from_json(include_str!("../data/portfolio.json")).expect("bundled portfolio data is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: PortfolioFile = serde_json::from_str(text).map_err(|e| Error::Validation(format!("portfolio data: {e}")))?;
        let n = f.assets;
        if f.mean_return.len() != n || f.covariance_upper.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: f.mean_return.len().min(f.covariance_upper.len()),
                context: "portfolio data",
            });
        }
        let mut cov = Matrix::zeros(n, n);
        for (i, row) in f.covariance_upper.iter().enumerate() {
            if row.len() != n - i {
                return Err(Error::Dimension {
                    expected: n - i,
                    got: row.len(),
                    context: "covariance upper-triangle row",
                });
            }
            for (k, &v) in row.iter().enumerate() {
                cov[(i, i + k)] = v;
                cov[(i + k, i)] = v;
            }
        }
        Ok(Self { mean: f.mean_return, cov })
    }

    pub fn sigma(&self) -> Vec<f64> {
        (0..self.mean.len()).map(|j| self.cov[(j, j)].sqrt()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioParams {
    /// Deviation budget in units of the Mahalanobis distance.
    pub delta_bar: f64,
    pub eps: f64,
    pub ell: usize,
    /// Tangent pieces approximating `exp`.
    pub pieces: usize,
}

impl Default for PortfolioParams {
    fn default() -> Self {
        Self {
            delta_bar: 4.0,
            eps: 0.4,
            ell: 20,
            pieces: 10,
        }
    }
}

/// Half-width of the support in standard deviations.
pub const SUPPORT_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioInstance {
    pub params: PortfolioParams,
    pub data: PortfolioData,
    /// `Sigma^{-1/2}`.
    pub scaling: Matrix,
    /// Possibility model of the loss coefficients `-r`.
    pub loss: PossibilityModel,
    pub disutility: Disutility,
    pub tangent_range: (f64, f64),
}

impl PortfolioInstance {
    /// Everything in the asset with the largest nominal return.
    pub fn nominal_portfolio(&self) -> Vec<f64> {
        let best = (0..self.data.mean.len())
            .max_by(|&a, &b| self.data.mean[a].total_cmp(&self.data.mean[b]))
            .unwrap_or(0);
        let mut x = vec![0.0; self.data.mean.len()];
        x[best] = 1.0;
        x
    }

    pub fn spec(&self) -> Result<CvarConstraintSpec> {
        CvarConstraintSpec::new(
            self.loss.clone(),
            self.disutility.clone(),
            self.params.eps,
            0.0,
            LambdaGrid::new(self.params.ell)?,
        )
    }
}

/// `pieces` tangents of `exp` at equispaced points of `[y_lo, y_hi]`.
pub fn exp_tangents(y_lo: f64, y_hi: f64, pieces: usize) -> Result<Disutility> {
    if !(y_lo.is_finite() && y_hi.is_finite() && y_lo < y_hi) {
        return Err(Error::Validation(format!("tangent range [{y_lo}, {y_hi}] is empty")));
    }
    if pieces < 2 {
        return Err(Error::Validation("at least two tangent pieces are needed".into()));
    }
    let step = (y_hi - y_lo) / (pieces - 1) as f64;
    let points: Vec<f64> = (0..pieces).map(|k| if k + 1 == pieces { y_hi } else { y_lo + step * k as f64 }).collect();
    exp_tangents_at(&points)
}

/// Extreme losses `-r^T x` over `C(0)` for `x` in the simplex, padded by 5%
/// of the span on each side. Along asset `j` the deviation ball reaches
/// `delta_bar * sigma_j`, so the reach is `min(6, delta_bar)` deviations.
pub fn loss_range(data: &PortfolioData, delta_bar: f64) -> (f64, f64) {
    let k = SUPPORT_SIGMAS.min(delta_bar);
    let sigma = data.sigma();
    let lo = data.mean.iter().zip(&sigma).map(|(r, s)| -r - k * s).fold(f64::INFINITY, f64::min);
    let hi = data.mean.iter().zip(&sigma).map(|(r, s)| -r + k * s).fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// `min h` subject to a worst-case CVaR of `exp(-r^T x)` not exceeding `h`
/// and `x` in the simplex. Returns `<-r, 6 sigma, 6 sigma>_{1-1}` marginals
/// with an L2 deviation through `Sigma^{-1/2}` of shape 1.
pub fn build_portfolio(p: &PortfolioParams) -> Result<(PortfolioInstance, Built)> {
    build_portfolio_with(&PortfolioData::bundled(), p)
}

pub fn build_portfolio_with(data: &PortfolioData, p: &PortfolioParams) -> Result<(PortfolioInstance, Built)> {
    if !(p.delta_bar.is_finite() && p.delta_bar >= 0.0) {
        return Err(Error::Domain {
            what: "delta_bar",
            value: p.delta_bar,
            domain: "[0, inf)",
        });
    }
    let scaling = inv_sqrt_cov(&data.cov)?;
    let sigma = data.sigma();
    let marginals = data
        .mean
        .iter()
        .zip(&sigma)
        .map(|(&r, &s)| FuzzyInterval::new(-r, SUPPORT_SIGMAS * s, SUPPORT_SIGMAS * s, 1.0, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let dev = DeviationSpec::new(Norm::L2, scaling.clone(), DeviationInterval::new(p.delta_bar, 1.0)?)?;
    let loss = PossibilityModel::new(marginals, dev)?;
    let tangent_range = loss_range(data, p.delta_bar);
    let disutility = exp_tangents(tangent_range.0, tangent_range.1, p.pieces)?;
    let inst = PortfolioInstance {
        params: *p,
        data: data.clone(),
        scaling,
        loss,
        disutility,
        tangent_range,
    };
    let built = build_problem(&Objective::Robust(inst.spec()?), &[], &Domain::simplex(data.mean.len()))?;
    Ok((inst, built))
}
