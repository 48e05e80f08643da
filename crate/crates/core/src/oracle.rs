//! Brute-force evaluators of worst-case expectation and CVaR over the
//! discrete ambiguity set, independent of the block reformulation.

use rand::Rng;

use crate::ambiguity::{dot, ConfidenceSet, LambdaGrid, PossibilityModel};
use crate::error::{Error, Result};
use crate::model::{ConicModel, ObjectiveSense, Sense};
use crate::reform::Disutility;
use crate::solver::{self, SolverConfig, Status};

/// Finite distribution of a scalar random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteDistribution {
    /// `(value, probability)` pairs; probabilities must be nonnegative and
    /// sum to one within `1e-12`.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Validation("a distribution needs at least one atom".into()));
        }
        if atoms.iter().any(|(v, p)| !v.is_finite() || !(*p >= 0.0)) {
            return Err(Error::Validation("atoms need finite values and nonnegative probabilities".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn uniform(values: &[f64]) -> Result<Self> {
        let p = 1.0 / values.len() as f64;
        Self::new(values.iter().map(|&v| (v, p)).collect())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }
}

/// `min_t t + E[(X - t)_+] / (1 - eps)`, evaluated as the average of the
/// upper `1 - eps` tail of the sorted values.
pub fn cvar_discrete(d: &DiscreteDistribution, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain {
            what: "eps",
            value: eps,
            domain: "[0, 1)",
        });
    }
    let mut atoms = d.atoms.clone();
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let tail = 1.0 - eps;
    let mut left = tail;
    let mut acc = 0.0;
    for (v, p) in atoms {
        if left <= 0.0 {
            break;
        }
        let take = p.min(left);
        acc += take * v;
        left -= take;
    }
    Ok(acc / tail)
}

/// `(1/ell) * sum_{i < ell} max_{a in C(lambda_i)} h(a)`, where `max_h`
/// returns the maximum of `h` over a confidence set. Probability `1/ell` on
/// a maximizer of each nested cut is the worst case over the ambiguity set.
pub fn worst_expectation<F>(model: &PossibilityModel, grid: &LambdaGrid, mut max_h: F) -> Result<f64>
where
    F: FnMut(&ConfidenceSet) -> Result<f64>,
{
    let ell = grid.resolution();
    let mut sum = 0.0;
    for i in 0..ell {
        sum += max_h(&model.confidence_set(grid.level(i))?)?;
    }
    Ok(sum / ell as f64)
}

/// Maxima `m_i` of `a^T x` over `C(lambda_i)`, `i < ell`, with maximizers.
pub fn ring_maxima(model: &PossibilityModel, grid: &LambdaGrid, x: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
    (0..grid.resolution())
        .map(|i| model.confidence_set(grid.level(i))?.max_linear(x))
        .collect()
}

/// Worst-case CVaR of `g(a^T x)`: the CVaR of the uniform distribution over
/// `g(m_i)`.
pub fn worst_cvar(model: &PossibilityModel, grid: &LambdaGrid, x: &[f64], g: &Disutility, eps: f64) -> Result<f64> {
    let values: Vec<f64> = ring_maxima(model, grid, x)?.into_iter().map(|(m, _)| g.eval(m)).collect();
    cvar_discrete(&DiscreteDistribution::uniform(&values)?, eps)
}

const MEMBERSHIP_TOL: f64 = 1e-9;

/// Moment problem restricted to the given atoms:
/// `max sum_a p_a [g(a^T x) - t]_+` subject to
/// `sum_{a in C(lambda_i)} p_a >= 1 - lambda_i` for every level and
/// `sum p_a = 1`, solved with the bundled LP solver.
pub fn moment_lp_oracle(
    model: &PossibilityModel,
    grid: &LambdaGrid,
    atoms: &[Vec<f64>],
    x: &[f64],
    g: &Disutility,
    t: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    if atoms.iter().any(|a| a.len() != model.dim()) {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: atoms.iter().map(Vec::len).find(|&l| l != model.dim()).unwrap_or(0),
            context: "moment oracle atom",
        });
    }
    let mut lp = ConicModel::new(ObjectiveSense::Maximize);
    let p: Vec<_> = (0..atoms.len()).map(|k| lp.add_var(format!("p[{k}]"), 0.0, f64::INFINITY)).collect();
    for (k, a) in atoms.iter().enumerate() {
        lp.set_objective_coeff(p[k], (g.eval(dot(a, x)) - t).max(0.0));
    }
    lp.add_row("total", p.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 1.0);
    for i in 0..grid.len() {
        let lambda = grid.level(i);
        let need = 1.0 - lambda;
        if need <= 0.0 {
            continue;
        }
        let cs = model.confidence_set(lambda)?;
        let inside: Vec<_> = atoms
            .iter()
            .zip(&p)
            .filter(|(a, _)| cs.contains(a, MEMBERSHIP_TOL))
            .map(|(_, &v)| (v, 1.0))
            .collect();
        if inside.is_empty() {
            return Err(Error::Usage(format!("no atom lies in the cut at level {lambda}")));
        }
        lp.add_row(format!("level[{i}]"), inside, Sense::Ge, need);
    }
    let res = solver::solve_lp(&lp, cfg)?;
    match res.status {
        Status::Optimal => Ok(res.objective),
        Status::Infeasible => Err(Error::Usage("atom set cannot carry the required cut masses".into())),
        s => Err(Error::Model(format!("moment problem ended with status {s}"))),
    }
}

/// Default atoms: the maximizers of `a^T x` over each `C(lambda_i)`, the
/// nominal scenario, and `random` points of the support `C(0)` (uniform in
/// the box, pulled radially toward the nominal point when outside the
/// norm ball).
pub fn default_atoms<R: Rng + ?Sized>(model: &PossibilityModel, grid: &LambdaGrid, x: &[f64], random: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let mut atoms: Vec<Vec<f64>> = ring_maxima(model, grid, x)?.into_iter().map(|(_, a)| a).collect();
    let nominal = model.nominal();
    atoms.push(nominal.clone());
    let (lo, hi) = model.support_box();
    let radius = model.deviation().dev().budget();
    for _ in 0..random {
        let a: Vec<f64> = lo.iter().zip(&hi).map(|(&l, &h)| if h > l { rng.gen_range(l..=h) } else { l }).collect();
        let d: Vec<f64> = a.iter().zip(&nominal).map(|(a, n)| a - n).collect();
        let dist = model.deviation().distance(&d);
        let s = if dist > radius { radius / dist } else { 1.0 };
        atoms.push(nominal.iter().zip(&d).map(|(n, d)| n + s * d).collect());
    }
    Ok(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{DeviationSpec, Norm};
    use crate::fuzzy::{DeviationInterval, FuzzyInterval};

    fn one_dim() -> PossibilityModel {
        let fi = FuzzyInterval::new(5.0, 2.0, 2.0, 1.0, 1.0).unwrap();
        let dev = DeviationSpec::identity(Norm::Linf, 1, DeviationInterval::new(2.0, 1.0).unwrap()).unwrap();
        PossibilityModel::new(vec![fi], dev).unwrap()
    }

    #[test]
    fn discrete_cvar_examples() {
        let d = DiscreteDistribution::uniform(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((cvar_discrete(&d, 0.0).unwrap() - 2.5).abs() < 1e-12);
        assert!((cvar_discrete(&d, 0.5).unwrap() - 3.5).abs() < 1e-12);
        let d = DiscreteDistribution::new(vec![(0.0, 0.5), (10.0, 0.5)]).unwrap();
        assert!((cvar_discrete(&d, 0.6).unwrap() - 10.0).abs() < 1e-12);
        assert!(cvar_discrete(&d, 1.0).is_err());
        assert!(DiscreteDistribution::new(vec![(0.0, 0.4)]).is_err());
    }

    #[test]
    fn worst_expectation_examples() {
        let m = one_dim();
        let g2 = LambdaGrid::new(2).unwrap();
        let v = worst_expectation(&m, &g2, |cs| Ok(cs.max_linear(&[1.0])?.0)).unwrap();
        assert!((v - 6.5).abs() < 1e-12);
        let g1 = LambdaGrid::new(1).unwrap();
        let v = worst_expectation(&m, &g1, |cs| Ok(cs.max_linear(&[1.0])?.0)).unwrap();
        assert!((v - 7.0).abs() < 1e-12);
        let v = worst_expectation(&m, &LambdaGrid::new(7).unwrap(), |_| Ok(3.25)).unwrap();
        assert!((v - 3.25).abs() < 1e-12);
    }

    #[test]
    fn worst_cvar_examples() {
        let m = one_dim();
        let g = LambdaGrid::new(2).unwrap();
        let id = Disutility::Identity;
        assert!((worst_cvar(&m, &g, &[1.0], &id, 0.0).unwrap() - 6.5).abs() < 1e-12);
        assert!((worst_cvar(&m, &g, &[1.0], &id, 0.5).unwrap() - 7.0).abs() < 1e-12);
        assert!((worst_cvar(&m, &g, &[1.0], &id, 0.999).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn moment_lp_examples() {
        let m = one_dim();
        let g = LambdaGrid::new(2).unwrap();
        let id = Disutility::Identity;
        let cfg = SolverConfig::default();
        let atoms = vec![vec![3.0], vec![5.0], vec![7.0]];
        assert!((moment_lp_oracle(&m, &g, &atoms, &[1.0], &id, 0.0, &cfg).unwrap() - 6.0).abs() < 1e-9);
        let only = vec![vec![5.0]];
        assert!((moment_lp_oracle(&m, &g, &only, &[1.0], &id, 1.5, &cfg).unwrap() - 3.5).abs() < 1e-9);
        assert!(moment_lp_oracle(&m, &g, &atoms, &[1.0], &id, 8.0, &cfg).unwrap().abs() < 1e-12);
        let outside = vec![vec![3.0], vec![7.0]];
        assert!(matches!(moment_lp_oracle(&m, &g, &outside, &[1.0], &id, 0.0, &cfg), Err(Error::Usage(_))));
    }
}
