//! Randomized cross-check of the block reformulation against the
//! brute-force worst-case CVaR.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ambiguity::{DeviationSpec, LambdaGrid, Norm, PossibilityModel};
use crate::error::Result;
use crate::fuzzy::{DeviationInterval, FuzzyInterval};
use crate::oracle::{worst_cvar, worst_expectation};
use crate::reform::{block_value, AffinePiece, CvarConstraintSpec, Disutility};
use crate::solver::SolverConfig;

/// Largest accepted discrepancy.
pub const VERIFY_TOL: f64 = 1e-6;

/// One random small instance evaluated at a fixed decision.
#[derive(Debug, Clone)]
pub struct Trial {
    pub spec: CvarConstraintSpec,
    pub x: Vec<f64>,
}

/// Draws a trial: dimension 1 to 3, resolution 1 to 5, an L1 or Linf
/// budget (zero for one trial in ten), and an identity or piecewise
/// disutility.
pub fn random_trial<R: Rng + ?Sized>(rng: &mut R) -> Result<Trial> {
    let n = rng.gen_range(1..=3);
    let marginals = (0..n)
        .map(|_| {
            FuzzyInterval::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(0.25..3.0),
                rng.gen_range(0.25..3.0),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let norm = *[Norm::L1, Norm::Linf].choose(rng).expect("nonempty");
    let budget = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..4.0) };
    let dev = DeviationSpec::identity(norm, n, DeviationInterval::new(budget, rng.gen_range(0.25..3.0))?)?;
    let g = if rng.gen_bool(0.3) {
        let pieces = (0..rng.gen_range(1..=3))
            .map(|_| AffinePiece {
                slope: rng.gen_range(0.0..2.0),
                intercept: rng.gen_range(-1.0..1.0),
            })
            .collect();
        Disutility::piecewise(pieces)?
    } else {
        Disutility::Identity
    };
    let eps = *[0.0, 0.3, 0.7, rng.gen_range(0.0..0.95)].choose(rng).expect("nonempty");
    let spec = CvarConstraintSpec::new(
        PossibilityModel::new(marginals, dev)?,
        g,
        eps,
        0.0,
        LambdaGrid::new(rng.gen_range(1..=5))?,
    )?;
    let x = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    Ok(Trial { spec, x })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub trials: usize,
    /// Max `|block value - worst CVaR|` over all trials.
    pub max_discrepancy: f64,
    pub worst_trial: usize,
    /// Trials with `eps = 0`, and the max gap there between the block value
    /// and the worst-case expectation.
    pub eps0_trials: usize,
    pub eps0_discrepancy: f64,
    /// Trials with zero budget, and the max gap there between the block
    /// value and `g` of the nominal value.
    pub degenerate_trials: usize,
    pub degenerate_discrepancy: f64,
    /// Trials whose block could not be solved.
    pub failures: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.max_discrepancy <= VERIFY_TOL && self.eps0_discrepancy <= VERIFY_TOL && self.degenerate_discrepancy <= VERIFY_TOL
    }
}

/// Runs `trials` random instances from `seed`.
pub fn run_verification(trials: usize, seed: u64, cfg: &SolverConfig) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = VerifyReport {
        trials,
        max_discrepancy: 0.0,
        worst_trial: 0,
        eps0_trials: 0,
        eps0_discrepancy: 0.0,
        degenerate_trials: 0,
        degenerate_discrepancy: 0.0,
        failures: 0,
    };
    for k in 0..trials {
        let t = random_trial(&mut rng)?;
        let s = &t.spec;
        let Ok(block) = block_value(s, &t.x, cfg) else {
            rep.failures += 1;
            continue;
        };
        let oracle = worst_cvar(&s.coeffs, &s.grid, &t.x, &s.g, s.eps)?;
        let d = (block - oracle).abs();
        if d > rep.max_discrepancy {
            rep.max_discrepancy = d;
            rep.worst_trial = k;
        }
        if s.eps == 0.0 {
            let we = worst_expectation(&s.coeffs, &s.grid, |cs| Ok(s.g.eval(cs.max_linear(&t.x)?.0)))?;
            rep.eps0_trials += 1;
            rep.eps0_discrepancy = rep.eps0_discrepancy.max((block - we).abs());
        }
        if s.coeffs.deviation().dev().budget() == 0.0 {
            let nominal: f64 = s.coeffs.nominal().iter().zip(&t.x).map(|(a, x)| a * x).sum();
            rep.degenerate_trials += 1;
            rep.degenerate_discrepancy = rep.degenerate_discrepancy.max((block - s.g.eval(nominal)).abs());
        }
    }
    Ok(rep)
}
