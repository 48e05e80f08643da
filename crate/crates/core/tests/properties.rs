use proptest::prelude::*;

use possdro::ambiguity::{DeviationSpec, LambdaGrid, Norm, PossibilityModel};
use possdro::fuzzy::{DeviationInterval, FuzzyInterval};
use possdro::oracle::{cvar_discrete, worst_cvar, worst_expectation, DiscreteDistribution};
use possdro::problems::exp_tangents;
use possdro::reform::{block_value, AffinePiece, CvarConstraintSpec, Disutility};
use possdro::solver::SolverConfig;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

fn interval() -> impl Strategy<Value = FuzzyInterval> {
    (-50.0..50.0f64, 0.0..20.0f64, 0.0..20.0f64, 0.2..5.0f64, 0.2..5.0f64)
        .prop_map(|(n, lo, hi, z1, z2)| FuzzyInterval::new(n, lo, hi, z1, z2).unwrap())
}

fn norm() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::L1), Just(Norm::L2), Just(Norm::Linf)]
}

/// Model of dimension 1..=3 with identity scaling.
fn model() -> impl Strategy<Value = PossibilityModel> {
    (1usize..=3)
        .prop_flat_map(|n| (prop::collection::vec(interval(), n), 0.0..10.0f64, 0.2..5.0f64, norm()))
        .prop_map(|(m, budget, z, norm)| {
            let n = m.len();
            let dev = DeviationSpec::identity(norm, n, DeviationInterval::new(budget, z).unwrap()).unwrap();
            PossibilityModel::new(m, dev).unwrap()
        })
}

fn disutility() -> impl Strategy<Value = Disutility> {
    prop_oneof![
        Just(Disutility::Identity),
        prop::collection::vec((0.0..3.0f64, -5.0..5.0f64), 1..4).prop_map(|p| {
            Disutility::piecewise(p.into_iter().map(|(slope, intercept)| AffinePiece { slope, intercept }).collect()).unwrap()
        }),
    ]
}

fn decision(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, n)
}

fn with_decision() -> impl Strategy<Value = (PossibilityModel, Vec<f64>)> {
    model().prop_flat_map(|m| {
        let n = m.dim();
        (Just(m), decision(n))
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn cuts_are_nested(f in interval(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (outer_l, outer_u) = f.cut(lo).unwrap();
        let (inner_l, inner_u) = f.cut(hi).unwrap();
        prop_assert!(outer_l <= inner_l && inner_u <= outer_u);
        prop_assert!(inner_l <= f.nominal() && f.nominal() <= inner_u);
        prop_assert_eq!(f.cut(0.0).unwrap(), f.support());
        prop_assert_eq!(f.cut(1.0).unwrap(), (f.nominal(), f.nominal()));
    }

    #[test]
    fn deviation_cuts_are_nested(budget in 0.0..100.0f64, z in 0.1..10.0f64, a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let d = DeviationInterval::new(budget, z).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(d.dev_cut(hi).unwrap() <= d.dev_cut(lo).unwrap());
        prop_assert_eq!(d.dev_cut(0.0).unwrap(), budget);
        prop_assert_eq!(d.dev_cut(1.0).unwrap(), 0.0);
    }

    #[test]
    fn membership_and_cut_agree(f in interval(), lambda in 0.001..=1.0f64, t in 0.0..=1.0f64) {
        // Cut endpoints sit at level lambda, up to the change of the
        // membership across a few ulps of the stored endpoint.
        let (l, u) = f.cut(lambda).unwrap();
        let spread = |x: f64| {
            let h = 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE);
            (f.membership(x + h) - f.membership(x - h)).abs()
        };
        if f.dev_lo() > 0.0 {
            let err = (f.membership(l) - lambda).abs();
            prop_assert!(err <= 1e-12 + spread(l), "left {} vs {}", f.membership(l), lambda);
        }
        if f.dev_hi() > 0.0 {
            let err = (f.membership(u) - lambda).abs();
            prop_assert!(err <= 1e-12 + spread(u), "right {} vs {}", f.membership(u), lambda);
        }
        // Any point of the support lies in the cut at its own membership.
        let (s0, s1) = f.support();
        let x = s0 + t * (s1 - s0);
        let mu = f.membership(x);
        prop_assert!((0.0..=1.0).contains(&mu));
        if mu > 0.0 {
            let (cl, cu) = f.cut(mu).unwrap();
            let slack = 1e-12 * (1.0 + x.abs());
            prop_assert!(cl - slack <= x && x <= cu + slack, "{x} not in [{cl}, {cu}] at level {mu}");
        }
    }

    #[test]
    fn joint_possibility_is_normalized((m, x) in with_decision(), t in 0.0..=1.0f64) {
        prop_assert_eq!(m.joint_possibility(&m.nominal()), 1.0);
        let (lo, hi) = m.support_box();
        let a: Vec<f64> = lo.iter().zip(&hi).zip(&x).map(|((l, h), s)| l + (h - l) * ((s + 3.0) / 6.0 * t)).collect();
        let p = m.joint_possibility(&a);
        prop_assert!((0.0..=1.0).contains(&p));
        // A scenario is in the cut at its own possibility degree.
        if p > 0.0 {
            let cs = m.confidence_set(p).unwrap();
            prop_assert!(cs.contains(&a, 1e-9));
        }
    }

    #[test]
    fn cvar_dominates_mean(values in prop::collection::vec(-100.0..100.0f64, 1..30), eps in 0.0..0.999f64, eps2 in 0.0..0.999f64) {
        let d = DiscreteDistribution::uniform(&values).unwrap();
        let c = cvar_discrete(&d, eps).unwrap();
        prop_assert!(c >= d.mean() - 1e-9);
        prop_assert!((cvar_discrete(&d, 0.0).unwrap() - d.mean()).abs() <= 1e-9);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(c <= max + 1e-9);
        let (a, b) = (eps.min(eps2), eps.max(eps2));
        prop_assert!(cvar_discrete(&d, a).unwrap() <= cvar_discrete(&d, b).unwrap() + 1e-9);
    }

    #[test]
    fn worst_cvar_grows_with_eps((m, x) in with_decision(), g in disutility(), ell in 1usize..8, a in 0.0..0.99f64, b in 0.0..0.99f64) {
        let grid = LambdaGrid::new(ell).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        let w_lo = worst_cvar(&m, &grid, &x, &g, lo).unwrap();
        let w_hi = worst_cvar(&m, &grid, &x, &g, hi).unwrap();
        prop_assert!(w_lo <= w_hi + 1e-9 * (1.0 + w_hi.abs()));
    }

    #[test]
    fn worst_cvar_grows_with_budget((m, x) in with_decision(), g in disutility(), ell in 1usize..8, eps in 0.0..0.99f64, extra in 0.0..10.0f64) {
        let grid = LambdaGrid::new(ell).unwrap();
        let wider = m.with_budget(m.deviation().dev().budget() + extra).unwrap();
        let w = worst_cvar(&m, &grid, &x, &g, eps).unwrap();
        let w_wide = worst_cvar(&wider, &grid, &x, &g, eps).unwrap();
        prop_assert!(w <= w_wide + 1e-9 * (1.0 + w_wide.abs()));
    }

    #[test]
    fn refining_the_grid_shrinks_the_worst_case((m, x) in with_decision(), g in disutility(), ell in 1usize..8, eps in 0.0..0.99f64) {
        // Every level of the coarse grid is also a level of the doubled
        // grid, so the finer ambiguity set is contained in the coarser one.
        let coarse = LambdaGrid::new(ell).unwrap();
        let fine = LambdaGrid::new(2 * ell).unwrap();
        let wc = worst_cvar(&m, &coarse, &x, &g, eps).unwrap();
        let wf = worst_cvar(&m, &fine, &x, &g, eps).unwrap();
        prop_assert!(wf <= wc + 1e-9 * (1.0 + wc.abs()));
        let mean_c = worst_expectation(&m, &coarse, |cs| Ok(g.eval(cs.max_linear(&x)?.0))).unwrap();
        let mean_f = worst_expectation(&m, &fine, |cs| Ok(g.eval(cs.max_linear(&x)?.0))).unwrap();
        prop_assert!(mean_f <= mean_c + 1e-9 * (1.0 + mean_c.abs()));
    }

    #[test]
    fn tangent_refinement_is_nested(lo in -10.0..5.0f64, width in 0.5..10.0f64, pieces in 2usize..12, t in 0.0..=1.0f64) {
        // Doubling the step (pieces -> 2 pieces - 1) keeps every old
        // tangent point, so the finer envelope dominates the coarser one
        // and both stay below exp.
        let hi = lo + width;
        let coarse = exp_tangents(lo, hi, pieces).unwrap();
        let fine = exp_tangents(lo, hi, 2 * pieces - 1).unwrap();
        let y = lo - 1.0 + t * (width + 2.0);
        let (c, f) = (coarse.eval(y), fine.eval(y));
        let tol = 1e-12 * y.exp().max(1.0);
        prop_assert!(c <= f + tol, "coarse {c} above fine {f} at {y}");
        prop_assert!(f <= y.exp() + tol);
    }

    #[test]
    fn solved_blocks_are_monotone(
        (m, x) in with_decision(),
        g in disutility(),
        ell in 1usize..5,
        a in 0.0..0.95f64,
        b in 0.0..0.95f64,
        extra in 0.0..5.0f64,
    ) {
        let cfg = SolverConfig::default();
        let value = |m: &PossibilityModel, ell: usize, eps: f64| {
            let spec = CvarConstraintSpec::new(m.clone(), g.clone(), eps, 0.0, LambdaGrid::new(ell).unwrap()).unwrap();
            block_value(&spec, &x, &cfg).unwrap()
        };
        let (lo, hi) = (a.min(b), a.max(b));
        let base = value(&m, ell, lo);
        let tol = 1e-7 * (1.0 + base.abs());
        prop_assert!(base <= value(&m, ell, hi) + tol);
        let wider = m.with_budget(m.deviation().dev().budget() + extra).unwrap();
        prop_assert!(base <= value(&wider, ell, lo) + tol);
        prop_assert!(value(&m, 2 * ell, lo) <= base + tol);
    }
}
