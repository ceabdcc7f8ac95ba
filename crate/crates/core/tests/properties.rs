use proptest::prelude::*;

use ipd_basins::basin::{m0_bound, random_strict_nash, task_rng};
use ipd_basins::payoff::{
    eqpath_payoff, horizon_for, payoff_exact, payoff_matrix, payoff_truncated, PayoffMatrix, PlayPath,
    TremblePayoffContext,
};
use ipd_basins::replicator::{
    affine_form, integrate, pairwise_barrier, perturbed_vector_field, vector_field, IntegrateOptions, Perturbation,
    SimplexPoint,
};
use ipd_basins::robustness::{best_deviation_eqpath, best_deviation_full, efficiency_spot_checks, ulb_estimates, OPTIMALITY_TOL};
use ipd_basins::strategy::{run_history, standard_library, Action, HistorySeed, PayoffParams, StrategyAutomaton};

fn action() -> impl Strategy<Value = Action> {
    prop_oneof![Just(Action::C), Just(Action::D)]
}

fn seed(max: usize) -> impl Strategy<Value = HistorySeed> {
    prop::collection::vec((action(), action()), 0..=max).prop_map(HistorySeed::new)
}

/// Random automaton with up to five states.
fn automaton() -> impl Strategy<Value = StrategyAutomaton> {
    (1usize..=5)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(action(), n),
                prop::collection::vec(prop::array::uniform4(0..n), n),
            )
        })
        .prop_map(|(intended, next)| {
            let labels = (0..intended.len()).map(|i| format!("q{i}")).collect();
            StrategyAutomaton::new("random", 0, intended, next, labels).expect("valid tables")
        })
}

fn simplex_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn square(n: usize) -> impl Strategy<Value = PayoffMatrix> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, n), n)
        .prop_map(|rows| PayoffMatrix::from_rows(rows).unwrap())
}

fn library(i: usize) -> StrategyAutomaton {
    standard_library().swap_remove(i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swap_is_an_involution(h in seed(8)) {
        prop_assert_eq!(h.swap().swap(), h.clone());
        prop_assert_eq!(h.swap().len(), h.len());
    }

    #[test]
    fn payoffs_stay_within_stage_range(s1 in automaton(), s2 in automaton(), delta in 0.1f64..0.98, p in 0.5f64..=1.0) {
        let ctx = TremblePayoffContext::standard(delta, p).unwrap();
        let u = payoff_exact(&ctx, &s1, &s2).unwrap();
        prop_assert!(u >= ctx.params.s - 1e-9 && u <= ctx.params.t + 1e-9);
    }

    #[test]
    fn exact_matches_truncated(s1 in automaton(), s2 in automaton(), delta in 0.1f64..0.95, p in 0.5f64..=1.0) {
        let ctx = TremblePayoffContext::standard(delta, p).unwrap();
        let h = horizon_for(delta, ctx.params.m(), 1e-10);
        let t = payoff_truncated(&ctx, &s1, &s2, h).unwrap();
        let e = payoff_exact(&ctx, &s1, &s2).unwrap();
        prop_assert!((t.value - e).abs() <= t.error_bound + 1e-12);
    }

    #[test]
    fn untrembled_payoff_is_the_play_path(s1 in automaton(), s2 in automaton(), delta in 0.1f64..0.98) {
        let ctx = TremblePayoffContext::standard(delta, 1.0).unwrap();
        let e = payoff_exact(&ctx, &s1, &s2).unwrap();
        let path = eqpath_payoff(&ctx, &s1, &s2, s1.initial, s2.initial);
        prop_assert!((e - path).abs() < 1e-10);
    }

    #[test]
    fn swapped_paths_swap_temptation_and_sucker(s1 in automaton(), s2 in automaton(), h in seed(5), beta in 0.1f64..0.99) {
        let hh = h.swap();
        let a = PlayPath::new(&s1, &s2, run_history(&s1, &h), run_history(&s2, &hh)).masses(beta);
        let b = PlayPath::new(&s2, &s1, run_history(&s2, &hh), run_history(&s1, &h)).masses(beta);
        prop_assert_eq!((a.r, a.t, a.s, a.p), (b.r, b.s, b.t, b.p));
        prop_assert!((a.r + a.t + a.s + a.p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hat_identity_holds_for_any_automaton(s in automaton(), delta in 0.5f64..0.99) {
        let e = efficiency_spot_checks(&s, delta, &PayoffParams::default(), 3).unwrap();
        prop_assert!(e.max_wef3_residual < 1e-12);
    }

    #[test]
    fn best_response_dominates_conforming(s in automaton(), delta in 0.5f64..0.95, p in 0.8f64..=1.0) {
        let ctx = TremblePayoffContext::standard(delta, p).unwrap();
        for r in [best_deviation_full(&s, &ctx).unwrap(), best_deviation_eqpath(&s, &ctx).unwrap()] {
            for g in &r.states {
                prop_assert!(g.optimal >= g.conform - OPTIMALITY_TOL);
                prop_assert!(g.optimal >= g.deviation - OPTIMALITY_TOL);
            }
        }
    }

    #[test]
    fn vector_field_is_tangent(a in square(4), x in simplex_point(4)) {
        let f = vector_field(&a, &SimplexPoint::new(x).unwrap()).unwrap();
        prop_assert!(f.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn integration_stays_on_simplex(a in square(3), x in simplex_point(3)) {
        let opts = IntegrateOptions { record_every: 50, ..Default::default() };
        let t = integrate(&a, &SimplexPoint::new(x).unwrap(), 20.0, &opts).unwrap();
        for p in &t.points {
            prop_assert!(p.iter().all(|v| *v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_keeps_growth_signs(a in square(4), x in simplex_point(4), pivot in 0usize..4) {
        let pt = SimplexPoint::new(x.clone()).unwrap();
        let f = perturbed_vector_field(&a, &Perturbation::half_share(), &pt).unwrap();
        let plain = vector_field(&a, &pt).unwrap();
        // factors lie in [1, 1.5], so each component keeps its sign
        for j in 0..4 {
            prop_assert!(f[j] * plain[j] >= 0.0);
            prop_assert!(f[j].abs() >= plain[j].abs() - 1e-15 && f[j].abs() <= 1.5 * plain[j].abs() + 1e-15);
        }
        let _ = pivot;
    }

    #[test]
    fn corner_bound_below_every_barrier(k in 0u64..1000, n in 2usize..7) {
        let a = random_strict_nash(&mut task_rng(11, k), n);
        let b = m0_bound(&affine_form(&a, 0).unwrap()).unwrap();
        for j in 1..n {
            let barrier = pairwise_barrier(&a, 0, j);
            prop_assert!(!barrier.interior || b.radius <= barrier.value + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn family_constant_is_the_corner_constant(delta in 0.6f64..0.95, p in 0.9f64..0.999, pick in prop::sample::subsequence(vec![0usize, 1, 2, 3, 4, 6], 1..=4)) {
        let ctx = TremblePayoffContext::standard(delta, p).unwrap();
        let w = library(5);
        let family: Vec<_> = pick.iter().map(|&i| library(i)).collect();
        let mut all = vec![w.clone()];
        all.extend(family.iter().cloned());
        let full = payoff_matrix(&ctx, &all).unwrap();
        let admissible = (1..all.len()).any(|k| full.get(0, 0) > full.get(k, 0));
        match ulb_estimates(&w, &family, &ctx) {
            Ok(est) => {
                prop_assert!(admissible);
                let m0 = m0_bound(&affine_form(&est.matrix, 0).unwrap()).unwrap().m0;
                prop_assert!((est.m_hat - m0).abs() <= 1e-9 * m0.max(1.0));
            }
            Err(_) => prop_assert!(!admissible),
        }
    }
}
