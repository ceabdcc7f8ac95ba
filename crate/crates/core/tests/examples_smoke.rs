//! Every example must run to completion.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[allow(dead_code)]
        #[path = $path]
        mod $name;

        #[test]
        fn $name() {
            $name::run_example().expect(stringify!($name));
        }
    };
}

example!(payoff_matrix, "../examples/payoff_matrix.rs");
example!(replicator_flow, "../examples/replicator_flow.rs");
example!(basin_bound, "../examples/basin_bound.rs");
example!(counterexample, "../examples/counterexample.rs");
example!(grim_collapse, "../examples/grim_collapse.rs");
example!(wsls_robustness, "../examples/wsls_robustness.rs");
example!(ulb_estimates, "../examples/ulb_estimates.rs");
example!(perturbed_dynamics, "../examples/perturbed_dynamics.rs");
example!(custom_automaton, "../examples/custom_automaton.rs");
example!(cli_reports, "../examples/cli_reports.rs");
