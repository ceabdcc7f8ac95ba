//! Replicator flow for grim, always-defect and win-stay-lose-shift.
//!
//! Run with `cargo run --example replicator_flow`.

use ipd_basins::payoff::{payoff_matrix, TremblePayoffContext};
use ipd_basins::replicator::{integrate, pairwise_barrier, vertex_eigenvalues, IntegrateOptions, SimplexPoint, Terminal};
use ipd_basins::strategy::StrategyAutomaton;

pub fn run_example() -> ipd_basins::Result<()> {
    let ctx = TremblePayoffContext::standard(0.9, 0.99)?;
    let strategies = ["wsls", "allD", "grim"].map(|s| s.parse::<StrategyAutomaton>()).into_iter().collect::<Result<Vec<_>, _>>()?;
    let a = payoff_matrix(&ctx, &strategies)?;

    for i in 0..3 {
        println!("{:>5} eigenvalues {:?}", a.labels[i], vertex_eigenvalues(&a, i));
    }
    let b = pairwise_barrier(&a, 0, 1);
    println!("allD must exceed a share of {:.4} to take over from wsls", b.value);

    let opts = IntegrateOptions { record_every: 500, ..Default::default() };
    for start in [[0.6, 0.3, 0.1], [0.2, 0.7, 0.1], [0.1, 0.1, 0.8]] {
        let t = integrate(&a, &SimplexPoint::new(start.to_vec())?, 2000.0, &opts)?;
        let end = match t.terminal {
            Terminal::ConvergedToVertex(v) => a.labels[v].clone(),
            other => format!("{other:?}"),
        };
        println!("{start:?} -> {end} after {} steps", t.steps);
        for (time, x) in t.times.iter().zip(&t.points).take(4) {
            println!("    t={time:>6.1} x=[{:.4}, {:.4}, {:.4}]", x[0], x[1], x[2]);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("replicator example");
}
