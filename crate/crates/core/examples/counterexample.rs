//! A game where both two-strategy edges look safe but a thin wedge between
//! them escapes the pivot.
//!
//! Run with `cargo run --example counterexample`.

use ipd_basins::basin::{counterexample_matrix, m0_bound};
use ipd_basins::replicator::{affine_form, integrate, pairwise_barrier, IntegrateOptions, SimplexPoint};

pub fn run_example() -> ipd_basins::Result<()> {
    let opts = IntegrateOptions { record_every: 0, ..Default::default() };
    for lambda in [0.02, 0.05, 0.1] {
        let a = counterexample_matrix(lambda, 10.0)?;
        let radius = m0_bound(&affine_form(&a, 0)?)?.radius;
        println!("λ = {lambda}: edge barriers {:.4} / {:.4}, corner radius {radius:.5}",
            pairwise_barrier(&a, 0, 1).value, pairwise_barrier(&a, 0, 2).value);
        for scale in [0.5, 1.0, 2.0] {
            let d = scale * lambda / (1.0 + lambda);
            let t = integrate(&a, &SimplexPoint::from_affine(3, 0, &[d, d]), 3000.0, &opts)?;
            println!("    start ({d:.4}, {d:.4}) -> {:?}, x = [{:.3}, {:.3}, {:.3}]",
                t.terminal, t.last[0], t.last[1], t.last[2]);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("counterexample");
}
