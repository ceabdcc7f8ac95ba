//! Corner bound around a strict Nash vertex, its quadratic certificate and a
//! Monte-Carlo check, on a random five-strategy game.
//!
//! Run with `cargo run --example basin_bound`.

use ipd_basins::basin::{basin_report, random_strict_nash, task_rng, McOptions};
use ipd_basins::replicator::affine_form;

pub fn run_example() -> ipd_basins::Result<()> {
    let a = random_strict_nash(&mut task_rng(42, 0), 5);
    for row in &a.a {
        println!("{}", row.iter().map(|v| format!("{v:6.3}")).collect::<Vec<_>>().join(" "));
    }
    let af = affine_form(&a, 0)?;
    println!("N = {:?}", af.n.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());

    let r = basin_report(&a, 0, 200, 20_000, 7, &McOptions::default())?;
    println!("M0 = {:.4}, certified radius {:.4}", r.m0, r.radius);
    for (pair, b) in &r.pairwise_barriers {
        println!("  barrier {pair}: {b:.4}");
    }
    println!("certificate: max Q = {:.3e} over {} samples", r.gral_a.max_q, r.gral_a.samples);
    if let Some(mc) = &r.mc {
        println!("Monte Carlo: {}/{} starts reached the vertex", mc.to_pivot, mc.samples);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("basin example");
}
