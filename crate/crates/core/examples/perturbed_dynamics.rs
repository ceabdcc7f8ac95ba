//! The corner bound under a flow whose growth rates are rescaled by
//! `1 + x_i/2`, next to the plain replicator flow.
//!
//! Run with `cargo run --example perturbed_dynamics`.

use ipd_basins::basin::{mc_basin_measure, mc_basin_measure_perturbed, perturbed_basin_radius, random_strict_nash, task_rng, McOptions, Region};
use ipd_basins::replicator::{affine_form, Perturbation};

pub fn run_example() -> ipd_basins::Result<()> {
    let pert = Perturbation::half_share();
    let opts = McOptions::default();
    for k in 0..4 {
        let a = random_strict_nash(&mut task_rng(9, k), 3 + k as usize);
        let r = perturbed_basin_radius(&affine_form(&a, 0)?, 1.0, 1.5)?;
        let plain = mc_basin_measure(&a, 0, Region::Corner(r * 0.999), 100, k, &opts)?;
        let bent = mc_basin_measure_perturbed(&a, &pert, 0, Region::Corner(r * 0.999), 100, k, &opts)?;
        // how far out does the pivot still win?
        let wide = mc_basin_measure_perturbed(&a, &pert, 0, Region::Corner(0.9), 100, k, &opts)?;
        println!("n={} radius {r:.4}: plain {:.2}, perturbed {:.2}, perturbed at 0.9 {:.2}",
            a.n(), plain.fraction, bent.fraction, wide.fraction);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("perturbed example");
}
