//! Finite-family basin constants for win-stay-lose-shift, plus the
//! cooperation and efficiency measures along its self-play paths.
//!
//! Run with `cargo run --example ulb_estimates`.

use ipd_basins::payoff::TremblePayoffContext;
use ipd_basins::robustness::{c_asymmetry, efficiency_spot_checks, lambda_hat, ulb_estimates};
use ipd_basins::strategy::{symmetry_check, StrategyAutomaton};

pub fn run_example() -> ipd_basins::Result<()> {
    let ctx = TremblePayoffContext::standard(0.9, 0.99)?;
    let family = ["allD", "grim", "forgiving_grim", "tft", "allC"]
        .map(|s| s.parse::<StrategyAutomaton>())
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let w: StrategyAutomaton = "wsls".parse()?;
    let est = ulb_estimates(&w, &family, &ctx)?;
    println!("M = {:.4}  Z = {:.4}  R0 = {:.4}  R1 = {:.4}", est.m_hat, est.z_hat, est.r0_hat, est.r1_hat);
    for (name, n) in &est.n_values {
        println!("  N(wsls, {name}) = {n:.4}, N̄ = {:.4}", est.nbar_values[name]);
    }

    for name in ["wsls", "grim", "tft", "aw:4:0.5"] {
        let s: StrategyAutomaton = name.parse()?;
        let e = efficiency_spot_checks(&s, 0.99, &ctx.params, 4)?;
        println!("{name:>9}: symmetric {}, asymmetry {:.4}, min U - P {:.4} (seed {})",
            symmetry_check(&s, 4), c_asymmetry(&s, 0.99, 4)?, e.min_wef1_margin, e.worst_wef1_seed);
    }
    println!("λ̂0 at λ0 = 0.5: {:.4}", lambda_hat(0.5, &ctx.params));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("ulb example");
}
