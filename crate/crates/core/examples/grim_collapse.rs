//! How the share of forgiving grim needed to displace grim shrinks as
//! players grow patient and mistakes rare.
//!
//! Run with `cargo run --example grim_collapse`.

use ipd_basins::robustness::grim_collapse_sweep;
use ipd_basins::strategy::{unforgiving_check, PayoffParams, StrategyAutomaton};

pub fn run_example() -> ipd_basins::Result<()> {
    let grid: Vec<(f64, f64)> = [1, 2, 3, 4]
        .iter()
        .flat_map(|&k| {
            let delta = 1.0 - 10f64.powi(-k);
            [1, 2].map(move |j| (delta, 1.0 - 10f64.powi(-k - j)))
        })
        .collect();
    println!("{:>8} {:>10} {:>14} {:>14}", "delta", "p", "E closed", "E engine");
    for r in grim_collapse_sweep(&grid, &PayoffParams::default())? {
        println!("{:>8} {:>10} {:>14.6e} {:>14.6e}", r.delta, r.p, r.e_closed_form, r.e_engine);
    }
    for name in ["grim", "allD", "forgiving_grim", "wsls"] {
        let s: StrategyAutomaton = name.parse()?;
        println!("{name:>15} unforgiving: {}", unforgiving_check(&s));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("grim example");
}
