//! Best responses against win-stay-lose-shift and its n-period variant.
//!
//! Run with `cargo run --example wsls_robustness`.

use ipd_basins::payoff::TremblePayoffContext;
use ipd_basins::robustness::{best_deviation_full, c0_default, p_schedule, uniform_strict_check};
use ipd_basins::strategy::{PayoffParams, StrategyAutomaton};

pub fn run_example() -> ipd_basins::Result<()> {
    let params = PayoffParams::default();
    let c0 = c0_default(&params, 0.1)?;
    println!("C0 = {} (with T+S instead: {})", c0.derivation, c0.remark);

    let w: StrategyAutomaton = "wsls".parse()?;
    for delta in [0.9, 0.95, 0.97, 0.99, 0.999] {
        let ps = p_schedule(delta, c0.derivation, params.m())?;
        let ctx = TremblePayoffContext::new(delta, ps.p, params, Default::default())?;
        let v = uniform_strict_check(&w, &ctx, c0.derivation)?;
        println!("δ={delta:<6} p={:.7} gap/(1-β)={:.5} strict={}", ps.p, v.min_gap / (1.0 - ctx.beta()), v.passed);
    }

    let ctx = TremblePayoffContext::standard(0.95, 0.999)?;
    let full = best_deviation_full(&w, &ctx)?;
    for g in &full.states {
        println!("{:>9}: follow {:.6}, best {:.6}, switch {:.6}", g.state, g.conform, g.optimal, g.deviation);
    }

    // when 2R < T + P one period of punishment is not enough
    let six = PayoffParams::ordered(6.0, 3.0, 1.0, 0.0)?;
    let ctx = TremblePayoffContext::new(0.95, 0.9998, six, Default::default())?;
    for name in ["wsls", "wsls_n:2", "wsls_n:3"] {
        let s: StrategyAutomaton = name.parse()?;
        let v = uniform_strict_check(&s, &ctx, 0.9)?;
        println!("T=6 {name:>8}: min gap/(1-β) = {:.4}", v.min_gap / (1.0 - ctx.beta()));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("wsls example");
}
