//! Trembled payoffs of the standard strategies, and where they come from.
//!
//! Run with `cargo run --example payoff_matrix`.

use ipd_basins::payoff::{eqpath_payoff, payoff_exact, payoff_matrix, payoff_truncated, horizon_for, TremblePayoffContext};
use ipd_basins::strategy::{run_history, standard_library, Action, HistorySeed, StrategyAutomaton};

pub fn run_example() -> ipd_basins::Result<()> {
    let ctx = TremblePayoffContext::standard(0.9, 0.99)?;
    let lib = standard_library();
    let m = payoff_matrix(&ctx, &lib)?;

    print!("{:>16}", "");
    for l in &m.labels {
        print!("{l:>10}");
    }
    println!();
    for (i, l) in m.labels.iter().enumerate() {
        print!("{l:>16}");
        for j in 0..m.n() {
            print!("{:>10.4}", m.get(i, j));
        }
        println!();
    }

    // the linear solve against a forward sum that stops once the tail is tiny
    let (g, a): (StrategyAutomaton, StrategyAutomaton) = ("grim".parse()?, "allD".parse()?);
    let h = horizon_for(ctx.delta, ctx.params.m(), 1e-10);
    let t = payoff_truncated(&ctx, &g, &a, h)?;
    println!("\nU(grim, allD) exact {:.12}, truncated at {h} periods {:.12} (bound {:.1e})",
        payoff_exact(&ctx, &g, &a)?, t.value, t.error_bound);

    // untrembled continuation after one unilateral defection
    let w: StrategyAutomaton = "wsls".parse()?;
    let seed = HistorySeed::new(vec![(Action::D, Action::C)]);
    let (q1, q2) = (run_history(&w, &seed), run_history(&w, &seed.swap()));
    println!("wsls after (D,C): states {} / {}, path payoff {:.6}",
        w.labels[q1], w.labels[q2], eqpath_payoff(&ctx, &w, &w, q1, q2));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("payoff example");
}
