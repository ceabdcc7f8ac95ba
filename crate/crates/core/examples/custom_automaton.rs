//! Strategies from JSON: a two-state tit-for-tat and a "tit for two tats".
//!
//! Run with `cargo run --example custom_automaton`.

use ipd_basins::payoff::{payoff_matrix, TremblePayoffContext};
use ipd_basins::strategy::{symmetry_check, unforgiving_check, StrategyAutomaton};

const TF2T: &str = r#"{
  "name": "tf2t",
  "states": ["calm", "wary", "angry"],
  "initial": "calm",
  "intended": {"calm": "C", "wary": "C", "angry": "D"},
  "transitions": {
    "calm":  {"CC": "calm", "CD": "wary",  "DC": "calm", "DD": "wary"},
    "wary":  {"CC": "calm", "CD": "angry", "DC": "calm", "DD": "angry"},
    "angry": {"CC": "calm", "CD": "angry", "DC": "calm", "DD": "angry"}
  }
}"#;

pub fn run_example() -> ipd_basins::Result<()> {
    let tf2t = StrategyAutomaton::from_json(TF2T)?;
    let tft: StrategyAutomaton = "tft".parse()?;
    println!("{}: {} states, symmetric {}, unforgiving {}", tf2t.name, tf2t.n_states(), symmetry_check(&tf2t, 4), unforgiving_check(&tf2t));

    let ctx = TremblePayoffContext::standard(0.95, 0.98)?;
    let m = payoff_matrix(&ctx, &[tf2t, tft, "allD".parse()?, "wsls".parse()?])?;
    for (i, l) in m.labels.iter().enumerate() {
        println!("{l:>5} {}", m.a[i].iter().map(|v| format!("{v:8.4}")).collect::<Vec<_>>().join(""));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("custom automaton example");
}
