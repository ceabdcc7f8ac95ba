//! Drives the command-line front end in-process: one payoff table and one
//! sweep, written to a scratch directory.
//!
//! Run with `cargo run --example cli_reports`. The installed binary takes the
//! same arguments, e.g. `ipd-basins sweep --config sweep.json --out out`.

use std::fs;

use ipd_basins::cli::main_with_args;

pub fn run_example() -> ipd_basins::Result<()> {
    let dir = std::env::temp_dir().join(format!("ipd-basins-example-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let cfg = dir.join("payoff.json");
    fs::write(&cfg, r#"{"strategies": ["grim", "allD", "wsls"], "game": {"delta": 0.95, "p": 0.99}}"#)?;
    let out = dir.join("out");
    let code = main_with_args(["ipd-basins", "payoff", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    println!("payoff exited with {code}");
    print!("{}", fs::read_to_string(out.join("payoff_matrix.csv"))?);

    let sweep = dir.join("sweep.json");
    fs::write(&sweep, r#"{"kind": "p_schedule", "deltas": [0.9, 0.99, 0.999]}"#)?;
    let code = main_with_args(["ipd-basins", "sweep", "--config", sweep.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    println!("sweep exited with {code}");
    print!("{}", fs::read_to_string(out.join("sweep.csv"))?);
    fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cli example");
}
