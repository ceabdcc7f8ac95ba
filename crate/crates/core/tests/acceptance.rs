//! Acceptance criteria 1 to 10. One PASS/FAIL line per criterion is written
//! straight to stdout so it shows up without `--nocapture`.

use std::io::Write;
use std::time::{Duration, Instant};

use ipd_basins::basin::EnsembleConfig;
use ipd_basins::experiments::{self, Criterion};

/// Checks that fail for reasons recorded in the decisions ledger. The test
/// demands that nothing else fails.
const KNOWN_RED: [(&str, &str); 2] = [
    // gap of wsls at its C state is (1-β)(2β-1) and β = p²δ < 0.95 here,
    // so it cannot exceed (1-β)·0.9 at δ = 0.95
    ("7", "wsls uniformly strict"),
    // grim's smallest gap is exactly (1-β)(P-S) > (1-β)·0.9
    ("7", "grim not uniformly strict"),
];

fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn timed(f: impl FnOnce() -> ipd_basins::Result<Criterion>) -> (Criterion, Duration) {
    let t = Instant::now();
    let c = f().expect("experiment ran");
    (c, t.elapsed())
}

#[test]
fn acceptance_criteria() {
    let cfg = EnsembleConfig::default();
    let mut results: Vec<(Criterion, Duration, Option<Duration>)> = Vec::new();
    let budget = |secs| Some(Duration::from_secs(secs));

    let (c, d) = timed(experiments::payoff_oracle);
    results.push((c, d, budget(60)));
    let (c, d) = timed(experiments::closed_form_fixtures);
    results.push((c, d, None));
    let (c, d) = timed(experiments::grim_collapse);
    results.push((c, d, None));
    let (c, d) = timed(|| experiments::a1_ensemble(&cfg));
    results.push((c, d, budget(600)));
    let (c, d) = timed(|| experiments::barrier_consistency(cfg.seed));
    results.push((c, d, None));
    let (c, d) = timed(|| experiments::counterexample(&[0.02, 0.05]));
    results.push((c, d, None));
    let (c, d) = timed(experiments::wsls_robustness);
    results.push((c, d, None));
    let (c, d) = timed(|| experiments::ulb(1000, cfg.seed));
    results.push((c, d, None));
    let (c, d) = timed(|| experiments::perturbed(&cfg, 20, 200));
    results.push((c, d, None));
    let (c, d) = timed(experiments::identities);
    results.push((c, d, None));

    let mut unexpected = Vec::new();
    let mut report = String::from("\n");
    for (c, d, limit) in &results {
        let in_time = limit.map_or(true, |l| *d <= l);
        report.push_str(&c.summary().lines().filter(|l| l.starts_with("  ")).map(|l| format!("{l}\n")).collect::<String>());
        let verdict = if c.passed && in_time { "PASS" } else { "FAIL" };
        let budget = limit.map_or(String::new(), |l| format!(", budget {}s", l.as_secs()));
        report.push_str(&format!("{verdict} criterion {}: {} ({:.1}s{budget})\n", c.id, c.title, d.as_secs_f64()));
        if !in_time {
            unexpected.push(format!("{} over time budget", c.id));
        }
        for ch in c.checks.iter().filter(|ch| !ch.passed) {
            if !KNOWN_RED.iter().any(|&(id, name)| id == c.id && name == ch.name) {
                unexpected.push(format!("{}: {} ({})", c.id, ch.name, ch.detail));
            }
        }
    }
    emit(&report);
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:#?}");
}
