//! Bundled experiments. Each returns a [`Criterion`] listing every check it
//! made with the numbers behind it; the acceptance target and `reproduce`
//! share them.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basin::{
    bisect_edge_boundary, clip_radius, counterexample_matrix, ensemble, gral_a_check, m0_bound,
    mc_basin_measure, mc_basin_measure_perturbed, random_strict_nash, task_rng, EnsembleConfig, McOptions, Region,
};
use crate::error::{Error, Result};
use crate::payoff::{
    eqpath_payoff, grim_alld_closed_forms, horizon_for, payoff_exact, payoff_matrix, payoff_truncated, PayoffMatrix,
    PlayPath, TremblePayoffContext,
};
use crate::replicator::{
    affine_form, integrate, pairwise_barrier, vertex_eigenvalues, IntegrateOptions, Perturbation, SimplexPoint,
    Terminal,
};
use crate::robustness::{
    best_deviation_full, c0_default, c0_wsls_n, c_asymmetry, cooperation_frequency, efficiency_spot_checks,
    grim_collapse_sweep, p_main_eq_min, p_schedule, ulb_estimates, uniform_strict_check,
};
use crate::strategy::{
    aw_blocks, run_history, standard_library, symmetry_check, unforgiving_check, HistorySeed, PayoffParams,
    StrategyAutomaton,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub numbers: BTreeMap<String, f64>,
    /// Non-asserted observations.
    pub notes: Vec<String>,
}

impl Criterion {
    fn new(id: &str, title: &str) -> Self {
        Criterion {
            id: id.into(),
            title: title.into(),
            passed: true,
            checks: Vec::new(),
            numbers: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn num(&mut self, key: &str, v: f64) {
        self.numbers.insert(key.into(), v);
    }

    fn absorb(&mut self, other: Criterion) {
        self.passed &= other.passed;
        self.checks.extend(other.checks);
        self.numbers.extend(other.numbers);
        self.notes.extend(other.notes);
    }

    /// One line per check, then the verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!("  [{}] {}: {}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out.push_str(&format!("{} {}: {}\n", if self.passed { "PASS" } else { "FAIL" }, self.id, self.title));
        out
    }
}

fn lit(s: &str) -> StrategyAutomaton {
    s.parse().expect("built-in literal")
}

/// Exact payoffs against truncated forward sums over the strategy library.
pub fn payoff_oracle() -> Result<Criterion> {
    let mut c = Criterion::new("1", "payoff engine against truncated sums");
    let lib = standard_library();
    let mut cells = Vec::new();
    for delta in [0.5, 0.9, 0.99] {
        for p in [0.8, 0.95, 0.999, 1.0] {
            for i in 0..lib.len() {
                for j in 0..lib.len() {
                    cells.push((delta, p, i, j));
                }
            }
        }
    }
    let rows: Vec<(f64, f64, f64)> = cells
        .par_iter()
        .map(|&(delta, p, i, j)| {
            let ctx = TremblePayoffContext::standard(delta, p)?;
            let h = horizon_for(delta, ctx.params.m(), 1e-10);
            let exact = payoff_exact(&ctx, &lib[i], &lib[j])?;
            let tr = payoff_truncated(&ctx, &lib[i], &lib[j], h)?;
            Ok(((exact - tr.value).abs(), tr.error_bound, delta.powi(h as i32) * ctx.params.m() / (1.0 - delta)))
        })
        .collect::<Result<_>>()?;
    let max_diff = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let within_bound = rows.iter().filter(|r| r.0 <= r.1 + 1e-14).count();
    let max_tail = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    c.num("cells", rows.len() as f64);
    c.num("max_abs_diff", max_diff);
    c.num("max_tail", max_tail);
    c.check("horizon tail below 1e-10", max_tail < 1e-10, format!("max δ^h M/(1-δ) = {max_tail:.3e}"));
    c.check(
        "difference within truncation bound",
        within_bound == rows.len(),
        format!("{within_bound}/{} cells", rows.len()),
    );
    c.check("difference below 1e-8", max_diff <= 1e-8, format!("max |exact - truncated| = {max_diff:.3e}"));
    Ok(c)
}

/// Grim/allD closed forms against engine payoff differences.
pub fn closed_form_fixtures() -> Result<Criterion> {
    let mut c = Criterion::new("2", "grim/allD closed forms against the engine");
    let (g, a, fg) = (lit("grim"), lit("allD"), lit("forgiving_grim"));
    let mut worst = 0.0f64;
    let mut worst_e = 0.0f64;
    for delta in [0.9, 0.99] {
        for p in [0.95, 0.999] {
            let ctx = TremblePayoffContext::standard(delta, p)?;
            let f = grim_alld_closed_forms(&ctx)?;
            let u = |x: &StrategyAutomaton, y: &StrategyAutomaton| payoff_exact(&ctx, x, y);
            let ga = (u(&g, &g)? - u(&a, &g)?) - (1.0 - delta) * f.GA;
            let ag = (u(&a, &a)? - u(&g, &a)?) - (1.0 - delta) * f.AG;
            worst = worst.max(ga.abs()).max(ag.abs());
            let m = payoff_matrix(&ctx, &[g.clone(), fg.clone()])?;
            worst_e = worst_e.max((pairwise_barrier(&m, 0, 1).value - f.E).abs());
            c.num(&format!("E[{delta},{p}]"), f.E);
        }
    }
    c.num("max_abs_diff", worst);
    c.num("max_abs_diff_E", worst_e);
    c.check("(1-δ)GA and (1-δ)AG within 1e-6", worst <= 1e-6, format!("max diff {worst:.3e}"));
    c.check("E on the grim/forgiving-grim edge within 1e-6", worst_e <= 1e-6, format!("max diff {worst_e:.3e}"));
    Ok(c)
}

/// `E(δ,p)` along `δ = 1 − 10⁻ᵏ`, `p = 1 − 10⁻ᵏ⁻²`.
pub fn grim_collapse() -> Result<Criterion> {
    let mut c = Criterion::new("3", "grim basin collapses as delta and p approach 1");
    let grid: Vec<(f64, f64)> = (1..=3).map(|k| (1.0 - 10f64.powi(-k), 1.0 - 10f64.powi(-k - 2))).collect();
    let rows = grim_collapse_sweep(&grid, &PayoffParams::default())?;
    for r in &rows {
        c.num(&format!("E_closed[{},{}]", r.delta, r.p), r.e_closed_form);
        c.num(&format!("E_engine[{},{}]", r.delta, r.p), r.e_engine);
    }
    let decreasing = rows.windows(2).all(|w| w[1].e_closed_form < w[0].e_closed_form);
    c.check(
        "E strictly decreasing",
        decreasing,
        rows.iter().map(|r| format!("{:.6e}", r.e_closed_form)).collect::<Vec<_>>().join(" > "),
    );
    c.check("engine agrees within 1e-6", rows.iter().all(|r| r.agree), "closed form vs barrier of the engine matrix");
    let last = rows.last().expect("three rows").e_closed_form;
    c.check("E(0.999, 0.99999) < 0.01", last < 0.01, format!("{last:.6e}"));
    Ok(c)
}

/// Random strict Nash ensemble inside the certified corner.
pub fn a1_ensemble(cfg: &EnsembleConfig) -> Result<Criterion> {
    let mut c = Criterion::new("4", "certified corner lies in the basin on a random ensemble");
    let r = ensemble(cfg, &McOptions::default())?;
    let exhausted: usize = r.rows.iter().map(|x| x.mc.exhausted).sum();
    let worst_q = r.rows.iter().map(|x| x.gral_a.max_q).fold(f64::NEG_INFINITY, f64::max);
    let min_radius = r.rows.iter().map(|x| x.radius).fold(f64::INFINITY, f64::min);
    c.num("matrices", r.rows.len() as f64);
    c.num("fraction", r.fraction);
    c.num("exhausted", exhausted as f64);
    c.num("max_q", worst_q);
    c.num("min_radius", min_radius);
    c.check(
        "every start converges to the pivot",
        r.all_converged,
        format!("fraction {} over {} starts", r.fraction, cfg.matrices * cfg.starts),
    );
    c.check("other mass never increases", r.all_monotone, "Σ_{i≠pivot} x_i monotone on every trajectory");
    c.check("quadratic certificate negative", r.all_certified, format!("max sampled Q = {worst_q:.3e}"));
    Ok(c)
}

/// Two-strategy bistable games: integrated boundary against the barrier.
pub fn barrier_consistency(seed: u64) -> Result<Criterion> {
    let mut c = Criterion::new("5", "edge boundary matches the pairwise barrier");
    let rows: Vec<(f64, f64, f64)> = (0..50u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = task_rng(seed, k);
            let a11 = rng.gen_range(1.0..5.0);
            let a22 = rng.gen_range(1.0..5.0);
            let a21 = a11 - rng.gen_range(0.1..2.0);
            let a12 = a22 - rng.gen_range(0.1..2.0);
            let a = PayoffMatrix::from_rows(vec![vec![a11, a12], vec![a21, a22]])?;
            let b = pairwise_barrier(&a, 0, 1);
            let bis = bisect_edge_boundary(&a, 0, 1, 1e-6)?;
            let r = m0_bound(&affine_form(&a, 0)?)?.radius;
            Ok((b.value, bis, r))
        })
        .collect::<Result<_>>()?;
    let worst = rows.iter().map(|r| (r.0 - r.1).abs()).fold(0.0, f64::max);
    let radius_ok = rows.iter().filter(|r| r.2 <= r.0 + 1e-12).count();
    c.num("max_abs_diff", worst);
    c.check("bisection within 1e-3", worst <= 1e-3, format!("max diff {worst:.3e} over 50 matrices"));
    c.check("M0 radius below barrier", radius_ok == rows.len(), format!("{radius_ok}/50"));
    Ok(c)
}

/// Three-strategy game whose pivot basin has width of order λ.
pub fn counterexample(lambdas: &[f64]) -> Result<Criterion> {
    let mut c = Criterion::new("6", "pairwise barriers do not bound the basin");
    let opts = IntegrateOptions { record_every: 0, ..Default::default() };
    for &lambda in lambdas {
        let a = counterexample_matrix(lambda, 10.0)?;
        let e1 = vertex_eigenvalues(&a, 0);
        let e2 = vertex_eigenvalues(&a, 1);
        let e3 = vertex_eigenvalues(&a, 2);
        c.check(
            &format!("λ={lambda}: e1 attracts"),
            e1.iter().all(|&v| v < 0.0),
            format!("eigenvalues {e1:?}"),
        );
        c.check(
            &format!("λ={lambda}: e2, e3 repel"),
            e2.iter().chain(&e3).all(|&v| v > 0.0),
            format!("eigenvalues {e2:?} {e3:?}"),
        );
        let mut edge_ok = true;
        for j in [1, 2] {
            for k in 1..10 {
                let mut y = [0.0; 2];
                y[j - 1] = k as f64 / 10.0;
                let x0 = SimplexPoint::from_affine(3, 0, &y);
                edge_ok &= integrate(&a, &x0, 5000.0, &opts)?.terminal == Terminal::ConvergedToVertex(0);
            }
        }
        c.check(&format!("λ={lambda}: edge interiors flow to e1"), edge_ok, "9 starts on each edge");
        let d = lambda / (1.0 + lambda);
        let t = integrate(&a, &SimplexPoint::from_affine(3, 0, &[d, d]), 5000.0, &opts)?;
        let end = &t.last;
        c.check(
            &format!("λ={lambda}: diagonal point escapes"),
            t.terminal != Terminal::ConvergedToVertex(0),
            format!("start ({d:.6}, {d:.6}) ends {:?} at {:?}", t.terminal, end),
        );
        c.num(&format!("barrier_12[{lambda}]"), pairwise_barrier(&a, 0, 1).value);
        c.num(&format!("m0_radius[{lambda}]"), m0_bound(&affine_form(&a, 0)?)?.radius);
    }
    Ok(c)
}

/// Uniform strictness at the default payoffs.
pub fn wsls_sgp() -> Result<Criterion> {
    let mut c = Criterion::new("7a", "win-stay-lose-shift is uniformly strict, grim is not");
    let params = PayoffParams::default();
    let c0 = c0_default(&params, 0.1)?;
    let delta = 0.95;
    let ps = p_schedule(delta, c0.derivation, params.m())?;
    let ctx = TremblePayoffContext::new(delta, ps.p, params, Default::default())?;
    let beta = ctx.beta();
    c.num("C0", c0.derivation);
    c.num("C0_remark", c0.remark);
    c.num("p", ps.p);
    c.num("beta", beta);
    c.num("main_eq_margin", ps.margin);
    c.num("p_main_eq_min", p_main_eq_min(delta, c0.derivation, params.m()));
    for name in ["wsls", "grim", "allC"] {
        let v = uniform_strict_check(&lit(name), &ctx, c0.derivation)?;
        c.num(&format!("min_gap_scaled[{name}]"), v.min_gap / (1.0 - beta));
        let detail = format!("min gap/(1-β) = {:.6} vs C0 = {}", v.min_gap / (1.0 - beta), c0.derivation);
        match name {
            "wsls" => c.check("wsls uniformly strict", v.passed, detail),
            "grim" => c.check("grim not uniformly strict", !v.passed, detail),
            _ => c.check("allC not uniformly strict", !v.passed, detail),
        }
    }
    let full = best_deviation_full(&lit("wsls"), &ctx)?;
    c.check(
        "wsls prescription optimal with trembles",
        full.prescription_optimal && full.states.len() == 2,
        format!("{} states, max regret {:.3e}", full.states.len(), full.max_regret),
    );
    c.notes.push(format!(
        "main p inequality at the schedule: margin {:.4} (holds: {})",
        ps.margin, ps.main_eq_holds
    ));
    Ok(c)
}

/// Longer punishment restores strictness when `2R < T + P`.
pub fn wsls_n() -> Result<Criterion> {
    let mut c = Criterion::new("7b", "n-period shifting at T=6");
    let params = PayoffParams::ordered(6.0, 3.0, 1.0, 0.0)?;
    let c0 = c0_wsls_n(&params, 3, 0.1)?;
    let delta = 0.95;
    let ps = p_schedule(delta, c0, params.m())?;
    let ctx = TremblePayoffContext::new(delta, ps.p, params, Default::default())?;
    let beta = ctx.beta();
    c.num("C0", c0);
    c.num("p", ps.p);
    let w = uniform_strict_check(&lit("wsls"), &ctx, c0)?;
    let w3 = uniform_strict_check(&lit("wsls_n:3"), &ctx, c0)?;
    c.num("min_gap_scaled[wsls]", w.min_gap / (1.0 - beta));
    c.num("min_gap_scaled[wsls_n:3]", w3.min_gap / (1.0 - beta));
    c.check("wsls fails at T=6", !w.passed, format!("min gap/(1-β) = {:.6}", w.min_gap / (1.0 - beta)));
    c.check("wsls_3 passes at T=6", w3.passed, format!("min gap/(1-β) = {:.6} vs C0 = {c0}", w3.min_gap / (1.0 - beta)));
    if let Some(off) = w3.report.offdiagonal_min_gap {
        c.notes.push(format!("wsls_3 with players in different states: min gap/(1-β) = {:.4}", off / (1.0 - beta)));
    }
    Ok(c)
}

pub fn wsls_robustness() -> Result<Criterion> {
    let mut c = Criterion::new("7", "win-stay-lose-shift robustness");
    c.absorb(wsls_sgp()?);
    c.absorb(wsls_n()?);
    Ok(c)
}

/// Block-structured strategy checks; inequality templates are annotations.
pub fn aw_suite() -> Result<Criterion> {
    let mut c = Criterion::new("aw", "alternating w/allD blocks");
    let (n, b0, delta) = (4usize, 0.5, 0.99f64);
    let s = lit(&format!("aw:{n}:{b0}"));
    let (period, w_len) = aw_blocks(n, b0);
    let expect = (1.0 - delta.powi(w_len as i32)) / (1.0 - delta.powi(period as i32));
    let b1 = cooperation_frequency(&s, delta, &HistorySeed::default());
    c.num("b1", b1);
    c.check("cooperation share matches block sums", (b1 - expect).abs() < 1e-12, format!("{b1:.12} vs {expect:.12}"));
    c.check("symmetric", symmetry_check(&s, 4), "depth 4");
    let asym = c_asymmetry(&s, delta, 4)?;
    c.check("zero asymmetry", asym == 0.0, format!("{asym}"));
    c.check("forgiving", !unforgiving_check(&s), "no closed all-D set");
    let m = PlayPath::new(&s, &s, s.initial, s.initial).masses(delta);
    c.num("b4", m.p);
    c.notes.push(format!("template b4 >= 1 - b0: {:.4} >= {:.4} ({})", m.p, 1.0 - b0, m.p >= 1.0 - b0));
    Ok(c)
}

/// Finite-family basin estimate for win-stay-lose-shift.
pub fn ulb(samples: usize, seed: u64) -> Result<Criterion> {
    let mut c = Criterion::new("8", "finite-family basin estimate for wsls");
    let ctx = TremblePayoffContext::standard(0.9, 0.99)?;
    let family: Vec<StrategyAutomaton> = ["allD", "grim", "forgiving_grim", "tft", "allC"].iter().map(|l| lit(l)).collect();
    let est = ulb_estimates(&lit("wsls"), &family, &ctx)?;
    c.num("M_hat", est.m_hat);
    c.num("Z_hat", est.z_hat);
    c.num("R0_hat", est.r0_hat);
    c.num("R1_hat", est.r1_hat);
    c.check("M_hat finite", est.m_hat.is_finite() && est.m_hat > 0.0, format!("{}", est.m_hat));
    if !est.excluded.is_empty() {
        c.notes.push(format!("excluded (not strictly worse against wsls): {:?}", est.excluded));
    }
    let mut all = vec![lit("wsls")];
    all.extend(family);
    let a = payoff_matrix(&ctx, &all)?;
    let r = clip_radius(1.0 / est.m_hat);
    let mc = mc_basin_measure(&a, 0, Region::Corner(r), samples, seed, &McOptions::default())?;
    c.num("radius", r);
    c.num("fraction", mc.fraction);
    c.check(
        "corner of radius 1/M_hat inside the basin",
        mc.to_pivot == samples,
        format!("{}/{} starts reached wsls", mc.to_pivot, samples),
    );
    Ok(c)
}

/// Perturbed flow with `H_i = 1 + x_i/2` on ensemble matrices.
pub fn perturbed(cfg: &EnsembleConfig, matrices: usize, starts: usize) -> Result<Criterion> {
    let mut c = Criterion::new("9", "perturbed dynamics keep the certified corner");
    let pert = Perturbation::half_share();
    let span = cfg.n_max - cfg.n_min + 1;
    let mut hit = 0;
    let mut min_radius = f64::INFINITY;
    for k in 0..matrices {
        let n = cfg.n_min + k % span;
        let a = random_strict_nash(&mut task_rng(cfg.seed, k as u64), n);
        let af = affine_form(&a, 0)?;
        let radius = m0_bound(&af)?.radius.min(1.0 / 3.0);
        min_radius = min_radius.min(radius);
        let r = clip_radius(radius * (1.0 - 1e-3));
        let mc = mc_basin_measure_perturbed(&a, &pert, 0, Region::Corner(r), starts, cfg.seed ^ (k as u64 + 77), &McOptions::default())?;
        hit += mc.to_pivot;
        if !gral_a_check(&af, r, 1000, cfg.seed).passed {
            c.notes.push(format!("matrix {k}: quadratic certificate not negative at the corner"));
        }
    }
    let total = matrices * starts;
    c.num("min_radius", min_radius);
    c.num("fraction", hit as f64 / total as f64);
    c.check("every start converges to the pivot", hit == total, format!("{hit}/{total}"));
    Ok(c)
}

/// Path identities across the library for all seeds up to depth 4.
pub fn identities() -> Result<Criterion> {
    let mut c = Criterion::new("10", "history and path identities");
    let lib = standard_library();
    let seeds = HistorySeed::enumerate(4);
    let ctx = TremblePayoffContext::standard(0.99, 0.999)?;
    let params = ctx.params;

    let involution = seeds.iter().all(|h| h.swap().swap() == *h);
    c.check("swap is an involution", involution, format!("{} seeds", seeds.len()));

    let mut wef3 = 0.0f64;
    for s in &lib {
        wef3 = wef3.max(efficiency_spot_checks(s, 0.99, &params, 4)?.max_wef3_residual);
    }
    c.num("max_wef3_residual", wef3);
    c.check("hat payoff identity", wef3 < 1e-12, format!("max residual {wef3:.3e}"));

    let mut worst_sum = f64::NEG_INFINITY;
    let mut worst_swap = 0.0f64;
    for s in &lib {
        for t in &lib {
            for h in &seeds {
                let hh = h.swap();
                let (qs, qt) = (run_history(s, h), run_history(t, &hh));
                let sum = eqpath_payoff(&ctx, s, t, qs, qt) + eqpath_payoff(&ctx, t, s, qt, qs);
                worst_sum = worst_sum.max(sum);
                let m = PlayPath::new(t, s, run_history(t, h), run_history(s, &hh)).masses(ctx.beta());
                let w = PlayPath::new(s, t, run_history(s, &hh), run_history(t, h)).masses(ctx.beta());
                let e = (m.r - w.r).abs().max((m.t - w.s).abs()).max((m.s - w.t).abs()).max((m.p - w.p).abs());
                worst_swap = worst_swap.max(e);
            }
        }
    }
    c.num("max_cross_sum", worst_sum);
    c.num("max_swap_diff", worst_swap);
    c.check("cross payoffs at most 2R", worst_sum <= 2.0 * params.r + 1e-12, format!("max {worst_sum:.12} vs {}", 2.0 * params.r));
    c.check("coefficient swap", worst_swap < 1e-14, format!("max diff {worst_swap:.3e}"));

    let mut agree = true;
    let mut listing = Vec::new();
    for s in &lib {
        let asym = c_asymmetry(s, 0.9, 4)?;
        let sym = symmetry_check(s, 4);
        agree &= (asym == 0.0) == sym;
        listing.push(format!("{}:{}", s.name, if sym { "sym" } else { "asym" }));
    }
    c.check("zero asymmetry iff symmetric", agree, listing.join(" "));
    Ok(c)
}

/// Experiment ids accepted by `reproduce`.
pub const REPRODUCE_IDS: [&str; 7] =
    ["thm-a1-ensemble", "counterexample", "grim-collapse", "wsls-sgp", "wsls-n", "aw", "perturbed"];

pub fn reproduce(id: &str, cfg: &EnsembleConfig) -> Result<Criterion> {
    match id {
        "thm-a1-ensemble" => a1_ensemble(cfg),
        "counterexample" => counterexample(&[0.02, 0.05]),
        "grim-collapse" => {
            let mut c = grim_collapse()?;
            c.absorb(closed_form_fixtures()?);
            Ok(c)
        }
        "wsls-sgp" => wsls_sgp(),
        "wsls-n" => wsls_n(),
        "aw" => aw_suite(),
        "perturbed" => perturbed(cfg, 20, 200),
        _ => Err(Error::Validation(format!("unknown experiment id `{id}`; known: {}", REPRODUCE_IDS.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id() {
        assert!(reproduce("nope", &EnsembleConfig::default()).is_err());
    }

    #[test]
    fn aw_suite_passes() {
        let c = aw_suite().unwrap();
        assert!(c.passed, "{}", c.summary());
    }

    #[test]
    fn small_ensemble() {
        let cfg = EnsembleConfig { matrices: 4, starts: 20, gral_samples: 2000, ..Default::default() };
        let c = a1_ensemble(&cfg).unwrap();
        assert!(c.passed, "{}", c.summary());
        assert!(c.summary().ends_with("PASS 4: certified corner lies in the basin on a random ensemble\n"));
    }
}
