//! Strategy-level robustness: best responses, uniform strictness, the grim
//! collapse, finite-family basin estimators and efficiency metrics.

use std::collections::{BTreeMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::payoff::{grim_alld_closed_forms, payoff_matrix, PayoffMatrix, PlayPath, ProductChain, TremblePayoffContext};
use crate::replicator::pairwise_barrier;
use crate::strategy::{run_history, Action, HistorySeed, PayoffParams, StrategyAutomaton, PAIRS};

const VI_TOL: f64 = 1e-12;
const VI_MAX_ITER: usize = 10_000_000;
/// Slack when deciding whether the prescribed action attains the optimum.
pub const OPTIMALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SgpMode {
    FullTremble,
    Eqpath,
}

/// Self-play from a common state `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateGap {
    pub state: String,
    /// Value of following `s` from here.
    pub conform: f64,
    /// Best value against the opponent state.
    pub optimal: f64,
    /// Value of switching the prescribed action now and playing optimally after.
    pub deviation: f64,
    /// `conform − deviation`.
    pub gap: f64,
    pub prescription_optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgpReport {
    pub strategy: String,
    pub mode: SgpMode,
    pub states: Vec<StateGap>,
    pub per_state_gap: BTreeMap<String, f64>,
    pub min_gap: f64,
    /// Largest shortfall `optimal − conform`; zero up to tolerance when SGP.
    pub max_regret: f64,
    pub prescription_optimal: bool,
    /// Smallest gap over history-reachable pairs where the two players sit in
    /// different states; diagnostic only.
    pub offdiagonal_min_gap: Option<f64>,
    pub iterations: usize,
    pub threshold: Option<f64>,
}

/// Pairs `(run(s,h), run(s,ĥ))` over all histories.
fn reachable_pairs(s: &StrategyAutomaton) -> Vec<(usize, usize)> {
    let start = (s.initial, s.initial);
    let mut seen = HashSet::from([start]);
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some((q, r)) = queue.pop_front() {
        for (a, b) in PAIRS {
            let next = (s.advance(q, a, b), s.advance(r, b, a));
            if seen.insert(next) {
                order.push(next);
                queue.push_back(next);
            }
        }
    }
    order
}

fn prob(p: f64, intended: Action, realized: Action) -> f64 {
    if intended == realized {
        p
    } else {
        1.0 - p
    }
}

/// Action values `Q(q, a)` of the deviator's MDP on the opponent state.
struct Mdp<'a> {
    s: &'a StrategyAutomaton,
    ctx: &'a TremblePayoffContext,
    mode: SgpMode,
}

impl<'a> Mdp<'a> {
    fn discount(&self) -> f64 {
        match self.mode {
            SgpMode::FullTremble => self.ctx.delta,
            SgpMode::Eqpath => self.ctx.beta(),
        }
    }

    fn q_value(&self, v: &[f64], q: usize, a: Action) -> f64 {
        let d = self.discount();
        let b = self.s.intended(q);
        let u = &self.ctx.params;
        match self.mode {
            SgpMode::Eqpath => (1.0 - d) * u.u(a, b) + d * v[self.s.advance(q, b, a)],
            SgpMode::FullTremble => PAIRS
                .iter()
                .map(|&(x, y)| {
                    let w = prob(self.ctx.p, a, x) * prob(self.ctx.p, b, y);
                    if w == 0.0 {
                        0.0
                    } else {
                        w * ((1.0 - d) * u.u(x, y) + d * v[self.s.advance(q, y, x)])
                    }
                })
                .sum(),
        }
    }

    fn solve(&self) -> Result<(Vec<f64>, usize)> {
        let n = self.s.n_states();
        let mut v = vec![0.0; n];
        let mut next = vec![0.0; n];
        for it in 1..=VI_MAX_ITER {
            let mut diff = 0.0f64;
            for q in 0..n {
                next[q] = self.q_value(&v, q, Action::C).max(self.q_value(&v, q, Action::D));
                diff = diff.max((next[q] - v[q]).abs());
            }
            std::mem::swap(&mut v, &mut next);
            if diff <= VI_TOL {
                return Ok((v, it));
            }
        }
        Err(Error::Solver("value iteration did not converge; discount too close to 1".into()))
    }
}

fn conform_values(s: &StrategyAutomaton, ctx: &TremblePayoffContext, mode: SgpMode, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    Ok(match mode {
        SgpMode::Eqpath => pairs.iter().map(|&(q, r)| PlayPath::new(s, s, q, r).value(ctx.beta(), &ctx.params)).collect(),
        SgpMode::FullTremble => {
            let chain = ProductChain::build(s, s, ctx.p, &ctx.params, pairs, true);
            let v = chain.solve(ctx.delta)?;
            pairs.iter().map(|&pr| (1.0 - ctx.delta) * v[chain.index_of(pr.0, pr.1).expect("root in chain")]).collect()
        }
    })
}

fn best_deviation(s: &StrategyAutomaton, ctx: &TremblePayoffContext, mode: SgpMode) -> Result<SgpReport> {
    ctx.validate()?;
    let mdp = Mdp { s, ctx, mode };
    let (v, iterations) = mdp.solve()?;
    // both players in the same state q, for every state q
    let diag: Vec<(usize, usize)> = (0..s.n_states()).map(|q| (q, q)).collect();
    let conform = conform_values(s, ctx, mode, &diag)?;
    let gap_at = |q: usize, r: usize, c: f64| c - mdp.q_value(&v, r, s.intended(q).flip());
    let mut states = Vec::with_capacity(diag.len());
    for (q, &c) in conform.iter().enumerate() {
        let a = s.intended(q);
        states.push(StateGap {
            state: s.labels[q].clone(),
            conform: c,
            optimal: v[q],
            deviation: mdp.q_value(&v, q, a.flip()),
            gap: gap_at(q, q, c),
            prescription_optimal: mdp.q_value(&v, q, a) >= v[q] - OPTIMALITY_TOL,
        });
    }
    let off: Vec<(usize, usize)> = reachable_pairs(s).into_iter().filter(|(q, r)| q != r).collect();
    let offdiagonal_min_gap = if off.is_empty() {
        None
    } else {
        let c = conform_values(s, ctx, mode, &off)?;
        Some(off.iter().zip(&c).map(|(&(q, r), &c)| gap_at(q, r, c)).fold(f64::INFINITY, f64::min))
    };
    let min_gap = states.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min);
    let max_regret = states.iter().map(|g| g.optimal - g.conform).fold(f64::NEG_INFINITY, f64::max);
    Ok(SgpReport {
        strategy: s.name.clone(),
        mode,
        per_state_gap: states.iter().map(|g| (g.state.clone(), g.gap)).collect(),
        prescription_optimal: states.iter().all(|g| g.prescription_optimal),
        states,
        min_gap,
        max_regret,
        offdiagonal_min_gap,
        iterations,
        threshold: None,
    })
}

/// Deviator's best response with trembles on every move (`1 − δ` scale).
pub fn best_deviation_full(s: &StrategyAutomaton, ctx: &TremblePayoffContext) -> Result<SgpReport> {
    best_deviation(s, ctx, SgpMode::FullTremble)
}

/// Deviator's best response along untrembled play with discount `p²δ`.
pub fn best_deviation_eqpath(s: &StrategyAutomaton, ctx: &TremblePayoffContext) -> Result<SgpReport> {
    best_deviation(s, ctx, SgpMode::Eqpath)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformStrictVerdict {
    pub passed: bool,
    pub min_gap: f64,
    pub threshold: f64,
    pub report: SgpReport,
}

/// Passes iff every equilibrium-path gap exceeds `(1 − p²δ) C0`.
pub fn uniform_strict_check(s: &StrategyAutomaton, ctx: &TremblePayoffContext, c0: f64) -> Result<UniformStrictVerdict> {
    if !(c0 > 0.0) {
        return Err(Error::Validation(format!("C0 must be positive, got {c0}")));
    }
    let mut report = best_deviation_eqpath(s, ctx)?;
    let threshold = (1.0 - ctx.beta()) * c0;
    report.threshold = Some(threshold);
    Ok(UniformStrictVerdict { passed: report.min_gap > threshold, min_gap: report.min_gap, threshold, report })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C0Values {
    /// `min{P − S, 2R − (T + P) − ε}`.
    pub derivation: f64,
    /// `min{P − S, 2R − (T + S) − ε}`.
    pub remark: f64,
}

pub fn c0_default(params: &PayoffParams, epsilon: f64) -> Result<C0Values> {
    if !(epsilon > 0.0) {
        return Err(Error::Validation("epsilon must be positive".into()));
    }
    let PayoffParams { t, r, p, s } = *params;
    let derivation = (p - s).min(2.0 * r - (t + p) - epsilon);
    if derivation <= 0.0 {
        return Err(Error::Validation(format!("C0 = {derivation} is not positive; needs 2R - (T+P) > epsilon")));
    }
    Ok(C0Values { derivation, remark: (p - s).min(2.0 * r - (t + s) - epsilon) })
}

/// Same template for n-period shifting: `min{P − S, nR − T − (n−1)P − ε}`.
pub fn c0_wsls_n(params: &PayoffParams, n: usize, epsilon: f64) -> Result<f64> {
    let PayoffParams { t, r, p, s } = *params;
    let k = n as f64;
    let c0 = (p - s).min(k * r - t - (k - 1.0) * p - epsilon);
    if c0 <= 0.0 {
        return Err(Error::Validation(format!("C0 = {c0} is not positive for n = {n}")));
    }
    Ok(c0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PSchedule {
    pub p: f64,
    pub p1: f64,
    pub sqrt_delta: f64,
    /// `3(1−p²)M / (p²(1−δ) C0 (1−p²δ))` at the returned `p`.
    pub margin: f64,
    pub main_eq_holds: bool,
}

fn main_eq_margin(delta: f64, c0: f64, m: f64, p: f64) -> f64 {
    let q = p * p;
    3.0 * (1.0 - q) / (q * (1.0 - delta)) * m / (c0 * (1.0 - q * delta))
}

/// `p(δ) = max{1/2, p1(δ), √δ}` with `p1 = √(1 − (4/3)(C0/M)(1−δ)²)`.
pub fn p_schedule(delta: f64, c0: f64, m: f64) -> Result<PSchedule> {
    if !(delta > 0.0 && delta < 1.0 && c0 > 0.0 && m > 0.0) {
        return Err(Error::Validation("need 0 < delta < 1, C0 > 0, M > 0".into()));
    }
    let p1 = (1.0 - 4.0 / 3.0 * (c0 / m) * (1.0 - delta).powi(2)).max(0.0).sqrt();
    let sqrt_delta = delta.sqrt();
    let p = 0.5f64.max(p1).max(sqrt_delta);
    let margin = main_eq_margin(delta, c0, m, p);
    Ok(PSchedule { p, p1, sqrt_delta, margin, main_eq_holds: margin < 1.0 })
}

/// Smallest `p` at which the main inequality holds, by bisection.
pub fn p_main_eq_min(delta: f64, c0: f64, m: f64) -> f64 {
    let (mut lo, mut hi) = (0.5, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if main_eq_margin(delta, c0, m, mid) < 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapseRow {
    pub delta: f64,
    pub p: f64,
    pub e_closed_form: f64,
    pub e_engine: f64,
    /// Barrier on the grim/forgiving-grim edge with grim as the resident.
    pub barrier_grim: f64,
    /// Same edge with forgiving grim as the resident.
    pub barrier_forgiving: f64,
    pub agree: bool,
}

/// `E(δ,p)` from the closed forms and from the engine's grim/forgiving-grim
/// matrix, row by row.
pub fn grim_collapse_sweep(grid: &[(f64, f64)], params: &PayoffParams) -> Result<Vec<CollapseRow>> {
    let g: StrategyAutomaton = "grim".parse()?;
    let fg: StrategyAutomaton = "forgiving_grim".parse()?;
    grid.par_iter()
        .map(|&(delta, p)| {
            let ctx = TremblePayoffContext::new(delta, p, *params, Default::default())?;
            let forms = grim_alld_closed_forms(&ctx)?;
            let a = payoff_matrix(&ctx, &[g.clone(), fg.clone()])?;
            let e_engine = pairwise_barrier(&a, 0, 1).value;
            Ok(CollapseRow {
                delta,
                p,
                e_closed_form: forms.E,
                e_engine,
                barrier_grim: e_engine,
                barrier_forgiving: pairwise_barrier(&a, 1, 0).value,
                agree: (forms.E - e_engine).abs() <= 1e-6,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UlbEstimates {
    pub strategy: String,
    pub family: Vec<String>,
    pub excluded: Vec<String>,
    pub n_values: BTreeMap<String, f64>,
    pub nbar_values: BTreeMap<String, f64>,
    pub m_hat: f64,
    pub z_hat: f64,
    pub r0_hat: f64,
    pub r1_hat: f64,
    /// `s` first, then the admissible family.
    pub matrix: PayoffMatrix,
}

/// Finite-family estimators of the uniform basin constants.
pub fn ulb_estimates(s: &StrategyAutomaton, family: &[StrategyAutomaton], ctx: &TremblePayoffContext) -> Result<UlbEstimates> {
    if family.iter().any(|f| f.name == s.name) {
        return Err(Error::Validation("family must not contain the strategy itself".into()));
    }
    let mut all = vec![s.clone()];
    all.extend(family.iter().cloned());
    let full = payoff_matrix(ctx, &all)?;
    let u = |i: usize, j: usize| full.get(i, j);
    let mut n_values = BTreeMap::new();
    let mut nbar_values = BTreeMap::new();
    let mut admissible = Vec::new();
    let mut excluded = Vec::new();
    for k in 1..all.len() {
        let n = u(0, 0) - u(k, 0);
        n_values.insert(all[k].name.clone(), n);
        nbar_values.insert(all[k].name.clone(), u(0, 0) - u(0, k));
        if n > 0.0 {
            admissible.push(k);
        } else {
            excluded.push(all[k].name.clone());
        }
    }
    if admissible.is_empty() {
        return Err(Error::Validation("no family member is strictly worse against the strategy".into()));
    }
    let n_of = |k: usize| u(0, 0) - u(k, 0);
    let (mut m_hat, mut z_hat, mut r0_hat, mut r1_hat) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &a in &admissible {
        let na = n_of(a);
        r0_hat = r0_hat.max((u(0, 0) - u(0, a)) / na);
        for &b in &admissible {
            if n_of(b) > na {
                continue;
            }
            let z = (u(b, a) - u(0, a) + u(a, b) - u(0, b)) / na;
            let m = (na + n_of(b)) / na + z;
            let bb = u(b, a) + u(a, b) - 2.0 * u(0, 0);
            m_hat = m_hat.max(m);
            z_hat = z_hat.max(z);
            r1_hat = r1_hat.max(bb / na);
        }
    }
    let mut idx = vec![0];
    idx.extend(&admissible);
    Ok(UlbEstimates {
        strategy: s.name.clone(),
        family: admissible.iter().map(|&k| all[k].name.clone()).collect(),
        excluded,
        n_values,
        nbar_values,
        m_hat,
        z_hat,
        r0_hat,
        r1_hat,
        matrix: full.restrict(&idx),
    })
}

fn seeded_path(s1: &StrategyAutomaton, s2: &StrategyAutomaton, h: &HistorySeed) -> PlayPath {
    PlayPath::new(s1, s2, run_history(s1, h), run_history(s2, &h.swap()))
}

/// Discounted share of mutual cooperation on the untrembled self-play path.
pub fn cooperation_frequency(s: &StrategyAutomaton, delta: f64, seed: &HistorySeed) -> f64 {
    seeded_path(s, s, seed).masses(delta).r
}

/// Largest discounted share of `T`/`S` outcomes in untrembled self-play over
/// seeds of length at most `depth`.
pub fn c_asymmetry(s: &StrategyAutomaton, delta: f64, depth: usize) -> Result<f64> {
    if depth > 10 {
        return Err(Error::Budget(format!("depth {depth} enumerates too many seeds")));
    }
    let mut seen = HashSet::new();
    let mut worst = 0.0f64;
    for h in HistorySeed::enumerate(depth) {
        let start = (run_history(s, &h), run_history(s, &h.swap()));
        if seen.insert(start) {
            let m = PlayPath::new(s, s, start.0, start.1).masses(delta);
            worst = worst.max(m.t + m.s);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub strategy: String,
    pub seeds: usize,
    /// `min_h U(s,s/h) − P`.
    pub min_wef1_margin: f64,
    pub worst_wef1_seed: String,
    /// `max_h |U(s,s/ĥ) − U(s,s/h) − (x − y)(T − S)|`.
    pub max_wef3_residual: f64,
    /// `min_h (bound − U(s,s/ĥ))`.
    pub min_wef4_slack: f64,
}

/// Untrembled self-play checks over all seeds of length at most `depth`.
pub fn efficiency_spot_checks(s: &StrategyAutomaton, delta: f64, params: &PayoffParams, depth: usize) -> Result<EfficiencyReport> {
    if depth > 10 {
        return Err(Error::Budget(format!("depth {depth} enumerates too many seeds")));
    }
    let seeds = HistorySeed::enumerate(depth);
    let mut out = EfficiencyReport {
        strategy: s.name.clone(),
        seeds: seeds.len(),
        min_wef1_margin: f64::INFINITY,
        worst_wef1_seed: String::new(),
        max_wef3_residual: 0.0,
        min_wef4_slack: f64::INFINITY,
    };
    let PayoffParams { t, r, s: sp, .. } = *params;
    for h in &seeds {
        let m = seeded_path(s, s, h).masses(delta);
        let u = m.value(params);
        let u_hat = seeded_path(s, s, &h.swap()).masses(delta).value(params);
        if u - params.p < out.min_wef1_margin {
            out.min_wef1_margin = u - params.p;
            out.worst_wef1_seed = h.to_string();
        }
        let (x, y) = (m.s, m.t);
        out.max_wef3_residual = out.max_wef3_residual.max((u_hat - u - (x - y) * (t - sp)).abs());
        let c = x + y;
        let bound = if c < (r - u) / (r - sp) { u + c * (t - sp) } else { -u + 2.0 * r + c * (t + sp - 2.0 * r) };
        out.min_wef4_slack = out.min_wef4_slack.min(bound - u_hat);
    }
    Ok(out)
}

/// `λ̂0 = 1 − ((1 − λ0)/3)(R̂/R)` with `R̂ = min{R − P, R − (T + S)/2}`.
pub fn lambda_hat(lambda0: f64, params: &PayoffParams) -> f64 {
    let PayoffParams { t, r, p, s } = *params;
    let r_hat = (r - p).min(r - (t + s) / 2.0);
    1.0 - (1.0 - lambda0) / 3.0 * r_hat / r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(lit: &str) -> StrategyAutomaton {
        lit.parse().unwrap()
    }

    fn ctx(delta: f64, p: f64) -> TremblePayoffContext {
        TremblePayoffContext::standard(delta, p).unwrap()
    }

    #[test]
    fn alld_is_optimal_against_itself() {
        let r = best_deviation_full(&s("allD"), &ctx(0.9, 0.95)).unwrap();
        assert!(r.prescription_optimal);
        assert_eq!(r.states.len(), 1);
        assert!(r.min_gap > 0.0);
    }

    #[test]
    fn wsls_full_tremble_optimal() {
        let r = best_deviation_full(&s("wsls"), &ctx(0.95, 0.999)).unwrap();
        assert!(r.prescription_optimal);
        assert!(r.max_regret.abs() < 1e-9);
    }

    #[test]
    fn wsls_eqpath_gap() {
        // one T now, then the punishment round P and back to R: gap (1-β)(2β-1)
        let c = ctx(0.95, 0.999);
        let b = c.beta();
        let r = best_deviation_eqpath(&s("wsls"), &c).unwrap();
        assert!((r.per_state_gap["intend_C"] - (1.0 - b) * (2.0 * b - 1.0)).abs() < 1e-10);
        assert!(r.min_gap > 0.0);
    }

    #[test]
    fn grim_punish_gap_is_exact() {
        // deviating to C against the punisher costs (1-β)(P-S) and nothing later
        let c = ctx(0.95, 0.99);
        let r = best_deviation_eqpath(&s("grim"), &c).unwrap();
        let pun = r.per_state_gap["punish"];
        assert!((pun - (1.0 - c.beta())).abs() < 1e-10);
        assert!((r.min_gap - pun).abs() < 1e-12);
    }

    #[test]
    fn allc_never_strict() {
        let r = best_deviation_eqpath(&s("allC"), &ctx(0.95, 0.99)).unwrap();
        assert!(r.states.iter().all(|g| g.gap < 0.0));
        assert!(!r.prescription_optimal);
    }

    #[test]
    fn shifting_longer_restores_strictness() {
        let six = PayoffParams::ordered(6.0, 3.0, 1.0, 0.0).unwrap();
        let ps = p_schedule(0.95, 0.9, 6.0).unwrap();
        let c = TremblePayoffContext::new(0.95, ps.p, six, Default::default()).unwrap();
        assert!(!uniform_strict_check(&s("wsls"), &c, 0.9).unwrap().passed);
        let v = uniform_strict_check(&s("wsls_n:3"), &c, 0.9).unwrap();
        assert!(v.passed, "{:?}", v.report.per_state_gap);
        assert_eq!(v.report.states.len(), 4);
        // players out of phase never resynchronise
        assert!(v.report.offdiagonal_min_gap.unwrap() < 0.0);
    }

    #[test]
    fn c0_values() {
        let c = c0_default(&PayoffParams::default(), 0.1).unwrap();
        assert!((c.derivation - 0.9).abs() < 1e-15);
        assert!((c.remark - 1.0).abs() < 1e-15);
        assert!(c0_default(&PayoffParams::default(), 1.0).is_err());
        let six = PayoffParams::ordered(6.0, 3.0, 1.0, 0.0).unwrap();
        assert!((c0_wsls_n(&six, 3, 0.1).unwrap() - 0.9).abs() < 1e-15);
        assert!(c0_wsls_n(&six, 1, 0.1).is_err());
    }

    #[test]
    fn p_schedule_fixture() {
        let ps = p_schedule(0.95, 0.9, 4.0).unwrap();
        let p1 = (1.0 - 4.0 / 3.0 * 0.225 * 0.0025f64).sqrt();
        assert!((ps.p1 - p1).abs() < 1e-15);
        assert!((ps.p - p1).abs() < 1e-15);
        assert!((ps.sqrt_delta - 0.95f64.sqrt()).abs() < 1e-15);
        assert!(p_schedule(0.999_999, 0.9, 4.0).unwrap().p > 0.999_999);
    }

    #[test]
    fn p_schedule_margin_value() {
        // with 1 - p1² = (4/3)(C0/M)(1-δ)² the margin collapses to 4(1-δ)/(p²(1-p²δ))
        for delta in [0.9, 0.99, 0.999] {
            let ps = p_schedule(delta, 0.9, 4.0).unwrap();
            let q = ps.p * ps.p;
            let expect = 4.0 * (1.0 - delta) / (q * (1.0 - q * delta));
            assert!((ps.margin - expect).abs() < 1e-9 * expect);
            assert!(ps.margin > 3.9 && !ps.main_eq_holds);
            let p_ok = p_main_eq_min(delta, 0.9, 4.0);
            assert!(main_eq_margin(delta, 0.9, 4.0, p_ok) < 1.0);
            assert!(p_ok > ps.p);
        }
    }

    #[test]
    fn collapse_rows_agree() {
        let rows = grim_collapse_sweep(&[(0.9, 0.999), (0.99, 0.9999)], &PayoffParams::default()).unwrap();
        for r in &rows {
            assert!(r.agree, "{r:?}");
            assert!((r.barrier_forgiving - (1.0 - r.e_closed_form)).abs() < 1e-6);
        }
        assert!(rows[1].e_closed_form < rows[0].e_closed_form);
    }

    #[test]
    fn singleton_family_doubles_pair_ratio() {
        let c = ctx(0.9, 0.99);
        let w = s("wsls");
        let a = s("allD");
        let est = ulb_estimates(&w, &[a.clone()], &c).unwrap();
        let m = &est.matrix;
        let n = m.get(0, 0) - m.get(1, 0);
        let pair = (n + m.get(1, 1) - m.get(0, 1)) / n;
        assert!((est.m_hat - 2.0 * pair).abs() < 1e-12);
    }

    #[test]
    fn ulb_family_bound_chain() {
        let family: Vec<_> = ["allD", "grim", "forgiving_grim", "tft", "allC"].iter().map(|l| s(l)).collect();
        let est = ulb_estimates(&s("wsls"), &family, &ctx(0.9, 0.99)).unwrap();
        assert!(est.m_hat.is_finite());
        assert!(est.m_hat <= 2.0 + 2.0 * est.r0_hat.max(0.0) + est.r1_hat + 1e-9);
        assert!(ulb_estimates(&s("wsls"), &[s("wsls")], &ctx(0.9, 0.99)).is_err());
    }

    #[test]
    fn cooperation_shares() {
        let h0 = HistorySeed::default();
        assert_eq!(cooperation_frequency(&s("wsls"), 0.9, &h0), 1.0);
        assert_eq!(cooperation_frequency(&s("allD"), 0.9, &HistorySeed::new(vec![(Action::C, Action::C)])), 0.0);
        // periods 0..3 of every 12 are cooperative
        let d: f64 = 0.99;
        let expect = (1.0 - d.powi(4)) / (1.0 - d.powi(12));
        assert!((cooperation_frequency(&s("aw:4:0.5"), d, &h0) - expect).abs() < 1e-12);
    }

    #[test]
    fn asymmetry() {
        assert_eq!(c_asymmetry(&s("wsls"), 0.9, 4).unwrap(), 0.0);
        assert_eq!(c_asymmetry(&s("grim"), 0.9, 4).unwrap(), 0.0);
        assert!(c_asymmetry(&s("tft"), 0.9, 2).unwrap() > 0.0);
        assert!(c_asymmetry(&s("tft"), 0.9, 11).is_err());
    }

    #[test]
    fn efficiency() {
        let p = PayoffParams::default();
        let w = efficiency_spot_checks(&s("wsls"), 0.99, &p, 4).unwrap();
        assert!(w.min_wef1_margin > 0.0);
        assert!(w.max_wef3_residual < 1e-12);
        assert!(w.min_wef4_slack >= -1e-12);
        let g = efficiency_spot_checks(&s("grim"), 0.99, &p, 4).unwrap();
        assert!(g.min_wef1_margin.abs() < 1e-12);
    }

    #[test]
    fn lambda_hat_formula() {
        let p = PayoffParams::default();
        assert!((lambda_hat(0.7, &p) - (1.0 - 0.1 / 3.0)).abs() < 1e-15);
    }
}
