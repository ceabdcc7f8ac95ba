//! Trembled repeated-game payoffs.
//!
//! Each player realizes its intended action with probability `p` and the
//! other action otherwise, independently across players and periods. Pairs of
//! automata then form a finite Markov chain whose discounted reward is the
//! payoff.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategy::{Action, PayoffParams, StrategyAutomaton, PAIRS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Normalization {
    /// Factor `1 - δ`.
    #[default]
    OneMinusDelta,
    /// Factor `(1 - p²δ) / p²`.
    P2Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TremblePayoffContext {
    pub delta: f64,
    pub p: f64,
    pub params: PayoffParams,
    #[serde(default)]
    pub norm: Normalization,
}

impl TremblePayoffContext {
    pub fn new(delta: f64, p: f64, params: PayoffParams, norm: Normalization) -> Result<Self> {
        let ctx = TremblePayoffContext { delta, p, params, norm };
        ctx.validate()?;
        Ok(ctx)
    }

    /// Default payoffs, `1 - δ` normalization.
    pub fn standard(delta: f64, p: f64) -> Result<Self> {
        Self::new(delta, p, PayoffParams::default(), Normalization::OneMinusDelta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidContext(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidContext(format!("p must lie in (0,1], got {}", self.p)));
        }
        PayoffParams::ordered(self.params.t, self.params.r, self.params.p, self.params.s)?;
        Ok(())
    }

    pub fn with_norm(mut self, norm: Normalization) -> Self {
        self.norm = norm;
        self
    }

    /// Effective discount of the equilibrium path, `β = p²δ`.
    pub fn beta(&self) -> f64 {
        self.p * self.p * self.delta
    }

    pub fn norm_factor(&self) -> f64 {
        match self.norm {
            Normalization::OneMinusDelta => 1.0 - self.delta,
            Normalization::P2Delta => (1.0 - self.beta()) / (self.p * self.p),
        }
    }
}

/// One of the four realized outcomes leaving a product state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub prob: f64,
    pub own: Action,
    pub opp: Action,
    pub next: usize,
}

/// Markov chain on paired automaton states; state 0 is the root.
#[derive(Debug, Clone)]
pub struct ProductChain {
    pub states: Vec<(usize, usize)>,
    pub outcomes: Vec<[Outcome; 4]>,
    pub reward: Vec<f64>,
    index: HashMap<(usize, usize), usize>,
}

fn tremble(p: f64, intended: Action, realized: Action) -> f64 {
    if intended == realized {
        p
    } else {
        1.0 - p
    }
}

impl ProductChain {
    /// Chain over every pair reachable from `roots`. With `all_pairs` the walk
    /// follows all four realized pairs even when they carry zero probability.
    pub fn build(
        s1: &StrategyAutomaton,
        s2: &StrategyAutomaton,
        p: f64,
        params: &PayoffParams,
        roots: &[(usize, usize)],
        all_pairs: bool,
    ) -> ProductChain {
        let mut states: Vec<(usize, usize)> = Vec::new();
        let mut index = HashMap::new();
        for &r in roots {
            if !index.contains_key(&r) {
                index.insert(r, states.len());
                states.push(r);
            }
        }
        let mut outcomes = Vec::new();
        let mut reward = Vec::new();
        let mut k = 0;
        while k < states.len() {
            let (q1, q2) = states[k];
            let (a, b) = (s1.intended(q1), s2.intended(q2));
            let mut row = [Outcome { prob: 0.0, own: Action::C, opp: Action::C, next: 0 }; 4];
            let mut r = 0.0;
            for (slot, (x, y)) in PAIRS.into_iter().enumerate() {
                let prob = tremble(p, a, x) * tremble(p, b, y);
                let succ = (s1.advance(q1, x, y), s2.advance(q2, y, x));
                let next = if prob > 0.0 || all_pairs {
                    *index.entry(succ).or_insert_with(|| {
                        states.push(succ);
                        states.len() - 1
                    })
                } else {
                    usize::MAX
                };
                row[slot] = Outcome { prob, own: x, opp: y, next };
                r += prob * params.u(x, y);
            }
            outcomes.push(row);
            reward.push(r);
            k += 1;
        }
        ProductChain { states, outcomes, reward, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, q1: usize, q2: usize) -> Option<usize> {
        self.index.get(&(q1, q2)).copied()
    }

    /// Outcomes with positive probability from state `k`.
    pub fn successors(&self, k: usize) -> impl Iterator<Item = &Outcome> {
        self.outcomes[k].iter().filter(|o| o.prob > 0.0)
    }

    /// Solves `v = r + δ P v`; `v` is the undiscounted-sum value.
    pub fn solve(&self, delta: f64) -> Result<Vec<f64>> {
        let n = self.len();
        let mut a = DMatrix::<f64>::identity(n, n);
        for (k, row) in self.outcomes.iter().enumerate() {
            for o in row.iter().filter(|o| o.prob > 0.0) {
                a[(k, o.next)] -= delta * o.prob;
            }
        }
        let b = DVector::from_column_slice(&self.reward);
        let lu = a.clone().lu();
        let mut x = lu.solve(&b).ok_or_else(|| Error::Solver("singular payoff system".into()))?;
        let scale = x.amax().max(1.0);
        let mut residual = f64::INFINITY;
        for _ in 0..8 {
            let res = &b - &a * &x;
            residual = res.amax();
            if residual <= 1e-12 * scale {
                break;
            }
            match lu.solve(&res) {
                Some(dx) => x += dx,
                None => break,
            }
        }
        if residual > 1e-10 * scale {
            return Err(Error::Solver(format!("residual {residual:e} after refinement")));
        }
        Ok(x.iter().copied().collect())
    }
}

pub fn product_chain(s1: &StrategyAutomaton, s2: &StrategyAutomaton, p: f64, params: &PayoffParams) -> ProductChain {
    ProductChain::build(s1, s2, p, params, &[(s1.initial, s2.initial)], false)
}

/// Exact `U_{δ,p}(s1, s2)` under the context's normalization.
pub fn payoff_exact(ctx: &TremblePayoffContext, s1: &StrategyAutomaton, s2: &StrategyAutomaton) -> Result<f64> {
    payoff_from_state(ctx, s1, s2, s1.initial, s2.initial)
}

/// Exact payoff with play starting at the paired state `(q1, q2)`.
pub fn payoff_from_state(
    ctx: &TremblePayoffContext,
    s1: &StrategyAutomaton,
    s2: &StrategyAutomaton,
    q1: usize,
    q2: usize,
) -> Result<f64> {
    ctx.validate()?;
    let chain = ProductChain::build(s1, s2, ctx.p, &ctx.params, &[(q1, q2)], false);
    let v = chain.solve(ctx.delta)?;
    Ok(ctx.norm_factor() * v[0])
}

/// Normalized values of every history-reachable paired state.
pub fn state_values(
    ctx: &TremblePayoffContext,
    s1: &StrategyAutomaton,
    s2: &StrategyAutomaton,
) -> Result<(ProductChain, Vec<f64>)> {
    ctx.validate()?;
    let chain = ProductChain::build(s1, s2, ctx.p, &ctx.params, &[(s1.initial, s2.initial)], true);
    let v = chain.solve(ctx.delta)?;
    let f = ctx.norm_factor();
    Ok((chain, v.into_iter().map(|x| f * x).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncated {
    pub value: f64,
    pub error_bound: f64,
    pub horizon: usize,
}

/// Forward propagation of the state distribution over `horizon` periods.
pub fn payoff_truncated(
    ctx: &TremblePayoffContext,
    s1: &StrategyAutomaton,
    s2: &StrategyAutomaton,
    horizon: usize,
) -> Result<Truncated> {
    ctx.validate()?;
    if horizon == 0 {
        return Err(Error::Validation("horizon must be at least 1".into()));
    }
    let chain = product_chain(s1, s2, ctx.p, &ctx.params);
    let mut dist = vec![0.0; chain.len()];
    dist[0] = 1.0;
    let mut next = vec![0.0; chain.len()];
    let mut total = 0.0;
    let mut weight = 1.0;
    for _ in 0..horizon {
        let mut stage = 0.0;
        next.iter_mut().for_each(|x| *x = 0.0);
        for (k, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            stage += mass * chain.reward[k];
            for o in chain.successors(k) {
                next[o.next] += mass * o.prob;
            }
        }
        total += weight * stage;
        weight *= ctx.delta;
        std::mem::swap(&mut dist, &mut next);
    }
    let f = ctx.norm_factor();
    Ok(Truncated {
        value: f * total,
        error_bound: f * ctx.params.m() * ctx.delta.powi(horizon as i32) / (1.0 - ctx.delta),
        horizon,
    })
}

/// Smallest horizon with `δ^h M / (1-δ) < tol`.
pub fn horizon_for(delta: f64, m: f64, tol: f64) -> usize {
    let h = ((tol * (1.0 - delta) / m).ln() / delta.ln()).ceil();
    (h.max(1.0) as usize) + 1
}

/// Untrembled play path from a paired state: a prefix followed by a cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayPath {
    pub outcomes: Vec<(Action, Action)>,
    pub cycle_start: usize,
}

/// Discounted outcome shares `(b1, b2, b3, b4)` for `(R, T, S, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathMasses {
    pub r: f64,
    pub t: f64,
    pub s: f64,
    pub p: f64,
}

impl PathMasses {
    pub fn value(&self, params: &PayoffParams) -> f64 {
        self.r * params.r + self.t * params.t + self.s * params.s + self.p * params.p
    }
}

impl PlayPath {
    pub fn new(s1: &StrategyAutomaton, s2: &StrategyAutomaton, q1: usize, q2: usize) -> PlayPath {
        let mut seen = HashMap::new();
        let mut outcomes = Vec::new();
        let (mut a, mut b) = (q1, q2);
        loop {
            if let Some(&start) = seen.get(&(a, b)) {
                return PlayPath { outcomes, cycle_start: start };
            }
            seen.insert((a, b), outcomes.len());
            let (x, y) = (s1.intended(a), s2.intended(b));
            outcomes.push((x, y));
            a = s1.advance(a, x, y);
            b = s2.advance(b, y, x);
        }
    }

    /// Shares of each stage outcome under weights `(1-β)βᵗ`.
    pub fn masses(&self, beta: f64) -> PathMasses {
        let mut w = [0.0f64; 4];
        let lambda = self.outcomes.len() - self.cycle_start;
        let cycle_scale = 1.0 / (1.0 - beta.powi(lambda as i32));
        let mut bt = 1.0;
        for (t, &(x, y)) in self.outcomes.iter().enumerate() {
            let scale = if t >= self.cycle_start { cycle_scale } else { 1.0 };
            w[crate::strategy::pair_index(x, y)] += (1.0 - beta) * bt * scale;
            bt *= beta;
        }
        PathMasses { r: w[0], s: w[1], t: w[2], p: w[3] }
    }

    pub fn value(&self, beta: f64, params: &PayoffParams) -> f64 {
        self.masses(beta).value(params)
    }
}

/// Payoff along the untrembled path, `(1-β) Σ βᵗ u_t` with `β = p²δ`.
pub fn eqpath_payoff(
    ctx: &TremblePayoffContext,
    s1: &StrategyAutomaton,
    s2: &StrategyAutomaton,
    q1: usize,
    q2: usize,
) -> f64 {
    PlayPath::new(s1, s2, q1, q2).value(ctx.beta(), &ctx.params)
}

/// Contribution of the equilibrium path to the trembled payoff,
/// `norm · Σ p^{2t+2} δᵗ u_t`, on the context's normalization.
pub fn eqpath_contribution(
    ctx: &TremblePayoffContext,
    s1: &StrategyAutomaton,
    s2: &StrategyAutomaton,
    q1: usize,
    q2: usize,
) -> f64 {
    let beta = ctx.beta();
    ctx.norm_factor() * ctx.p * ctx.p / (1.0 - beta) * eqpath_payoff(ctx, s1, s2, q1, q2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffpathBound {
    /// `(1-p²) M / (p²(1-δ))`.
    pub statement: f64,
    /// `(1-p²) M / (1-p²δ)`.
    pub proof: f64,
    pub bound: f64,
}

pub fn offpath_bound(ctx: &TremblePayoffContext) -> OffpathBound {
    let q = ctx.p * ctx.p;
    let m = ctx.params.m();
    let statement = (1.0 - q) / (q * (1.0 - ctx.delta)) * m;
    let proof = (1.0 - q) / (1.0 - q * ctx.delta) * m;
    OffpathBound { statement, proof, bound: statement.max(proof) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub labels: Vec<String>,
    pub a: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ctx: Option<TremblePayoffContext>,
}

impl PayoffMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("payoff matrix must be square and non-empty".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation("payoff matrix has non-finite entries".into()));
        }
        let labels = (1..=n).map(|i| format!("s{i}")).collect();
        Ok(PayoffMatrix { labels, a: rows, ctx: None })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    /// Row-major copy.
    pub fn flat(&self) -> Vec<f64> {
        self.a.iter().flatten().copied().collect()
    }

    /// Submatrix on the given strategies, in the given order.
    pub fn restrict(&self, idx: &[usize]) -> PayoffMatrix {
        PayoffMatrix {
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            a: idx.iter().map(|&i| idx.iter().map(|&j| self.a[i][j]).collect()).collect(),
            ctx: self.ctx,
        }
    }
}

/// `A[i][j] = U_{δ,p}(s_i, s_j)`; cells are computed in parallel, each by
/// the same deterministic solve.
pub fn payoff_matrix(ctx: &TremblePayoffContext, strategies: &[StrategyAutomaton]) -> Result<PayoffMatrix> {
    ctx.validate()?;
    if strategies.is_empty() {
        return Err(Error::Validation("no strategies".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for s in strategies {
        if !seen.insert(s.name.as_str()) {
            return Err(Error::DuplicateLabel(s.name.clone()));
        }
    }
    let n = strategies.len();
    let cells: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| payoff_exact(ctx, &strategies[k / n], &strategies[k % n]))
        .collect::<Result<_>>()?;
    Ok(PayoffMatrix {
        labels: strategies.iter().map(|s| s.name.clone()).collect(),
        a: cells.chunks(n).map(|c| c.to_vec()).collect(),
        ctx: Some(*ctx),
    })
}

/// Closed forms for grim against always-defect (grim vs forgiving grim reduces
/// to these).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct GrimAllDForms {
    pub L: f64,
    pub GA: f64,
    pub GA0: f64,
    pub GA1: f64,
    pub AG: f64,
    pub AG0: f64,
    pub AG1: f64,
    pub E: f64,
    pub GA0_printed: f64,
    pub AG1_printed: f64,
}

#[allow(non_snake_case)]
pub fn grim_alld_closed_forms(ctx: &TremblePayoffContext) -> Result<GrimAllDForms> {
    ctx.validate()?;
    if ctx.p >= 1.0 {
        return Err(Error::InvalidContext("closed forms need p < 1".into()));
    }
    let (d, p) = (ctx.delta, ctx.p);
    let PayoffParams { t, r, p: pp, s } = ctx.params;
    let q = 1.0 - p;
    let L = (q * q * r + (s + t) * q * p + p * p * pp) / (1.0 - d);
    let g = 1.0 - p * p * d; // 1 - p²δ
    let m = 1.0 - p * q * d; // 1 - p(1-p)δ
    let h = 1.0 - q * q * d; // 1 - (1-p)²δ
    let dl = d * L;
    let GA = r * (p * p / g - p * q / m)
        + (s + dl) * (p * q / g - q * q / m)
        + (t + dl) * (q * p / g - p * p / m)
        + (pp + dl) * (q * q / g - q * p / m);
    // term-wise splits; GA = GA0 + GA1 and AG = AG0 + AG1 hold exactly
    let GA0 = r * (p * p / g - p * q / m) + s * (p * q / g - q * q / m) + t * (q * p / g - p * p / m)
        + pp * (q * q / g - q * p / m);
    let GA1 = dl * ((1.0 - p * p) / g - (1.0 - q * p) / m);
    let AG = r * (q * q / h - p * q / m)
        + (s + dl) * (p * q / h - p * p / m)
        + (t + dl) * (q * p / h - q * q / m)
        + (pp + dl) * (p * p / h - q * p / m);
    let AG0 = r * (q * q / h - p * q / m) + s * (p * q / h - p * p / m) + t * (q * p / h - q * q / m)
        + pp * (p * p / h - q * p / m);
    let AG1 = dl * ((2.0 * p * q + p * p) / h - (1.0 - q * p) / m);
    // simplified forms as printed; they drop terms and differ from the splits
    let GA0_printed = (r * p * p + (s + t) * p * q + pp * q * q) * (1.0 / g - 1.0 / m);
    let AG1_printed = dl * q * (2.0 * p / h - q / m + p * p * d / (h * m));
    let E = 1.0 / (1.0 + GA / AG);
    Ok(GrimAllDForms { L, GA, GA0, GA1, AG, AG0, AG1, E, GA0_printed, AG1_printed })
}
