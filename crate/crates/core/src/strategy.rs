//! Finite automata over realized action pairs.
//!
//! A strategy reads the pair `(own, opp)` realized in the previous period and
//! moves to a new state; each state carries the action it intends to play.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of states of counter-based automata.
pub const DEFAULT_STATE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    C,
    D,
}

impl Action {
    pub const BOTH: [Action; 2] = [Action::C, Action::D];

    pub fn flip(self) -> Action {
        match self {
            Action::C => Action::D,
            Action::D => Action::C,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Action::C => 0,
            Action::D => 1,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::C => "C",
            Action::D => "D",
        })
    }
}

/// Index of a realized pair in a transition row: CC, CD, DC, DD.
pub fn pair_index(own: Action, opp: Action) -> usize {
    own.index() * 2 + opp.index()
}

/// All four realized pairs in transition-row order.
pub const PAIRS: [(Action, Action); 4] = [
    (Action::C, Action::C),
    (Action::C, Action::D),
    (Action::D, Action::C),
    (Action::D, Action::D),
];

/// Stage payoffs of the prisoner's dilemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPayoffs")]
pub struct PayoffParams {
    pub t: f64,
    pub r: f64,
    pub p: f64,
    pub s: f64,
}

#[derive(Deserialize)]
struct RawPayoffs {
    t: f64,
    r: f64,
    p: f64,
    s: f64,
}

impl TryFrom<RawPayoffs> for PayoffParams {
    type Error = Error;
    fn try_from(raw: RawPayoffs) -> Result<Self> {
        PayoffParams::ordered(raw.t, raw.r, raw.p, raw.s)
    }
}

impl Default for PayoffParams {
    fn default() -> Self {
        PayoffParams { t: 4.0, r: 3.0, p: 1.0, s: 0.0 }
    }
}

impl PayoffParams {
    /// Checks `T > R > P > S` and `2R > T + S`.
    pub fn new(t: f64, r: f64, p: f64, s: f64) -> Result<Self> {
        let params = Self::ordered(t, r, p, s)?;
        if !params.efficient() {
            return Err(Error::InvalidPayoffs(format!("need 2R > T + S, got 2R={} T+S={}", 2.0 * r, t + s)));
        }
        Ok(params)
    }

    /// Checks only `T > R > P > S`. Admits boundary games such as
    /// `T=6, R=3, P=1, S=0` where `2R = T + S`.
    pub fn ordered(t: f64, r: f64, p: f64, s: f64) -> Result<Self> {
        if ![t, r, p, s].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidPayoffs("non-finite payoff".into()));
        }
        if !(t > r && r > p && p > s) {
            return Err(Error::InvalidPayoffs(format!(
                "need T > R > P > S, got T={t} R={r} P={p} S={s}"
            )));
        }
        Ok(PayoffParams { t, r, p, s })
    }

    /// `2R > T + S`.
    pub fn efficient(&self) -> bool {
        2.0 * self.r > self.t + self.s
    }

    /// `M = max{T, |S|}`.
    pub fn m(&self) -> f64 {
        self.t.max(self.s.abs())
    }

    /// The condition `2R > T + P` under which win-stay-lose-shift is robust.
    pub fn wsls_condition(&self) -> bool {
        2.0 * self.r > self.t + self.p
    }

    /// Payoff to the player choosing `own` against `opp`.
    pub fn u(&self, own: Action, opp: Action) -> f64 {
        match (own, opp) {
            (Action::C, Action::C) => self.r,
            (Action::C, Action::D) => self.s,
            (Action::D, Action::C) => self.t,
            (Action::D, Action::D) => self.p,
        }
    }
}

/// A finite history of realized pairs `(a, b)`, first component the own action.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct HistorySeed {
    pub pairs: Vec<(Action, Action)>,
}

impl HistorySeed {
    pub fn new(pairs: Vec<(Action, Action)>) -> Self {
        HistorySeed { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The same history seen by the other player.
    pub fn swap(&self) -> HistorySeed {
        swap_history(self)
    }

    /// Every history of length at most `depth`, shortest first.
    pub fn enumerate(depth: usize) -> Vec<HistorySeed> {
        let mut out = vec![HistorySeed::default()];
        let mut frontier = vec![HistorySeed::default()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(frontier.len() * 4);
            for h in &frontier {
                for pair in PAIRS {
                    let mut pairs = h.pairs.clone();
                    pairs.push(pair);
                    next.push(HistorySeed { pairs });
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

impl fmt::Display for HistorySeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return f.write_str("-");
        }
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}{b}")?;
        }
        Ok(())
    }
}

pub fn swap_history(h: &HistorySeed) -> HistorySeed {
    HistorySeed { pairs: h.pairs.iter().map(|&(a, b)| (b, a)).collect() }
}

/// Deterministic finite strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyAutomaton {
    pub name: String,
    pub initial: usize,
    pub intended: Vec<Action>,
    /// `next[q][pair_index(own, opp)]`.
    pub next: Vec<[usize; 4]>,
    pub labels: Vec<String>,
}

impl StrategyAutomaton {
    /// Validates the tables and prunes states unreachable from `initial`.
    pub fn new(
        name: impl Into<String>,
        initial: usize,
        intended: Vec<Action>,
        next: Vec<[usize; 4]>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let n = intended.len();
        if n == 0 {
            return Err(Error::InvalidAutomaton("no states".into()));
        }
        if next.len() != n || labels.len() != n {
            return Err(Error::InvalidAutomaton("table sizes disagree".into()));
        }
        if initial >= n {
            return Err(Error::InvalidAutomaton("initial state out of range".into()));
        }
        if next.iter().flatten().any(|&q| q >= n) {
            return Err(Error::InvalidAutomaton("transition to unknown state".into()));
        }
        // breadth-first renumbering from the initial state
        let mut order = vec![usize::MAX; n];
        let mut kept = Vec::new();
        let mut queue = VecDeque::from([initial]);
        order[initial] = 0;
        kept.push(initial);
        while let Some(q) = queue.pop_front() {
            for &r in &next[q] {
                if order[r] == usize::MAX {
                    order[r] = kept.len();
                    kept.push(r);
                    queue.push_back(r);
                }
            }
        }
        Ok(StrategyAutomaton {
            name: name.into(),
            initial: 0,
            intended: kept.iter().map(|&q| intended[q]).collect(),
            next: kept.iter().map(|&q| next[q].map(|r| order[r])).collect(),
            labels: kept.iter().map(|&q| labels[q].clone()).collect(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.intended.len()
    }

    pub fn intended(&self, q: usize) -> Action {
        self.intended[q]
    }

    pub fn advance(&self, q: usize, own: Action, opp: Action) -> usize {
        self.next[q][pair_index(own, opp)]
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Loads a custom automaton from its JSON description.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: AutomatonSpec = serde_json::from_str(text)?;
        spec.build()
    }
}

pub fn advance(s: &StrategyAutomaton, q: usize, own: Action, opp: Action) -> usize {
    s.advance(q, own, opp)
}

/// Folds `advance` over `h` starting from the initial state.
pub fn run_history(s: &StrategyAutomaton, h: &HistorySeed) -> usize {
    h.pairs.iter().fold(s.initial, |q, &(a, b)| s.advance(q, a, b))
}

/// JSON form of a custom automaton.
///
/// ```json
/// {"name": "tft", "states": ["c", "d"], "initial": "c",
///  "intended": {"c": "C", "d": "D"},
///  "transitions": {"c": {"CC": "c", "CD": "d", "DC": "c", "DD": "d"},
///                  "d": {"CC": "c", "CD": "d", "DC": "c", "DD": "d"}}}
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutomatonSpec {
    pub name: String,
    pub states: Vec<String>,
    pub initial: String,
    pub intended: BTreeMap<String, Action>,
    pub transitions: BTreeMap<String, BTreeMap<String, String>>,
}

impl AutomatonSpec {
    pub fn build(&self) -> Result<StrategyAutomaton> {
        let index = |label: &str| {
            self.states
                .iter()
                .position(|s| s == label)
                .ok_or_else(|| Error::InvalidAutomaton(format!("unknown state `{label}`")))
        };
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s) {
                return Err(Error::InvalidAutomaton(format!("duplicate state `{s}`")));
            }
        }
        let mut intended = Vec::with_capacity(self.states.len());
        let mut next = Vec::with_capacity(self.states.len());
        for label in &self.states {
            let a = self
                .intended
                .get(label)
                .ok_or_else(|| Error::InvalidAutomaton(format!("no intended action for `{label}`")))?;
            intended.push(*a);
            let row = self
                .transitions
                .get(label)
                .ok_or_else(|| Error::InvalidAutomaton(format!("no transitions for `{label}`")))?;
            if row.len() != 4 {
                return Err(Error::InvalidAutomaton(format!("state `{label}` needs exactly 4 transitions")));
            }
            let mut out = [0usize; 4];
            for (own, opp) in PAIRS {
                let key = format!("{own}{opp}");
                let target = row
                    .get(&key)
                    .ok_or_else(|| Error::InvalidAutomaton(format!("state `{label}` lacks pair {key}")))?;
                out[pair_index(own, opp)] = index(target)?;
            }
            next.push(out);
        }
        StrategyAutomaton::new(self.name.clone(), index(&self.initial)?, intended, next, self.states.clone())
    }
}

/// Builds one of the named strategies.
pub fn make_standard(name: &str, n: Option<usize>, b0: Option<f64>) -> Result<StrategyAutomaton> {
    make_standard_capped(name, n, b0, DEFAULT_STATE_CAP)
}

pub fn make_standard_capped(name: &str, n: Option<usize>, b0: Option<f64>, cap: usize) -> Result<StrategyAutomaton> {
    use Action::{C, D};
    let labels = |ls: &[&str]| ls.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    match name {
        "allC" => StrategyAutomaton::new("allC", 0, vec![C], vec![[0; 4]], labels(&["c"])),
        "allD" => StrategyAutomaton::new("allD", 0, vec![D], vec![[0; 4]], labels(&["d"])),
        "grim" => StrategyAutomaton::new(
            "grim",
            0,
            vec![C, D],
            vec![[0, 1, 1, 1], [1; 4]],
            labels(&["cooperative", "punish"]),
        ),
        "forgiving_grim" => StrategyAutomaton::new(
            "forgiving_grim",
            0,
            vec![C, C, D],
            vec![[1; 4], [1, 2, 2, 2], [2; 4]],
            labels(&["start", "cooperative", "punish"]),
        ),
        "tft" => StrategyAutomaton::new("tft", 0, vec![C, D], vec![[0, 1, 0, 1]; 2], labels(&["c", "d"])),
        "wsls" => wsls_n(1).map(|mut s| {
            s.name = "wsls".into();
            s
        }),
        "wsls_n" => {
            let n = n.ok_or(Error::MissingParameter { name: name.into(), param: "n" })?;
            if n == 0 {
                return Err(Error::Validation("wsls_n needs n >= 1".into()));
            }
            if n + 1 > cap {
                return Err(Error::Budget(format!("wsls_n:{n} exceeds the state cap {cap}")));
            }
            wsls_n(n)
        }
        "aw" => {
            let n = n.ok_or(Error::MissingParameter { name: name.into(), param: "n" })?;
            let b0 = b0.ok_or(Error::MissingParameter { name: name.into(), param: "b0" })?;
            aw(n, b0, cap)
        }
        other => Err(Error::UnknownStrategy(other.into())),
    }
}

/// Win-stay-lose-shift whose shift after a sucker payoff lasts `n` periods.
///
/// States: `C` and `D` behave as plain WSLS; `K_j` plays D for `j` more
/// periods before handing back to `D`. With `n = 1` this is WSLS itself.
fn wsls_n(n: usize) -> Result<StrategyAutomaton> {
    use Action::{C, D};
    let k = |j: usize| 1 + j; // K_j sits at index 1 + j, K_0 being the plain D state
    let mut intended = vec![C, D];
    let mut next = vec![[0usize; 4]; 2];
    let mut labels = vec!["intend_C".to_string(), "intend_D".to_string()];
    for j in 1..n {
        intended.push(D);
        labels.push(format!("shift_{j}"));
        next.push([k(j - 1); 4]);
    }
    for q in 0..2 {
        for (own, opp) in PAIRS {
            next[q][pair_index(own, opp)] = match (own, opp) {
                (C, C) | (D, D) => 0,
                (D, C) => 1,
                (C, D) => k(n - 1),
            };
        }
    }
    let name = if n == 1 { "wsls".to_string() } else { format!("wsls_n:{n}") };
    StrategyAutomaton::new(name, 0, intended, next, labels)
}

/// Plays WSLS during the first `n` periods of each cycle of length
/// `n + m0 n` (`m0 = floor(1/b0)`) and always defects in the rest.
fn aw(n: usize, b0: f64, cap: usize) -> Result<StrategyAutomaton> {
    use Action::{C, D};
    if n == 0 {
        return Err(Error::Validation("aw needs n >= 1".into()));
    }
    if !(b0 > 0.0 && b0 < 1.0) {
        return Err(Error::Validation(format!("aw needs 0 < b0 < 1, got {b0}")));
    }
    let m0 = (1.0 / b0).floor() as usize;
    let len = n + m0 * n;
    if 2 * len > cap {
        return Err(Error::Budget(format!("aw:{n}:{b0} needs {} states, cap is {cap}", 2 * len)));
    }
    // state (c, w) at index 2c + w: c is the period within the cycle, w the
    // WSLS memory (0 intends C, 1 intends D)
    let mut intended = Vec::with_capacity(2 * len);
    let mut next = Vec::with_capacity(2 * len);
    let mut labels = Vec::with_capacity(2 * len);
    for c in 0..len {
        for w in 0..2 {
            let in_w_block = c < n;
            intended.push(if in_w_block && w == 0 { C } else { D });
            labels.push(format!("t{c}_{}", if w == 0 { "C" } else { "D" }));
            let c_next = (c + 1) % len;
            let mut row = [0usize; 4];
            for (own, opp) in PAIRS {
                let w_next = usize::from(own != opp);
                row[pair_index(own, opp)] = 2 * c_next + w_next;
            }
            next.push(row);
        }
    }
    StrategyAutomaton::new(format!("aw:{n}:{b0}"), 0, intended, next, labels)
}

/// Number of periods in each aw cycle and the index where the all-D block starts.
pub fn aw_blocks(n: usize, b0: f64) -> (usize, usize) {
    let m0 = (1.0 / b0).floor() as usize;
    (n + m0 * n, n)
}

impl FromStr for StrategyAutomaton {
    type Err = Error;

    /// Parses literals such as `wsls`, `wsls_n:3` or `aw:4:0.5`.
    fn from_str(lit: &str) -> Result<Self> {
        let mut parts = lit.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let bad = || Error::Validation(format!("malformed strategy literal `{lit}`"));
        match (name, rest.as_slice()) {
            ("wsls_n", [n]) => make_standard(name, Some(n.parse().map_err(|_| bad())?), None),
            ("aw", [n, b0]) => make_standard(
                name,
                Some(n.parse().map_err(|_| bad())?),
                Some(b0.parse().map_err(|_| bad())?),
            ),
            (_, []) => make_standard(name, None, None),
            _ => Err(bad()),
        }
    }
}

/// True iff `s(h)` and `s(ĥ)` intend the same action for every `h` of length
/// at most `depth`. Walks pairs of states `(run(h), run(ĥ))` level by level,
/// which visits the same configurations as the exhaustive 4^depth walk.
pub fn symmetry_check(s: &StrategyAutomaton, depth: usize) -> bool {
    let start = (s.initial, s.initial);
    let mut seen = HashSet::from([start]);
    let mut level = vec![start];
    for _ in 0..=depth {
        if level.iter().any(|&(q, r)| s.intended(q) != s.intended(r)) {
            return false;
        }
        let mut next = Vec::new();
        for &(q, r) in &level {
            for (a, b) in PAIRS {
                let pair = (s.advance(q, a, b), s.advance(r, b, a));
                if seen.insert(pair) {
                    next.push(pair);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    true
}

/// True iff some reachable state lies in a set of all-D states closed under
/// every realized pair.
pub fn unforgiving_check(s: &StrategyAutomaton) -> bool {
    let mut inside: Vec<bool> = s.intended.iter().map(|&a| a == Action::D).collect();
    loop {
        let mut changed = false;
        for q in 0..s.n_states() {
            if inside[q] && s.next[q].iter().any(|&r| !inside[r]) {
                inside[q] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    inside.iter().any(|&b| b)
}

/// The library used by the acceptance suite, in a fixed order.
pub fn standard_library() -> Vec<StrategyAutomaton> {
    ["allC", "allD", "grim", "forgiving_grim", "tft", "wsls", "wsls_n:3", "aw:4:0.5"]
        .iter()
        .map(|lit| lit.parse().expect("library literal"))
        .collect()
}
