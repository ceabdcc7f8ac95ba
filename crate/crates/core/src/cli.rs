//! Command-line front end. Every run reads one JSON config, hashes its
//! effective form and writes CSV/JSON (and SVG for three strategies) into the
//! output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::basin::{basin_report, mc_basin_measure, m0_bound, perturbed_basin_radius, EnsembleConfig, McOptions, Region};
use crate::error::{Error, Result};
use crate::experiments::{self, REPRODUCE_IDS};
use crate::payoff::{payoff_matrix, offpath_bound, Normalization, PayoffMatrix, TremblePayoffContext};
use crate::replicator::{
    affine_form, integrate, integrate_perturbed, pairwise_barrier, vector_field, vertex_eigenvalues, IntegrateOptions,
    Perturbation, SimplexPoint, Terminal, Trajectory,
};
use crate::robustness::{
    best_deviation_eqpath, best_deviation_full, c0_default, grim_collapse_sweep, p_main_eq_min, p_schedule,
    uniform_strict_check,
};
use crate::strategy::{AutomatonSpec, PayoffParams, StrategyAutomaton};

pub const VERSION: &str = concat!("ipd-basins ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ipd-basins", version, about = "Trembled prisoner's dilemma payoffs, basins and robustness checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config; defaults apply to every omitted field.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Root seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Payoff matrix of a list of strategies.
    Payoff,
    /// Replicator trajectory from one start.
    Simulate,
    /// Basin bound, certificate and Monte-Carlo check around a vertex.
    Basin,
    /// Affine form, corner bound, eigenvalues and pairwise barriers.
    Bound,
    /// Table over a grid of delta and p.
    Sweep,
    /// Best-deviation and uniform-strictness report.
    CheckSgp,
    /// Three-strategy game with a thin basin.
    Counterexample,
    /// Re-run a bundled experiment and assert its claims.
    Reproduce {
        /// One of thm-a1-ensemble, counterexample, grim-collapse, wsls-sgp, wsls-n, aw, perturbed.
        id: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Payoff => "payoff",
            Command::Simulate => "simulate",
            Command::Basin => "basin",
            Command::Bound => "bound",
            Command::Sweep => "sweep",
            Command::CheckSgp => "check-sgp",
            Command::Counterexample => "counterexample",
            Command::Reproduce { .. } => "reproduce",
        }
    }
}

/// Stage game and discounting shared by the commands that build payoffs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Game {
    pub payoffs: PayoffParams,
    pub delta: f64,
    pub p: f64,
    pub norm: Normalization,
}

impl Default for Game {
    fn default() -> Self {
        Game { payoffs: PayoffParams::default(), delta: 0.9, p: 0.99, norm: Normalization::OneMinusDelta }
    }
}

impl Game {
    fn ctx(&self) -> Result<TremblePayoffContext> {
        TremblePayoffContext::new(self.delta, self.p, self.payoffs, self.norm)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StrategySpec {
    Literal(String),
    Automaton(AutomatonSpec),
}

impl StrategySpec {
    fn build(&self) -> Result<StrategyAutomaton> {
        match self {
            StrategySpec::Literal(s) => s.parse(),
            StrategySpec::Automaton(a) => a.build(),
        }
    }
}

fn default_strategies() -> Vec<StrategySpec> {
    ["allC", "allD", "grim", "forgiving_grim", "tft", "wsls"].iter().map(|s| StrategySpec::Literal(s.to_string())).collect()
}

/// Either an explicit matrix or strategies evaluated under `game`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatrixSource {
    pub matrix: Option<Vec<Vec<f64>>>,
    pub labels: Option<Vec<String>>,
    pub strategies: Option<Vec<StrategySpec>>,
    pub game: Game,
}

impl MatrixSource {
    fn resolve(&self) -> Result<(PayoffMatrix, Option<TremblePayoffContext>)> {
        match (&self.matrix, &self.strategies) {
            (Some(_), Some(_)) => Err(Error::Validation("give either `matrix` or `strategies`, not both".into())),
            (Some(rows), None) => {
                let mut m = PayoffMatrix::from_rows(rows.clone())?;
                if let Some(l) = &self.labels {
                    if l.len() != m.n() {
                        return Err(Error::Validation("`labels` length differs from the matrix".into()));
                    }
                    m.labels = l.clone();
                }
                Ok((m, None))
            }
            (None, specs) => {
                let ctx = self.game.ctx()?;
                let specs = specs.clone().unwrap_or_else(default_strategies);
                let list = specs.iter().map(StrategySpec::build).collect::<Result<Vec<_>>>()?;
                Ok((payoff_matrix(&ctx, &list)?, Some(ctx)))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PayoffConfig {
    pub game: Game,
    pub strategies: Vec<StrategySpec>,
}

impl Default for PayoffConfig {
    fn default() -> Self {
        PayoffConfig { game: Game::default(), strategies: default_strategies() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub source: MatrixSource,
    /// Start point; defaults to the barycenter.
    pub x0: Option<Vec<f64>>,
    pub t_max: f64,
    pub h: f64,
    pub record_every: usize,
    pub svg: bool,
    /// `half_share` integrates the flow with factors `1 + x_i/2` around `pivot`.
    pub perturbation: Option<String>,
    pub pivot: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            source: MatrixSource::default(),
            x0: None,
            t_max: 1000.0,
            h: 0.01,
            record_every: 10,
            svg: true,
            perturbation: None,
            pivot: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasinConfig {
    pub source: MatrixSource,
    pub pivot: usize,
    pub mc_samples: usize,
    pub gral_samples: usize,
    /// Extra Monte-Carlo run over the whole simplex.
    pub full_simplex_samples: usize,
    pub t_max: f64,
    pub seed: u64,
}

impl Default for BasinConfig {
    fn default() -> Self {
        BasinConfig {
            source: MatrixSource::default(),
            pivot: 5,
            mc_samples: 500,
            gral_samples: 20_000,
            full_simplex_samples: 0,
            t_max: 5000.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    pub source: MatrixSource,
    pub pivot: usize,
    /// Bounds `C⁻ ≤ H_i ≤ C⁺` of a perturbation, for the perturbed radius.
    pub c_minus: f64,
    pub c_plus: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig { source: MatrixSource::default(), pivot: 5, c_minus: 1.0, c_plus: 1.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Every payoff matrix entry per grid cell.
    Payoff,
    /// `E(δ,p)` for grim against forgiving grim.
    GrimCollapse,
    /// The `p(δ)` schedule per `δ`; `ps` is ignored.
    PSchedule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub payoffs: PayoffParams,
    pub norm: Normalization,
    pub deltas: Vec<f64>,
    pub ps: Vec<f64>,
    pub strategies: Vec<StrategySpec>,
    pub epsilon: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kind: SweepKind::GrimCollapse,
            payoffs: PayoffParams::default(),
            norm: Normalization::OneMinusDelta,
            deltas: vec![0.9, 0.99, 0.999],
            ps: vec![0.999, 0.9999, 0.99999],
            strategies: default_strategies(),
            epsilon: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSgpConfig {
    pub payoffs: PayoffParams,
    pub delta: f64,
    /// Tremble-free probability; defaults to the `p(δ)` schedule.
    pub p: Option<f64>,
    pub epsilon: f64,
    /// Strictness constant; defaults to `min{P − S, 2R − (T + P) − ε}`.
    pub c0: Option<f64>,
    pub strategies: Vec<StrategySpec>,
}

impl Default for CheckSgpConfig {
    fn default() -> Self {
        CheckSgpConfig {
            payoffs: PayoffParams::default(),
            delta: 0.95,
            p: None,
            epsilon: 0.1,
            c0: None,
            strategies: ["wsls", "grim", "allC", "allD", "tft"].iter().map(|s| StrategySpec::Literal(s.to_string())).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub lambda: f64,
    pub a_cap: f64,
    pub t_max: f64,
    pub record_every: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig { lambda: 0.05, a_cap: 10.0, t_max: 5000.0, record_every: 10, mc_samples: 0, seed: 1 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproduceConfig {
    pub ensemble: EnsembleConfig,
}

/// Outcome of a command: files written and whether its assertions held.
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

struct Run {
    out: PathBuf,
    hash: String,
    command: &'static str,
    config: Value,
    files: Vec<PathBuf>,
}

impl Run {
    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        fs::write(&path, body)?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, ctx: Option<&TremblePayoffContext>, result: impl Serialize) -> Result<()> {
        let doc = json!({
            "version": VERSION,
            "command": self.command,
            "config_hash": self.hash,
            "config": self.config,
            "ctx": ctx,
            "result": result,
        });
        let mut body = serde_json::to_string_pretty(&doc)?;
        body.push('\n');
        self.write(name, &body)
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<Cell>]) -> Result<()> {
        let mut body = format!("# {VERSION} config_hash={}\n", self.hash);
        body.push_str(&header.join(","));
        body.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            body.push_str(&cells.join(","));
            body.push('\n');
        }
        self.write(name, &body)
    }
}

pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt17(*x),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn text(s: impl Into<String>) -> Cell {
    Cell::Text(s.into())
}

/// SHA-256 of the canonical JSON of the effective config.
pub fn config_hash(command: &str, config: &Value) -> String {
    let canonical = serde_json::to_vec(&json!({ "command": command, "config": config })).expect("json value");
    hex::encode(Sha256::digest(canonical))
}

fn load<T: DeserializeOwned + Serialize + Default>(path: Option<&Path>, seed: Option<u64>, seed_path: &[&str]) -> Result<(T, Value)> {
    let mut raw: Value = match path {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)
            .map_err(|e| Error::Validation(format!("config {}: {e}", p.display())))?,
        None => json!({}),
    };
    if !raw.is_object() {
        return Err(Error::Validation("config must be a JSON object".into()));
    }
    if let Some(seed) = seed {
        if seed_path.is_empty() {
            return Err(Error::Validation("this command takes no seed".into()));
        }
        let mut node = &mut raw;
        for key in &seed_path[..seed_path.len() - 1] {
            node = node
                .as_object_mut()
                .expect("object")
                .entry(key.to_string())
                .or_insert_with(|| json!({}));
        }
        node.as_object_mut()
            .ok_or_else(|| Error::Validation("seed target is not an object".into()))?
            .insert(seed_path[seed_path.len() - 1].to_string(), json!(seed));
    }
    let cfg: T = serde_json::from_value(raw).map_err(|e| Error::Validation(format!("config: {e}")))?;
    let effective = serde_json::to_value(&cfg)?;
    Ok((cfg, effective))
}

/// Parses arguments, runs, and maps the result to an exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_VALIDATION;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            if o.passed {
                EXIT_OK
            } else {
                EXIT_ASSERTION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_VALIDATION,
            }
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg_path = cli.config.as_deref();
    let command = cli.command.name();
    macro_rules! start {
        ($t:ty, $seed:expr) => {{
            let (cfg, effective): ($t, Value) = load(cfg_path, cli.seed, $seed)?;
            let run = Run { out: cli.out.clone(), hash: config_hash(command, &effective), command, config: effective, files: Vec::new() };
            (cfg, run)
        }};
    }
    let passed = match &cli.command {
        Command::Payoff => {
            let (cfg, mut run) = start!(PayoffConfig, &[]);
            cmd_payoff(&cfg, &mut run)?;
            return Ok(Outcome { files: run.files, passed: true });
        }
        Command::Simulate => {
            let (cfg, mut run) = start!(SimulateConfig, &[]);
            cmd_simulate(&cfg, &mut run)?;
            return Ok(Outcome { files: run.files, passed: true });
        }
        Command::Basin => {
            let (cfg, mut run) = start!(BasinConfig, &["seed"]);
            cmd_basin(&cfg, &mut run)?;
            return Ok(Outcome { files: run.files, passed: true });
        }
        Command::Bound => {
            let (cfg, mut run) = start!(BoundConfig, &[]);
            cmd_bound(&cfg, &mut run)?;
            return Ok(Outcome { files: run.files, passed: true });
        }
        Command::Sweep => {
            let (cfg, mut run) = start!(SweepConfig, &[]);
            cmd_sweep(&cfg, &mut run)?;
            return Ok(Outcome { files: run.files, passed: true });
        }
        Command::CheckSgp => {
            let (cfg, mut run) = start!(CheckSgpConfig, &[]);
            cmd_check_sgp(&cfg, &mut run)?;
            return Ok(Outcome { files: run.files, passed: true });
        }
        Command::Counterexample => {
            let (cfg, mut run) = start!(CounterexampleConfig, &["seed"]);
            cmd_counterexample(&cfg, &mut run)?;
            return Ok(Outcome { files: run.files, passed: true });
        }
        Command::Reproduce { id } => {
            if !REPRODUCE_IDS.contains(&id.as_str()) {
                return Err(Error::Validation(format!("unknown experiment id `{id}`; known: {}", REPRODUCE_IDS.join(", "))));
            }
            let (cfg, mut run) = start!(ReproduceConfig, &["ensemble", "seed"]);
            let c = experiments::reproduce(id, &cfg.ensemble)?;
            run.json(&format!("reproduce_{id}.json"), None, &c)?;
            let mut summary = format!("# {VERSION} config_hash={}\n", run.hash);
            summary.push_str(&c.summary());
            run.write(&format!("reproduce_{id}.txt"), &summary)?;
            print!("{}", c.summary());
            (run.files, c.passed)
        }
    };
    Ok(Outcome { files: passed.0, passed: passed.1 })
}

fn matrix_rows(m: &PayoffMatrix) -> (Vec<String>, Vec<Vec<Cell>>) {
    let mut header = vec!["row".to_string()];
    header.extend(m.labels.iter().cloned());
    let rows = (0..m.n())
        .map(|i| {
            let mut r = vec![text(m.labels[i].clone())];
            r.extend((0..m.n()).map(|j| Cell::Num(m.get(i, j))));
            r
        })
        .collect();
    (header, rows)
}

fn cmd_payoff(cfg: &PayoffConfig, run: &mut Run) -> Result<()> {
    let ctx = cfg.game.ctx()?;
    if cfg.strategies.is_empty() {
        return Err(Error::Validation("no strategies given".into()));
    }
    let list = cfg.strategies.iter().map(StrategySpec::build).collect::<Result<Vec<_>>>()?;
    let m = payoff_matrix(&ctx, &list)?;
    let (header, rows) = matrix_rows(&m);
    run.csv("payoff_matrix.csv", &header, &rows)?;
    let states: Vec<_> = list.iter().map(|s| json!({"name": s.name, "states": s.n_states()})).collect();
    run.json(
        "payoff_report.json",
        Some(&ctx),
        json!({"labels": m.labels, "matrix": m.a, "strategies": states, "offpath_bound": offpath_bound(&ctx)}),
    )
}

fn trajectory_csv(run: &mut Run, name: &str, labels: &[String], t: &Trajectory) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend(labels.iter().cloned());
    let rows: Vec<Vec<Cell>> = t
        .times
        .iter()
        .zip(&t.points)
        .map(|(time, x)| std::iter::once(Cell::Num(*time)).chain(x.iter().map(|v| Cell::Num(*v))).collect())
        .collect();
    run.csv(name, &header, &rows)
}

/// Equilateral triangle plot of a trajectory on three strategies.
pub fn simplex_svg(labels: &[String], points: &[Vec<f64>], hash: &str) -> String {
    let (w, h) = (400.0, 370.0);
    let corners = [(200.0, 30.0), (30.0, 325.0), (370.0, 325.0)];
    let map = |x: &[f64]| {
        let px: f64 = (0..3).map(|i| x[i] * corners[i].0).sum();
        let py: f64 = (0..3).map(|i| x[i] * corners[i].1).sum();
        (px, py)
    };
    let mut s = String::new();
    let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">");
    let _ = writeln!(s, "<!-- {VERSION} config_hash={hash} -->");
    let tri: Vec<String> = corners.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
    let _ = writeln!(s, "<polygon points=\"{}\" fill=\"none\" stroke=\"black\"/>", tri.join(" "));
    let offsets = [(0.0, -10.0), (-10.0, 20.0), (10.0, 20.0)];
    for i in 0..3 {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
            corners[i].0 + offsets[i].0,
            corners[i].1 + offsets[i].1,
            labels[i].replace('&', "&amp;").replace('<', "&lt;")
        );
    }
    let path: Vec<String> = points.iter().map(|x| map(x)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
    let _ = writeln!(s, "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>", path.join(" "));
    if let (Some(a), Some(b)) = (points.first(), points.last()) {
        let (ax, ay) = map(a);
        let (bx, by) = map(b);
        let _ = writeln!(s, "<circle cx=\"{ax:.3}\" cy=\"{ay:.3}\" r=\"3\" fill=\"green\"/>");
        let _ = writeln!(s, "<circle cx=\"{bx:.3}\" cy=\"{by:.3}\" r=\"3\" fill=\"red\"/>");
    }
    s.push_str("</svg>\n");
    s
}

fn terminal_json(t: &Terminal, labels: &[String]) -> Value {
    match t {
        Terminal::ConvergedToVertex(i) => json!({"kind": "converged_to_vertex", "vertex": i, "label": labels[*i]}),
        Terminal::MaxTime => json!({"kind": "max_time"}),
        Terminal::LeftRegion => json!({"kind": "left_region"}),
    }
}

fn cmd_simulate(cfg: &SimulateConfig, run: &mut Run) -> Result<()> {
    let (m, ctx) = cfg.source.resolve()?;
    let n = m.n();
    let x0 = match &cfg.x0 {
        Some(x) => {
            if x.len() != n {
                return Err(Error::Validation(format!("x0 has {} entries, matrix has {n}", x.len())));
            }
            SimplexPoint::with_tolerance(x.clone(), 1e-9)?
        }
        None => SimplexPoint { x: vec![1.0 / n as f64; n] },
    };
    let opts = IntegrateOptions { h: cfg.h, record_every: cfg.record_every, ..Default::default() };
    let rest = vector_field(&m, &x0)?.iter().all(|v| *v == 0.0);
    let traj = if rest {
        Trajectory {
            times: vec![0.0],
            points: vec![x0.x.clone()],
            terminal: Terminal::MaxTime,
            steps: 0,
            monotone: None,
            last: x0.x.clone(),
        }
    } else {
        match cfg.perturbation.as_deref() {
            None => integrate(&m, &x0, cfg.t_max, &opts)?,
            Some("half_share") => {
                if cfg.pivot >= n {
                    return Err(Error::Validation("pivot out of range".into()));
                }
                integrate_perturbed(&m, &Perturbation::half_share(), cfg.pivot, &x0, cfg.t_max, &opts)?
            }
            Some(other) => return Err(Error::Validation(format!("unknown perturbation `{other}`"))),
        }
    };
    trajectory_csv(run, "trajectory.csv", &m.labels, &traj)?;
    let mut notes = Vec::new();
    if rest {
        notes.push("x0 is a rest point".to_string());
    }
    if cfg.svg {
        if n == 3 {
            let svg = simplex_svg(&m.labels, &traj.points, &run.hash);
            run.write("trajectory.svg", &svg)?;
        } else {
            notes.push(format!("svg skipped: only three-strategy trajectories are plotted, got {n}"));
        }
    }
    let terminal = if rest { json!({"kind": "rest_point"}) } else { terminal_json(&traj.terminal, &m.labels) };
    run.json(
        "simulate_report.json",
        ctx.as_ref(),
        json!({"labels": m.labels, "matrix": m.a, "x0": x0.x, "terminal": terminal, "steps": traj.steps, "final": traj.last, "notes": notes}),
    )
}

fn cmd_basin(cfg: &BasinConfig, run: &mut Run) -> Result<()> {
    let (m, ctx) = cfg.source.resolve()?;
    if cfg.pivot >= m.n() {
        return Err(Error::Validation(format!("pivot {} out of range for {} strategies", cfg.pivot, m.n())));
    }
    let opts = McOptions { t_max: cfg.t_max, ..Default::default() };
    let report = basin_report(&m, cfg.pivot, cfg.mc_samples, cfg.gral_samples, cfg.seed, &opts)?;
    let full = if cfg.full_simplex_samples > 0 {
        Some(mc_basin_measure(&m, cfg.pivot, Region::FullSimplex, cfg.full_simplex_samples, cfg.seed ^ 0xf11, &opts)?)
    } else {
        None
    };
    run.json(
        "basin_report.json",
        ctx.as_ref(),
        json!({"labels": m.labels, "pivot_label": m.labels[cfg.pivot], "report": report, "full_simplex": full}),
    )
}

fn cmd_bound(cfg: &BoundConfig, run: &mut Run) -> Result<()> {
    let (m, ctx) = cfg.source.resolve()?;
    if cfg.pivot >= m.n() {
        return Err(Error::Validation(format!("pivot {} out of range for {} strategies", cfg.pivot, m.n())));
    }
    let af = affine_form(&m, cfg.pivot)?;
    let bound = m0_bound(&af)?;
    let perturbed = perturbed_basin_radius(&af, cfg.c_minus, cfg.c_plus)?;
    let others: Vec<&String> = af.others.iter().map(|&j| &m.labels[j]).collect();
    let barriers: Vec<Value> = af
        .others
        .iter()
        .map(|&j| {
            let b = pairwise_barrier(&m, cfg.pivot, j);
            json!({"against": m.labels[j], "barrier": b.value, "interior": b.interior})
        })
        .collect();
    let (header, rows) = matrix_rows(&m);
    run.csv("bound_matrix.csv", &header, &rows)?;
    run.json(
        "bound_report.json",
        ctx.as_ref(),
        json!({
            "labels": m.labels,
            "pivot_label": m.labels[cfg.pivot],
            "affine_order": others,
            "N": af.n,
            "M": af.m,
            "m0": bound.m0,
            "radius": bound.radius,
            "perturbed_radius": perturbed,
            "vertex_eigenvalues": vertex_eigenvalues(&m, cfg.pivot),
            "pairwise_barriers": barriers,
        }),
    )
}

fn cmd_sweep(cfg: &SweepConfig, run: &mut Run) -> Result<()> {
    if cfg.deltas.is_empty() {
        return Err(Error::Validation("`deltas` is empty".into()));
    }
    match cfg.kind {
        SweepKind::GrimCollapse => {
            if cfg.ps.len() != cfg.deltas.len() {
                return Err(Error::Validation("grim_collapse pairs `deltas` and `ps` entry by entry".into()));
            }
            let grid: Vec<(f64, f64)> = cfg.deltas.iter().copied().zip(cfg.ps.iter().copied()).collect();
            let rows = grim_collapse_sweep(&grid, &cfg.payoffs)?;
            let header: Vec<String> =
                ["delta", "p", "E_closed_form", "E_engine", "barrier_grim", "barrier_forgiving", "agree"].map(String::from).to_vec();
            let cells: Vec<Vec<Cell>> = rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Num(r.delta),
                        Cell::Num(r.p),
                        Cell::Num(r.e_closed_form),
                        Cell::Num(r.e_engine),
                        Cell::Num(r.barrier_grim),
                        Cell::Num(r.barrier_forgiving),
                        text(r.agree.to_string()),
                    ]
                })
                .collect();
            run.csv("sweep.csv", &header, &cells)?;
            let decreasing = rows.windows(2).all(|w| w[1].e_closed_form < w[0].e_closed_form);
            run.json("sweep_report.json", None, json!({"kind": cfg.kind, "rows": rows, "strictly_decreasing": decreasing}))
        }
        SweepKind::Payoff => {
            if cfg.ps.is_empty() {
                return Err(Error::Validation("`ps` is empty".into()));
            }
            let list = cfg.strategies.iter().map(StrategySpec::build).collect::<Result<Vec<_>>>()?;
            let mut cells = Vec::new();
            for &d in &cfg.deltas {
                for &p in &cfg.ps {
                    let ctx = TremblePayoffContext::new(d, p, cfg.payoffs, cfg.norm)?;
                    let m = payoff_matrix(&ctx, &list)?;
                    for i in 0..m.n() {
                        for j in 0..m.n() {
                            cells.push(vec![
                                Cell::Num(d),
                                Cell::Num(p),
                                text(m.labels[i].clone()),
                                text(m.labels[j].clone()),
                                Cell::Num(m.get(i, j)),
                            ]);
                        }
                    }
                }
            }
            let header: Vec<String> = ["delta", "p", "row", "col", "payoff"].map(String::from).to_vec();
            run.csv("sweep.csv", &header, &cells)?;
            run.json("sweep_report.json", None, json!({"kind": cfg.kind, "cells": cells.len()}))
        }
        SweepKind::PSchedule => {
            let c0 = c0_default(&cfg.payoffs, cfg.epsilon)?;
            let m = cfg.payoffs.m();
            let mut rows = Vec::new();
            let mut cells = Vec::new();
            for &d in &cfg.deltas {
                let s = p_schedule(d, c0.derivation, m)?;
                let p_min = p_main_eq_min(d, c0.derivation, m);
                cells.push(vec![
                    Cell::Num(d),
                    Cell::Num(s.p),
                    Cell::Num(s.p1),
                    Cell::Num(s.sqrt_delta),
                    Cell::Num(s.margin),
                    text(s.main_eq_holds.to_string()),
                    Cell::Num(p_min),
                ]);
                rows.push(json!({"delta": d, "schedule": s, "p_main_eq_min": p_min}));
            }
            let header: Vec<String> =
                ["delta", "p", "p1", "sqrt_delta", "margin", "main_eq_holds", "p_main_eq_min"].map(String::from).to_vec();
            run.csv("sweep.csv", &header, &cells)?;
            run.json("sweep_report.json", None, json!({"kind": cfg.kind, "c0": c0, "rows": rows}))
        }
    }
}

fn cmd_check_sgp(cfg: &CheckSgpConfig, run: &mut Run) -> Result<()> {
    let c0 = match cfg.c0 {
        Some(c) => c,
        None => c0_default(&cfg.payoffs, cfg.epsilon)?.derivation,
    };
    let schedule = p_schedule(cfg.delta, c0, cfg.payoffs.m())?;
    let p = cfg.p.unwrap_or(schedule.p);
    let ctx = TremblePayoffContext::new(cfg.delta, p, cfg.payoffs, Normalization::OneMinusDelta)?;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for spec in &cfg.strategies {
        let s = spec.build()?;
        let full = best_deviation_full(&s, &ctx)?;
        let verdict = uniform_strict_check(&s, &ctx, c0)?;
        let eq = best_deviation_eqpath(&s, &ctx)?;
        for (mode, r) in [("full_tremble", &full), ("eqpath", &eq)] {
            for g in &r.states {
                rows.push(vec![
                    text(s.name.clone()),
                    text(mode),
                    text(g.state.clone()),
                    Cell::Num(g.conform),
                    Cell::Num(g.optimal),
                    Cell::Num(g.deviation),
                    Cell::Num(g.gap),
                    text(g.prescription_optimal.to_string()),
                ]);
            }
        }
        reports.push(json!({
            "strategy": s.name,
            "uniform_strict": verdict.passed,
            "min_gap": verdict.min_gap,
            "threshold": verdict.threshold,
            "full_tremble": full,
            "eqpath": eq,
        }));
    }
    let header: Vec<String> =
        ["strategy", "mode", "state", "conform", "optimal", "deviation", "gap", "prescription_optimal"].map(String::from).to_vec();
    run.csv("sgp_gaps.csv", &header, &rows)?;
    run.json("sgp_report.json", Some(&ctx), json!({"c0": c0, "p_schedule": schedule, "strategies": reports}))
}

fn cmd_counterexample(cfg: &CounterexampleConfig, run: &mut Run) -> Result<()> {
    let m = crate::basin::counterexample_matrix(cfg.lambda, cfg.a_cap)?;
    let d = cfg.lambda / (1.0 + cfg.lambda);
    let x0 = SimplexPoint::from_affine(3, 0, &[d, d]);
    let opts = IntegrateOptions { record_every: cfg.record_every, ..Default::default() };
    let traj = integrate(&m, &x0, cfg.t_max, &opts)?;
    trajectory_csv(run, "counterexample_trajectory.csv", &m.labels, &traj)?;
    let svg = simplex_svg(&m.labels, &traj.points, &run.hash);
    run.write("counterexample.svg", &svg)?;
    let af = affine_form(&m, 0)?;
    let mc = if cfg.mc_samples > 0 {
        Some(mc_basin_measure(&m, 0, Region::FullSimplex, cfg.mc_samples, cfg.seed, &McOptions::default())?)
    } else {
        None
    };
    let (header, rows) = matrix_rows(&m);
    run.csv("counterexample_matrix.csv", &header, &rows)?;
    run.json(
        "counterexample_report.json",
        None,
        json!({
            "lambda": cfg.lambda,
            "matrix": m.a,
            "N": af.n,
            "M": af.m,
            "m0_radius": m0_bound(&af)?.radius,
            "barriers": [pairwise_barrier(&m, 0, 1).value, pairwise_barrier(&m, 0, 2).value],
            "eigenvalues": [vertex_eigenvalues(&m, 0), vertex_eigenvalues(&m, 1), vertex_eigenvalues(&m, 2)],
            "diagonal_start": x0.x,
            "terminal": terminal_json(&traj.terminal, &m.labels),
            "final": traj.last,
            "full_simplex": mc,
        }),
    )
}
