//! Basin bounds around a strict Nash vertex.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::payoff::PayoffMatrix;
use crate::replicator::{
    affine_form, integrate, integrate_perturbed, pairwise_barrier, AffineForm, IntegrateOptions, Perturbation,
    SimplexPoint, Terminal,
};

/// Independent generator for task `stream` of a run seeded by `seed`.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct M0Bound {
    pub m0: f64,
    /// `1/M0`, infinite when `M0 = 0`.
    pub radius: f64,
}

/// `M0 = max_{i, j≥i} {(M_ij + M_ji)/(−N_i), 0}` in the sorted ordering.
pub fn m0_bound(af: &AffineForm) -> Result<M0Bound> {
    if !af.strict_nash {
        return Err(Error::NotStrictNash(af.pivot));
    }
    let k = af.n.len();
    let mut m0 = 0.0f64;
    for i in 0..k {
        for j in i..k {
            m0 = m0.max((af.m[i][j] + af.m[j][i]) / (-af.n[i]));
        }
    }
    Ok(M0Bound { m0, radius: if m0 > 0.0 { 1.0 / m0 } else { f64::INFINITY } })
}

/// Uniform point of `{y ≥ 0, Σy ≤ r}` in dimension `dim`.
pub fn sample_corner<R: Rng>(rng: &mut R, dim: usize, r: f64) -> Vec<f64> {
    let mut y: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = y.iter().sum();
    let scale = r * rng.gen::<f64>().powf(1.0 / dim as f64) / total;
    y.iter_mut().for_each(|v| *v *= scale);
    y
}

/// Uniform point of the full simplex with `n` vertices.
pub fn sample_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    x
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GralACheck {
    pub passed: bool,
    pub samples: usize,
    pub max_q: f64,
    /// Sorted affine coordinates of a point with `Q ≥ 0`.
    pub witness: Option<Vec<f64>>,
}

/// Brute-force check that `Q(y) = N·y + yᵀMy < 0` on `{y ≥ 0, Σy < r}`.
pub fn gral_a_check(af: &AffineForm, radius: f64, n_samples: usize, seed: u64) -> GralACheck {
    let dim = af.n.len();
    let r = radius * (1.0 - 1e-9);
    let (max_q, _, witness) = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let y = sample_corner(&mut task_rng(seed, i as u64), dim, r);
            (af.q(&y), i, y)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, Vec::new()),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    GralACheck { passed: max_q < 0.0, samples: n_samples, max_q, witness: (max_q >= 0.0).then_some(witness) }
}

/// Random matrix with vertex 0 strict Nash: entries uniform in `[0, 5]`, then
/// the first column is redrawn so that `a_00 − a_j0 ∈ [0.1, 2]` for every j.
pub fn random_strict_nash<R: Rng>(rng: &mut R, n: usize) -> PayoffMatrix {
    let mut a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0.0..5.0)).collect()).collect();
    let a00 = rng.gen_range(2.0..5.0);
    a[0][0] = a00;
    for row in a.iter_mut().skip(1) {
        row[0] = a00 - rng.gen_range(0.1..2.0);
    }
    PayoffMatrix::from_rows(a).expect("finite square matrix")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `{Σ_{i≠pivot} x_i ≤ r}`, clipped to the simplex.
    Corner(f64),
    FullSimplex,
}

#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub t_max: f64,
    pub integrate: IntegrateOptions,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { t_max: 5000.0, integrate: IntegrateOptions { record_every: 0, ..Default::default() } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub samples: usize,
    pub to_pivot: usize,
    pub to_other: usize,
    /// Trajectories still running at `t_max`; excluded from the fraction.
    pub exhausted: usize,
    pub fraction: f64,
    /// Trajectories on which `Σ_{i≠pivot} x_i` increased at some step.
    pub monotone_violations: usize,
}

/// Largest corner radius that stays off the face opposite the pivot.
pub fn clip_radius(r: f64) -> f64 {
    r.min(1.0 - 1e-3)
}

fn draw(rng: &mut ChaCha8Rng, n: usize, pivot: usize, region: Region) -> SimplexPoint {
    match region {
        Region::Corner(r) => SimplexPoint::from_affine(n, pivot, &sample_corner(rng, n - 1, clip_radius(r))),
        Region::FullSimplex => SimplexPoint { x: sample_simplex(rng, n) },
    }
}

/// Fraction of uniform starts in `region` whose trajectory ends at the pivot.
pub fn mc_basin_measure(
    a: &PayoffMatrix,
    pivot: usize,
    region: Region,
    n_samples: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<McResult> {
    mc_measure_with(a, pivot, region, n_samples, seed, opts, None)
}

/// As [`mc_basin_measure`] under the perturbed flow.
pub fn mc_basin_measure_perturbed(
    a: &PayoffMatrix,
    pert: &Perturbation<'_>,
    pivot: usize,
    region: Region,
    n_samples: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<McResult> {
    mc_measure_with(a, pivot, region, n_samples, seed, opts, Some(pert))
}

fn mc_measure_with(
    a: &PayoffMatrix,
    pivot: usize,
    region: Region,
    n_samples: usize,
    seed: u64,
    opts: &McOptions,
    pert: Option<&Perturbation<'_>>,
) -> Result<McResult> {
    if n_samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let n = a.n();
    let mut iopts = opts.integrate;
    iopts.record_every = 0;
    iopts.monitor_pivot = Some(pivot);
    let outcomes: Vec<(Terminal, bool)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let x0 = draw(&mut task_rng(seed, i as u64), n, pivot, region);
            let t = match pert {
                None => integrate(a, &x0, opts.t_max, &iopts)?,
                Some(h) => integrate_perturbed(a, h, pivot, &x0, opts.t_max, &iopts)?,
            };
            Ok((t.terminal, t.monotone == Some(false)))
        })
        .collect::<Result<_>>()?;
    let to_pivot = outcomes.iter().filter(|o| o.0 == Terminal::ConvergedToVertex(pivot)).count();
    let exhausted = outcomes.iter().filter(|o| o.0 == Terminal::MaxTime).count();
    let decided = n_samples - exhausted;
    Ok(McResult {
        samples: n_samples,
        to_pivot,
        to_other: decided - to_pivot,
        exhausted,
        fraction: if decided > 0 { to_pivot as f64 / decided as f64 } else { 0.0 },
        monotone_violations: outcomes.iter().filter(|o| o.1).count(),
    })
}

/// Three-strategy matrix whose pivot attracts with a basin of size `O(λ)`.
///
/// In affine coordinates around strategy 1: `N_2 = N_3 = −1`,
/// `M_22 = M_33 = 2N` and `M_23 = M_32 = −2N/λ`. The cross terms are positive,
/// so strategies 2 and 3 support each other and the diagonal rest point sits
/// at share `λ/(2(1−λ))`, inside the marked point `λ/(1+λ)`.
pub fn counterexample_matrix(lambda: f64, a_cap: f64) -> Result<PayoffMatrix> {
    if !(lambda > 0.0 && lambda <= 0.1) {
        return Err(Error::Validation(format!("lambda must lie in (0, 0.1], got {lambda}")));
    }
    if !(a_cap > 0.0 && a_cap.is_finite()) {
        return Err(Error::Validation(format!("a_cap must be positive, got {a_cap}")));
    }
    let (n, m_diag, m_cross) = (-1.0, -2.0, 2.0 / lambda);
    let base = 4.0;
    // a_jk = a_1k + N_j + M_jk with a constant first row
    let raw = [
        [base, base, base],
        [base + n, base + n + m_diag, base + n + m_cross],
        [base + n, base + n + m_cross, base + n + m_diag],
    ];
    let top = raw.iter().flatten().fold(0.0f64, |acc, &v| acc.max(v));
    let scale = a_cap / (top + 1.0);
    let mut a = PayoffMatrix::from_rows(raw.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect())?;
    a.labels = vec!["e1".into(), "e2".into(), "e3".into()];
    Ok(a)
}

/// `min(1/M0, C⁻/(2C⁺))`.
pub fn perturbed_basin_radius(af: &AffineForm, c_minus: f64, c_plus: f64) -> Result<f64> {
    if !(c_minus > 0.0 && c_minus <= c_plus) {
        return Err(Error::Validation(format!("need 0 < C- <= C+, got {c_minus}, {c_plus}")));
    }
    Ok(m0_bound(af)?.radius.min(c_minus / (2.0 * c_plus)))
}

/// Share of `j` separating the two basins on the `(i, j)` edge, by bisection
/// on integrated outcomes.
pub fn bisect_edge_boundary(a: &PayoffMatrix, i: usize, j: usize, tol: f64) -> Result<f64> {
    let edge = a.restrict(&[i, j]);
    let opts = IntegrateOptions { record_every: 0, ..Default::default() };
    let goes_to_i = |s: f64| -> Result<bool> {
        let t = integrate(&edge, &SimplexPoint { x: vec![1.0 - s, s] }, 1e5, &opts)?;
        match t.terminal {
            Terminal::ConvergedToVertex(v) => Ok(v == 0),
            _ => Err(Error::Budget(format!("edge trajectory from {s} undecided"))),
        }
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if goes_to_i(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinReport {
    pub pivot: usize,
    pub m0: f64,
    pub radius: f64,
    pub pairwise_barriers: BTreeMap<String, f64>,
    pub mc: Option<McResult>,
    pub gral_a: GralACheck,
    pub certified: bool,
}

/// Bound, barriers, brute-force certificate and a Monte-Carlo check inside the
/// certified region.
pub fn basin_report(
    a: &PayoffMatrix,
    pivot: usize,
    mc_samples: usize,
    gral_samples: usize,
    seed: u64,
    opts: &McOptions,
) -> Result<BasinReport> {
    let af = affine_form(a, pivot)?;
    let bound = m0_bound(&af)?;
    let mut pairwise_barriers = BTreeMap::new();
    for j in (0..a.n()).filter(|&j| j != pivot) {
        pairwise_barriers.insert(format!("{}-{}", a.labels[pivot], a.labels[j]), pairwise_barrier(a, pivot, j).value);
    }
    let inner = clip_radius(bound.radius * (1.0 - 1e-3));
    let gral_a = gral_a_check(&af, inner.min(1.0), gral_samples, seed);
    let mc = if mc_samples > 0 {
        Some(mc_basin_measure(a, pivot, Region::Corner(inner), mc_samples, seed ^ 0x9e37_79b9, opts)?)
    } else {
        None
    };
    Ok(BasinReport {
        pivot,
        m0: bound.m0,
        radius: bound.radius,
        pairwise_barriers,
        certified: gral_a.passed,
        gral_a,
        mc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub matrices: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub starts: usize,
    pub gral_samples: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { matrices: 200, n_min: 3, n_max: 6, starts: 500, gral_samples: 100_000, seed: 20_240_601 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleRow {
    pub index: usize,
    pub n: usize,
    pub m0: f64,
    pub radius: f64,
    pub mc: McResult,
    pub gral_a: GralACheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub config: EnsembleConfig,
    pub rows: Vec<EnsembleRow>,
    /// Pooled fraction of starts that reached the pivot.
    pub fraction: f64,
    pub all_converged: bool,
    pub all_monotone: bool,
    pub all_certified: bool,
}

/// Random strict Nash matrices with dimensions cycling through
/// `n_min..=n_max`; every start is drawn just inside the certified corner.
pub fn ensemble(cfg: &EnsembleConfig, opts: &McOptions) -> Result<EnsembleReport> {
    if cfg.n_min < 2 || cfg.n_max < cfg.n_min || cfg.matrices == 0 || cfg.starts == 0 {
        return Err(Error::Validation("ensemble needs 2 <= n_min <= n_max and positive counts".into()));
    }
    let span = cfg.n_max - cfg.n_min + 1;
    let mut rows = Vec::with_capacity(cfg.matrices);
    for k in 0..cfg.matrices {
        let n = cfg.n_min + k % span;
        let a = random_strict_nash(&mut task_rng(cfg.seed, k as u64), n);
        let af = affine_form(&a, 0)?;
        let bound = m0_bound(&af)?;
        let inner = clip_radius(bound.radius * (1.0 - 1e-3));
        let sub = cfg.seed.wrapping_add(1 + k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mc = mc_basin_measure(&a, 0, Region::Corner(inner), cfg.starts, sub, opts)?;
        let gral_a = gral_a_check(&af, inner, cfg.gral_samples, sub ^ 1);
        rows.push(EnsembleRow { index: k, n, m0: bound.m0, radius: bound.radius, mc, gral_a });
    }
    let total: usize = rows.iter().map(|r| r.mc.samples).sum();
    let hit: usize = rows.iter().map(|r| r.mc.to_pivot).sum();
    Ok(EnsembleReport {
        config: *cfg,
        fraction: hit as f64 / total as f64,
        all_converged: hit == total,
        all_monotone: rows.iter().all(|r| r.mc.monotone_violations == 0),
        all_certified: rows.iter().all(|r| r.gral_a.passed),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicator::vertex_eigenvalues;

    fn grim_alld() -> PayoffMatrix {
        PayoffMatrix::from_rows(vec![vec![3.0, 0.9], vec![1.3, 1.0]]).unwrap()
    }

    #[test]
    fn m0_fixture() {
        let af = affine_form(&grim_alld(), 0).unwrap();
        let b = m0_bound(&af).unwrap();
        assert!((b.m0 - 3.6 / 1.7).abs() < 1e-12);
        assert!((b.radius - 1.7 / 3.6).abs() < 1e-12);
        assert!(m0_bound(&affine_form(&grim_alld(), 1).unwrap()).is_ok());
        let not_nash = PayoffMatrix::from_rows(vec![vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(m0_bound(&affine_form(&not_nash, 0).unwrap()).is_err());
    }

    #[test]
    fn m0_zero_means_unbounded() {
        let a = PayoffMatrix::from_rows(vec![vec![3.0, 3.0], vec![1.0, 0.0]]).unwrap();
        let b = m0_bound(&affine_form(&a, 0).unwrap()).unwrap();
        assert_eq!(b.m0, 0.0);
        assert!(b.radius.is_infinite());
    }

    #[test]
    fn gral_a_on_grim_alld() {
        let af = affine_form(&grim_alld(), 0).unwrap();
        assert!(gral_a_check(&af, 1.7 / 3.6, 100_000, 1).passed);
        let c = gral_a_check(&af, 1.5 * 1.7 / 1.8, 10_000, 1);
        assert!(!c.passed);
        assert!(c.witness.unwrap()[0] >= 1.7 / 1.8 - 1e-9);
    }

    #[test]
    fn gral_a_negative_definite() {
        let a = PayoffMatrix::from_rows(vec![
            vec![4.0, 4.0, 4.0],
            vec![3.0, 1.0, 2.0],
            vec![3.0, 2.0, 1.0],
        ])
        .unwrap();
        let af = affine_form(&a, 0).unwrap();
        assert!(gral_a_check(&af, 0.999, 20_000, 3).passed);
    }

    #[test]
    fn corner_sampler_stays_inside() {
        let mut rng = task_rng(7, 0);
        for _ in 0..1000 {
            let y = sample_corner(&mut rng, 4, 0.3);
            assert!(y.iter().all(|v| *v >= 0.0));
            assert!(y.iter().sum::<f64>() <= 0.3 + 1e-15);
        }
    }

    #[test]
    fn corner_sampler_is_uniform_in_mass() {
        // P(Σy ≤ r/2) = 2^{-dim} for the uniform law
        let mut rng = task_rng(11, 0);
        let hits = (0..40_000).filter(|_| sample_corner(&mut rng, 3, 1.0).iter().sum::<f64>() <= 0.5).count();
        assert!((hits as f64 / 40_000.0 - 0.125).abs() < 0.01);
    }

    #[test]
    fn generator_is_strict_nash() {
        let mut rng = task_rng(5, 0);
        for n in 3..=6 {
            let a = random_strict_nash(&mut rng, n);
            for e in vertex_eigenvalues(&a, 0) {
                assert!((-2.0..=-0.1).contains(&e));
            }
            assert!(a.a.iter().flatten().all(|v| (0.0..=5.0).contains(v)));
        }
    }

    #[test]
    fn full_simplex_fraction_matches_barrier() {
        let r = mc_basin_measure(&grim_alld(), 0, Region::FullSimplex, 2000, 9, &McOptions::default()).unwrap();
        assert_eq!(r.exhausted, 0);
        assert!((r.fraction - 1.7 / 1.8).abs() < 0.01, "{}", r.fraction);
        let dominated = PayoffMatrix::from_rows(vec![vec![3.0, 3.0], vec![1.0, 0.0]]).unwrap();
        let away = mc_basin_measure(&dominated, 1, Region::Corner(0.02), 50, 9, &McOptions::default()).unwrap();
        assert_eq!(away.to_pivot, 0);
    }

    #[test]
    fn counterexample_ratios() {
        let a = counterexample_matrix(0.05, 10.0).unwrap();
        assert!(a.a.iter().flatten().all(|v| *v > 0.0 && *v < 10.0));
        let af = affine_form(&a, 0).unwrap();
        let n2 = af.n_of(1).unwrap();
        assert!((n2 - af.n_of(2).unwrap()).abs() < 1e-12 && n2 < 0.0);
        assert!((af.entry(1, 1).unwrap() / n2 - 2.0).abs() < 1e-9);
        assert!((af.entry(2, 2).unwrap() / n2 - 2.0).abs() < 1e-9);
        assert!((af.entry(1, 2).unwrap() / n2 + 40.0).abs() < 1e-9);
        assert!((af.entry(2, 1).unwrap() / n2 + 40.0).abs() < 1e-9);
        let r = m0_bound(&af).unwrap().radius;
        assert!((r - 0.05 / 4.0).abs() < 1e-12);
        assert!(counterexample_matrix(0.2, 10.0).is_err());
    }

    #[test]
    fn perturbed_radius() {
        let af = affine_form(&grim_alld(), 0).unwrap();
        assert!((perturbed_basin_radius(&af, 1.0, 1.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((perturbed_basin_radius(&af, 2.0, 2.0).unwrap() - 1.7 / 3.6).abs() < 1e-15);
        assert!(perturbed_basin_radius(&af, 2.0, 1.0).is_err());
    }

    #[test]
    fn bisection_finds_barrier() {
        let b = bisect_edge_boundary(&grim_alld(), 0, 1, 1e-4).unwrap();
        assert!((b - 1.7 / 1.8).abs() < 1e-3);
    }

    #[test]
    fn report_is_deterministic() {
        let a = grim_alld();
        let r1 = basin_report(&a, 0, 50, 1000, 3, &McOptions::default()).unwrap();
        let r2 = basin_report(&a, 0, 50, 1000, 3, &McOptions::default()).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.certified);
        assert_eq!(r1.mc.unwrap().fraction, 1.0);
    }
}
