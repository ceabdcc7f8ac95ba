//! Replicator dynamics `ẋ_j = x_j[(Ax)_j − xᵀAx]` on the simplex.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::payoff::PayoffMatrix;

/// Population shares; entries non-negative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexPoint {
    pub x: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(x, 1e-12)
    }

    pub fn with_tolerance(x: Vec<f64>, tol: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Validation("empty point".into()));
        }
        if x.iter().any(|v| !v.is_finite() || *v < -tol) {
            return Err(Error::Validation("point has negative or non-finite shares".into()));
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::Validation(format!("shares sum to {sum}, not 1")));
        }
        Ok(SimplexPoint { x })
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut x = vec![0.0; n];
        x[i] = 1.0;
        SimplexPoint { x }
    }

    /// Point with shares `y` on the non-pivot strategies (original order) and
    /// the remainder on the pivot.
    pub fn from_affine(n: usize, pivot: usize, y: &[f64]) -> Self {
        let mut x = vec![0.0; n];
        let mut k = 0;
        for (i, xi) in x.iter_mut().enumerate() {
            if i != pivot {
                *xi = y[k];
                k += 1;
            }
        }
        x[pivot] = 1.0 - y.iter().sum::<f64>();
        SimplexPoint { x }
    }

    pub fn l1_to_vertex(&self, i: usize) -> f64 {
        self.x.iter().enumerate().map(|(j, v)| if j == i { (1.0 - v).abs() } else { v.abs() }).sum()
    }
}

fn matvec(a: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        out[i] = row.iter().zip(x).map(|(r, v)| r * v).sum();
    }
}

/// Growth rates `F_j = (Ax)_j − xᵀAx`.
fn rates(a: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    matvec(a, n, x, out);
    let mean: f64 = out.iter().zip(x).map(|(f, v)| f * v).sum();
    out.iter_mut().for_each(|f| *f -= mean);
}

pub fn vector_field(a: &PayoffMatrix, x: &SimplexPoint) -> Result<Vec<f64>> {
    let n = a.n();
    if x.x.len() != n {
        return Err(Error::Validation("dimension mismatch".into()));
    }
    let flat = a.flat();
    let mut f = vec![0.0; n];
    rates(&flat, n, &x.x, &mut f);
    Ok(f.iter().zip(&x.x).map(|(fi, xi)| fi * xi).collect())
}

/// Affine coordinates around a pivot vertex.
///
/// `others` lists the non-pivot strategies sorted so that `−N` is
/// non-increasing; `n` and `m` use that order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineForm {
    pub pivot: usize,
    pub others: Vec<usize>,
    pub n: Vec<f64>,
    pub m: Vec<Vec<f64>>,
    pub strict_nash: bool,
}

impl AffineForm {
    /// `Q(y) = N·y + yᵀ M y` in the sorted coordinates.
    pub fn q(&self, y: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, yi) in y.iter().enumerate() {
            let mut row = self.n[i];
            for (k, yk) in y.iter().enumerate() {
                row += self.m[i][k] * yk;
            }
            total += yi * row;
        }
        total
    }

    /// Ratio `M_jk / N_j` looked up by original strategy indices.
    pub fn entry(&self, j: usize, k: usize) -> Option<f64> {
        let a = self.others.iter().position(|&o| o == j)?;
        let b = self.others.iter().position(|&o| o == k)?;
        Some(self.m[a][b])
    }

    pub fn n_of(&self, j: usize) -> Option<f64> {
        let a = self.others.iter().position(|&o| o == j)?;
        Some(self.n[a])
    }
}

pub fn affine_form(a: &PayoffMatrix, pivot: usize) -> Result<AffineForm> {
    let n = a.n();
    if pivot >= n {
        return Err(Error::Validation(format!("pivot {pivot} out of range")));
    }
    let aa = |i: usize, j: usize| a.get(i, j);
    let mut others: Vec<usize> = (0..n).filter(|&j| j != pivot).collect();
    let nj = |j: usize| aa(j, pivot) - aa(pivot, pivot);
    others.sort_by(|&x, &y| nj(x).partial_cmp(&nj(y)).unwrap_or(std::cmp::Ordering::Equal));
    let nv: Vec<f64> = others.iter().map(|&j| nj(j)).collect();
    let m = others
        .iter()
        .map(|&j| others.iter().map(|&k| aa(j, k) - aa(pivot, k) + aa(pivot, pivot) - aa(j, pivot)).collect())
        .collect();
    Ok(AffineForm { pivot, strict_nash: nv.iter().all(|&v| v < 0.0), others, n: nv, m })
}

/// Eigenvalues `{a_ji − a_ii}` of the linearization at vertex `i`.
pub fn vertex_eigenvalues(a: &PayoffMatrix, i: usize) -> Vec<f64> {
    (0..a.n()).filter(|&j| j != i).map(|j| a.get(j, i) - a.get(i, i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Barrier {
    /// Share of `j` at the interior rest point of the `(i, j)` edge.
    pub value: f64,
    /// False when the edge has no interior rest point (value set to 1).
    pub interior: bool,
}

pub fn pairwise_barrier(a: &PayoffMatrix, i: usize, j: usize) -> Barrier {
    let num = a.get(i, i) - a.get(j, i);
    let den = num + a.get(j, j) - a.get(i, j);
    if den <= 0.0 || num <= 0.0 {
        return Barrier { value: 1.0, interior: false };
    }
    let value = num / den;
    if value >= 1.0 {
        Barrier { value: 1.0, interior: false }
    } else {
        Barrier { value, interior: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    ConvergedToVertex(usize),
    MaxTime,
    LeftRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub terminal: Terminal,
    pub steps: usize,
    /// Whether `Σ_{i≠pivot} x_i` never increased, when monitored.
    pub monotone: Option<bool>,
    pub last: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub h: f64,
    pub vertex_tol: f64,
    /// Keep every k-th point; 0 keeps only the endpoints.
    pub record_every: usize,
    /// Monitor `Σ_{i≠pivot} x_i` for monotone decrease.
    pub monitor_pivot: Option<usize>,
    /// Stop with `LeftRegion` once `Σ_{i≠pivot} x_i` exceeds the radius.
    pub region: Option<(usize, f64)>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { h: 0.01, vertex_tol: 1e-6, record_every: 1, monitor_pivot: None, region: None }
    }
}

/// Positive state-dependent factors multiplying each growth rate.
pub struct Perturbation<'a> {
    pub h: Box<dyn Fn(&[f64], &mut [f64]) + Sync + 'a>,
    pub c_minus: f64,
    pub c_plus: f64,
}

impl<'a> Perturbation<'a> {
    pub fn new(h: impl Fn(&[f64], &mut [f64]) + Sync + 'a, c_minus: f64, c_plus: f64) -> Result<Self> {
        if !(c_minus > 0.0 && c_minus <= c_plus && c_plus.is_finite()) {
            return Err(Error::Validation(format!("need 0 < C- <= C+ < inf, got {c_minus}, {c_plus}")));
        }
        Ok(Perturbation { h: Box::new(h), c_minus, c_plus })
    }

    /// `H_i(x) = 1 + x_i / 2`, bounded by `[1, 1.5]`. Shares are clamped to
    /// `[0, 1]` since intermediate RK stages can step slightly off the simplex.
    pub fn half_share() -> Perturbation<'static> {
        Perturbation {
            h: Box::new(|x: &[f64], out: &mut [f64]| {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = 1.0 + 0.5 * v.clamp(0.0, 1.0);
                }
            }),
            c_minus: 1.0,
            c_plus: 1.5,
        }
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (self.h)(x, out);
        let tol = 1e-12;
        if out.iter().any(|&v| !(v >= self.c_minus - tol && v <= self.c_plus + tol)) {
            return Err(Error::Validation("perturbation factor outside its declared bounds".into()));
        }
        Ok(())
    }
}

/// `(x_i F_i(x) H_i(x))_i`.
pub fn perturbed_vector_field(a: &PayoffMatrix, pert: &Perturbation<'_>, x: &SimplexPoint) -> Result<Vec<f64>> {
    let n = a.n();
    let mut f = vector_field(a, x)?;
    let mut h = vec![0.0; n];
    pert.eval(&x.x, &mut h)?;
    f.iter_mut().zip(&h).for_each(|(fi, hi)| *fi *= hi);
    Ok(f)
}

enum Field<'p, 'a> {
    Plain,
    /// Non-pivot shares follow `x_j F_j H_j`; the pivot absorbs the rest so
    /// the flow stays on the simplex.
    Perturbed(&'p Perturbation<'a>, usize),
}

struct Integrator<'p, 'a> {
    a: Vec<f64>,
    n: usize,
    field: Field<'p, 'a>,
    f: Vec<f64>,
    h: Vec<f64>,
}

impl<'p, 'a> Integrator<'p, 'a> {
    fn eval(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        rates(&self.a, self.n, x, &mut self.f);
        match self.field {
            Field::Plain => {
                for i in 0..self.n {
                    out[i] = x[i] * self.f[i];
                }
            }
            Field::Perturbed(pert, pivot) => {
                pert.eval(x, &mut self.h)?;
                let mut sum = 0.0;
                for i in 0..self.n {
                    if i != pivot {
                        out[i] = x[i] * self.f[i] * self.h[i];
                        sum += out[i];
                    }
                }
                out[pivot] = -sum;
            }
        }
        Ok(())
    }

    fn converged(&mut self, x: &[f64], tol: f64) -> Option<usize> {
        let (i, _) = x.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let dist: f64 = x.iter().enumerate().map(|(j, v)| if j == i { 1.0 - v } else { *v }).sum();
        if dist >= tol {
            return None;
        }
        rates(&self.a, self.n, x, &mut self.f);
        let i_rate = self.f[i];
        // off-vertex growth rates relative to the vertex strategy are negative
        (0..self.n).filter(|&j| j != i).all(|j| self.f[j] - i_rate < 0.0).then_some(i)
    }
}

fn run(
    a: &PayoffMatrix,
    field: Field<'_, '_>,
    x0: &SimplexPoint,
    t_max: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let n = a.n();
    if x0.x.len() != n {
        return Err(Error::Validation("dimension mismatch".into()));
    }
    if !(t_max > 0.0) || !(opts.h > 0.0) {
        return Err(Error::Validation("t_max and h must be positive".into()));
    }
    let mut it = Integrator { a: a.flat(), n, field, f: vec![0.0; n], h: vec![0.0; n] };
    let mut x = x0.x.clone();
    let off_sum = |x: &[f64], p: usize| x.iter().enumerate().filter(|(i, _)| *i != p).map(|(_, v)| v).sum::<f64>();
    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![x.clone()],
        terminal: Terminal::MaxTime,
        steps: 0,
        monotone: opts.monitor_pivot.map(|_| true),
        last: x.clone(),
    };
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    let mut t = 0.0;
    let mut prev_sum = opts.monitor_pivot.map(|p| off_sum(&x, p));
    let h = opts.h;
    let max_steps = (t_max / h).ceil() as usize;
    let mut terminal = it.converged(&x, opts.vertex_tol).map(Terminal::ConvergedToVertex);
    while terminal.is_none() && traj.steps < max_steps {
        let [k1, k2, k3, k4] = &mut k;
        it.eval(&x, k1)?;
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        it.eval(&tmp, k2)?;
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        it.eval(&tmp, k3)?;
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        it.eval(&tmp, k4)?;
        for i in 0..n {
            tmp[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if tmp.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite state at t={t}, last valid {:?}", x)));
        }
        // clip and rescale back onto the simplex
        tmp.iter_mut().for_each(|v| *v = v.max(0.0));
        let s: f64 = tmp.iter().sum();
        tmp.iter_mut().for_each(|v| *v /= s);
        x.copy_from_slice(&tmp);
        traj.steps += 1;
        t = traj.steps as f64 * h;
        if let (Some(p), Some(prev)) = (opts.monitor_pivot, prev_sum.as_mut()) {
            let cur = off_sum(&x, p);
            if cur > *prev + 1e-15 {
                traj.monotone = Some(false);
            }
            *prev = cur;
        }
        if opts.record_every > 0 && traj.steps % opts.record_every == 0 {
            traj.times.push(t);
            traj.points.push(x.clone());
        }
        if let Some((p, r)) = opts.region {
            if off_sum(&x, p) > r {
                terminal = Some(Terminal::LeftRegion);
                break;
            }
        }
        terminal = it.converged(&x, opts.vertex_tol).map(Terminal::ConvergedToVertex);
    }
    if traj.times.last() != Some(&t) {
        traj.times.push(t);
        traj.points.push(x.clone());
    }
    traj.terminal = terminal.unwrap_or(Terminal::MaxTime);
    traj.last = x;
    Ok(traj)
}

/// Fixed-step RK4 with renormalization onto the simplex after each step.
pub fn integrate(a: &PayoffMatrix, x0: &SimplexPoint, t_max: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    run(a, Field::Plain, x0, t_max, opts)
}

/// Integrates the perturbed flow written in affine coordinates around `pivot`.
pub fn integrate_perturbed(
    a: &PayoffMatrix,
    pert: &Perturbation<'_>,
    pivot: usize,
    x0: &SimplexPoint,
    t_max: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    run(a, Field::Perturbed(pert, pivot), x0, t_max, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grim_alld() -> PayoffMatrix {
        PayoffMatrix::from_rows(vec![vec![3.0, 0.9], vec![1.3, 1.0]]).unwrap()
    }

    #[test]
    fn vertices_are_rest_points() {
        let a = grim_alld();
        for i in 0..2 {
            let f = vector_field(&a, &SimplexPoint::vertex(2, i)).unwrap();
            assert!(f.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn field_by_hand() {
        // Ax = (1.95, 1.15), xAx = 1.55
        let f = vector_field(&grim_alld(), &SimplexPoint::new(vec![0.5, 0.5]).unwrap()).unwrap();
        assert!((f[0] - 0.2).abs() < 1e-12);
        assert!((f[1] + 0.2).abs() < 1e-12);
        assert!((f[0] + f[1]).abs() < 1e-15);
    }

    #[test]
    fn barrier_is_a_rest_point() {
        let a = grim_alld();
        let b = pairwise_barrier(&a, 0, 1);
        assert!(b.interior);
        assert!((b.value - 1.7 / 1.8).abs() < 1e-12);
        let f = vector_field(&a, &SimplexPoint::new(vec![1.0 - b.value, b.value]).unwrap()).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-12));
        let dom = PayoffMatrix::from_rows(vec![vec![3.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(pairwise_barrier(&dom, 0, 1), Barrier { value: 1.0, interior: false });
    }

    #[test]
    fn affine_fixture() {
        let af = affine_form(&grim_alld(), 0).unwrap();
        assert!((af.n[0] + 1.7).abs() < 1e-12);
        assert!((af.m[0][0] - 1.8).abs() < 1e-12);
        assert!(af.strict_nash);
        let flat = PayoffMatrix::from_rows(vec![vec![2.0, 1.0, 5.0]; 3]).unwrap();
        let af = affine_form(&flat, 0).unwrap();
        assert!(af.n.iter().all(|v| *v == 0.0));
        assert!(af.m.iter().flatten().all(|v| *v == 0.0));
        assert!(!af.strict_nash);
    }

    #[test]
    fn affine_ordering() {
        let a = PayoffMatrix::from_rows(vec![
            vec![5.0, 1.0, 1.0, 1.0],
            vec![4.5, 1.0, 1.0, 1.0],
            vec![2.0, 1.0, 1.0, 1.0],
            vec![4.0, 1.0, 1.0, 1.0],
        ])
        .unwrap();
        let af = affine_form(&a, 0).unwrap();
        assert_eq!(af.others, vec![2, 3, 1]);
        assert!(af.n.windows(2).all(|w| -w[0] >= -w[1]));
    }

    #[test]
    fn eigenvalues() {
        let a = grim_alld();
        assert!((vertex_eigenvalues(&a, 0)[0] + 1.7).abs() < 1e-12);
        assert!((vertex_eigenvalues(&a, 1)[0] + 0.1).abs() < 1e-12);
        let tie = PayoffMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(vertex_eigenvalues(&tie, 0), vec![0.0]);
    }

    #[test]
    fn integration_both_sides_of_barrier() {
        let a = grim_alld();
        let opts = IntegrateOptions { record_every: 0, ..Default::default() };
        let t = integrate(&a, &SimplexPoint::new(vec![0.99, 0.01]).unwrap(), 500.0, &opts).unwrap();
        assert_eq!(t.terminal, Terminal::ConvergedToVertex(0));
        let t = integrate(&a, &SimplexPoint::new(vec![0.03, 0.97]).unwrap(), 500.0, &opts).unwrap();
        assert_eq!(t.terminal, Terminal::ConvergedToVertex(1));
        let t = integrate(&a, &SimplexPoint::vertex(2, 0), 1.0, &opts).unwrap();
        assert_eq!(t.terminal, Terminal::ConvergedToVertex(0));
        assert_eq!(t.steps, 0);
    }

    #[test]
    fn perturbation_bounds_are_enforced() {
        let a = grim_alld();
        let x = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        let bad = Perturbation::new(|_: &[f64], out: &mut [f64]| out.fill(3.0), 1.0, 2.0).unwrap();
        assert!(perturbed_vector_field(&a, &bad, &x).is_err());
        let one = Perturbation::new(|_: &[f64], out: &mut [f64]| out.fill(1.0), 1.0, 1.0).unwrap();
        assert_eq!(perturbed_vector_field(&a, &one, &x).unwrap(), vector_field(&a, &x).unwrap());
        assert!(Perturbation::new(|_: &[f64], _: &mut [f64]| {}, 2.0, 1.0).is_err());
    }

    #[test]
    fn off_simplex_rejected() {
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![-0.1, 1.1]).is_err());
    }
}
