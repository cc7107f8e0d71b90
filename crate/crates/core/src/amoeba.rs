//! Numerical sampling of the patchworked hypersurface `V_t` and distance
//! statistics between its `Log_t` image and `Π_v`.
//!
//! Points of `(C*)^{n+1}` are kept in log-polar form `z_α = t^{x_α} e^{iθ_α}`
//! and every evaluation is rescaled by `t^{-L_v(x)}`, so nothing overflows
//! even for `t = 10^6`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycles::{recession_rays_f64, vertex_positions_f64};
use crate::dualcomplex::DualComplex;
use crate::error::{Error, Result};
use crate::linalg::{rank, rat, Rational};
use crate::tropical::{FloatForms, WeightFunction};

/// `f_t(z) = Σ a_j t^{-v(j)} z^j` over an active subset of the lattice
/// points of the polytope.
#[derive(Clone, Debug)]
pub struct PatchworkPolynomial {
    weights: WeightFunction,
    forms: FloatForms,
    coeffs: Vec<Complex64>,
    support: Vec<usize>,
    t: f64,
    ln_t: f64,
}

impl PatchworkPolynomial {
    /// All coefficients `a_j = 1`.
    pub fn new(v: &WeightFunction, t: f64) -> Result<Self> {
        Self::with_coefficients(v, vec![Complex64::new(1.0, 0.0); v.len()], t)
    }

    pub fn with_coefficients(v: &WeightFunction, coeffs: Vec<Complex64>, t: f64) -> Result<Self> {
        if !(t > 1.0 && t.is_finite()) {
            return Err(Error::Precondition(format!("t must exceed 1, got {t}")));
        }
        if coeffs.len() != v.len() {
            return Err(Error::WrongCardinality { expected: v.len(), got: coeffs.len() });
        }
        let support = (0..v.len()).filter(|&k| coeffs[k] != Complex64::new(0.0, 0.0)).collect();
        Ok(Self { weights: v.clone(), forms: FloatForms::new(v), coeffs, support, t, ln_t: t.ln() })
    }

    /// The same polynomial restricted to a subset of its terms.
    pub fn truncated(&self, keep: &[usize]) -> Self {
        let mut out = self.clone();
        out.support = self.support.iter().copied().filter(|k| keep.contains(k)).collect();
        out
    }

    pub fn weights(&self) -> &WeightFunction {
        &self.weights
    }

    pub fn forms(&self) -> &FloatForms {
        &self.forms
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn ln_t(&self) -> f64 {
        self.ln_t
    }

    pub fn dim(&self) -> usize {
        self.weights.ambient_dim()
    }

    /// Maximum over the active terms of `<x, j> - v(j)`.
    pub fn max_form(&self, x: &[f64]) -> f64 {
        self.support.iter().map(|&k| self.forms.form(k, x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Active terms at `t^x e^{iθ}`, each multiplied by `t^{-max_form(x)}`.
    pub fn scaled_terms(&self, x: &[f64], theta: &[f64]) -> Vec<(usize, Complex64)> {
        let m = self.max_form(x);
        self.support
            .iter()
            .map(|&k| {
                let mag = ((self.forms.form(k, x) - m) * self.ln_t).exp();
                let phase: f64 = self.forms.point(k).iter().zip(theta).map(|(a, b)| a * b).sum();
                (k, self.coeffs[k] * Complex64::from_polar(mag, phase))
            })
            .collect()
    }

    /// `|f| / max |term|` at `t^x e^{iθ}`.
    pub fn residual(&self, x: &[f64], theta: &[f64]) -> f64 {
        let terms = self.scaled_terms(x, theta);
        let sum: Complex64 = terms.iter().map(|(_, c)| c).sum();
        let max = terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        sum.norm() / max
    }

    /// Coefficients `c_k` of `f` as a polynomial in `w`, where
    /// `z_β = t^{x_β} w` and the other coordinates are fixed at
    /// `t^{x_α} e^{iθ_α}`; rescaled by `t^{-max_form(x)}`.
    pub fn univariate(&self, x: &[f64], theta: &[f64], beta: usize) -> Vec<Complex64> {
        let mut th = theta.to_vec();
        th[beta] = 0.0;
        let deg = self.support.iter().map(|&k| self.forms.point(k)[beta] as usize).max().unwrap_or(0);
        let mut c = vec![Complex64::new(0.0, 0.0); deg + 1];
        for (k, term) in self.scaled_terms(x, &th) {
            c[self.forms.point(k)[beta] as usize] += term;
        }
        c
    }
}

/// One point of `V_t`, stored through its `Log_t` image and phases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchworkSample {
    pub index: usize,
    /// `Log_t |z|`.
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub residual: f64,
    pub defect: f64,
}

impl PatchworkSample {
    /// The complex point itself (may overflow for large `t`).
    pub fn z(&self, t: f64) -> Vec<Complex64> {
        self.x.iter().zip(&self.theta).map(|(x, th)| Complex64::from_polar(t.powf(*x), *th)).collect()
    }
}

pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
const RETRIES: usize = 64;

/// Axis-aligned sampling window in `Log_t` space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Self { lo: vec![-half_width; dim], hi: vec![half_width; dim] }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| v >= l && v <= h)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Roots of `Σ c_k w^k` (zero roots dropped). Each edge of the Newton polygon
/// of `(k, ln|c_k|)` is solved separately after rescaling its roots to unit
/// modulus, then every root is polished on the full polynomial.
pub fn polynomial_roots(c: &[Complex64]) -> Vec<Complex64> {
    let pts: Vec<(usize, f64)> =
        c.iter().enumerate().filter(|(_, x)| x.norm() > 0.0).map(|(k, x)| (k, x.norm().ln())).collect();
    if pts.len() < 2 {
        return Vec::new();
    }
    // upper hull, left to right
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut roots = Vec::new();
    for e in hull.windows(2) {
        let ((k1, l1), (k2, l2)) = (e[0], e[1]);
        let r = (l1 - l2) / (k2 - k1) as f64;
        let sub: Vec<Complex64> = (k1..=k2).map(|k| c[k] * ((k as f64 * r) - (l1 + k1 as f64 * r)).exp()).collect();
        for u in companion_roots(&sub) {
            roots.push(polish(c, u * r.exp()));
        }
    }
    roots
}

fn companion_roots(c: &[Complex64]) -> Vec<Complex64> {
    let m = c.len() - 1;
    if m == 0 {
        return Vec::new();
    }
    let lead = c[m];
    if m == 1 {
        return vec![-c[0] / lead];
    }
    let mut comp = DMatrix::<Complex64>::zeros(m, m);
    for i in 1..m {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..m {
        comp[(i, m - 1)] = -c[i] / lead;
    }
    comp.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

fn horner(c: &[Complex64], w: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * w + p;
        p = p * w + ck;
    }
    (p, dp)
}

fn polish(c: &[Complex64], mut w: Complex64) -> Complex64 {
    for _ in 0..50 {
        let (p, dp) = horner(c, w);
        if dp.norm() == 0.0 || !dp.is_finite() {
            break;
        }
        let step = p / dp;
        let next = w - step;
        if !next.is_finite() || horner(c, next).0.norm() > p.norm() {
            break;
        }
        w = next;
        if step.norm() <= 1e-16 * w.norm() {
            break;
        }
    }
    w
}

/// Points of `V_t` on the line through `(x, θ)` in the `β` direction, with
/// their residuals.
pub fn solve_along(f: &PatchworkPolynomial, x: &[f64], theta: &[f64], beta: usize) -> Vec<(Vec<f64>, Vec<f64>, f64)> {
    let c = f.univariate(x, theta, beta);
    let scale = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    polynomial_roots(&c)
        .into_iter()
        .filter(|w| w.is_finite() && w.norm() > 1e-12 * scale.max(1e-300))
        .map(|w| {
            let mut xs = x.to_vec();
            let mut th = theta.to_vec();
            xs[beta] += w.norm().ln() / f.ln_t();
            th[beta] = w.arg();
            let res = f.residual(&xs, &th);
            (xs, th, res)
        })
        .collect()
}

fn sample_one(f: &PatchworkPolynomial, window: &Window, seed: u64, index: usize) -> Option<PatchworkSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let dim = f.dim();
    for _ in 0..RETRIES {
        let x0: Vec<f64> = (0..dim).map(|a| rng.gen_range(window.lo[a]..=window.hi[a])).collect();
        let th0: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let beta = rng.gen_range(0..dim);
        let good: Vec<_> = solve_along(f, &x0, &th0, beta)
            .into_iter()
            .filter(|(x, _, r)| *r <= RESIDUAL_TOLERANCE && window.contains(x))
            .collect();
        if good.is_empty() {
            continue;
        }
        let (x, theta, residual) = good[rng.gen_range(0..good.len())].clone();
        let defect = f.forms().legendre(&x).defect;
        return Some(PatchworkSample { index, x, theta, residual, defect });
    }
    None
}

/// `count` points of `V_t` whose `Log_t` images lie in `window`. Each sample
/// owns the random stream `(seed, index)`, so results do not depend on the
/// thread count.
pub fn sample_variety(f: &PatchworkPolynomial, count: usize, seed: u64, window: &Window) -> Result<Vec<PatchworkSample>> {
    if window.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: window.dim() });
    }
    (0..count)
        .into_par_iter()
        .map(|i| {
            sample_one(f, window, seed, i)
                .ok_or_else(|| Error::NoRoots(format!("sample {i}: no root in window after {RETRIES} attempts")))
        })
        .collect()
}

/// Float H-representation of one closed cell with its orthogonal projector.
#[derive(Clone, Debug)]
struct CellGeometry {
    /// Independent equality rows `A` and right-hand side `b`.
    a: DMatrix<f64>,
    b: DVector<f64>,
    /// `Aᵀ (A Aᵀ)⁻¹`.
    proj: DMatrix<f64>,
    /// Inequalities `g · x <= h`.
    g: Vec<(Vec<f64>, f64)>,
}

/// Float geometry of every cell of `Π_v` for distance queries.
#[derive(Clone, Debug)]
pub struct ComplexGeometry {
    dim: usize,
    cells: Vec<CellGeometry>,
}

impl ComplexGeometry {
    pub fn new(pi: &DualComplex) -> Self {
        let v = pi.weights();
        let pts = pi.points();
        let dim = pi.n() + 1;
        let to_f = |q: &Rational| q.to_f64().unwrap_or(f64::NAN);
        let cells = pi
            .cells()
            .iter()
            .map(|cell| {
                let j0 = cell.support[0];
                let mut rows: Vec<Vec<Rational>> = Vec::new();
                let mut rhs = Vec::new();
                for &j in &cell.support[1..] {
                    let row: Vec<Rational> = pts[j].sub(&pts[j0]).0.iter().map(|&c| rat(c)).collect();
                    let mut trial = rows.clone();
                    trial.push(row.clone());
                    if rank(&trial) == trial.len() {
                        rows.push(row);
                        rhs.push(to_f(&(v.value(j) - v.value(j0))));
                    }
                }
                let a = DMatrix::from_fn(rows.len(), dim, |r, c| to_f(&rows[r][c]));
                let b = DVector::from_vec(rhs);
                let gram = &a * a.transpose();
                let proj = a.transpose() * gram.try_inverse().unwrap_or_else(|| DMatrix::zeros(rows.len(), rows.len()));
                let g = (0..pts.len())
                    .filter(|k| cell.support.binary_search(k).is_err())
                    .map(|k| {
                        let row: Vec<f64> = pts[k].sub(&pts[j0]).0.iter().map(|&c| c as f64).collect();
                        (row, to_f(&(v.value(k) - v.value(j0))))
                    })
                    .collect();
                CellGeometry { a, b, proj, g }
            })
            .collect();
        Self { dim, cells }
    }

    /// Euclidean distance from `x` to `Π_v`: the nearest point lies in the
    /// relative interior of some cell, where it is the orthogonal projection
    /// onto that cell's affine hull.
    pub fn distance(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let mut best = f64::INFINITY;
        for c in &self.cells {
            let p = if c.a.nrows() == 0 { xv.clone() } else { &xv - &c.proj * (&c.a * &xv - &c.b) };
            let d = (&p - &xv).norm();
            if d >= best {
                continue;
            }
            let scale = 1.0 + p.amax();
            let inside = c.g.iter().all(|(row, h)| {
                let lhs: f64 = row.iter().zip(p.iter()).map(|(a, b)| a * b).sum();
                lhs <= h + 1e-9 * scale
            });
            if inside {
                best = d;
            }
        }
        best
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

pub fn distance_to_complex(x: &[f64], pi: &DualComplex) -> f64 {
    ComplexGeometry::new(pi).distance(x)
}

/// Points spaced at most `step` apart along every 1-cell of `Π_v` clipped to
/// the window.
pub fn skeleton_grid(pi: &DualComplex, window: &Window, step: f64) -> Vec<Vec<f64>> {
    let pos = vertex_positions_f64(pi);
    let mut out = Vec::new();
    for e in pi.cells_of_dim(1) {
        let vs = pi.cell_vertices(e);
        let (start, dir, len) = if pi.cell(e).bounded {
            let (a, b) = (&pos[&vs[0]], &pos[&vs[1]]);
            (a.clone(), b.iter().zip(a).map(|(p, q)| p - q).collect::<Vec<f64>>(), 1.0)
        } else {
            let Some(d) = recession_rays_f64(pi, e).into_iter().next() else { continue };
            (pos[&vs[0]].clone(), d, f64::INFINITY)
        };
        let Some((s0, s1)) = clip(&start, &dir, 0.0, len, window) else { continue };
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let steps = (((s1 - s0) * norm) / step).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let s = s0 + (s1 - s0) * k as f64 / steps as f64;
            out.push(start.iter().zip(&dir).map(|(p, d)| p + s * d).collect());
        }
    }
    out
}

/// Parameter interval of `start + s·dir`, `s ∈ [lo, hi]`, inside the window.
fn clip(start: &[f64], dir: &[f64], mut lo: f64, mut hi: f64, w: &Window) -> Option<(f64, f64)> {
    for a in 0..start.len() {
        if dir[a] == 0.0 {
            if start[a] < w.lo[a] || start[a] > w.hi[a] {
                return None;
            }
            continue;
        }
        let (s1, s2) = ((w.lo[a] - start[a]) / dir[a], (w.hi[a] - start[a]) / dir[a]);
        lo = lo.max(s1.min(s2));
        hi = hi.min(s1.max(s2));
    }
    (lo <= hi).then_some((lo, hi))
}

/// Nearest-rank quantile of unsorted data.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Non-increasing, allowing at most one increase of at most `tol`
/// (relative).
pub fn trend_non_increasing(values: &[f64], tol: f64) -> bool {
    let mut inversions = 0;
    for w in values.windows(2) {
        if w[1] > w[0] {
            inversions += 1;
            if w[1] > w[0] * (1.0 + tol) {
                return false;
            }
        }
    }
    inversions <= 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStats {
    pub t: f64,
    pub samples: usize,
    pub median: f64,
    pub p95: f64,
    pub max: f64,
    /// Largest distance from a grid point of `Π_v ∩ window` to the nearest
    /// sample.
    pub coverage: f64,
    pub defect_median: f64,
    pub defect_p95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub window: Window,
    pub seed: u64,
    pub per_t: Vec<ConvergenceStats>,
    pub pass: bool,
}

/// One CSV row: `t, x_1..x_{n+1}, defect, distance, residual`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub defect: f64,
    pub distance: f64,
    pub residual: f64,
}

pub struct ConvergenceRun {
    pub report: ConvergenceReport,
    pub rows: Vec<SampleRow>,
}

pub const GRID_STEP: f64 = 0.1;

/// Directed distances `𝒜_t → Π_v` and `Π_v → 𝒜_t` along a schedule of `t`.
pub fn convergence_report(
    pi: &DualComplex,
    schedule: &[f64],
    count: usize,
    seed: u64,
    window: &Window,
) -> Result<ConvergenceRun> {
    if schedule.len() < 2 {
        return Err(Error::Precondition("schedule needs at least two values of t".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("schedule must be increasing".into()));
    }
    let geometry = ComplexGeometry::new(pi);
    let grid = skeleton_grid(pi, window, GRID_STEP);
    let mut per_t = Vec::new();
    let mut rows = Vec::new();
    for (ti, &t) in schedule.iter().enumerate() {
        let f = PatchworkPolynomial::new(pi.weights(), t)?;
        let stream_seed = seed ^ (ti as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let samples = sample_variety(&f, count, stream_seed, window)?;
        let dist: Vec<f64> = samples.par_iter().map(|s| geometry.distance(&s.x)).collect();
        let defects: Vec<f64> = samples.iter().map(|s| s.defect).collect();
        let coverage = grid
            .par_iter()
            .map(|g| {
                samples
                    .iter()
                    .map(|s| s.x.iter().zip(g).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            })
            .reduce(|| 0.0, f64::max);
        per_t.push(ConvergenceStats {
            t,
            samples: samples.len(),
            median: quantile(&dist, 0.5),
            p95: quantile(&dist, 0.95),
            max: dist.iter().copied().fold(0.0, f64::max),
            coverage,
            defect_median: quantile(&defects, 0.5),
            defect_p95: quantile(&defects, 0.95),
        });
        for (s, d) in samples.iter().zip(&dist) {
            rows.push(SampleRow { t, x: s.x.clone(), defect: s.defect, distance: *d, residual: s.residual });
        }
    }
    let series = |f: fn(&ConvergenceStats) -> f64| per_t.iter().map(f).collect::<Vec<f64>>();
    let pass = trend_non_increasing(&series(|s| s.median), 0.05)
        && trend_non_increasing(&series(|s| s.p95), 0.05)
        && trend_non_increasing(&series(|s| s.coverage), 0.05);
    Ok(ConvergenceRun { report: ConvergenceReport { window: window.clone(), seed, per_t, pass }, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualcomplex::dual_complex;
    use crate::lattice::LatticePolytope;
    use crate::subdivision::regular_subdivision;

    fn line() -> DualComplex {
        let v = WeightFunction::zero(LatticePolytope::simplex(1, 1).unwrap());
        dual_complex(&regular_subdivision(&v).unwrap(), &v).unwrap()
    }

    #[test]
    fn linear_solve_on_the_line() {
        let v = WeightFunction::zero(LatticePolytope::simplex(1, 1).unwrap());
        let f = PatchworkPolynomial::new(&v, 10.0).unwrap();
        let roots = solve_along(&f, &[0.0, 0.0], &[0.0, 0.0], 1);
        assert_eq!(roots.len(), 1);
        let (x, th, res) = &roots[0];
        assert!((x[1] - 2f64.ln() / 10f64.ln()).abs() < 1e-14);
        assert!((th[1].abs() - std::f64::consts::PI).abs() < 1e-14);
        assert!(*res < 1e-15);
    }

    #[test]
    fn roots_with_wide_coefficient_range() {
        // (w - 1e-20)(w - 1)(w - 1e20)
        let r = [1e-20, 1.0, 1e20];
        let c = vec![
            Complex64::new(-r[0] * r[1] * r[2], 0.0),
            Complex64::new(r[0] * r[1] + r[0] * r[2] + r[1] * r[2], 0.0),
            Complex64::new(-(r[0] + r[1] + r[2]), 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let mut got: Vec<f64> = polynomial_roots(&c).iter().map(|w| w.re).collect();
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(r) {
            assert!((g / e - 1.0).abs() < 1e-9, "{g} vs {e}");
        }
    }

    #[test]
    fn distances_on_the_tropical_line() {
        let pi = line();
        let g = ComplexGeometry::new(&pi);
        assert!(g.distance(&[0.0, 0.0]).abs() < 1e-12);
        assert!(g.distance(&[10.0, 10.0]).abs() < 1e-12);
        assert!((g.distance(&[-3.0, -4.0]) - 3.0).abs() < 1e-12);
        assert!((g.distance(&[1.0, 0.0]) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_request_and_bad_schedule() {
        let pi = line();
        let f = PatchworkPolynomial::new(pi.weights(), 4.0).unwrap();
        assert!(sample_variety(&f, 0, 1, &Window::cube(2, 5.0)).unwrap().is_empty());
        assert!(convergence_report(&pi, &[4.0], 10, 1, &Window::cube(2, 5.0)).is_err());
        assert!(PatchworkPolynomial::new(pi.weights(), 1.0).is_err());
    }

    #[test]
    fn trend_rule() {
        assert!(trend_non_increasing(&[4.0, 3.0, 3.1, 2.0], 0.05));
        assert!(!trend_non_increasing(&[4.0, 3.0, 3.5, 2.0], 0.05));
        assert!(!trend_non_increasing(&[4.0, 4.1, 3.0, 3.1], 0.05));
    }
}
