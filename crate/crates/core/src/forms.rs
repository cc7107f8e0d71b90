//! Frame coefficients of the holomorphic forms `Ω_i` on `V_t`, their limits
//! on the faces of `Π_v`, decay away from the sphere cycle of `i`, and the
//! phase of `Ω_i` along circle fibers of curves.
//!
//! With `T_j = a_j t^{-v(j)} z^j` the coefficient is
//! `A_{i,α} = (-1)^α T_i / Σ_j j_α T_j` (α counted from zero). Near the face
//! dual to an edge `{i, j}` only `T_i` and `T_j` matter, `T_j ≈ -T_i`, and
//! `|A_{i,α}| → 1 / |i_α - j_α|`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amoeba::{quantile, solve_along, PatchworkPolynomial, PatchworkSample, RESIDUAL_TOLERANCE};
use crate::cycles::{sphere_cycle, vertex_positions_f64};
use crate::dualcomplex::{CellId, DualComplex};
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::subdivision::RegularSubdivision;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormCoefficient {
    pub i: LatticePoint,
    pub alpha: usize,
    pub value: Complex64,
}

/// `A_{i,α}` at `t^x e^{iθ}` without checking that the point is on `V_t`.
/// `alpha = None` picks the coordinate with the largest denominator
/// (lowest index on ties).
pub fn frame_coefficient(
    f: &PatchworkPolynomial,
    i: usize,
    x: &[f64],
    theta: &[f64],
    alpha: Option<usize>,
) -> Result<(usize, Complex64)> {
    let terms = f.scaled_terms(x, theta);
    let m = f.max_form(x);
    let forms = f.forms();
    let dim = f.dim();
    let denominators: Vec<Complex64> =
        (0..dim).map(|a| terms.iter().map(|(k, c)| c * forms.point(*k)[a]).sum()).collect();
    let scale = terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let alpha = alpha.unwrap_or_else(|| {
        (0..dim).fold(0, |best, a| if denominators[a].norm() > denominators[best].norm() { a } else { best })
    });
    if denominators[alpha].norm() < 1e-12 * scale {
        return Err(Error::SingularFrame);
    }
    let phase: f64 = forms.point(i).iter().zip(theta).map(|(a, b)| a * b).sum();
    let numerator = Complex64::from_polar(((forms.form(i, x) - m) * f.ln_t()).exp(), phase);
    let sign = if alpha.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok((alpha, sign * numerator / denominators[alpha]))
}

/// `A_{i,α}` at a point of `V_t`.
pub fn form_coefficient(f: &PatchworkPolynomial, i: &LatticePoint, sample: &PatchworkSample) -> Result<FormCoefficient> {
    let idx = interior_index(f, i)?;
    if sample.residual > RESIDUAL_TOLERANCE {
        return Err(Error::Precondition(format!("point is not on the variety (residual {})", sample.residual)));
    }
    let (alpha, value) = frame_coefficient(f, idx, &sample.x, &sample.theta, None)?;
    Ok(FormCoefficient { i: i.clone(), alpha, value })
}

fn interior_index(f: &PatchworkPolynomial, i: &LatticePoint) -> Result<usize> {
    let v = f.weights();
    if !v.polytope().is_interior(i.coords()) {
        return Err(Error::NotInterior(i.to_string()));
    }
    v.index_of(i).ok_or_else(|| Error::UnknownPoint(i.to_string()))
}

/// Barycenter of a bounded cell.
pub fn cell_center(pi: &DualComplex, cell: CellId) -> Result<Vec<f64>> {
    if !pi.cell(cell).bounded {
        return Err(Error::Precondition("cell is unbounded".into()));
    }
    let pos = vertex_positions_f64(pi);
    let vs = pi.cell_vertices(cell);
    let mut c = vec![0.0; pi.n() + 1];
    for v in &vs {
        for (a, b) in c.iter_mut().zip(&pos[v]) {
            *a += b / vs.len() as f64;
        }
    }
    Ok(c)
}

/// Coordinate along which a line crosses the face dual to the edge
/// `support` most steeply.
fn transversal(pi: &DualComplex, cell: CellId) -> usize {
    let (a, b) = pi.edge_endpoints(cell);
    let diff = pi.points()[b].sub(&pi.points()[a]).0;
    (0..diff.len()).fold(0, |best, k| if diff[k].abs() > diff[best].abs() { k } else { best })
}

/// Points of `V_t` whose `Log_t` image lies within `radius` of `center`,
/// found by solving along lines in direction `beta` through nearby base
/// points.
pub fn targeted_samples(
    f: &PatchworkPolynomial,
    center: &[f64],
    radius: f64,
    beta: usize,
    count: usize,
    seed: u64,
) -> Vec<PatchworkSample> {
    (0..count)
        .into_par_iter()
        .filter_map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            for _ in 0..64 {
                let x0: Vec<f64> = center.iter().map(|c| c + rng.gen_range(-0.5..=0.5) * radius).collect();
                let th0: Vec<f64> = center.iter().map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
                let near = solve_along(f, &x0, &th0, beta)
                    .into_iter()
                    .filter(|(x, _, r)| *r <= RESIDUAL_TOLERANCE && dist(x, center) <= radius)
                    .min_by(|a, b| dist(&a.0, center).total_cmp(&dist(&b.0, center)));
                if let Some((x, theta, residual)) = near {
                    let defect = f.forms().legendre(&x).defect;
                    return Some(PatchworkSample { index, x, theta, residual, defect });
                }
            }
            None
        })
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceLimit {
    pub support: Vec<usize>,
    pub center: Vec<f64>,
    pub alpha: usize,
    /// `1 / |i_α - j_α|`.
    pub target: f64,
    pub samples: usize,
    /// Largest `| |A| / target - 1 |` over the samples.
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceLimitReport {
    pub i: LatticePoint,
    pub t: f64,
    pub faces: Vec<FaceLimit>,
    pub tolerance: f64,
    pub pass: bool,
}

pub const SAMPLE_RADIUS: f64 = 0.1;

/// `|A_{i,α}|` against `1/|i_α - j_α|` near the center of every face of
/// `C^∧_i`.
pub fn face_limit_check(
    pi: &DualComplex,
    i: &LatticePoint,
    t: f64,
    count: usize,
    seed: u64,
    tolerance: f64,
) -> Result<FaceLimitReport> {
    let f = PatchworkPolynomial::new(pi.weights(), t)?;
    let idx = interior_index(&f, i)?;
    let sphere = sphere_cycle(pi, i)?;
    let mut faces = Vec::new();
    for &cell in &sphere.cells {
        let center = cell_center(pi, cell)?;
        let samples = targeted_samples(&f, &center, SAMPLE_RADIUS, transversal(pi, cell), count, seed ^ cell as u64);
        if samples.is_empty() {
            return Err(Error::EmptyRegion(format!("no samples near face {:?}", pi.cell(cell).support)));
        }
        let (a, b) = pi.edge_endpoints(cell);
        let other = if a == idx { b } else { a };
        let mut alpha = 0;
        let mut max_deviation: f64 = 0.0;
        let mut target = f64::NAN;
        for s in &samples {
            let (al, value) = frame_coefficient(&f, idx, &s.x, &s.theta, None)?;
            let gap = (pi.points()[idx].0[al] - pi.points()[other].0[al]).abs();
            alpha = al;
            target = 1.0 / gap as f64;
            max_deviation = max_deviation.max((value.norm() / target - 1.0).abs());
        }
        faces.push(FaceLimit {
            support: pi.cell(cell).support.clone(),
            center,
            alpha,
            target,
            samples: samples.len(),
            max_deviation,
        });
    }
    let pass = faces.iter().all(|fl| fl.max_deviation <= tolerance);
    Ok(FaceLimitReport { i: i.clone(), t, faces, tolerance, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayStats {
    pub t: f64,
    pub samples: usize,
    pub sup: f64,
    pub median: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub i: LatticePoint,
    pub region: Vec<usize>,
    pub per_t: Vec<DecayStats>,
    /// Last over first supremum.
    pub ratio: f64,
    pub pass: bool,
}

/// `sup |A_i|` near the center of an n-cell whose dual edge avoids `i`,
/// along a schedule of `t`.
pub fn decay_check(
    pi: &DualComplex,
    i: &LatticePoint,
    region: CellId,
    schedule: &[f64],
    count: usize,
    seed: u64,
) -> Result<DecayReport> {
    let idx = pi.weights().index_of(i).ok_or_else(|| Error::UnknownPoint(i.to_string()))?;
    let cell = pi.cell(region);
    if cell.dim != pi.n() || cell.support.contains(&idx) {
        return Err(Error::Precondition("region must be an n-cell whose dual edge avoids i".into()));
    }
    let center = cell_center(pi, region)?;
    let mut per_t = Vec::new();
    for &t in schedule {
        let f = PatchworkPolynomial::new(pi.weights(), t)?;
        interior_index(&f, i)?;
        let samples = targeted_samples(&f, &center, SAMPLE_RADIUS, transversal(pi, region), count, seed);
        if samples.is_empty() {
            return Err(Error::EmptyRegion(format!("no samples near {:?} at t={t}", cell.support)));
        }
        let values = samples
            .iter()
            .map(|s| frame_coefficient(&f, idx, &s.x, &s.theta, None).map(|(_, a)| a.norm()))
            .collect::<Result<Vec<f64>>>()?;
        per_t.push(DecayStats {
            t,
            samples: values.len(),
            sup: values.iter().copied().fold(0.0, f64::max),
            median: quantile(&values, 0.5),
        });
    }
    let ratio = per_t.last().map_or(f64::NAN, |l| l.sup / per_t[0].sup);
    let monotone = per_t.windows(2).all(|w| w[1].sup < w[0].sup);
    Ok(DecayReport { i: i.clone(), region: cell.support.clone(), per_t, ratio, pass: monotone && ratio <= 0.1 })
}

/// For `f` truncated to the two terms of the region's dual edge `{j, k}`,
/// `|A_i| = t^{l_i(x) - l_j(x)} / |j_α - k_α|` exactly. Returns measured
/// and predicted values on samples near the region's center.
pub fn two_term_decay(
    pi: &DualComplex,
    i: &LatticePoint,
    region: CellId,
    t: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let full = PatchworkPolynomial::new(pi.weights(), t)?;
    let idx = interior_index(&full, i)?;
    let (j, k) = pi.edge_endpoints(region);
    let f = full.truncated(&[j, k]);
    let center = cell_center(pi, region)?;
    let samples = targeted_samples(&f, &center, SAMPLE_RADIUS, transversal(pi, region), count, seed);
    let forms = f.forms();
    samples
        .iter()
        .map(|s| {
            let (alpha, a) = frame_coefficient(&f, idx, &s.x, &s.theta, None)?;
            let gap = forms.form(idx, &s.x) - forms.form(j, &s.x);
            let diff = (forms.point(j)[alpha] - forms.point(k)[alpha]).abs();
            Ok((a.norm(), t.powf(gap) / diff))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub i: LatticePoint,
    pub t: f64,
    pub samples: usize,
    pub max_relative_difference: f64,
    pub min_ratio: f64,
    pub pass: bool,
}

/// Compares `A_i` computed from `f` and from its truncation to the local
/// window `i - 1 + Δ_{n+2}` on samples near the faces of `C^∧_i`.
pub fn truncation_compare(
    pi: &DualComplex,
    s: &RegularSubdivision,
    i: &LatticePoint,
    t: f64,
    count: usize,
    seed: u64,
) -> Result<TruncationReport> {
    if !s.check_translate_restriction(i)? {
        return Err(Error::RestrictionFails(i.to_string()));
    }
    let f = PatchworkPolynomial::new(pi.weights(), t)?;
    let idx = interior_index(&f, i)?;
    let window = pi.polytope().local_window(i)?;
    let keep: Vec<usize> = (0..pi.points().len()).filter(|&k| window.contains(pi.points()[k].coords())).collect();
    let truncated = f.truncated(&keep);
    let mut max_rel: f64 = 0.0;
    let mut min_ratio = f64::INFINITY;
    let mut total = 0;
    for &cell in &sphere_cycle(pi, i)?.cells {
        let center = cell_center(pi, cell)?;
        for smp in targeted_samples(&f, &center, SAMPLE_RADIUS, transversal(pi, cell), count, seed ^ cell as u64) {
            let (alpha, full) = frame_coefficient(&f, idx, &smp.x, &smp.theta, None)?;
            let (_, trunc) = frame_coefficient(&truncated, idx, &smp.x, &smp.theta, Some(alpha))?;
            max_rel = max_rel.max((full - trunc).norm() / full.norm());
            min_ratio = min_ratio.min((full / trunc).norm());
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyRegion(format!("no samples near the sphere of {i}")));
    }
    let pass = max_rel <= 0.1 && min_ratio >= 0.5;
    Ok(TruncationReport { i: i.clone(), t, samples: total, max_relative_difference: max_rel, min_ratio, pass })
}

/// Largest allowed drift of the free modulus along a fiber, in `Log_t`
/// units.
pub const FIBER_TOLERANCE: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberPoint {
    /// Swept angle.
    pub angle: f64,
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub residual: f64,
    /// Coefficient of `Ω_i / log t` against `dθ` of the swept coordinate.
    pub coeff: Complex64,
    /// `|Im(e^{iπ/2} coeff)| / |coeff|`.
    pub phase_ratio: f64,
}

/// Circle fiber of a curve over the point `x` of the face dual to the edge
/// `{i, j}` of `cell`: the angle of one coordinate is swept at modulus
/// `t^{x_s}` and the transversal coordinate `z_α` is solved for, its
/// `Log_t` modulus allowed to drift by at most [`FIBER_TOLERANCE`].
pub fn fiber_sample(f: &PatchworkPolynomial, pi: &DualComplex, i: usize, cell: CellId, x: &[f64], steps: usize) -> Result<Vec<FiberPoint>> {
    if f.dim() != 2 {
        return Err(Error::Precondition("fibers are sampled for curves only".into()));
    }
    let (a_end, b_end) = pi.edge_endpoints(cell);
    if a_end != i && b_end != i {
        return Err(Error::Precondition("cell is not dual to an edge at i".into()));
    }
    let j = if a_end == i { b_end } else { a_end };
    let diff: Vec<i64> = pi.points()[i].sub(&pi.points()[j]).0;
    let alpha = transversal(pi, cell);
    let sweep = 1 - alpha;
    let ln_t = f.ln_t();
    let forms = f.forms();
    let mut out = Vec::new();
    let branches = diff[alpha].unsigned_abs() as usize;
    for step in 0..steps {
        let angle = std::f64::consts::TAU * step as f64 / steps as f64;
        for k in 0..branches {
            let mut xs = x.to_vec();
            let mut th = vec![0.0; 2];
            th[sweep] = angle;
            th[alpha] = (std::f64::consts::PI - diff[sweep] as f64 * angle + std::f64::consts::TAU * k as f64)
                / diff[alpha] as f64;
            // complex Newton in log z_α = ln t·x_α + iθ_α
            for _ in 0..100 {
                let terms = f.scaled_terms(&xs, &th);
                let val: Complex64 = terms.iter().map(|(_, c)| c).sum();
                if val.norm() <= 1e-14 * terms.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max) {
                    break;
                }
                let da: Complex64 = terms.iter().map(|(q, c)| c * forms.point(*q)[alpha]).sum();
                if da.norm() == 0.0 {
                    break;
                }
                let step = val / da;
                xs[alpha] -= step.re / ln_t;
                th[alpha] -= step.im;
                if !xs[alpha].is_finite() {
                    break;
                }
            }
            let residual = f.residual(&xs, &th);
            let drift = (xs[alpha] - x[alpha]).abs();
            if residual.is_nan() || residual > RESIDUAL_TOLERANCE || drift > FIBER_TOLERANCE {
                return Err(Error::FiberNotFound(format!("angle {angle}: residual {residual}, drift {drift}")));
            }
            let (al, a) = frame_coefficient(f, i, &xs, &th, None)?;
            // along the fiber dlog z_s = i dθ and D_s dlog z_s + D_α dlog z_α = 0
            let terms = f.scaled_terms(&xs, &th);
            let d = |c: usize| -> Complex64 { terms.iter().map(|(q, v)| v * forms.point(*q)[c]).sum() };
            let dlog_sweep = Complex64::i();
            let dlog_alpha = -Complex64::i() * d(sweep) / d(alpha);
            // Ω_i = A_{i,α} dz_b / z_b with b the coordinate other than α
            let dlog = if al == alpha { dlog_sweep } else { dlog_alpha };
            let coeff = a * dlog / ln_t;
            let rotated = Complex64::i() * coeff;
            out.push(FiberPoint { angle, x: xs, theta: th, residual, coeff, phase_ratio: rotated.im.abs() / coeff.norm() });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberStats {
    pub t: f64,
    pub points: usize,
    pub max_phase_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub i: LatticePoint,
    pub cell: Vec<usize>,
    pub x: Vec<f64>,
    pub per_t: Vec<FiberStats>,
    pub pass: bool,
}

/// Maximum phase deviation of `Ω_i` from `π/2` along the fiber over `x`
/// (default: the center of `cell`) for each `t`.
pub fn fiber_phase_check(
    pi: &DualComplex,
    i: &LatticePoint,
    cell: CellId,
    x: Option<Vec<f64>>,
    schedule: &[f64],
    steps: usize,
) -> Result<FiberReport> {
    let x = match x {
        Some(x) => x,
        None => cell_center(pi, cell)?,
    };
    let mut per_t = Vec::new();
    for &t in schedule {
        let f = PatchworkPolynomial::new(pi.weights(), t)?;
        let idx = interior_index(&f, i)?;
        let pts = fiber_sample(&f, pi, idx, cell, &x, steps)?;
        per_t.push(FiberStats {
            t,
            points: pts.len(),
            max_phase_ratio: pts.iter().map(|p| p.phase_ratio).fold(0.0, f64::max),
        });
    }
    let decreasing = per_t.windows(2).all(|w| w[1].max_phase_ratio < w[0].max_phase_ratio);
    let pass = decreasing && per_t.last().is_some_and(|l| l.max_phase_ratio <= 0.1);
    Ok(FiberReport { i: i.clone(), cell: pi.cell(cell).support.clone(), x, per_t, pass })
}
