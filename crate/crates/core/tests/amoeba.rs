use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trop_core::amoeba::*;
use trop_core::cycles::{recession_rays_f64, vertex_positions_f64};
use trop_core::dualcomplex::{dual_complex, DualComplex};
use trop_core::lattice::LatticePolytope;
use trop_core::subdivision::regular_subdivision;
use trop_core::tropical::WeightFunction;

fn canonical_curve(d: u32) -> DualComplex {
    let v = WeightFunction::canonical(LatticePolytope::simplex(1, d).unwrap());
    dual_complex(&regular_subdivision(&v).unwrap(), &v).unwrap()
}

/// Minimizes the distance to each 1-cell by ternary search on its
/// parameter, independently of the projection code.
fn oracle_distance(pi: &DualComplex, x: &[f64]) -> f64 {
    let pos = vertex_positions_f64(pi);
    let mut best = f64::INFINITY;
    for e in pi.cells_of_dim(1) {
        let vs = pi.cell_vertices(e);
        let (a, dir, hi) = if pi.cell(e).bounded {
            let (a, b) = (&pos[&vs[0]], &pos[&vs[1]]);
            (a.clone(), vec![b[0] - a[0], b[1] - a[1]], 1.0)
        } else {
            (pos[&vs[0]].clone(), recession_rays_f64(pi, e)[0].clone(), 1e3)
        };
        let dist = |s: f64| ((a[0] + s * dir[0] - x[0]).powi(2) + (a[1] + s * dir[1] - x[1]).powi(2)).sqrt();
        let (mut lo, mut hi) = (0.0, hi);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if dist(m1) < dist(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best = best.min(dist((lo + hi) / 2.0));
    }
    best
}

#[test]
fn distance_matches_brute_force_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for pi in [canonical_curve(3), canonical_curve(4)] {
        let g = ComplexGeometry::new(&pi);
        for _ in 0..100 {
            let x = [rng.gen_range(-8.0..12.0), rng.gen_range(-8.0..12.0)];
            assert!((g.distance(&x) - oracle_distance(&pi, &x)).abs() < 1e-7, "x={x:?}");
        }
        for (_, p) in vertex_positions_f64(&pi) {
            assert!(g.distance(&p) < 1e-12);
        }
    }
}

#[test]
fn samples_satisfy_the_equation() {
    let pi = canonical_curve(3);
    let f = PatchworkPolynomial::new(pi.weights(), 16.0).unwrap();
    let samples = sample_variety(&f, 1000, 7, &Window::cube(2, 5.0)).unwrap();
    assert_eq!(samples.len(), 1000);
    for s in &samples {
        assert!(s.residual <= RESIDUAL_TOLERANCE);
        assert!((f.residual(&s.x, &s.theta) - s.residual).abs() < 1e-15);
    }
    // direct evaluation at moderate t agrees with the rescaled residual
    let s = samples.iter().find(|s| s.x.iter().all(|c| c.abs() < 2.0)).unwrap();
    let z = s.z(16.0);
    let value: num_complex::Complex64 = pi
        .points()
        .iter()
        .zip(pi.weights().values_f64())
        .map(|(j, w)| 16f64.powf(-w) * z[0].powi(j.0[0] as i32) * z[1].powi(j.0[1] as i32))
        .sum();
    let scale = 16f64.powf(f.max_form(&s.x));
    assert!(value.norm() / scale < 1e-8);
}

#[test]
fn amoeba_of_the_line_scales_with_log_t() {
    let v = WeightFunction::zero(LatticePolytope::simplex(1, 1).unwrap());
    let pi = dual_complex(&regular_subdivision(&v).unwrap(), &v).unwrap();
    let run = convergence_report(&pi, &[4.0, 16.0], 500, 3, &Window::cube(2, 5.0)).unwrap();
    let (a, b) = (&run.report.per_t[0], &run.report.per_t[1]);
    // the amoeba of 1 + z1 + z2 lies within log_t 2 of the tropical line
    assert!(a.max <= 2f64.ln() / 4f64.ln() + 1e-9);
    assert!(b.max <= 2f64.ln() / 16f64.ln() + 1e-9);
    assert!(run.report.pass);
}

#[test]
fn convergence_and_defect_shrink() {
    for d in [3, 4] {
        let pi = canonical_curve(d);
        let run = convergence_report(&pi, &[4.0, 16.0, 64.0, 256.0], 2000, 42, &Window::cube(2, 5.0)).unwrap();
        let r = &run.report;
        assert!(r.pass, "d={d}");
        assert!(r.per_t[3].median <= 0.25 * r.per_t[0].median);
        assert!(r.per_t[3].defect_p95 < r.per_t[0].defect_p95);
        assert_eq!(run.rows.len(), 8000);
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let pi = canonical_curve(3);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| convergence_report(&pi, &[4.0, 16.0], 300, 9, &Window::cube(2, 5.0)).unwrap().report)
    };
    let one = serde_json::to_string(&run(1)).unwrap();
    let four = serde_json::to_string(&run(4)).unwrap();
    assert_eq!(one, four);
}
