use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trop_core::lattice::{geometric_genus, LatticePolytope};
use trop_core::linalg::rat;
use trop_core::subdivision::{brute_force_subdivision, find_weights, regular_subdivision, WeightSearch};
use trop_core::tropical::WeightFunction;

fn random_weights(p: LatticePolytope, rng: &mut ChaCha8Rng) -> WeightFunction {
    let count = p.enumerate_points().len();
    let values = (0..count).map(|_| rat(rng.gen_range(0..=30))).collect();
    WeightFunction::from_values(p, values).unwrap()
}

#[test]
fn lower_hull_matches_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let cases = [(1, 1), (1, 2), (1, 3), (1, 4), (2, 4)];
    for (n, d) in cases {
        let p = LatticePolytope::simplex(n, d).unwrap();
        let mut weights = vec![WeightFunction::canonical(p)];
        weights.extend((0..20).map(|_| random_weights(p, &mut rng)));
        for v in &weights {
            let hull = regular_subdivision(v).unwrap();
            let oracle = brute_force_subdivision(v).unwrap();
            assert_eq!(hull.cell_set(), oracle.cell_set(), "n={n} d={d} v={:?}", v.values());
        }
    }
}

#[test]
fn volume_is_conserved_for_any_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (n, d) in [(1, 3), (1, 5), (2, 3), (2, 4)] {
        let p = LatticePolytope::simplex(n, d).unwrap();
        for _ in 0..10 {
            let s = regular_subdivision(&random_weights(p, &mut rng)).unwrap();
            assert_eq!(s.total_volume(), BigInt::from(d).pow(n as u32 + 1));
            assert!(s.is_face_to_face());
        }
    }
}

#[test]
fn canonical_weight_properties_for_curves() {
    for d in 1..=6 {
        let p = LatticePolytope::simplex(1, d).unwrap();
        let s = regular_subdivision(&WeightFunction::canonical(p)).unwrap();
        assert!(s.is_unimodular(), "d={d}");
        assert_eq!(s.top_cells().len(), (d * d) as usize);
        assert!(s.check_edge_directions().passed());
        let interior = p.interior_points();
        assert_eq!(BigInt::from(interior.len()), geometric_genus(1, d));
        for i in &interior {
            assert!(s.check_translate_restriction(i).unwrap(), "d={d} i={i}");
        }
    }
}

#[test]
fn canonical_weight_keeps_edges_and_restriction_in_higher_dimension() {
    for (n, dmax) in [(2usize, 5u32), (3, 4)] {
        for d in 1..=dmax {
            let p = LatticePolytope::simplex(n, d).unwrap();
            let s = regular_subdivision(&WeightFunction::canonical(p)).unwrap();
            assert_eq!(s.total_volume(), BigInt::from(d).pow(n as u32 + 1));
            assert!(s.check_edge_directions().passed(), "n={n} d={d}");
            for i in &p.interior_points() {
                assert!(s.check_translate_restriction(i).unwrap(), "n={n} d={d} i={i}");
            }
        }
    }
}

/// The quadratic weight lifts to the A_3 form, whose Delaunay cells include
/// octahedra: at x = (4,4,4) the six points e_α and e_α + e_β tie.
#[test]
fn canonical_weight_is_not_maximal_for_surfaces() {
    let p = LatticePolytope::simplex(2, 4).unwrap();
    let v = WeightFunction::canonical(p);
    let x = trop_core::tropical::rational_point(&[4, 4, 4]);
    let l = trop_core::tropical::legendre(&v, &x).unwrap();
    let tied: Vec<_> = l.argmax.iter().map(|&k| v.points()[k].0.clone()).collect();
    assert_eq!(tied, vec![vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 1], vec![1, 1, 0]]);
    assert_eq!(l.value, rat(2));

    let s = regular_subdivision(&v).unwrap();
    assert!(!s.is_unimodular());
    assert_eq!(s.top_cells().len(), 34);
    assert_eq!(s.top_cells().iter().filter(|c| c.support.len() == 6).count(), 10);
    assert_eq!(s.cell_set(), brute_force_subdivision(&v).unwrap().cell_set());
}

#[test]
fn find_weights_round_trips_random_regular_triangulations() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let p = LatticePolytope::simplex(1, 3).unwrap();
    let mut tried = 0;
    while tried < 10 {
        let values = (0..p.enumerate_points().len()).map(|_| rat(rng.gen_range(0..=1000))).collect();
        let s = regular_subdivision(&WeightFunction::from_values(p, values).unwrap()).unwrap();
        if s.top_cells().iter().any(|c| c.support.len() != 3) {
            continue;
        }
        tried += 1;
        let target: Vec<Vec<usize>> = s.top_cells().iter().map(|c| c.support.clone()).collect();
        let WeightSearch::Feasible(w) = find_weights(&p, &target).unwrap() else {
            panic!("regular target reported infeasible");
        };
        assert_eq!(regular_subdivision(&w).unwrap().cell_set(), s.cell_set());
    }
}
