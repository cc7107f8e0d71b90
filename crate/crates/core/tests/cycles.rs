use num_bigint::BigInt;

use trop_core::cycles::*;
use trop_core::dualcomplex::{dual_complex, DualComplex};
use trop_core::lattice::{binomial, LatticePolytope};
use trop_core::subdivision::{find_weights, genus_target, regular_subdivision, RegularSubdivision, WeightSearch};
use trop_core::tropical::WeightFunction;

fn build(v: &WeightFunction) -> (RegularSubdivision, DualComplex) {
    let s = regular_subdivision(v).unwrap();
    let pi = dual_complex(&s, v).unwrap();
    (s, pi)
}

fn canonical(n: usize, d: u32) -> (RegularSubdivision, DualComplex) {
    build(&WeightFunction::canonical(LatticePolytope::simplex(n, d).unwrap()))
}

#[test]
fn top_homology_rank_is_the_genus() {
    for (n, dmax) in [(1usize, 6u32), (2, 5), (3, 4)] {
        for d in 1..=dmax {
            let (_, pi) = canonical(n, d);
            assert!(boundary_squares_to_zero(&pi, false));
            assert!(boundary_squares_to_zero(&pi, true));
            let ranks: Vec<usize> = (0..=n).map(|k| homology_rank_gf2(&pi, k)).collect();
            assert_eq!(ranks[0], 1, "n={n} d={d}");
            assert!(ranks[1..n].iter().all(|&r| r == 0), "n={n} d={d} {ranks:?}");
            assert_eq!(BigInt::from(ranks[n]), binomial(d as i64 - 1, n as i64 + 1), "n={n} d={d}");
        }
    }
}

#[test]
fn sphere_classes_form_a_basis() {
    for (n, d) in [(1usize, 3u32), (1, 4), (1, 5), (1, 6), (2, 4), (2, 5)] {
        let (s, pi) = canonical(n, d);
        let fam = cycle_family(&pi, &s).unwrap();
        for e in &fam.entries {
            // every (n-1)-cell meets the sphere in an even number of n-cells
            for g in pi.cells_of_dim(n - 1) {
                let k = pi.coboundary(g).iter().filter(|c| e.sphere.cells.contains(c)).count();
                assert_eq!(k % 2, 0);
            }
        }
        let report = cycle_class_check(&pi, &fam);
        assert!(report.passed(), "n={n} d={d}: {report:?}");
    }
}

#[test]
fn one_enlarged_cycle_is_everything_at_minimal_degree() {
    for n in 1..=2usize {
        let d = n as u32 + 2;
        let (s, pi) = canonical(n, d);
        let fam = cycle_family(&pi, &s).unwrap();
        assert_eq!(fam.entries.len(), 1);
        assert_eq!(fam.entries[0].lambda_set.len(), pi.vertices().len());
        assert_eq!(fam.entries[0].enlarged.cells.len(), pi.top_cells().len());
        assert!(coverage_check(&pi, &fam, 20, 11).passed());
    }
}

#[test]
fn curves_are_covered_by_enlarged_cycles() {
    for d in 3..=6 {
        let (s, pi) = canonical(1, d);
        let fam = cycle_family(&pi, &s).unwrap();
        let report = coverage_check(&pi, &fam, 100, 5);
        assert!(report.passed(), "d={d}: {report:?}");
    }
}

/// Simplices with two interior vertices and a boundary-to-boundary edge lie
/// in no Λ-set, and that edge's dual 2-cell lies in no sphere.
#[test]
fn surface_of_degree_five_is_not_covered() {
    let (s, pi) = canonical(2, 5);
    let fam = cycle_family(&pi, &s).unwrap();
    let report = coverage_check(&pi, &fam, 20, 5);
    assert_eq!(report.uncovered_vertices.len(), 10);
    let p = *pi.polytope();
    for &u in &report.uncovered_vertices {
        let interior = pi.cell(u).support.iter().filter(|&&k| p.is_interior(pi.points()[k].coords())).count();
        assert!(interior >= 2);
    }
}

#[test]
fn simplex_cycles_overlap_but_genus_cycles_touch_once() {
    let (s, pi) = canonical(1, 4);
    let fam = cycle_family(&pi, &s).unwrap();
    let contacts = pairwise_intersections(&pi, &fam).unwrap();
    assert_eq!(contacts.len(), 3);
    assert!(contacts.iter().any(|(_, _, c)| *c == Contact::Overlap));

    for g in 1..=5 {
        let (p, target) = genus_target(g).unwrap();
        let WeightSearch::Feasible(v) = find_weights(&p, &target).unwrap() else {
            panic!("genus {g} target infeasible");
        };
        let (s, pi) = build(&v);
        let fam = cycle_family(&pi, &s).unwrap();
        assert_eq!(fam.entries.len(), g as usize);
        for (a, b, c) in pairwise_intersections(&pi, &fam).unwrap() {
            let expected = if b == a + 1 { Contact::Point } else { Contact::Disjoint };
            assert_eq!(c, expected, "g={g} pair ({a},{b})");
        }
    }
}

#[test]
fn cycle_report_serializes() {
    let (s, pi) = canonical(1, 4);
    let fam = cycle_family(&pi, &s).unwrap();
    let report = cycle_report(&pi, &fam);
    assert_eq!(report.homology_ranks, vec![1, 3]);
    let text = serde_json::to_string(&report).unwrap();
    assert_eq!(serde_json::from_str::<CycleReport>(&text).unwrap(), report);
}
