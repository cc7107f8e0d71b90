//! Named checks over a subdivision and its dual complex.

use serde::{Deserialize, Serialize};
use trop_core::cycles::{coverage_check, cycle_class_check, cycle_family, homology_rank_gf2};
use trop_core::dualcomplex::{check_balanced, primitive_piece_count, DualComplex};
use trop_core::lattice::{geometric_genus, LatticePolytope};
use trop_core::subdivision::RegularSubdivision;

use crate::config::Check;

/// Random points per top cell in the coverage check.
pub const COVERAGE_SAMPLES: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(check: Check, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: check.name().into(), passed, detail: detail.into() }
    }
}

pub fn run_checks(s: &RegularSubdivision, pi: &DualComplex, checks: &[Check], seed: u64) -> Vec<CheckResult> {
    checks.iter().map(|&c| run_check(s, pi, c, seed)).collect()
}

pub fn run_check(s: &RegularSubdivision, pi: &DualComplex, check: Check, seed: u64) -> CheckResult {
    match check {
        Check::Maximal => {
            let vol = s.total_volume();
            let cells = s.top_cells().len();
            match primitive_piece_count(pi, s) {
                Ok(count) if count.to_string() == vol.to_string() => {
                    CheckResult::new(check, true, format!("{count} unimodular cells, volume {vol}"))
                }
                Ok(count) => CheckResult::new(check, false, format!("{count} pieces but volume {vol}")),
                Err(e) => CheckResult::new(check, false, format!("{cells} cells for volume {vol}: {e}")),
            }
        }
        Check::Edges => {
            let r = s.check_edge_directions();
            let detail = match r.violations.first() {
                None => format!("{} edges in allowed directions", r.edges),
                Some((a, b)) => format!("{} of {} edges violate, first {a}-{b}", r.violations.len(), r.edges),
            };
            CheckResult::new(check, r.passed(), detail)
        }
        Check::Translate => {
            let interior = s.polytope().interior_points();
            let mut bad = Vec::new();
            for i in &interior {
                match s.check_translate_restriction(i) {
                    Ok(true) => {}
                    Ok(false) => bad.push(i.to_string()),
                    Err(e) => return CheckResult::new(check, false, format!("{i}: {e}")),
                }
            }
            let detail = if bad.is_empty() {
                format!("{} interior points restrict to the standard triangulation", interior.len())
            } else {
                format!("restriction fails at {}", bad.join(" "))
            };
            CheckResult::new(check, bad.is_empty(), detail)
        }
        Check::Balanced => {
            let r = check_balanced(pi);
            let detail = match r.failures.first() {
                None => format!("{} codimension-one cells balanced", r.checked),
                Some(f) => format!("{} of {} unbalanced, first around {f:?}", r.failures.len(), r.checked),
            };
            CheckResult::new(check, r.passed(), detail)
        }
        Check::Homology => homology(s, pi),
        Check::Coverage => match cycle_family(pi, s) {
            Err(e) => CheckResult::new(check, false, e.to_string()),
            Ok(family) => {
                let r = coverage_check(pi, &family, COVERAGE_SAMPLES, seed);
                let detail = format!(
                    "{} of {} vertices and {} of {} samples uncovered",
                    r.uncovered_vertices.len(),
                    r.vertices,
                    r.uncovered_samples,
                    r.samples
                );
                CheckResult::new(check, r.passed(), detail)
            }
        },
    }
}

fn homology(s: &RegularSubdivision, pi: &DualComplex) -> CheckResult {
    let check = Check::Homology;
    let n = pi.n();
    let ranks: Vec<usize> = (0..=n).map(|k| homology_rank_gf2(pi, k)).collect();
    let interior = s.polytope().interior_points().len();
    let mut expected = vec![0; n + 1];
    expected[0] += 1;
    expected[n] += interior;
    if let LatticePolytope::Simplex { n, d } = *s.polytope() {
        debug_assert_eq!(geometric_genus(n, d).to_string(), interior.to_string());
    }
    if ranks != expected {
        return CheckResult::new(check, false, format!("ranks {ranks:?}, expected {expected:?}"));
    }
    match cycle_family(pi, s) {
        Err(e) => CheckResult::new(check, false, format!("ranks {ranks:?}; {e}")),
        Ok(family) => {
            let r = cycle_class_check(pi, &family);
            let detail = format!(
                "ranks {ranks:?}; {} sphere classes of rank {}, enlarged regions {}",
                family.entries.len(),
                r.independent_rank,
                if r.enlarged_matches_sphere { "match" } else { "differ" }
            );
            CheckResult::new(check, r.passed(), detail)
        }
    }
}
