//! Mod-2 cellular homology of `Π_v` and the cycle families attached to
//! interior lattice points.
//!
//! Homology is computed on the bounded subcomplex, onto which `Π_v`
//! deformation retracts. Treating unbounded cells as closed cells would make
//! even the primitive tropical line look like a wedge of circles.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dualcomplex::{CellId, DualComplex};
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::subdivision::RegularSubdivision;

/// Dense GF(2) vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVec {
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in idx {
            v.flip(i);
        }
        v
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn lowest_bit(&self) -> Option<usize> {
        self.words.iter().enumerate().find(|(_, &w)| w != 0).map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
}

/// Rank over GF(2) of a set of vectors.
pub fn gf2_rank(rows: &[BitVec]) -> usize {
    let mut pivots: BTreeMap<usize, BitVec> = BTreeMap::new();
    for row in rows {
        let mut r = row.clone();
        while let Some(p) = r.lowest_bit() {
            match pivots.get(&p) {
                Some(basis) => r.xor_assign(basis),
                None => {
                    pivots.insert(p, r);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// A set of k-cells of `Π_v`, read as a chain mod 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gf2Chain {
    pub degree: usize,
    pub cells: BTreeSet<CellId>,
}

impl Gf2Chain {
    /// Boundary mod 2: `(k-1)`-cells incident to an odd number of cells.
    pub fn boundary(&self, pi: &DualComplex) -> BTreeSet<CellId> {
        let mut out = BTreeSet::new();
        for &c in &self.cells {
            for &f in pi.boundary(c) {
                if !out.remove(&f) {
                    out.insert(f);
                }
            }
        }
        out
    }

    pub fn is_cycle(&self, pi: &DualComplex) -> bool {
        self.boundary(pi).is_empty()
    }

    fn to_bits(&self, index: &BTreeMap<CellId, usize>) -> BitVec {
        BitVec::from_indices(index.len(), self.cells.iter().filter_map(|c| index.get(c).copied()))
    }
}

/// Cells of the given dimension, restricted to bounded cells if requested.
fn cells_of(pi: &DualComplex, k: usize, bounded_only: bool) -> Vec<CellId> {
    pi.cells_of_dim(k).filter(|&c| !bounded_only || pi.cell(c).bounded).collect()
}

/// Columns of `∂_k`, one bit vector per k-cell over the (k-1)-cells.
pub fn boundary_matrix(pi: &DualComplex, k: usize, bounded_only: bool) -> Vec<BitVec> {
    if k == 0 {
        return Vec::new();
    }
    let rows: BTreeMap<CellId, usize> =
        cells_of(pi, k - 1, bounded_only).into_iter().enumerate().map(|(i, c)| (c, i)).collect();
    cells_of(pi, k, bounded_only)
        .into_iter()
        .map(|c| BitVec::from_indices(rows.len(), pi.boundary(c).iter().filter_map(|f| rows.get(f).copied())))
        .collect()
}

/// Whether `∂_{k-1} ∘ ∂_k` vanishes mod 2 in every degree.
pub fn boundary_squares_to_zero(pi: &DualComplex, bounded_only: bool) -> bool {
    (2..=pi.n()).all(|k| {
        let lower: BTreeMap<CellId, usize> =
            cells_of(pi, k - 2, bounded_only).into_iter().enumerate().map(|(i, c)| (c, i)).collect();
        cells_of(pi, k, bounded_only).into_iter().all(|c| {
            let mut acc = BitVec::zeros(lower.len());
            for &f in pi.boundary(c) {
                if bounded_only && !pi.cell(f).bounded {
                    continue;
                }
                for g in pi.boundary(f) {
                    if let Some(&r) = lower.get(g) {
                        acc.flip(r);
                    }
                }
            }
            acc.is_zero()
        })
    })
}

/// Rank of `H_k(Π_v; Z/2)`.
pub fn homology_rank_gf2(pi: &DualComplex, k: usize) -> usize {
    if k > pi.n() {
        return 0;
    }
    let ck = cells_of(pi, k, true).len();
    let rank_k = gf2_rank(&boundary_matrix(pi, k, true));
    let rank_up = if k < pi.n() { gf2_rank(&boundary_matrix(pi, k + 1, true)) } else { 0 };
    ck - rank_k - rank_up
}

/// `C^∧_i`: the n-cells whose dual edge has `i` as an endpoint.
pub fn sphere_cycle(pi: &DualComplex, i: &LatticePoint) -> Result<Gf2Chain> {
    if !pi.polytope().is_interior(i.coords()) {
        return Err(Error::NotInterior(i.to_string()));
    }
    let idx = pi.weights().index_of(i).ok_or_else(|| Error::UnknownPoint(i.to_string()))?;
    let cells = pi.top_cells().into_iter().filter(|&c| pi.cell(c).support.contains(&idx)).collect();
    Ok(Gf2Chain { degree: pi.n(), cells })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleData {
    pub point: LatticePoint,
    pub sphere: Gf2Chain,
    /// Dual vertices of the top cells in the local window of `i` having no
    /// other interior point as a vertex.
    pub lambda_set: BTreeSet<CellId>,
    /// n-cells lying entirely inside the enlarged region.
    pub enlarged: Gf2Chain,
}

impl CycleData {
    /// Whether a point of the closed cell `cell` (with nearest-vertex owners
    /// `owners`) lies in the enlarged region.
    fn contains(&self, pi: &DualComplex, cell: CellId, owners: &[CellId]) -> bool {
        owners.iter().any(|o| self.lambda_set.contains(o))
            || self.sphere.cells.iter().any(|&f| pi.is_face_of(cell, f))
    }
}

/// The enlarged cycle `C_i` with its Λ-set.
pub fn enlarged_cycle(pi: &DualComplex, s: &RegularSubdivision, i: &LatticePoint) -> Result<CycleData> {
    let sphere = sphere_cycle(pi, i)?;
    if !s.check_translate_restriction(i)? {
        return Err(Error::RestrictionFails(i.to_string()));
    }
    let p = pi.polytope();
    let pts = pi.points();
    let lambda_set: BTreeSet<CellId> = s
        .cells_in_window(i)?
        .into_iter()
        .filter(|&t| {
            s.top_cells()[t].support.iter().all(|&k| &pts[k] == i || !p.is_interior(pts[k].coords()))
        })
        .map(|t| pi.cell_by_support(&s.top_cells()[t].support).expect("top cell is a dual vertex"))
        .collect();
    let enlarged = pi
        .top_cells()
        .into_iter()
        .filter(|&f| sphere.cells.contains(&f) || pi.cell_vertices(f).iter().all(|v| lambda_set.contains(v)))
        .collect();
    Ok(CycleData { point: i.clone(), sphere, lambda_set, enlarged: Gf2Chain { degree: pi.n(), cells: enlarged } })
}

#[derive(Clone, Debug)]
pub struct CycleFamily {
    pub entries: Vec<CycleData>,
}

/// One entry per interior lattice point, in lexicographic order.
pub fn cycle_family(pi: &DualComplex, s: &RegularSubdivision) -> Result<CycleFamily> {
    let entries =
        pi.polytope().interior_points().iter().map(|i| enlarged_cycle(pi, s, i)).collect::<Result<Vec<_>>>()?;
    Ok(CycleFamily { entries })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassReport {
    pub all_cycles: bool,
    pub independent_rank: usize,
    pub homology_rank: usize,
    /// Enlarged regions whose n-cycles are exactly the span of their sphere.
    pub enlarged_matches_sphere: bool,
}

impl ClassReport {
    pub fn passed(&self) -> bool {
        self.all_cycles && self.independent_rank == self.homology_rank && self.enlarged_matches_sphere
    }
}

/// Sphere classes are cycles, independent, and span `H_n` mod 2; each
/// enlarged region carries the class of its sphere and nothing else.
pub fn cycle_class_check(pi: &DualComplex, family: &CycleFamily) -> ClassReport {
    let n = pi.n();
    let index: BTreeMap<CellId, usize> = cells_of(pi, n, true).into_iter().enumerate().map(|(i, c)| (c, i)).collect();
    let all_cycles = family.entries.iter().all(|e| e.sphere.is_cycle(pi));
    let rows: Vec<BitVec> = family.entries.iter().map(|e| e.sphere.to_bits(&index)).collect();
    let independent_rank = gf2_rank(&rows);
    let homology_rank = homology_rank_gf2(pi, n);
    let enlarged_matches_sphere = family.entries.iter().all(|e| {
        let bounded: Vec<CellId> = e.enlarged.cells.iter().copied().filter(|&c| pi.cell(c).bounded).collect();
        let lower: BTreeMap<CellId, usize> = bounded
            .iter()
            .flat_map(|&c| pi.boundary(c).iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        let cols: Vec<BitVec> = bounded
            .iter()
            .map(|&c| BitVec::from_indices(lower.len(), pi.boundary(c).iter().map(|f| lower[f])))
            .collect();
        let kernel = bounded.len() - gf2_rank(&cols);
        let contains_sphere = e.sphere.cells.iter().all(|c| e.enlarged.cells.contains(c));
        contains_sphere && kernel == usize::from(!e.sphere.cells.is_empty())
    });
    ClassReport { all_cycles, independent_rank, homology_rank, enlarged_matches_sphere }
}

/// Float coordinates of dual vertices.
pub fn vertex_positions_f64(pi: &DualComplex) -> BTreeMap<CellId, Vec<f64>> {
    pi.vertices()
        .into_iter()
        .map(|v| {
            let x = pi.vertex_position(v).expect("vertex");
            (v, x.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect())
        })
        .collect()
}

/// Unit recession directions of the unbounded edges in the closure of a cell.
pub fn recession_rays_f64(pi: &DualComplex, cell: CellId) -> Vec<Vec<f64>> {
    pi.cells_of_dim(1)
        .filter(|&e| !pi.cell(e).bounded && pi.is_face_of(e, cell))
        .filter_map(|e| pi.ray_direction(e))
        .map(|d| {
            let d: Vec<f64> = d.iter().map(|q| q.to_f64().unwrap_or(0.0)).collect();
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            d.into_iter().map(|x| x / norm).collect()
        })
        .collect()
}

/// Vertices nearest to `x` among the vertices of all closed n-cells
/// containing the cell `cell`.
fn owners(pi: &DualComplex, cell: CellId, x: &[f64], pos: &BTreeMap<CellId, Vec<f64>>) -> Vec<CellId> {
    let candidates: BTreeSet<CellId> = pi
        .top_cells()
        .into_iter()
        .filter(|&f| pi.is_face_of(cell, f))
        .flat_map(|f| pi.cell_vertices(f))
        .collect();
    let dist = |v: &CellId| pos[v].iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let best = candidates.iter().map(dist).fold(f64::INFINITY, f64::min);
    candidates.into_iter().filter(|v| dist(v) <= best + 1e-9 * (1.0 + best)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub vertices: usize,
    pub uncovered_vertices: Vec<CellId>,
    pub samples: usize,
    pub uncovered_samples: usize,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.uncovered_vertices.is_empty() && self.uncovered_samples == 0
    }
}

/// Every vertex-Voronoi region lies in some enlarged cycle, checked
/// combinatorially and on sampled points (cell barycenters plus
/// `per_cell` random points in every n-cell).
pub fn coverage_check(pi: &DualComplex, family: &CycleFamily, per_cell: usize, seed: u64) -> CoverageReport {
    let spheres: BTreeSet<CellId> = family.entries.iter().flat_map(|e| e.sphere.cells.iter().copied()).collect();
    let lambdas: BTreeSet<CellId> = family.entries.iter().flat_map(|e| e.lambda_set.iter().copied()).collect();
    let vertices = pi.vertices();
    let uncovered_vertices: Vec<CellId> = vertices
        .iter()
        .copied()
        .filter(|&v| {
            !lambdas.contains(&v)
                && !pi.top_cells().into_iter().filter(|&f| pi.is_face_of(v, f)).all(|f| spheres.contains(&f))
        })
        .collect();

    let pos = vertex_positions_f64(pi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = 0;
    let mut uncovered_samples = 0;
    let mut check = |cell: CellId, x: Vec<f64>| {
        let own = owners(pi, cell, &x, &pos);
        samples += 1;
        if !family.entries.iter().any(|e| e.contains(pi, cell, &own)) {
            uncovered_samples += 1;
        }
    };
    for c in 0..pi.len() {
        let vs = pi.cell_vertices(c);
        let rays = recession_rays_f64(pi, c);
        let dim = pi.n() + 1;
        let mut bary = vec![0.0; dim];
        for v in &vs {
            for (b, x) in bary.iter_mut().zip(&pos[v]) {
                *b += x / vs.len() as f64;
            }
        }
        for r in &rays {
            for (b, x) in bary.iter_mut().zip(r) {
                *b += x;
            }
        }
        check(c, bary);
        if pi.cell(c).dim != pi.n() {
            continue;
        }
        for _ in 0..per_cell {
            let w: Vec<f64> = vs.iter().map(|_| rng.gen::<f64>() + 1e-6).collect();
            let total: f64 = w.iter().sum();
            let mut x = vec![0.0; dim];
            for (v, wv) in vs.iter().zip(&w) {
                for (a, b) in x.iter_mut().zip(&pos[v]) {
                    *a += b * wv / total;
                }
            }
            for r in &rays {
                let t = rng.gen::<f64>() * 10.0;
                for (a, b) in x.iter_mut().zip(r) {
                    *a += t * b;
                }
            }
            check(c, x);
        }
    }
    CoverageReport { vertices: vertices.len(), uncovered_vertices, samples, uncovered_samples }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    Disjoint,
    /// The regions share exactly one point.
    Point,
    /// Finitely many common points, more than one.
    Points(usize),
    /// The regions share a segment of positive length.
    Overlap,
}

/// Pieces of a curve complex: each bounded edge splits at its midpoint into
/// two halves owned by its endpoints; a ray is owned by its vertex.
fn half_edges(pi: &DualComplex, e: &CycleData) -> BTreeSet<(CellId, CellId)> {
    let mut out = BTreeSet::new();
    for f in pi.top_cells() {
        for v in pi.cell_vertices(f) {
            if e.sphere.cells.contains(&f) || e.lambda_set.contains(&v) {
                out.insert((f, v));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum CurvePoint {
    Vertex(CellId),
    Midpoint(CellId),
}

fn points_of(pi: &DualComplex, halves: &BTreeSet<(CellId, CellId)>) -> BTreeSet<CurvePoint> {
    let mut out = BTreeSet::new();
    for &(f, v) in halves {
        out.insert(CurvePoint::Vertex(v));
        if pi.cell(f).bounded {
            out.insert(CurvePoint::Midpoint(f));
        }
    }
    out
}

/// Intersection type of every pair of enlarged regions (curves only).
pub fn pairwise_intersections(pi: &DualComplex, family: &CycleFamily) -> Result<Vec<(usize, usize, Contact)>> {
    if pi.n() != 1 {
        return Err(Error::Precondition("pairwise intersections are defined for curves".into()));
    }
    let halves: Vec<_> = family.entries.iter().map(|e| half_edges(pi, e)).collect();
    let points: Vec<_> = halves.iter().map(|h| points_of(pi, h)).collect();
    let mut out = Vec::new();
    for a in 0..halves.len() {
        for b in a + 1..halves.len() {
            let contact = if halves[a].intersection(&halves[b]).next().is_some() {
                Contact::Overlap
            } else {
                match points[a].intersection(&points[b]).count() {
                    0 => Contact::Disjoint,
                    1 => Contact::Point,
                    k => Contact::Points(k),
                }
            };
            out.push((a, b, contact));
        }
    }
    Ok(out)
}

/// Cycle report file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleReport {
    pub homology_ranks: Vec<usize>,
    pub cycles: Vec<CycleRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub point: LatticePoint,
    pub sphere: Vec<Vec<usize>>,
    pub lambda_set: Vec<Vec<usize>>,
    pub enlarged: Vec<Vec<usize>>,
}

pub fn cycle_report(pi: &DualComplex, family: &CycleFamily) -> CycleReport {
    let supports = |cells: &BTreeSet<CellId>| cells.iter().map(|&c| pi.cell(c).support.clone()).collect();
    CycleReport {
        homology_ranks: (0..=pi.n()).map(|k| homology_rank_gf2(pi, k)).collect(),
        cycles: family
            .entries
            .iter()
            .map(|e| CycleRecord {
                point: e.point.clone(),
                sphere: supports(&e.sphere.cells),
                lambda_set: supports(&e.lambda_set),
                enlarged: supports(&e.enlarged.cells),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualcomplex::dual_complex;
    use crate::lattice::LatticePolytope;
    use crate::subdivision::regular_subdivision;
    use crate::tropical::WeightFunction;

    fn build(v: &WeightFunction) -> (RegularSubdivision, DualComplex) {
        let s = regular_subdivision(v).unwrap();
        let pi = dual_complex(&s, v).unwrap();
        (s, pi)
    }

    #[test]
    fn gf2_rank_basics() {
        let a = BitVec::from_indices(3, [0, 1]);
        let b = BitVec::from_indices(3, [1, 2]);
        let c = BitVec::from_indices(3, [0, 2]);
        assert_eq!(gf2_rank(&[a.clone(), b.clone()]), 2);
        assert_eq!(gf2_rank(&[a, b, c]), 2);
        assert_eq!(gf2_rank(&[BitVec::from_indices(130, [129])]), 1);
    }

    #[test]
    fn tropical_line_is_contractible() {
        let (_, pi) = build(&WeightFunction::zero(LatticePolytope::simplex(1, 1).unwrap()));
        assert_eq!(homology_rank_gf2(&pi, 0), 1);
        assert_eq!(homology_rank_gf2(&pi, 1), 0);
        assert!(boundary_squares_to_zero(&pi, false));
    }

    #[test]
    fn cubic_has_one_cycle() {
        let (s, pi) = build(&WeightFunction::canonical(LatticePolytope::simplex(1, 3).unwrap()));
        assert_eq!(homology_rank_gf2(&pi, 1), 1);
        let fam = cycle_family(&pi, &s).unwrap();
        assert_eq!(fam.entries.len(), 1);
        assert!(fam.entries[0].sphere.is_cycle(&pi));
        // the single window is the whole triangle
        assert_eq!(fam.entries[0].enlarged.cells.len(), pi.top_cells().len());
        assert!(cycle_class_check(&pi, &fam).passed());
        assert!(coverage_check(&pi, &fam, 20, 1).passed());
    }

    #[test]
    fn boundary_point_is_rejected() {
        let (_, pi) = build(&WeightFunction::canonical(LatticePolytope::simplex(1, 3).unwrap()));
        assert!(matches!(sphere_cycle(&pi, &LatticePoint::new(vec![0, 0])), Err(Error::NotInterior(_))));
    }

    #[test]
    fn replacing_a_class_breaks_independence() {
        let (s, pi) = build(&WeightFunction::canonical(LatticePolytope::simplex(1, 4).unwrap()));
        let mut fam = cycle_family(&pi, &s).unwrap();
        assert!(cycle_class_check(&pi, &fam).passed());
        fam.entries[1].sphere.cells.clear();
        let report = cycle_class_check(&pi, &fam);
        assert_eq!(report.independent_rank, 2);
        assert!(!report.passed());
    }
}
