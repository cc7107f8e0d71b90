//! The balanced polyhedral complex `Π_v` dual to a regular subdivision.
//!
//! Cells are stored combinatorially by the support of the dual subdivision
//! face; geometry (vertex positions, affine hulls, recession directions) is
//! derived on demand from the weights. Unbounded cells never need a
//! V-representation.

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::config_facets;
use crate::lattice::{LatticePoint, LatticePolytope};
use crate::linalg::{nullspace, rat, solve_unique, Rational};
use crate::subdivision::{regular_subdivision, RegularSubdivision};
use crate::tropical::WeightFunction;

pub type CellId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualCell {
    /// Points attaining the maximum on this cell (a subdivision face).
    pub support: Vec<usize>,
    /// `(n+1) - dim(support)`.
    pub dim: usize,
    pub bounded: bool,
}

#[derive(Clone, Debug)]
pub struct DualComplex {
    n: usize,
    weights: WeightFunction,
    cells: Vec<DualCell>,
    index: HashMap<Vec<usize>, CellId>,
    /// Cells of one dimension lower in the closure of each cell.
    boundary: Vec<Vec<CellId>>,
    /// Cells of one dimension higher whose closure contains each cell.
    coboundary: Vec<Vec<CellId>>,
    /// Covector `c_F` of each n-cell, `j - i` from the first to the last
    /// support point of its dual edge.
    covectors: BTreeMap<CellId, Vec<i64>>,
    /// Lattice length of each n-cell's dual edge.
    edge_weights: BTreeMap<CellId, u64>,
}

impl DualComplex {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &WeightFunction {
        &self.weights
    }

    pub fn polytope(&self) -> &LatticePolytope {
        self.weights.polytope()
    }

    pub fn points(&self) -> &[LatticePoint] {
        self.weights.points()
    }

    pub fn cells(&self) -> &[DualCell] {
        &self.cells
    }

    pub fn cell(&self, id: CellId) -> &DualCell {
        &self.cells[id]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_by_support(&self, support: &[usize]) -> Option<CellId> {
        self.index.get(support).copied()
    }

    pub fn cells_of_dim(&self, k: usize) -> impl Iterator<Item = CellId> + '_ {
        (0..self.cells.len()).filter(move |&c| self.cells[c].dim == k)
    }

    pub fn vertices(&self) -> Vec<CellId> {
        self.cells_of_dim(0).collect()
    }

    pub fn top_cells(&self) -> Vec<CellId> {
        self.cells_of_dim(self.n).collect()
    }

    pub fn boundary(&self, id: CellId) -> &[CellId] {
        &self.boundary[id]
    }

    pub fn coboundary(&self, id: CellId) -> &[CellId] {
        &self.coboundary[id]
    }

    /// Whether `a` lies in the closure of `b` (reverse face containment of
    /// the supports).
    pub fn is_face_of(&self, a: CellId, b: CellId) -> bool {
        let (sa, sb) = (&self.cells[a].support, &self.cells[b].support);
        sb.iter().all(|k| sa.binary_search(k).is_ok())
    }

    /// Dual vertices in the closure of a cell.
    pub fn cell_vertices(&self, id: CellId) -> Vec<CellId> {
        self.vertices().into_iter().filter(|&v| self.is_face_of(v, id)).collect()
    }

    pub fn covector(&self, id: CellId) -> Option<&[i64]> {
        self.covectors.get(&id).map(Vec::as_slice)
    }

    pub fn edge_weight(&self, id: CellId) -> Option<u64> {
        self.edge_weights.get(&id).copied()
    }

    /// Replaces the stored covector of an n-cell (used to build negative
    /// controls for [`check_balanced`]).
    pub fn set_covector(&mut self, id: CellId, covector: Vec<i64>) {
        self.covectors.insert(id, covector);
    }

    /// Endpoints of the dual edge of an n-cell, in support order.
    pub fn edge_endpoints(&self, id: CellId) -> (usize, usize) {
        let s = &self.cells[id].support;
        (s[0], *s.last().expect("nonempty support"))
    }

    /// Exact position of a dual vertex.
    pub fn vertex_position(&self, id: CellId) -> Result<Vec<Rational>> {
        let c = &self.cells[id];
        if c.dim != 0 {
            return Err(Error::NotAVertex(c.dim));
        }
        dual_vertex_position(&self.weights, &c.support)
    }

    /// Unit-free recession direction of an unbounded 1-cell, pointing away
    /// from its vertex.
    pub fn ray_direction(&self, id: CellId) -> Option<Vec<Rational>> {
        let c = &self.cells[id];
        if c.dim != 1 || c.bounded {
            return None;
        }
        let pts = self.points();
        let j0 = &pts[c.support[0]];
        let rows: Vec<Vec<Rational>> =
            c.support[1..].iter().map(|&j| pts[j].sub(j0).0.iter().map(|&x| rat(x)).collect()).collect();
        let mut d = nullspace(&rows, self.n + 1).into_iter().next()?;
        // every lattice point must stay weakly below along the ray
        let out_of_cell = pts.iter().any(|k| {
            let diff = k.sub(j0);
            d.iter().zip(&diff.0).map(|(a, &b)| a * rat(b)).sum::<Rational>() > rat(0)
        });
        if out_of_cell {
            d = d.into_iter().map(|x| -x).collect();
        }
        Some(d)
    }

    pub fn to_file(&self) -> Result<ComplexFile> {
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(id, c)| {
                Ok(ComplexCellRecord {
                    support: c.support.clone(),
                    dim: c.dim,
                    bounded: c.bounded,
                    weight: self.edge_weight(id),
                    covector: self.covector(id).map(<[i64]>::to_vec),
                    position: if c.dim == 0 {
                        Some(self.vertex_position(id)?.iter().map(ToString::to_string).collect())
                    } else {
                        None
                    },
                })
            })
            .collect::<Result<_>>()?;
        Ok(ComplexFile { polytope: *self.polytope(), n: self.n, cells })
    }
}

/// Complex file: cells keyed by sorted support, vertices with exact
/// rational coordinates `"p/q"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub polytope: LatticePolytope,
    pub n: usize,
    pub cells: Vec<ComplexCellRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexCellRecord {
    pub support: Vec<usize>,
    pub dim: usize,
    pub bounded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covector: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Vec<String>>,
}

/// Solves `l_{v,j}(x)` equal for all `j` in a full-dimensional support.
pub fn dual_vertex_position(v: &WeightFunction, support: &[usize]) -> Result<Vec<Rational>> {
    let pts = v.points();
    let j0 = *support.first().ok_or(Error::EmptyDomain)?;
    let rows: Vec<Vec<Rational>> =
        support[1..].iter().map(|&j| pts[j].sub(&pts[j0]).0.iter().map(|&x| rat(x)).collect()).collect();
    let rhs: Vec<Rational> = support[1..].iter().map(|&j| v.value(j) - v.value(j0)).collect();
    // keep a maximal independent subset of rows so the system is square
    let mut chosen_rows = Vec::new();
    let mut chosen_rhs = Vec::new();
    for (r, b) in rows.into_iter().zip(rhs) {
        let mut trial = chosen_rows.clone();
        trial.push(r.clone());
        if crate::linalg::rank(&trial) == trial.len() {
            chosen_rows.push(r);
            chosen_rhs.push(b);
        }
    }
    if chosen_rows.len() != v.ambient_dim() {
        return Err(Error::NotAVertex(v.ambient_dim() - chosen_rows.len()));
    }
    solve_unique(&chosen_rows, &chosen_rhs).ok_or(Error::NotAVertex(1))
}

/// Builds `Π_v` from the regular subdivision of `v`.
pub fn dual_complex(s: &RegularSubdivision, v: &WeightFunction) -> Result<DualComplex> {
    if s.polytope() != v.polytope() {
        return Err(Error::Mismatch("different polytopes".into()));
    }
    if regular_subdivision(v)?.cell_set() != s.cell_set() {
        return Err(Error::Mismatch("subdivision is not induced by the weights".into()));
    }
    let ambient = v.ambient_dim();
    let n = ambient - 1;
    let pts = v.points();

    let mut faces: Vec<_> = s.faces().iter().filter(|f| f.dim >= 1).collect();
    // dual dimension ascending, then support
    faces.sort_by(|a, b| b.dim.cmp(&a.dim).then_with(|| a.support.cmp(&b.support)));
    let cells: Vec<DualCell> = faces
        .iter()
        .map(|f| DualCell { support: f.support.clone(), dim: ambient - f.dim, bounded: !s.is_boundary_face(&f.support) })
        .collect();
    let index: HashMap<Vec<usize>, CellId> = cells.iter().enumerate().map(|(i, c)| (c.support.clone(), i)).collect();

    let mut boundary = vec![Vec::new(); cells.len()];
    let mut coboundary = vec![Vec::new(); cells.len()];
    for (gid, g) in cells.iter().enumerate() {
        // subdivision facets of the face g are one dual dimension up
        if g.dim == n {
            continue;
        }
        for f in config_facets(pts, &g.support) {
            if let Some(&fid) = index.get(&f) {
                boundary[fid].push(gid);
                coboundary[gid].push(fid);
            }
        }
    }
    for b in boundary.iter_mut().chain(coboundary.iter_mut()) {
        b.sort_unstable();
    }

    let mut covectors = BTreeMap::new();
    let mut edge_weights = BTreeMap::new();
    for (id, c) in cells.iter().enumerate().filter(|(_, c)| c.dim == n) {
        let (a, b) = (c.support[0], *c.support.last().expect("edge"));
        let diff = pts[b].sub(&pts[a]).0;
        let w = diff.iter().fold(0i64, |g, &x| g.gcd(&x)).unsigned_abs();
        covectors.insert(id, diff);
        edge_weights.insert(id, w);
    }

    Ok(DualComplex { n, weights: v.clone(), cells, index, boundary, coboundary, covectors, edge_weights })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalanceReport {
    pub checked: usize,
    /// Supports of the 2-faces around which balancing fails.
    pub failures: Vec<Vec<usize>>,
}

impl BalanceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Balancing at every `(n-1)`-cell: walking once around the dual polygon,
/// the co-oriented weighted covectors of the adjacent n-cells sum to zero,
/// and each `c_F / w(F)` is primitive.
pub fn check_balanced(pi: &DualComplex) -> BalanceReport {
    let mut failures = Vec::new();
    let mut checked = 0;
    if pi.n == 0 {
        return BalanceReport { checked, failures };
    }
    for g in pi.cells_of_dim(pi.n - 1) {
        checked += 1;
        let edges: Vec<CellId> = pi.coboundary(g).to_vec();
        let ok = polygon_sum(pi, &edges).is_some_and(|sum| sum.iter().all(|&x| x == 0))
            && edges.iter().all(|&e| {
                let (c, w) = (pi.covector(e).unwrap_or(&[]), pi.edge_weight(e).unwrap_or(0) as i64);
                w > 0
                    && c.iter().all(|x| x % w == 0)
                    && c.iter().fold(0i64, |acc, &x| acc.gcd(&(x / w))) == 1
            });
        if !ok {
            failures.push(pi.cell(g).support.clone());
        }
    }
    BalanceReport { checked, failures }
}

/// Sum of co-oriented covectors along the boundary cycle of a polygon whose
/// edges are the dual n-cells `edges`. `None` when they do not close up.
fn polygon_sum(pi: &DualComplex, edges: &[CellId]) -> Option<Vec<i64>> {
    let dim = pi.n + 1;
    let mut adjacency: BTreeMap<usize, Vec<(usize, CellId)>> = BTreeMap::new();
    for &e in edges {
        let (a, b) = pi.edge_endpoints(e);
        adjacency.entry(a).or_default().push((b, e));
        adjacency.entry(b).or_default().push((a, e));
    }
    if adjacency.values().any(|nb| nb.len() != 2) {
        return None;
    }
    let start = *adjacency.keys().next()?;
    let mut sum = vec![0i64; dim];
    let mut prev_edge = None;
    let mut cur = start;
    for _ in 0..edges.len() {
        let &(next, e) = adjacency[&cur].iter().find(|(_, e)| Some(*e) != prev_edge)?;
        let (a, _) = pi.edge_endpoints(e);
        let sign = if a == cur { 1 } else { -1 };
        let c = pi.covector(e)?;
        for (s, x) in sum.iter_mut().zip(c) {
            *s += sign * x;
        }
        prev_edge = Some(e);
        cur = next;
    }
    (cur == start).then_some(sum)
}

/// Number of primitive pieces (dual vertices) of a maximal complex; errors
/// unless every dual simplex is unimodular.
pub fn primitive_piece_count(pi: &DualComplex, s: &RegularSubdivision) -> Result<usize> {
    if !s.is_unimodular() {
        return Err(Error::NotMaximal);
    }
    let count = pi.vertices().len();
    if count != s.top_cells().len() {
        return Err(Error::Mismatch("dual vertices do not match top cells".into()));
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tropical::legendre;
    use num_traits::{Signed, Zero};

    fn build(v: &WeightFunction) -> (RegularSubdivision, DualComplex) {
        let s = regular_subdivision(v).unwrap();
        let pi = dual_complex(&s, v).unwrap();
        (s, pi)
    }

    #[test]
    fn primitive_complex_sigma_one() {
        let v = WeightFunction::zero(LatticePolytope::simplex(1, 1).unwrap());
        let (s, pi) = build(&v);
        assert_eq!(pi.vertices().len(), 1);
        assert_eq!(pi.top_cells().len(), 3);
        assert!(pi.top_cells().iter().all(|&c| !pi.cell(c).bounded));
        let mut dirs: Vec<Vec<Rational>> = pi
            .top_cells()
            .iter()
            .map(|&c| {
                let d = pi.ray_direction(c).unwrap();
                let scale = d.iter().map(|x| x.abs()).max().unwrap();
                d.into_iter().map(|x| x / &scale).collect()
            })
            .collect();
        dirs.sort();
        assert_eq!(dirs, vec![vec![rat(-1), rat(0)], vec![rat(0), rat(-1)], vec![rat(1), rat(1)]]);
        assert_eq!(pi.vertex_position(pi.vertices()[0]).unwrap(), vec![rat(0), rat(0)]);
        assert!(check_balanced(&pi).passed());
        assert_eq!(primitive_piece_count(&pi, &s).unwrap(), 1);
    }

    #[test]
    fn vertex_positions() {
        let p = LatticePolytope::simplex(1, 1).unwrap();
        let v = WeightFunction::canonical(p);
        assert_eq!(dual_vertex_position(&v, &[0, 1, 2]).unwrap(), vec![rat(2), rat(2)]);
        let (_, pi) = build(&WeightFunction::canonical(LatticePolytope::simplex(1, 3).unwrap()));
        assert_eq!(pi.vertices().len(), 9);
        for vid in pi.vertices() {
            let x = pi.vertex_position(vid).unwrap();
            let l = legendre(pi.weights(), &x).unwrap();
            assert!(l.defect.is_zero());
            assert_eq!(l.argmax, pi.cell(vid).support);
        }
        let edge = pi.top_cells()[0];
        assert!(matches!(pi.vertex_position(edge), Err(Error::NotAVertex(1))));
    }

    #[test]
    fn flipped_covector_breaks_balancing() {
        let v = WeightFunction::zero(LatticePolytope::simplex(1, 1).unwrap());
        let (_, mut pi) = build(&v);
        let e = pi.top_cells()[0];
        let flipped: Vec<i64> = pi.covector(e).unwrap().iter().map(|x| -x).collect();
        pi.set_covector(e, flipped);
        assert!(!check_balanced(&pi).passed());
    }

    #[test]
    fn mismatched_weights_rejected() {
        let p = LatticePolytope::simplex(1, 2).unwrap();
        let s = regular_subdivision(&WeightFunction::canonical(p)).unwrap();
        assert!(matches!(dual_complex(&s, &WeightFunction::zero(p)), Err(Error::Mismatch(_))));
    }

    #[test]
    fn non_maximal_has_no_piece_count() {
        let v = WeightFunction::zero(LatticePolytope::simplex(1, 2).unwrap());
        let (s, pi) = build(&v);
        assert!(matches!(primitive_piece_count(&pi, &s), Err(Error::NotMaximal)));
        // balancing still holds with lattice-length weights
        assert!(check_balanced(&pi).passed());
        assert!(pi.top_cells().iter().all(|&c| pi.edge_weight(c) == Some(2)));
    }
}
