//! Regular lattice subdivisions induced by a weight function, structural
//! checks on them, and the inverse problem of realizing a target
//! triangulation by weights.
//!
//! A cell is stored by its *support*: the indices (into the canonical point
//! list) of all lattice points on the corresponding lower face of the lifted
//! configuration `{(j, v(j))}`. Non-simplicial cells are allowed.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{all_faces, config_facets, config_volume, form_vanishing_on, support_dim, AffineForm};
use crate::lattice::{LatticePoint, LatticePolytope};
use crate::linalg::{affine_dim, det_sign, rat, solve_unique, Rational};
use crate::lp::{self, LpOutcome};
use crate::tropical::WeightFunction;

/// Brute-force enumeration refuses domains with more points than this.
pub const BRUTE_FORCE_LIMIT: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubdivisionCell {
    pub support: Vec<usize>,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularSubdivision {
    polytope: LatticePolytope,
    points: Vec<LatticePoint>,
    top_cells: Vec<SubdivisionCell>,
    faces: Vec<SubdivisionCell>,
}

impl RegularSubdivision {
    /// Assembles a subdivision from top-cell supports and derives its face
    /// lattice. The cells are assumed to come from a lower hull or a
    /// validated target.
    pub fn from_top_cells(polytope: LatticePolytope, cells: Vec<Vec<usize>>) -> Self {
        let points = polytope.enumerate_points();
        let dim = polytope.ambient_dim();
        let mut top: Vec<SubdivisionCell> = cells
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                SubdivisionCell { support: s, dim }
            })
            .collect();
        top.sort();
        top.dedup();
        let mut memo = HashMap::new();
        for c in &top {
            all_faces(&points, &c.support, &mut memo);
        }
        let mut faces: Vec<SubdivisionCell> =
            memo.into_iter().map(|(support, dim)| SubdivisionCell { support, dim }).collect();
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.support.cmp(&b.support)));
        Self { polytope, points, top_cells: top, faces }
    }

    pub fn polytope(&self) -> &LatticePolytope {
        &self.polytope
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn top_cells(&self) -> &[SubdivisionCell] {
        &self.top_cells
    }

    /// Every face of every top cell, sorted by dimension then support.
    pub fn faces(&self) -> &[SubdivisionCell] {
        &self.faces
    }

    pub fn faces_of_dim(&self, dim: usize) -> impl Iterator<Item = &SubdivisionCell> {
        self.faces.iter().filter(move |f| f.dim == dim)
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    pub fn cell_volume(&self, cell: &SubdivisionCell) -> BigInt {
        config_volume(&self.points, &cell.support)
    }

    /// Σ normalized volumes of the top cells.
    pub fn total_volume(&self) -> BigInt {
        self.top_cells.iter().map(|c| self.cell_volume(c)).sum()
    }

    /// Every top cell is a lattice simplex of normalized volume 1.
    pub fn is_unimodular(&self) -> bool {
        let n2 = self.polytope.ambient_dim() + 1;
        self.top_cells.iter().all(|c| c.support.len() == n2 && self.cell_volume(c).is_one())
    }

    /// Edge report: every 1-face must have difference in
    /// `{±e_α} ∪ {±(e_α - e_β)}`.
    pub fn check_edge_directions(&self) -> EdgeReport {
        let edges: Vec<(usize, usize)> = self
            .faces_of_dim(1)
            .map(|f| (f.support[0], *f.support.last().expect("edge has two ends")))
            .collect();
        let violations = edges
            .iter()
            .filter(|(a, b)| !is_allowed_direction(&self.points[*b].sub(&self.points[*a])))
            .map(|&(a, b)| (self.points[a].clone(), self.points[b].clone()))
            .collect();
        EdgeReport { edges: edges.len(), violations }
    }

    /// Whether the top cells inside `i - 1 + Δ_{n+2}` (or the 2x2 box for
    /// rectangles) tile that window exactly.
    pub fn check_translate_restriction(&self, i: &LatticePoint) -> Result<bool> {
        let window = self.polytope.local_window(i)?;
        let inside: BigInt = self
            .top_cells
            .iter()
            .filter(|c| c.support.iter().all(|&k| window.contains(self.points[k].coords())))
            .map(|c| self.cell_volume(c))
            .sum();
        Ok(inside == window.normalized_volume())
    }

    /// Top cells lying in the local window of `i`.
    pub fn cells_in_window(&self, i: &LatticePoint) -> Result<Vec<usize>> {
        let window = self.polytope.local_window(i)?;
        Ok(self
            .top_cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.support.iter().all(|&k| window.contains(self.points[k].coords())))
            .map(|(idx, _)| idx)
            .collect())
    }

    /// For every pair of top cells, the common support must be a face of
    /// both (or empty).
    pub fn is_face_to_face(&self) -> bool {
        let faces: HashSet<&[usize]> = self.faces.iter().map(|f| f.support.as_slice()).collect();
        let per_cell: Vec<HashSet<Vec<usize>>> = self
            .top_cells
            .iter()
            .map(|c| {
                let mut memo = HashMap::new();
                all_faces(&self.points, &c.support, &mut memo);
                memo.into_keys().collect()
            })
            .collect();
        for (a, b) in (0..self.top_cells.len()).tuple_combinations() {
            let common: Vec<usize> = self.top_cells[a]
                .support
                .iter()
                .copied()
                .filter(|k| self.top_cells[b].support.binary_search(k).is_ok())
                .collect();
            if common.is_empty() {
                continue;
            }
            if !faces.contains(common.as_slice()) || !per_cell[a].contains(&common) || !per_cell[b].contains(&common)
            {
                return false;
            }
        }
        true
    }

    /// Whether a face lies in the boundary of the polytope.
    pub fn is_boundary_face(&self, support: &[usize]) -> bool {
        let pts: Vec<&[i64]> = support.iter().map(|&k| self.points[k].coords()).collect();
        self.polytope.on_common_facet(&pts)
    }

    pub fn to_file(&self) -> SubdivisionFile {
        SubdivisionFile { polytope: self.polytope, cells: self.top_cells.iter().map(|c| c.support.clone()).collect() }
    }

    pub fn from_file(file: &SubdivisionFile) -> Result<Self> {
        file.polytope.validate()?;
        let npts = file.polytope.enumerate_points().len();
        if let Some(bad) = file.cells.iter().flatten().find(|&&k| k >= npts) {
            return Err(Error::MalformedTarget(format!("point index {bad} out of range")));
        }
        Ok(Self::from_top_cells(file.polytope, file.cells.clone()))
    }

    /// The set of top-cell supports, for equality comparisons.
    pub fn cell_set(&self) -> BTreeSet<Vec<usize>> {
        self.top_cells.iter().map(|c| c.support.clone()).collect()
    }
}

/// Subdivision file: cells as sorted point-index lists, cells sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionFile {
    pub polytope: LatticePolytope,
    pub cells: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeReport {
    pub edges: usize,
    pub violations: Vec<(LatticePoint, LatticePoint)>,
}

impl EdgeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `±e_α` or `±(e_α - e_β)`.
pub fn is_allowed_direction(diff: &LatticePoint) -> bool {
    let nz: Vec<i64> = diff.0.iter().copied().filter(|&c| c != 0).collect();
    match nz.as_slice() {
        [a] => a.abs() == 1,
        [a, b] => a.abs() == 1 && *b == -a,
        _ => false,
    }
}

fn lifted_support(v: &WeightFunction, psi: &AffineForm) -> Vec<usize> {
    (0..v.len()).filter(|&k| psi.eval(v.points()[k].coords()) == *v.value(k)).collect()
}

/// Moves a supporting affine function `psi <= v` by `psi + λ g` with the
/// largest λ keeping it below `v`; `None` if no point has `g > 0`.
fn pivot(v: &WeightFunction, psi: &AffineForm, g: &AffineForm) -> Option<AffineForm> {
    let mut best: Option<Rational> = None;
    for k in 0..v.len() {
        let gk = g.eval(v.points()[k].coords());
        if gk.is_positive() {
            let lam = (v.value(k) - psi.eval(v.points()[k].coords())) / gk;
            if best.as_ref().is_none_or(|b| lam < *b) {
                best = Some(lam);
            }
        }
    }
    best.map(|lam| psi.add_scaled(&lam, g))
}

/// Regular subdivision via the lower hull of the lifted points, computed by
/// exact facet pivoting.
pub fn regular_subdivision(v: &WeightFunction) -> Result<RegularSubdivision> {
    let dim = v.ambient_dim();
    if v.len() < dim + 1 {
        return Err(Error::TooFewPoints { got: v.len(), need: dim + 1 });
    }
    let pts = v.points();

    // Initial facet: start from the constant min v and tilt until full.
    let min = v.values().iter().min().expect("nonempty").clone();
    let mut psi = AffineForm::constant(dim, min);
    let mut support = lifted_support(v, &psi);
    while support_dim(pts, &support) < dim {
        let on: Vec<&[i64]> = support.iter().map(|&k| pts[k].coords()).collect();
        let off = (0..pts.len())
            .find(|&k| {
                let mut ext = on.clone();
                ext.push(pts[k].coords());
                affine_dim(&ext) > affine_dim(&on)
            })
            .expect("polytope is full dimensional");
        let g = form_vanishing_on(&on, pts[off].coords()).expect("off point is outside the hull");
        psi = pivot(v, &psi, &g).expect("g is positive at the off point");
        support = lifted_support(v, &psi);
    }

    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(support.clone());
    queue.push_back((support, psi));
    while let Some((support, psi)) = queue.pop_front() {
        for ridge in config_facets(pts, &support) {
            let on: Vec<&[i64]> = ridge.iter().map(|&k| pts[k].coords()).collect();
            let q = *support.iter().find(|k| ridge.binary_search(k).is_err()).expect("ridge is proper");
            let g = form_vanishing_on(&on, pts[q].coords()).expect("q off the ridge").neg();
            let Some(next) = pivot(v, &psi, &g) else {
                continue;
            };
            let s = lifted_support(v, &next);
            if seen.insert(s.clone()) {
                queue.push_back((s, next));
            }
        }
    }
    Ok(RegularSubdivision::from_top_cells(*v.polytope(), seen.into_iter().collect()))
}

/// Independent oracle: try every `(n+2)`-subset as a candidate lower facet.
pub fn brute_force_subdivision(v: &WeightFunction) -> Result<RegularSubdivision> {
    let dim = v.ambient_dim();
    if v.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::SizeGuard { got: v.len(), limit: BRUTE_FORCE_LIMIT });
    }
    if v.len() < dim + 1 {
        return Err(Error::TooFewPoints { got: v.len(), need: dim + 1 });
    }
    // Scale to integer heights; regularity is invariant under positive scaling.
    let denom = v.values().iter().fold(BigInt::one(), |acc, w| num_integer::lcm(acc, w.denom().clone()));
    let heights: Vec<BigInt> = v.values().iter().map(|w| (w * &denom).to_integer()).collect();
    let pts = v.points();
    let lifted_row = |k: usize| -> Vec<BigInt> {
        let mut row: Vec<BigInt> = pts[k].coords().iter().map(|&c| BigInt::from(c)).collect();
        row.push(heights[k].clone());
        row.push(BigInt::one());
        row
    };
    let base_row = |k: usize| -> Vec<BigInt> {
        let mut row: Vec<BigInt> = pts[k].coords().iter().map(|&c| BigInt::from(c)).collect();
        row.push(BigInt::one());
        row
    };
    let mut cells: BTreeSet<Vec<usize>> = BTreeSet::new();
    for subset in (0..v.len()).combinations(dim + 1) {
        let orient = det_sign(&subset.iter().map(|&k| base_row(k)).collect::<Vec<_>>());
        if orient == 0 {
            continue;
        }
        let rows: Vec<Vec<BigInt>> = subset.iter().map(|&k| lifted_row(k)).collect();
        let mut cell = Vec::new();
        let mut ok = true;
        for k in 0..v.len() {
            let mut m = rows.clone();
            m.push(lifted_row(k));
            // expanding along the height column: det = -orient · (h_k - ψ(k)) · c, c > 0
            let s = -det_sign(&m) * orient;
            if s < 0 {
                ok = false;
                break;
            }
            if s == 0 {
                cell.push(k);
            }
        }
        if ok {
            cells.insert(cell);
        }
    }
    Ok(RegularSubdivision::from_top_cells(*v.polytope(), cells.into_iter().collect()))
}

/// A strict linear inequality `Σ coeffs_k v(k) >= margin` on the weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldingConstraint {
    /// Sparse coefficients `(point index, coefficient)`; they sum to zero.
    pub coeffs: Vec<(usize, Rational)>,
    pub description: String,
}

/// Farkas certificate of non-regularity: nonnegative multipliers whose
/// combination of the folding constraints is identically zero while their
/// margins sum to a positive number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfeasibilityCertificate {
    pub constraints: Vec<FoldingConstraint>,
    pub multipliers: Vec<Rational>,
}

impl InfeasibilityCertificate {
    pub fn verify(&self, npoints: usize) -> bool {
        if self.multipliers.iter().any(|y| y.is_negative()) {
            return false;
        }
        let mut combo = vec![Rational::zero(); npoints];
        for (c, y) in self.constraints.iter().zip(&self.multipliers) {
            for (k, a) in &c.coeffs {
                combo[*k] += y * a;
            }
        }
        combo.iter().all(Zero::is_zero) && self.multipliers.iter().sum::<Rational>().is_positive()
    }
}

#[derive(Clone, Debug)]
pub enum WeightSearch {
    Feasible(WeightFunction),
    Infeasible(InfeasibilityCertificate),
}

/// Validates that `cells` are full-dimensional lattice simplices forming a
/// triangulation of `polytope`.
pub fn validate_triangulation(polytope: &LatticePolytope, cells: &[Vec<usize>]) -> Result<()> {
    let pts = polytope.enumerate_points();
    let dim = polytope.ambient_dim();
    let mut total = BigInt::zero();
    for c in cells {
        if c.len() != dim + 1 || c.iter().any(|&k| k >= pts.len()) {
            return Err(Error::MalformedTarget(format!("cell {c:?} is not a {dim}-simplex of the domain")));
        }
        let vol = config_volume(&pts, c);
        if vol.is_zero() {
            return Err(Error::MalformedTarget(format!("cell {c:?} is degenerate")));
        }
        total += vol;
    }
    let mut ridges: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (ci, c) in cells.iter().enumerate() {
        let mut s = c.clone();
        s.sort_unstable();
        for r in s.iter().copied().combinations(dim) {
            ridges.entry(r).or_default().push(ci);
        }
    }
    for (r, owners) in &ridges {
        let rp: Vec<&[i64]> = r.iter().map(|&k| pts[k].coords()).collect();
        match owners.as_slice() {
            [_] if polytope.on_common_facet(&rp) => {}
            [_] => return Err(Error::MalformedTarget(format!("gap across ridge {r:?}"))),
            [a, b] => {
                let opp = |ci: usize| *cells[ci].iter().find(|k| !r.contains(k)).expect("opposite vertex");
                let (pa, pb) = (opp(*a), opp(*b));
                let g = form_vanishing_on(&rp, pts[pa].coords()).expect("nondegenerate ridge");
                if !g.eval(pts[pb].coords()).is_negative() {
                    return Err(Error::MalformedTarget(format!("overlap across ridge {r:?}")));
                }
            }
            _ => return Err(Error::MalformedTarget(format!("ridge {r:?} shared by {} cells", owners.len()))),
        }
    }
    if total != polytope.normalized_volume() {
        return Err(Error::MalformedTarget(format!(
            "cell volumes sum to {total}, polytope has {}",
            polytope.normalized_volume()
        )));
    }
    Ok(())
}

/// Barycentric coordinates of `p` with respect to the simplex `cell`.
fn barycentric(pts: &[LatticePoint], cell: &[usize], p: &LatticePoint) -> Vec<Rational> {
    let dim = p.dim();
    // unknowns λ_r, rows: coordinates and the affine row Σλ = 1
    let mut rows: Vec<Vec<Rational>> = (0..dim)
        .map(|a| cell.iter().map(|&k| rat(pts[k].coords()[a])).collect())
        .collect();
    rows.push(vec![rat(1); cell.len()]);
    let mut rhs: Vec<Rational> = p.coords().iter().map(|&c| rat(c)).collect();
    rhs.push(rat(1));
    solve_unique(&rows, &rhs).expect("simplex is nondegenerate")
}

fn interpolation_constraint(pts: &[LatticePoint], cell: &[usize], k: usize, description: String) -> FoldingConstraint {
    let lam = barycentric(pts, cell, &pts[k]);
    let mut coeffs = vec![(k, rat(1))];
    coeffs.extend(cell.iter().zip(lam).filter(|(_, l)| !l.is_zero()).map(|(&c, l)| (c, -l)));
    FoldingConstraint { coeffs, description }
}

/// Folding inequalities whose strict feasibility is equivalent to the target
/// triangulation being the regular subdivision of the weights: one per
/// interior ridge, plus one per lattice point unused by the triangulation.
pub fn folding_constraints(polytope: &LatticePolytope, cells: &[Vec<usize>]) -> Vec<FoldingConstraint> {
    let pts = polytope.enumerate_points();
    let dim = polytope.ambient_dim();
    let mut ridges: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (ci, c) in cells.iter().enumerate() {
        let mut s = c.clone();
        s.sort_unstable();
        for r in s.iter().copied().combinations(dim) {
            ridges.entry(r).or_default().push(ci);
        }
    }
    let mut keys: Vec<&Vec<usize>> = ridges.keys().collect();
    keys.sort();
    let mut out = Vec::new();
    for r in keys {
        if let [a, b] = ridges[r].as_slice() {
            let opp = *cells[*b].iter().find(|k| !r.contains(k)).expect("opposite vertex");
            out.push(interpolation_constraint(&pts, &cells[*a], opp, format!("fold across {r:?}")));
        }
    }
    let used: BTreeSet<usize> = cells.iter().flatten().copied().collect();
    for k in (0..pts.len()).filter(|k| !used.contains(k)) {
        let host = cells
            .iter()
            .find(|c| barycentric(&pts, c, &pts[k]).iter().all(|l| !l.is_negative()))
            .expect("triangulation covers the polytope");
        out.push(interpolation_constraint(&pts, host, k, format!("lift unused point {}", pts[k])));
    }
    out
}

/// Finds rational weights whose regular subdivision is `target` (a
/// triangulation), or a Farkas certificate that none exist.
pub fn find_weights(polytope: &LatticePolytope, target: &[Vec<usize>]) -> Result<WeightSearch> {
    validate_triangulation(polytope, target)?;
    let npts = polytope.enumerate_points().len();
    let constraints = folding_constraints(polytope, target);
    let rows: Vec<Vec<Rational>> = constraints
        .iter()
        .map(|c| {
            let mut row = vec![Rational::zero(); npts];
            for (k, a) in &c.coeffs {
                row[*k] += a;
            }
            row
        })
        .collect();
    let rhs = vec![rat(1); rows.len()];
    match lp::feasible_nonneg(&rows, &rhs) {
        LpOutcome::Feasible(x) => {
            let v = WeightFunction::from_values(*polytope, x)?;
            let got = regular_subdivision(&v)?;
            let want: BTreeSet<Vec<usize>> = target
                .iter()
                .map(|c| {
                    let mut s = c.clone();
                    s.sort_unstable();
                    s
                })
                .collect();
            if got.cell_set() != want {
                return Err(Error::Mismatch("LP solution does not reproduce the target".into()));
            }
            Ok(WeightSearch::Feasible(v))
        }
        LpOutcome::Infeasible(y) => Ok(WeightSearch::Infeasible(InfeasibilityCertificate { constraints, multipliers: y })),
    }
}

/// A unimodular triangulation of `[0, g+1] x [0, 2]` in which every triangle
/// has at most one interior lattice point as a vertex: every unit strip
/// `[x, x+1] x [0, 2]` is cut by the diagonal from `(x, 0)` to `(x+1, 2)`.
pub fn genus_target(g: u32) -> Result<(LatticePolytope, Vec<Vec<usize>>)> {
    if g == 0 {
        return Err(Error::Precondition("genus must be >= 1".into()));
    }
    let polytope = LatticePolytope::rect(g + 1, 2)?;
    let pts = polytope.enumerate_points();
    let idx = |x: i64, y: i64| pts.binary_search(&LatticePoint(vec![x, y])).expect("grid point");
    let mut cells = Vec::new();
    for x in 0..=g as i64 {
        cells.push(vec![idx(x, 0), idx(x + 1, 0), idx(x + 1, 1)]);
        cells.push(vec![idx(x, 0), idx(x + 1, 1), idx(x + 1, 2)]);
        cells.push(vec![idx(x, 0), idx(x, 1), idx(x + 1, 2)]);
        cells.push(vec![idx(x, 1), idx(x, 2), idx(x + 1, 2)]);
    }
    for c in &mut cells {
        c.sort_unstable();
    }
    cells.sort();
    Ok((polytope, cells))
}

/// The pinwheel triangulation of `[0,3]^2`: the ring between the outer square
/// and the central unit square is cut into four quadrilaterals, each split
/// by the diagonal turning the same way. Its folding constraints are
/// cyclically contradictory, so it is not regular.
pub fn spiral_target() -> (LatticePolytope, Vec<Vec<usize>>) {
    let polytope = LatticePolytope::Box { a: 3, b: 3 };
    let pts = polytope.enumerate_points();
    let idx = |x: i64, y: i64| pts.binary_search(&LatticePoint(vec![x, y])).expect("grid point");
    let outer = [idx(0, 0), idx(3, 0), idx(3, 3), idx(0, 3)];
    let inner = [idx(1, 1), idx(2, 1), idx(2, 2), idx(1, 2)];
    let mut cells = vec![vec![inner[0], inner[1], inner[2]], vec![inner[0], inner[2], inner[3]]];
    for k in 0..4 {
        let k1 = (k + 1) % 4;
        cells.push(vec![outer[k], outer[k1], inner[k1]]);
        cells.push(vec![outer[k], inner[k1], inner[k]]);
    }
    for c in &mut cells {
        c.sort_unstable();
    }
    cells.sort();
    (polytope, cells)
}

/// Dimension of the affine hull of a support (re-exported helper).
pub fn cell_dim(points: &[LatticePoint], support: &[usize]) -> usize {
    support_dim(points, support)
}
