//! Exact affine geometry on lattice point configurations: affine forms,
//! facets of point sets, face enumeration and lattice volumes.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::lattice::{normalized_volume, LatticePoint};
use crate::linalg::{affine_dim, rat, solve_any, Rational};

/// `x -> <a, x> + b` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineForm {
    pub linear: Vec<Rational>,
    pub constant: Rational,
}

impl AffineForm {
    pub fn constant(dim: usize, c: Rational) -> Self {
        Self { linear: vec![Rational::zero(); dim], constant: c }
    }

    pub fn eval(&self, p: &[i64]) -> Rational {
        let mut acc = self.constant.clone();
        for (a, &x) in self.linear.iter().zip(p) {
            if x != 0 && !a.is_zero() {
                acc += a * BigInt::from(x);
            }
        }
        acc
    }

    /// `self + t * other`.
    pub fn add_scaled(&self, t: &Rational, other: &AffineForm) -> AffineForm {
        AffineForm {
            linear: self.linear.iter().zip(&other.linear).map(|(a, b)| a + t * b).collect(),
            constant: &self.constant + t * &other.constant,
        }
    }

    pub fn neg(&self) -> AffineForm {
        AffineForm { linear: self.linear.iter().map(|a| -a).collect(), constant: -&self.constant }
    }
}

/// An affine form vanishing on every point of `on` and equal to 1 at `off`.
/// `off` must lie outside the affine hull of `on`.
pub fn form_vanishing_on(on: &[&[i64]], off: &[i64]) -> Option<AffineForm> {
    let dim = off.len();
    let base = on.first().copied().unwrap_or(off);
    let mut rows: Vec<Vec<Rational>> = on
        .iter()
        .skip(1)
        .map(|p| p.iter().zip(base).map(|(a, b)| rat(a - b)).collect())
        .collect();
    let mut rhs = vec![Rational::zero(); rows.len()];
    if on.is_empty() {
        // constant 1
        return Some(AffineForm::constant(dim, rat(1)));
    }
    rows.push(off.iter().zip(base).map(|(a, b)| rat(a - b)).collect());
    rhs.push(rat(1));
    let a = solve_any(&rows, &rhs)?;
    let constant = -a.iter().zip(base).map(|(c, &x)| c * BigInt::from(x)).sum::<Rational>();
    Some(AffineForm { linear: a, constant })
}

/// Affine dimension of the configuration `support` (indices into `points`).
pub fn support_dim(points: &[LatticePoint], support: &[usize]) -> usize {
    let pts: Vec<&[i64]> = support.iter().map(|&k| points[k].coords()).collect();
    affine_dim(&pts).unwrap_or(0)
}

/// Facets of the point configuration `support` inside its own affine hull,
/// each returned as the sorted list of configuration points lying on it.
pub fn config_facets(points: &[LatticePoint], support: &[usize]) -> Vec<Vec<usize>> {
    let k = support_dim(points, support);
    if k == 0 {
        return Vec::new();
    }
    if support.len() == k + 1 {
        return support
            .iter()
            .combinations(k)
            .map(|c| c.into_iter().copied().collect())
            .collect();
    }
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    for subset in support.iter().copied().combinations(k) {
        if found.iter().any(|f| subset.iter().all(|s| f.binary_search(s).is_ok())) {
            continue;
        }
        let on: Vec<&[i64]> = subset.iter().map(|&s| points[s].coords()).collect();
        if affine_dim(&on) != Some(k - 1) {
            continue;
        }
        // any configuration point off the flat fixes the orientation
        let Some(form) = support
            .iter()
            .filter(|q| !subset.contains(q))
            .find_map(|&q| {
                let mut ext = on.clone();
                ext.push(points[q].coords());
                (affine_dim(&ext) == Some(k)).then(|| form_vanishing_on(&on, points[q].coords()))?
            })
        else {
            continue;
        };
        let vals: Vec<Rational> = support.iter().map(|&s| form.eval(points[s].coords())).collect();
        let pos = vals.iter().any(|x| x.is_positive());
        let neg = vals.iter().any(|x| x.is_negative());
        if pos && neg {
            continue;
        }
        let facet: Vec<usize> = support.iter().zip(&vals).filter(|(_, x)| x.is_zero()).map(|(&s, _)| s).collect();
        found.insert(facet);
    }
    found.into_iter().collect()
}

/// All faces (including the configuration itself) of `support`, keyed by
/// sorted support, with their dimensions.
pub fn all_faces(points: &[LatticePoint], support: &[usize], memo: &mut HashMap<Vec<usize>, usize>) {
    if memo.contains_key(support) {
        return;
    }
    let dim = support_dim(points, support);
    memo.insert(support.to_vec(), dim);
    if dim == 0 {
        return;
    }
    for f in config_facets(points, support) {
        all_faces(points, &f, memo);
    }
}

/// Normalized lattice volume (`dim! · vol`) of a full-dimensional
/// configuration, via a pulling triangulation from its lexicographically
/// smallest point.
pub fn config_volume(points: &[LatticePoint], support: &[usize]) -> BigInt {
    let dim = points[support[0]].dim();
    if support_dim(points, support) != dim {
        return BigInt::zero();
    }
    pulling_simplices(points, support)
        .iter()
        .map(|s| {
            let vs: Vec<LatticePoint> = s.iter().map(|&k| points[k].clone()).collect();
            normalized_volume(&vs).expect("simplex cardinality")
        })
        .sum()
}

/// Pulling triangulation of a configuration (any dimension); each simplex has
/// `dim + 1` affinely independent points.
pub fn pulling_simplices(points: &[LatticePoint], support: &[usize]) -> Vec<Vec<usize>> {
    let dim = support_dim(points, support);
    let apex = *support.iter().min_by(|a, b| points[**a].cmp(&points[**b])).expect("nonempty");
    if dim == 0 {
        return vec![vec![apex]];
    }
    if support.len() == dim + 1 {
        return vec![support.to_vec()];
    }
    let mut out = Vec::new();
    for facet in config_facets(points, support) {
        if facet.contains(&apex) {
            continue;
        }
        for mut s in pulling_simplices(points, &facet) {
            s.push(apex);
            s.sort_unstable();
            out.push(s);
        }
    }
    out
}
