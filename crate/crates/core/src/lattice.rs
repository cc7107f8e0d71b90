//! Lattice polytopes: dilated simplices and rectangles, their lattice points,
//! interior points and normalized volumes.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::det_bigint;

/// An integer point `j = (j_1, ..., j_{n+1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "lattice point needs at least one coordinate");
        Self(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn unit(dim: usize, alpha: usize) -> Self {
        let mut c = vec![0; dim];
        c[alpha] = 1;
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        Self::new(v)
    }
}

/// Half-space `normal · x <= offset` bounding a polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl Facet {
    pub fn slack(&self, p: &[i64]) -> i64 {
        self.offset - self.normal.iter().zip(p).map(|(a, b)| a * b).sum::<i64>()
    }
}

/// The two polytope families that host Newton polytopes here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LatticePolytope {
    /// `d·Δ` in `R^{n+1}`: vertices `0, d e_1, ..., d e_{n+1}`.
    Simplex { n: usize, d: u32 },
    /// The rectangle `[0,a] x [0,b]`.
    Box { a: u32, b: u32 },
}

impl LatticePolytope {
    pub fn simplex(n: usize, d: u32) -> Result<Self> {
        let p = Self::Simplex { n, d };
        p.validate()?;
        Ok(p)
    }

    pub fn rect(a: u32, b: u32) -> Result<Self> {
        let p = Self::Box { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Simplex { d: 0, .. } => Err(Error::InvalidPolytope("dilation d must be >= 1".into())),
            Self::Box { a, b } if a == 0 || b == 0 => Err(Error::InvalidPolytope("box sides must be >= 1".into())),
            _ => Ok(()),
        }
    }

    /// Ambient dimension `n+1` (2 for rectangles).
    pub fn ambient_dim(&self) -> usize {
        match *self {
            Self::Simplex { n, .. } => n + 1,
            Self::Box { .. } => 2,
        }
    }

    /// The hypersurface dimension `n`.
    pub fn n(&self) -> usize {
        self.ambient_dim() - 1
    }

    pub fn vertices(&self) -> Vec<LatticePoint> {
        match *self {
            Self::Simplex { n, d } => {
                let dim = n + 1;
                let mut vs = vec![LatticePoint::origin(dim)];
                for alpha in 0..dim {
                    let mut c = vec![0; dim];
                    c[alpha] = d as i64;
                    vs.push(LatticePoint(c));
                }
                vs
            }
            Self::Box { a, b } => {
                let (a, b) = (a as i64, b as i64);
                vec![
                    LatticePoint(vec![0, 0]),
                    LatticePoint(vec![a, 0]),
                    LatticePoint(vec![a, b]),
                    LatticePoint(vec![0, b]),
                ]
            }
        }
    }

    pub fn facets(&self) -> Vec<Facet> {
        match *self {
            Self::Simplex { n, d } => {
                let dim = n + 1;
                let mut fs: Vec<Facet> = (0..dim)
                    .map(|alpha| {
                        let mut normal = vec![0; dim];
                        normal[alpha] = -1;
                        Facet { normal, offset: 0 }
                    })
                    .collect();
                fs.push(Facet { normal: vec![1; dim], offset: d as i64 });
                fs
            }
            Self::Box { a, b } => vec![
                Facet { normal: vec![-1, 0], offset: 0 },
                Facet { normal: vec![1, 0], offset: a as i64 },
                Facet { normal: vec![0, -1], offset: 0 },
                Facet { normal: vec![0, 1], offset: b as i64 },
            ],
        }
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.ambient_dim() && self.facets().iter().all(|f| f.slack(p) >= 0)
    }

    pub fn is_interior(&self, p: &[i64]) -> bool {
        p.len() == self.ambient_dim() && self.facets().iter().all(|f| f.slack(p) > 0)
    }

    /// True when every point lies on one common facet of the polytope.
    pub fn on_common_facet(&self, pts: &[&[i64]]) -> bool {
        self.facets().iter().any(|f| pts.iter().all(|p| f.slack(p) == 0))
    }

    /// All lattice points, sorted lexicographically. This ordering is the
    /// canonical point indexing used throughout the crate.
    pub fn enumerate_points(&self) -> Vec<LatticePoint> {
        let mut out = Vec::new();
        match *self {
            Self::Simplex { n, d } => {
                let mut cur = vec![0i64; n + 1];
                fill_simplex(&mut cur, 0, d as i64, &mut out);
            }
            Self::Box { a, b } => {
                for x in 0..=a as i64 {
                    for y in 0..=b as i64 {
                        out.push(LatticePoint(vec![x, y]));
                    }
                }
            }
        }
        out
    }

    pub fn interior_points(&self) -> Vec<LatticePoint> {
        self.enumerate_points().into_iter().filter(|p| self.is_interior(&p.0)).collect()
    }

    /// `(n+1)! · vol(P)`, the number of unimodular simplices in any
    /// unimodular triangulation.
    pub fn normalized_volume(&self) -> BigInt {
        match *self {
            Self::Simplex { n, d } => BigInt::from(d).pow(n as u32 + 1),
            Self::Box { a, b } => BigInt::from(2u32) * a * b,
        }
    }

    /// The local Calabi-Yau window attached to an interior point `i`:
    /// `i - 1 + Δ_{n+2}` for simplices, `i - 1 + [0,2]^2` for rectangles.
    pub fn local_window(&self, i: &LatticePoint) -> Result<LocalWindow> {
        if !self.is_interior(&i.0) {
            return Err(Error::NotInterior(i.to_string()));
        }
        let dim = self.ambient_dim();
        let origin = LatticePoint(i.0.iter().map(|c| c - 1).collect());
        let shape = match *self {
            Self::Simplex { n, .. } => Self::Simplex { n, d: n as u32 + 2 },
            Self::Box { .. } => Self::Box { a: 2, b: 2 },
        };
        debug_assert_eq!(shape.ambient_dim(), dim);
        Ok(LocalWindow { origin, shape })
    }

    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

fn fill_simplex(cur: &mut Vec<i64>, pos: usize, remaining: i64, out: &mut Vec<LatticePoint>) {
    if pos == cur.len() {
        out.push(LatticePoint(cur.clone()));
        return;
    }
    for c in 0..=remaining {
        cur[pos] = c;
        fill_simplex(cur, pos + 1, remaining - c, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for LatticePolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Simplex { n, d } => write!(f, "simplex:n={n},d={d}"),
            Self::Box { a, b } => write!(f, "box:{a}x{b}"),
        }
    }
}

impl FromStr for LatticePolytope {
    type Err = Error;

    /// Parses `simplex:n=2,d=5` or `box:3x2`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDescriptor(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "simplex" => {
                let (mut n, mut d) = (None, None);
                for part in rest.split(',') {
                    let (k, v) = part.split_once('=').ok_or_else(bad)?;
                    match k.trim() {
                        "n" => n = Some(v.trim().parse::<usize>().map_err(|_| bad())?),
                        "d" => d = Some(v.trim().parse::<u32>().map_err(|_| bad())?),
                        _ => return Err(bad()),
                    }
                }
                Self::simplex(n.ok_or_else(bad)?, d.ok_or_else(bad)?)
            }
            "box" => {
                let (a, b) = rest.split_once('x').ok_or_else(bad)?;
                let a = a.trim().parse().map_err(|_| bad())?;
                let b = b.trim().parse().map_err(|_| bad())?;
                Self::rect(a, b)
            }
            _ => Err(bad()),
        }
    }
}

/// A translated copy of a small polytope, used for the translate restriction
/// check and the enlarged cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalWindow {
    pub origin: LatticePoint,
    pub shape: LatticePolytope,
}

impl LocalWindow {
    pub fn contains(&self, p: &[i64]) -> bool {
        let shifted: Vec<i64> = p.iter().zip(&self.origin.0).map(|(a, o)| a - o).collect();
        self.shape.contains(&shifted)
    }

    pub fn normalized_volume(&self) -> BigInt {
        self.shape.normalized_volume()
    }
}

/// `p_g = C(d-1, n+1)`, the number of interior lattice points of `Δ_d`.
pub fn geometric_genus(n: usize, d: u32) -> BigInt {
    binomial(d as i64 - 1, n as i64 + 1)
}

pub fn binomial(top: i64, k: i64) -> BigInt {
    if k < 0 || top < k || top < 0 {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (top - i) / (i + 1);
    }
    acc
}

/// `|det(v_1 - v_0, ..., v_{n+1} - v_0)|`; 1 exactly for unimodular simplices,
/// 0 for affinely dependent input.
pub fn normalized_volume(vertices: &[LatticePoint]) -> Result<BigInt> {
    let first = vertices.first().ok_or(Error::EmptyDomain)?;
    let dim = first.dim();
    if vertices.len() != dim + 1 {
        return Err(Error::WrongCardinality { expected: dim + 1, got: vertices.len() });
    }
    if let Some(bad) = vertices.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
    }
    let rows: Vec<Vec<BigInt>> = vertices[1..]
        .iter()
        .map(|v| v.0.iter().zip(&first.0).map(|(a, b)| BigInt::from(a - b)).collect())
        .collect();
    Ok(det_bigint(&rows).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<LatticePoint> {
        v.iter().map(|c| LatticePoint(c.to_vec())).collect()
    }

    #[test]
    fn enumerate_small_cases() {
        let unit = LatticePolytope::simplex(1, 1).unwrap().enumerate_points();
        assert_eq!(unit, pts(&[&[0, 0], &[0, 1], &[1, 0]]));
        assert_eq!(LatticePolytope::simplex(1, 3).unwrap().enumerate_points().len(), 10);
        assert_eq!(LatticePolytope::rect(2, 2).unwrap().enumerate_points().len(), 9);
    }

    #[test]
    fn interior_small_cases() {
        let s = LatticePolytope::simplex(1, 4).unwrap();
        assert_eq!(s.interior_points(), pts(&[&[1, 1], &[1, 2], &[2, 1]]));
        for n in 1..=3 {
            let s = LatticePolytope::simplex(n, n as u32 + 2).unwrap();
            assert_eq!(s.interior_points(), vec![LatticePoint(vec![1; n + 1])]);
        }
        assert_eq!(LatticePolytope::rect(3, 2).unwrap().interior_points(), pts(&[&[1, 1], &[2, 1]]));
    }

    #[test]
    fn genus_values() {
        assert_eq!(geometric_genus(1, 4), 3.into());
        assert_eq!(geometric_genus(2, 4), 1.into());
        assert_eq!(geometric_genus(2, 5), 4.into());
        assert_eq!(geometric_genus(2, 2), 0.into());
    }

    #[test]
    fn volumes() {
        assert_eq!(normalized_volume(&pts(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap(), 1.into());
        assert_eq!(normalized_volume(&pts(&[&[0, 0], &[2, 0], &[0, 1]])).unwrap(), 2.into());
        assert_eq!(normalized_volume(&pts(&[&[0, 0], &[1, 0], &[2, 0]])).unwrap(), 0.into());
        assert!(matches!(
            normalized_volume(&pts(&[&[0, 0], &[1, 0]])),
            Err(Error::WrongCardinality { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn descriptors_round_trip() {
        for s in ["simplex:n=2,d=5", "box:3x2"] {
            let p: LatticePolytope = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("simplex:n=2".parse::<LatticePolytope>().is_err());
        assert!("box:0x2".parse::<LatticePolytope>().is_err());
        assert!("cube:3".parse::<LatticePolytope>().is_err());
    }

    #[test]
    fn json_shape() {
        let p = LatticePolytope::simplex(2, 5).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"kind":"simplex","n":2,"d":5}"#);
        let b: LatticePolytope = serde_json::from_str(r#"{"kind":"box","a":3,"b":2}"#).unwrap();
        assert_eq!(b, LatticePolytope::Box { a: 3, b: 2 });
    }

    #[test]
    fn local_window_requires_interior() {
        let s = LatticePolytope::simplex(1, 4).unwrap();
        assert!(s.local_window(&LatticePoint(vec![0, 1])).is_err());
        let w = s.local_window(&LatticePoint(vec![1, 1])).unwrap();
        assert!(w.contains(&[0, 0]) && w.contains(&[3, 0]) && !w.contains(&[2, 2]));
    }
}
