//! Weight functions on lattice points and the piecewise-linear Legendre
//! transform `L_v(x) = max_j (<x, j> - v(j))` whose corner locus is `Π_v`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, LatticePolytope};
use crate::linalg::{dot_int, rat, Rational};

/// Exact rational weights `j -> v(j)` on every lattice point of a polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    polytope: LatticePolytope,
    points: Vec<LatticePoint>,
    values: Vec<Rational>,
}

impl WeightFunction {
    /// Builds `v` by evaluating `f` on the canonical point list.
    pub fn from_fn(polytope: LatticePolytope, f: impl Fn(&LatticePoint) -> Rational) -> Self {
        let points = polytope.enumerate_points();
        let values = points.iter().map(&f).collect();
        Self { polytope, points, values }
    }

    /// The canonical weight `Σ j_α² + (Σ j_α)²`.
    pub fn canonical(polytope: LatticePolytope) -> Self {
        Self::from_fn(polytope, canonical_weight)
    }

    pub fn zero(polytope: LatticePolytope) -> Self {
        Self::from_fn(polytope, |_| Rational::zero())
    }

    /// Values listed in canonical point order.
    pub fn from_values(polytope: LatticePolytope, values: Vec<Rational>) -> Result<Self> {
        let points = polytope.enumerate_points();
        if points.len() != values.len() {
            return Err(Error::WrongCardinality { expected: points.len(), got: values.len() });
        }
        Ok(Self { polytope, points, values })
    }

    /// Builds from explicit `(point, weight)` pairs; every lattice point must
    /// receive exactly one weight.
    pub fn from_entries(polytope: LatticePolytope, entries: &[(LatticePoint, Rational)]) -> Result<Self> {
        let points = polytope.enumerate_points();
        let mut values: Vec<Option<Rational>> = vec![None; points.len()];
        for (p, w) in entries {
            let idx = points.binary_search(p).map_err(|_| Error::UnknownPoint(p.to_string()))?;
            if values[idx].replace(w.clone()).is_some() {
                return Err(Error::Parse(format!("duplicate weight for {p}")));
            }
        }
        let values = values
            .into_iter()
            .zip(&points)
            .map(|(v, p)| v.ok_or_else(|| Error::MissingWeight(p.to_string())))
            .collect::<Result<_>>()?;
        Ok(Self { polytope, points, values })
    }

    pub fn polytope(&self) -> &LatticePolytope {
        &self.polytope
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> &Rational {
        &self.values[idx]
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    pub fn value_at(&self, p: &LatticePoint) -> Option<&Rational> {
        self.index_of(p).map(|i| &self.values[i])
    }

    pub fn ambient_dim(&self) -> usize {
        self.polytope.ambient_dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `l_{v,j}(x) = <x, j> - v(j)`.
    pub fn linear_form(&self, idx: usize, x: &[Rational]) -> Rational {
        dot_int(x, &self.points[idx].0) - &self.values[idx]
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn to_file(&self) -> WeightFile {
        WeightFile {
            polytope: self.polytope,
            entries: self
                .points
                .iter()
                .zip(&self.values)
                .map(|(p, w)| WeightEntry { point: p.0.clone(), weight: w.to_string() })
                .collect(),
        }
    }

    pub fn from_file(file: &WeightFile) -> Result<Self> {
        file.polytope.validate()?;
        let entries = file
            .entries
            .iter()
            .map(|e| {
                let w: Rational = e.weight.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{}`", e.weight)))?;
                Ok((LatticePoint(e.point.clone()), w))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(file.polytope, &entries)
    }
}

/// On-disk weight file: weights are rational strings `"p/q"` or `"p"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightFile {
    pub polytope: LatticePolytope,
    pub entries: Vec<WeightEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub point: Vec<i64>,
    pub weight: String,
}

/// `v(j) = Σ j_α² + (Σ j_α)²`.
pub fn canonical_weight(j: &LatticePoint) -> Rational {
    let squares: i64 = j.0.iter().map(|c| c * c).sum();
    let s = j.sum();
    Rational::from_integer(BigInt::from(squares) + BigInt::from(s) * s)
}

/// Result of evaluating the Legendre transform at a rational point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Legendre {
    pub value: Rational,
    /// Indices of all points attaining the maximum, ascending.
    pub argmax: Vec<usize>,
    /// Gap between the maximum and the best non-maximal form; zero exactly
    /// on `Π_v`.
    pub defect: Rational,
}

pub fn legendre(v: &WeightFunction, x: &[Rational]) -> Result<Legendre> {
    if v.is_empty() {
        return Err(Error::EmptyDomain);
    }
    if x.len() != v.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: v.ambient_dim(), got: x.len() });
    }
    let forms: Vec<Rational> = (0..v.len()).map(|k| v.linear_form(k, x)).collect();
    let value = forms.iter().max().cloned().expect("nonempty");
    let argmax: Vec<usize> = (0..forms.len()).filter(|&k| forms[k] == value).collect();
    let defect = if argmax.len() >= 2 {
        Rational::zero()
    } else {
        match forms.iter().filter(|f| **f != value).max() {
            Some(second) => &value - second,
            None => Rational::zero(),
        }
    };
    Ok(Legendre { value, argmax, defect })
}

/// Floating-point counterpart of [`legendre`] used by the numerical modules.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreF64 {
    pub value: f64,
    pub argmax: usize,
    pub defect: f64,
}

/// Float evaluation backend: weights and points converted once, then reused
/// for millions of evaluations.
#[derive(Clone, Debug)]
pub struct FloatForms {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl FloatForms {
    pub fn new(v: &WeightFunction) -> Self {
        Self {
            points: v.points().iter().map(|p| p.0.iter().map(|&c| c as f64).collect()).collect(),
            weights: v.values_f64(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn form(&self, k: usize, x: &[f64]) -> f64 {
        self.points[k].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.weights[k]
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    /// Maximum, first maximizer and gap to the second-best form (the gap is
    /// zero when two forms tie exactly).
    pub fn legendre(&self, x: &[f64]) -> LegendreF64 {
        let mut best = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        let mut arg = 0;
        for k in 0..self.len() {
            let f = self.form(k, x);
            if f > best {
                second = best;
                best = f;
                arg = k;
            } else if f > second {
                second = f;
            }
        }
        let defect = if second.is_finite() { best - second } else { 0.0 };
        LegendreF64 { value: best, argmax: arg, defect }
    }
}

pub fn legendre_f64(v: &WeightFunction, x: &[f64]) -> LegendreF64 {
    FloatForms::new(v).legendre(x)
}

/// Convenience: rational vector from integers.
pub fn rational_point(coords: &[i64]) -> Vec<Rational> {
    coords.iter().map(|&c| rat(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[i64]) -> LatticePoint {
        LatticePoint(c.to_vec())
    }

    #[test]
    fn canonical_values() {
        assert_eq!(canonical_weight(&lp(&[0, 0])), rat(0));
        for dim in 1..=4 {
            assert_eq!(canonical_weight(&LatticePoint::unit(dim, dim - 1)), rat(2));
        }
        assert_eq!(canonical_weight(&lp(&[1, 1])), rat(6));
    }

    #[test]
    fn legendre_examples() {
        let d3 = LatticePolytope::simplex(1, 3).unwrap();
        let v = WeightFunction::canonical(d3);
        let l = legendre(&v, &rational_point(&[0, 0])).unwrap();
        assert_eq!(l.value, rat(0));
        assert_eq!(l.argmax, vec![v.index_of(&lp(&[0, 0])).unwrap()]);
        assert_eq!(l.defect, rat(2));

        let d1 = LatticePolytope::simplex(1, 1).unwrap();
        let z = WeightFunction::zero(d1);
        let l = legendre(&z, &rational_point(&[0, 0])).unwrap();
        assert_eq!(l.argmax.len(), 3);
        assert_eq!(l.defect, rat(0));
        let l = legendre(&z, &rational_point(&[2, 1])).unwrap();
        assert_eq!(l.value, rat(2));
        assert_eq!(l.argmax, vec![z.index_of(&lp(&[1, 0])).unwrap()]);
        assert_eq!(l.defect, rat(1));
    }

    #[test]
    fn legendre_rejects_bad_dimension() {
        let v = WeightFunction::zero(LatticePolytope::simplex(1, 1).unwrap());
        assert!(matches!(legendre(&v, &rational_point(&[1])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weight_file_round_trip() {
        let v = WeightFunction::canonical(LatticePolytope::simplex(1, 2).unwrap());
        let json = serde_json::to_string(&v.to_file()).unwrap();
        assert!(json.contains(r#"{"point":[1,1],"weight":"6"}"#));
        let back = WeightFunction::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn partial_weight_file_is_rejected() {
        let p = LatticePolytope::simplex(1, 1).unwrap();
        let err = WeightFunction::from_entries(p, &[(lp(&[0, 0]), rat(0))]).unwrap_err();
        assert!(matches!(err, Error::MissingWeight(_)));
    }

    #[test]
    fn canonical_is_strictly_midpoint_convex() {
        for n in 1..=2 {
            let p = LatticePolytope::simplex(n, 6).unwrap();
            let pts = p.enumerate_points();
            for a in &pts {
                for b in &pts {
                    if a == b || a.0.iter().zip(&b.0).any(|(x, y)| (x + y) % 2 != 0) {
                        continue;
                    }
                    let m = LatticePoint(a.0.iter().zip(&b.0).map(|(x, y)| (x + y) / 2).collect());
                    assert!(rat(2) * canonical_weight(&m) < canonical_weight(a) + canonical_weight(b));
                }
            }
        }
    }
}
