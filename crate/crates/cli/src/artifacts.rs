//! Reading and writing stage artifacts.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use trop_core::amoeba::SampleRow;
use trop_core::cycles::Contact;
use trop_core::subdivision::InfeasibilityCertificate;
use trop_core::lattice::{geometric_genus, LatticePoint, LatticePolytope};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    fs::write(path, to_json(value)?).with_context(|| format!("writing {}", path.display()))
}

/// Lattice points of a polytope with its volume and interior count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointsFile {
    pub polytope: LatticePolytope,
    pub points: Vec<LatticePoint>,
    pub interior: Vec<LatticePoint>,
    pub normalized_volume: String,
    /// `C(d-1, n+1)` for simplices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<String>,
}

impl PointsFile {
    pub fn new(p: &LatticePolytope) -> Self {
        Self {
            polytope: *p,
            points: p.enumerate_points(),
            interior: p.interior_points(),
            normalized_volume: p.normalized_volume().to_string(),
            genus: match *p {
                LatticePolytope::Simplex { n, d } => Some(geometric_genus(n, d).to_string()),
                LatticePolytope::Box { .. } => None,
            },
        }
    }
}

/// Samples CSV: `t,x_1..x_{n+1},defect,distance,residual`.
pub fn write_samples_csv(path: &Path, dim: usize, rows: &[SampleRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|k| format!("x_{k}")));
    header.extend(["defect", "distance", "residual"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.t.to_string()];
        rec.extend(r.x.iter().map(f64::to_string));
        rec.extend([r.defect, r.distance, r.residual].map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Non-regularity certificate: the folding constraints with their Farkas
/// multipliers, as exact rationals in `p/q` form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub polytope: LatticePolytope,
    pub constraints: Vec<ConstraintRecord>,
    pub multipliers: Vec<String>,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub description: String,
    pub coeffs: Vec<(usize, String)>,
}

impl CertificateFile {
    pub fn new(polytope: &LatticePolytope, cert: &InfeasibilityCertificate) -> Self {
        Self {
            polytope: *polytope,
            constraints: cert
                .constraints
                .iter()
                .map(|c| ConstraintRecord {
                    description: c.description.clone(),
                    coeffs: c.coeffs.iter().map(|(k, a)| (*k, a.to_string())).collect(),
                })
                .collect(),
            multipliers: cert.multipliers.iter().map(ToString::to_string).collect(),
            verified: cert.verify(polytope.enumerate_points().len()),
        }
    }
}

/// Result of the genus construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusFile {
    pub g: u32,
    pub polytope: LatticePolytope,
    pub interior_points: usize,
    pub realized: bool,
    /// Contact type of every pair of enlarged cycles.
    pub contacts: Vec<(usize, usize, Contact)>,
    pub pass: bool,
}
