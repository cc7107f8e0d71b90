//! Run configuration: what to build, which claims to check, and the
//! numerical knobs of the sampling stages.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use trop_core::lattice::LatticePolytope;
use trop_core::subdivision::{find_weights, RegularSubdivision, SubdivisionFile, WeightSearch};
use trop_core::tropical::{WeightFile, WeightFunction};

use crate::artifacts::read_json;

/// Where the weight function comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightSource {
    Canonical,
    Zero,
    /// A weight file.
    File(PathBuf),
    /// A target subdivision file, realized by linear programming.
    Find(PathBuf),
}

impl FromStr for WeightSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        Ok(match s {
            "canonical" => Self::Canonical,
            "zero" => Self::Zero,
            "" => bail!("empty weight source"),
            _ => match s.strip_prefix("find:") {
                Some(path) => Self::Find(path.into()),
                None => Self::File(s.into()),
            },
        })
    }
}

impl fmt::Display for WeightSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Canonical => write!(f, "canonical"),
            Self::Zero => write!(f, "zero"),
            Self::File(p) => write!(f, "{}", p.display()),
            Self::Find(p) => write!(f, "find:{}", p.display()),
        }
    }
}

impl TryFrom<String> for WeightSource {
    type Error = anyhow::Error;

    fn try_from(s: String) -> anyhow::Result<Self> {
        s.parse()
    }
}

impl From<WeightSource> for String {
    fn from(w: WeightSource) -> String {
        w.to_string()
    }
}

impl WeightSource {
    pub fn load(&self, polytope: &LatticePolytope) -> anyhow::Result<WeightFunction> {
        match self {
            Self::Canonical => Ok(WeightFunction::canonical(*polytope)),
            Self::Zero => Ok(WeightFunction::zero(*polytope)),
            Self::File(path) => {
                let file: WeightFile = read_json(path)?;
                if file.polytope != *polytope {
                    bail!("weight file {} is for {}, not {polytope}", path.display(), file.polytope);
                }
                Ok(WeightFunction::from_file(&file)?)
            }
            Self::Find(path) => {
                let file: SubdivisionFile = read_json(path)?;
                if file.polytope != *polytope {
                    bail!("target {} is for {}, not {polytope}", path.display(), file.polytope);
                }
                let target = RegularSubdivision::from_file(&file)?;
                let cells: Vec<Vec<usize>> = target.top_cells().iter().map(|c| c.support.clone()).collect();
                match find_weights(polytope, &cells)? {
                    WeightSearch::Feasible(w) => Ok(w),
                    WeightSearch::Infeasible(_) => bail!("target {} is not a regular subdivision", path.display()),
                }
            }
        }
    }
}

/// One verifiable claim about the subdivision and its dual complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Maximal,
    Edges,
    Translate,
    Balanced,
    Homology,
    Coverage,
}

impl Check {
    pub const ALL: [Check; 6] =
        [Check::Maximal, Check::Edges, Check::Translate, Check::Balanced, Check::Homology, Check::Coverage];

    pub fn name(self) -> &'static str {
        match self {
            Check::Maximal => "maximal",
            Check::Edges => "edges",
            Check::Translate => "translate",
            Check::Balanced => "balanced",
            Check::Homology => "homology",
            Check::Coverage => "coverage",
        }
    }
}

/// Parses `all` or a comma-separated list of check names.
pub fn parse_checks(s: &str) -> anyhow::Result<Vec<Check>> {
    if s == "all" {
        return Ok(Check::ALL.to_vec());
    }
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        let c = Check::ALL.into_iter().find(|c| c.name() == name).with_context(|| format!("unknown check `{name}`"))?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmoebaConfig {
    pub schedule: Vec<f64>,
    pub samples: usize,
    /// Half-width of the cube `[-w, w]^{n+1}` in `Log_t` space.
    pub window: f64,
}

impl Default for AmoebaConfig {
    fn default() -> Self {
        Self { schedule: vec![4.0, 16.0, 64.0, 256.0], samples: 2000, window: 5.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormsConfig {
    pub t: f64,
    /// Allowed relative deviation of `|A_i|` from its face limit.
    pub face_tolerance: f64,
    /// Samples per face.
    pub samples: usize,
    pub decay_schedule: Vec<f64>,
    pub fiber_schedule: Vec<f64>,
    pub fiber_steps: usize,
}

impl Default for FormsConfig {
    fn default() -> Self {
        Self {
            t: 1e4,
            face_tolerance: 0.25,
            samples: 40,
            decay_schedule: vec![1e2, 1e4, 1e6],
            fiber_schedule: vec![1e2, 1e3, 1e4],
            fiber_steps: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub polytope: LatticePolytope,
    pub weights: WeightSource,
    pub verify: Vec<Check>,
    pub seed: u64,
    #[serde(default)]
    pub amoeba: AmoebaConfig,
    #[serde(default)]
    pub forms: FormsConfig,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn new(polytope: LatticePolytope, weights: WeightSource, out_dir: impl AsRef<Path>) -> Self {
        Self {
            polytope,
            weights,
            verify: Check::ALL.to_vec(),
            seed: 42,
            amoeba: AmoebaConfig::default(),
            forms: FormsConfig::default(),
            out_dir: out_dir.as_ref().to_path_buf(),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.polytope.validate()?;
        let a = &self.amoeba;
        if a.samples > 0 {
            if a.schedule.len() < 2 || a.schedule.windows(2).any(|w| w[1] <= w[0]) {
                bail!("amoeba schedule must be increasing with at least two values");
            }
            if a.schedule.iter().any(|&t| t.is_nan() || t <= 1.0) {
                bail!("every t must exceed 1");
            }
            if a.window.is_nan() || a.window <= 0.0 {
                bail!("window half-width must be positive");
            }
        }
        let f = &self.forms;
        if f.samples > 0 {
            let all = f.decay_schedule.iter().chain(&f.fiber_schedule).chain(std::iter::once(&f.t));
            if all.into_iter().any(|&t| t.is_nan() || t <= 1.0) {
                bail!("every t must exceed 1");
            }
            if f.fiber_steps == 0 {
                bail!("fiber steps must be positive");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_sources_round_trip() {
        for s in ["canonical", "zero", "w.json", "find:target.json"] {
            assert_eq!(s.parse::<WeightSource>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn check_lists() {
        assert_eq!(parse_checks("all").unwrap().len(), 6);
        assert_eq!(parse_checks("edges,maximal").unwrap(), vec![Check::Maximal, Check::Edges]);
        assert!(parse_checks("maximal,bogus").is_err());
    }

    #[test]
    fn config_round_trips_and_validates() {
        let mut c = RunConfig::new(LatticePolytope::simplex(1, 3).unwrap(), WeightSource::Canonical, "out");
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
        c.validate().unwrap();
        c.amoeba.schedule = vec![4.0];
        assert!(c.validate().is_err());
    }
}
