//! The batch pipeline: enumerate, subdivide, dual, verify, cycles,
//! homology, amoeba and forms, each writing its own artifact.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use trop_core::amoeba::{convergence_report, Window};
use trop_core::cycles::{cycle_class_check, cycle_family, cycle_report, CycleFamily};
use trop_core::dualcomplex::{dual_complex, DualComplex};
use trop_core::forms::{
    decay_check, face_limit_check, fiber_phase_check, truncation_compare, DecayReport, FaceLimitReport, FiberReport,
    TruncationReport,
};
use trop_core::subdivision::{regular_subdivision, RegularSubdivision};

use crate::artifacts::{write_json, write_samples_csv, PointsFile};
use crate::config::RunConfig;
use crate::verify::run_checks;

/// One failed claim or stage, as recorded in `failures.json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub check: Option<String>,
    pub detail: String,
}

impl Failure {
    fn new(stage: &str, check: Option<&str>, detail: impl Into<String>) -> Self {
        Self { stage: stage.into(), check: check.map(String::from), detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormsReport {
    pub face_limits: Vec<FaceLimitReport>,
    pub decay: Vec<DecayReport>,
    pub truncation: Vec<TruncationReport>,
    pub fibers: Vec<FiberReport>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub failures: Vec<Failure>,
    /// Artifact paths in the order they were written.
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.failures.is_empty())
    }
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.written.push(path);
        Ok(())
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        path
    }
}

/// Runs every stage. Errors are reserved for invalid configuration and I/O;
/// failed claims are collected in the outcome and in `failures.json`.
pub fn run_pipeline(config: &RunConfig) -> anyhow::Result<Outcome> {
    config.validate()?;
    let weights = config.weights.load(&config.polytope)?;
    fs::create_dir_all(&config.out_dir).with_context(|| format!("creating {}", config.out_dir.display()))?;
    let mut out = Writer { dir: config.out_dir.clone(), written: Vec::new() };
    let mut failures = Vec::new();

    out.json("config.json", config)?;
    out.json("points.json", &PointsFile::new(&config.polytope))?;
    out.json("weights.json", &weights.to_file())?;

    let s = regular_subdivision(&weights)?;
    out.json("subdivision.json", &s.to_file())?;
    let pi = dual_complex(&s, &weights)?;
    out.json("complex.json", &pi.to_file()?)?;

    let checks = run_checks(&s, &pi, &config.verify, config.seed);
    failures.extend(
        checks.iter().filter(|c| !c.passed).map(|c| Failure::new("verify", Some(&c.name), c.detail.clone())),
    );
    out.json("verify.json", &checks)?;

    let family = match cycle_family(&pi, &s) {
        Ok(family) => {
            out.json("cycles.json", &cycle_report(&pi, &family))?;
            let classes = cycle_class_check(&pi, &family);
            if !classes.passed() {
                failures.push(Failure::new("homology", None, format!("{classes:?}")));
            }
            out.json("homology.json", &classes)?;
            Some(family)
        }
        Err(e) => {
            failures.push(Failure::new("cycles", None, e.to_string()));
            None
        }
    };

    if config.amoeba.samples > 0 {
        let a = &config.amoeba;
        let window = Window::cube(config.polytope.ambient_dim(), a.window);
        match convergence_report(&pi, &a.schedule, a.samples, config.seed, &window) {
            Ok(run) => {
                if !run.report.pass {
                    failures.push(Failure::new("amoeba", None, "distance trend check failed"));
                }
                out.json("amoeba.json", &run.report)?;
                let csv = out.path("samples.csv");
                write_samples_csv(&csv, config.polytope.ambient_dim(), &run.rows)?;
            }
            Err(e) => failures.push(Failure::new("amoeba", None, e.to_string())),
        }
    }

    if config.forms.samples > 0 && pi.n() == 1 {
        match forms_stage(config, &s, &pi, family.as_ref()) {
            Ok(report) => {
                failures.extend(forms_failures(&report));
                out.json("forms.json", &report)?;
            }
            Err(e) => failures.push(Failure::new("forms", None, e.to_string())),
        }
    }

    out.json("failures.json", &failures)?;
    Ok(Outcome { failures, artifacts: out.written })
}

pub fn forms_stage(
    config: &RunConfig,
    s: &RegularSubdivision,
    pi: &DualComplex,
    family: Option<&CycleFamily>,
) -> trop_core::Result<FormsReport> {
    let f = &config.forms;
    let seed = config.seed;
    let mut report = FormsReport { face_limits: Vec::new(), decay: Vec::new(), truncation: Vec::new(), fibers: Vec::new() };
    for i in pi.polytope().interior_points() {
        report.face_limits.push(face_limit_check(pi, &i, f.t, f.samples, seed, f.face_tolerance)?);
        let idx = pi.weights().index_of(&i).expect("interior point is a lattice point");
        for region in pi.top_cells() {
            let c = pi.cell(region);
            if c.bounded && !c.support.contains(&idx) {
                report.decay.push(decay_check(pi, &i, region, &f.decay_schedule, f.samples, seed)?);
            }
        }
        report.truncation.push(truncation_compare(pi, s, &i, f.t, f.samples, seed)?);
    }
    if let Some(family) = family {
        for e in &family.entries {
            for &cell in &e.sphere.cells {
                if pi.cell(cell).bounded {
                    report.fibers.push(fiber_phase_check(pi, &e.point, cell, None, &f.fiber_schedule, f.fiber_steps)?);
                }
            }
        }
    }
    Ok(report)
}

fn forms_failures(r: &FormsReport) -> Vec<Failure> {
    let mut out = Vec::new();
    for x in r.face_limits.iter().filter(|x| !x.pass) {
        out.push(Failure::new("forms", Some("face_limit"), format!("{}", x.i)));
    }
    for x in r.decay.iter().filter(|x| !x.pass) {
        out.push(Failure::new("forms", Some("decay"), format!("{} over {:?}: ratio {}", x.i, x.region, x.ratio)));
    }
    for x in r.truncation.iter().filter(|x| !x.pass) {
        out.push(Failure::new("forms", Some("truncation"), format!("{}", x.i)));
    }
    for x in r.fibers.iter().filter(|x| !x.pass) {
        out.push(Failure::new("forms", Some("fiber"), format!("{} over {:?}", x.i, x.cell)));
    }
    out
}
