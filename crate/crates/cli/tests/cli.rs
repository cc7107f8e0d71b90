use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use trop_cli::artifacts::{read_json, to_json, CertificateFile, GenusFile, PointsFile};
use trop_cli::config::RunConfig;
use trop_cli::pipeline::{Failure, FormsReport};
use trop_cli::verify::CheckResult;
use trop_core::amoeba::ConvergenceReport;
use trop_core::cycles::{ClassReport, CycleReport};
use trop_core::dualcomplex::ComplexFile;
use trop_core::subdivision::SubdivisionFile;
use trop_core::tropical::WeightFile;

fn trop(args: &[&str]) -> Output {
    trop_with(args, &[])
}

fn trop_with(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_trop"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("runs the binary")
}

fn golden(d: u32) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/simplex_n1_d{d}"))
}

fn dir_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_suite_run_passes_on_the_quartic() {
    let tmp = tempfile::tempdir().unwrap();
    let out = trop(&["run", "--polytope", "simplex:n=1,d=4", "--weights", "canonical", "--verify", "all", "--out-dir", dir_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let checks: Vec<CheckResult> = read_json(&tmp.path().join("verify.json")).unwrap();
    assert_eq!(checks.len(), 6);
    assert!(checks.iter().all(|c| c.passed));
    let failures: Vec<Failure> = read_json(&tmp.path().join("failures.json")).unwrap();
    assert!(failures.is_empty());
}

#[test]
fn trivial_subdivision_is_not_maximal() {
    let tmp = tempfile::tempdir().unwrap();
    let out = trop(&["run", "--polytope", "simplex:n=1,d=2", "--weights", "zero", "--verify", "maximal", "--out-dir", dir_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    let failures: Vec<Failure> = read_json(&tmp.path().join("failures.json")).unwrap();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0].check.as_deref(), Some("maximal"));
    let sub: SubdivisionFile = read_json(&tmp.path().join("subdivision.json")).unwrap();
    assert_eq!(sub.cells.len(), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(trop(&["run"]).status.code(), Some(2));
    assert_eq!(trop(&["enumerate", "--polytope", "simplex:n=1"]).status.code(), Some(2));
    assert_eq!(trop(&["run", "--polytope", "simplex:n=1,d=3", "--verify", "nonsense"]).status.code(), Some(2));
    let out = trop_with(&["enumerate", "--polytope", "simplex:n=1,d=3"], &[("TROP_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn genus_three_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let out = trop(&["genus", "--g", "3", "--out-dir", dir_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let genus: GenusFile = read_json(&tmp.path().join("genus.json")).unwrap();
    assert!(genus.pass && genus.realized);
    assert_eq!(genus.interior_points, 3);
    assert_eq!(genus.contacts.len(), 3);
    let weights: WeightFile = read_json(&tmp.path().join("weights.json")).unwrap();
    assert_eq!(weights.entries.len(), 15);
}

#[test]
fn spiral_has_a_certificate() {
    let out = trop(&["realize", "--spiral"]);
    assert_eq!(out.status.code(), Some(1));
    let cert: CertificateFile = serde_json::from_slice(&out.stdout).unwrap();
    assert!(cert.verified);
    assert_eq!(cert.multipliers.len(), cert.constraints.len());
}

#[test]
fn realize_round_trips_a_regular_target() {
    let tmp = tempfile::tempdir().unwrap();
    let target = golden(4).join("subdivision.json");
    let w = tmp.path().join("w.json");
    let out = trop(&["realize", "--target", dir_str(&target), "--out", dir_str(&w)]);
    assert_eq!(out.status.code(), Some(0));
    let find = format!("find:{}", target.display());
    let out = trop(&["subdivide", "--polytope", "simplex:n=1,d=4", "--weights", &find]);
    let sub: SubdivisionFile = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(sub, read_json::<SubdivisionFile>(&target).unwrap());
    let out = trop(&["subdivide", "--polytope", "simplex:n=1,d=4", "--weights", dir_str(&w)]);
    assert_eq!(serde_json::from_slice::<SubdivisionFile>(&out.stdout).unwrap(), sub);
}

#[test]
fn outputs_match_the_golden_files() {
    for d in [3, 4] {
        let g = golden(d);
        let tmp = tempfile::tempdir().unwrap();
        let poly = format!("simplex:n=1,d={d}");
        let out = trop(&["run", "--polytope", &poly, "--out-dir", dir_str(tmp.path())]);
        assert_eq!(out.status.code(), Some(0));
        for f in ["points", "weights", "subdivision", "complex", "verify", "cycles", "homology"] {
            let name = format!("{f}.json");
            let got = fs::read_to_string(tmp.path().join(&name)).unwrap();
            assert_eq!(got, fs::read_to_string(g.join(&name)).unwrap(), "d={d} {name}");
        }
        let svg = trop(&["render", "--polytope", &poly, "--cycles"]).stdout;
        assert_eq!(String::from_utf8(svg).unwrap(), fs::read_to_string(g.join("figure.svg")).unwrap());
    }
}

#[test]
fn golden_files_agree_with_hand_counts() {
    // Δ_4 in the plane: 15 points, 3 interior, 16 unit triangles, 3 * 16 / 2 + 6 edges.
    let g = golden(4);
    let points: PointsFile = read_json(&g.join("points.json")).unwrap();
    assert_eq!((points.points.len(), points.interior.len()), (15, 3));
    assert_eq!(points.genus.as_deref(), Some("3"));
    let complex: ComplexFile = read_json(&g.join("complex.json")).unwrap();
    let count = |dim| complex.cells.iter().filter(|c| c.dim == dim).count();
    assert_eq!((count(0), count(1)), (16, 30));
    assert_eq!(complex.cells.iter().filter(|c| c.dim == 1 && !c.bounded).count(), 12);
    let cycles: CycleReport = read_json(&g.join("cycles.json")).unwrap();
    assert_eq!(cycles.homology_ranks, vec![1, 3]);
    assert_eq!(cycles.cycles.len(), 3);
    // each sphere is the hexagon of edges dual to the six edges at its point
    assert!(cycles.cycles.iter().all(|c| c.sphere.len() == 6));
}

#[test]
fn artifacts_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = trop(&[
        "run", "--polytope", "simplex:n=1,d=3", "--amoeba-samples", "200", "--forms", "--out-dir", dir_str(tmp.path()),
    ]);
    assert!(out.status.code().is_some());
    fn check<T: serde::de::DeserializeOwned + serde::Serialize>(path: PathBuf) {
        let text = fs::read_to_string(&path).unwrap();
        let value: T = read_json(&path).unwrap();
        assert_eq!(to_json(&value).unwrap(), text, "{}", path.display());
    }
    let p = |f: &str| tmp.path().join(f);
    check::<RunConfig>(p("config.json"));
    check::<PointsFile>(p("points.json"));
    check::<WeightFile>(p("weights.json"));
    check::<SubdivisionFile>(p("subdivision.json"));
    check::<ComplexFile>(p("complex.json"));
    check::<Vec<CheckResult>>(p("verify.json"));
    check::<CycleReport>(p("cycles.json"));
    check::<ClassReport>(p("homology.json"));
    check::<ConvergenceReport>(p("amoeba.json"));
    check::<FormsReport>(p("forms.json"));
    check::<Vec<Failure>>(p("failures.json"));
    let csv = fs::read_to_string(p("samples.csv")).unwrap();
    assert!(csv.starts_with("t,x_1,x_2,defect,distance,residual\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 200);
    // a saved config reproduces the run
    let again = trop(&["run", "--config", dir_str(&p("config.json"))]);
    assert_eq!(again.status.code(), out.status.code());
}

#[test]
fn pipeline_is_deterministic_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let args = ["run", "--polytope", "simplex:n=1,d=3", "--amoeba-samples", "400", "--forms", "--out-dir", dir_str(&dir)];
    let snapshot = |dir: &Path| {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    trop_with(&args, &[("TROP_THREADS", "1")]);
    let first = snapshot(&dir);
    assert!(first.len() >= 12);
    for threads in ["2", "4"] {
        fs::remove_dir_all(&dir).unwrap();
        trop_with(&args, &[("TROP_THREADS", threads)]);
        assert!(snapshot(&dir) == first, "artifacts differ with {threads} threads");
    }
}

#[test]
fn render_rejects_surfaces_and_draws_the_primitive_curve() {
    let out = trop(&["render", "--polytope", "simplex:n=2,d=2"]);
    assert_eq!(out.status.code(), Some(2));
    // zero weights on the unit triangle: one vertex and three rays
    let svg = String::from_utf8(trop(&["render", "--polytope", "simplex:n=1,d=1", "--weights", "zero"]).stdout).unwrap();
    let complex = svg.split(r#"<g id="complex">"#).nth(1).unwrap();
    assert_eq!(complex.matches("<line").count(), 3);
    assert_eq!(complex.matches("<circle").count(), 1);
}

#[test]
fn render_overlays_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = trop(&["amoeba", "--polytope", "simplex:n=1,d=3", "--samples", "100", "--out-dir", dir_str(tmp.path())]);
    assert!(out.status.code().is_some());
    let csv = tmp.path().join("samples.csv");
    let svg = trop(&["render", "--polytope", "simplex:n=1,d=3", "--samples", dir_str(&csv), "--t", "256"]).stdout;
    let svg = String::from_utf8(svg).unwrap();
    let samples = svg.split(r#"<g id="samples""#).nth(1).unwrap();
    assert!(samples.matches("<circle").count() > 50);
}
