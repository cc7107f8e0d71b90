use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use trop_cli::artifacts::{read_json, to_json, write_json, CertificateFile, GenusFile, PointsFile};
use trop_cli::config::{parse_checks, Check, RunConfig, WeightSource};
use trop_cli::pipeline::{forms_stage, run_pipeline};
use trop_cli::render::{render_svg, RenderOptions};
use trop_cli::verify::run_checks;
use trop_core::amoeba::{convergence_report, Window};
use trop_core::cycles::{cycle_family, cycle_report, pairwise_intersections, Contact};
use trop_core::dualcomplex::{dual_complex, DualComplex};
use trop_core::lattice::LatticePolytope;
use trop_core::subdivision::{find_weights, genus_target, regular_subdivision, spiral_target, RegularSubdivision, WeightSearch};
use trop_core::tropical::WeightFunction;

#[derive(Parser)]
#[command(name = "trop", version, about = "Regular subdivisions, tropical hypersurfaces and patchworked amoebas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Input {
    /// `simplex:n=N,d=D` or `box:AxB`.
    #[arg(long)]
    polytope: LatticePolytope,
    /// `canonical`, `zero`, a weight file, or `find:TARGET` for a subdivision file.
    #[arg(long, default_value = "canonical")]
    weights: WeightSource,
}

impl Input {
    fn build(&self) -> anyhow::Result<(WeightFunction, RegularSubdivision, DualComplex)> {
        let v = self.weights.load(&self.polytope)?;
        let s = regular_subdivision(&v)?;
        let pi = dual_complex(&s, &v)?;
        Ok((v, s, pi))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Lattice points, interior points and volume.
    Enumerate {
        #[arg(long)]
        polytope: LatticePolytope,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regular subdivision induced by the weights.
    Subdivide {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dual complex of the regular subdivision.
    Dual {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks claims about the subdivision; exits 1 if any fails.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        maximal: bool,
        #[arg(long)]
        edges: bool,
        #[arg(long)]
        translate: bool,
        #[arg(long)]
        balanced: bool,
        #[arg(long)]
        homology: bool,
        #[arg(long)]
        coverage: bool,
        /// Every check (the default when no flag is given).
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sphere and enlarged cycles with the homology ranks.
    Cycles {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Samples the patchworked hypersurface and measures its distance to the complex.
    Amoeba {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_value = "4,16,64,256")]
        t: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Half-width of the sampling cube.
        #[arg(long, default_value_t = 5.0)]
        window: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Localization, decay and fiber checks of the holomorphic forms (curves).
    Forms {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Realizes the genus-g triangulation of `[0,g+1]x[0,2]` and reports cycle contacts.
    Genus {
        #[arg(long)]
        g: u32,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Finds weights for a target triangulation or a non-regularity certificate.
    Realize {
        /// Subdivision file with the target cells.
        #[arg(long, conflicts_with = "spiral", required_unless_present = "spiral")]
        target: Option<PathBuf>,
        /// The built-in pinwheel triangulation of `[0,3]^2`.
        #[arg(long)]
        spiral: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG of the subdivision and the dual complex of a plane curve.
    Render {
        #[command(flatten)]
        input: Input,
        /// Overlay the enlarged cycles.
        #[arg(long)]
        cycles: bool,
        /// Overlay samples from a samples CSV (rows with this `t`, or the largest).
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs every stage and writes all artifacts to a directory.
    Run {
        /// Config file; the other options are ignored when given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        polytope: Option<LatticePolytope>,
        #[arg(long, default_value = "canonical")]
        weights: WeightSource,
        /// `all` or a comma-separated list of checks.
        #[arg(long, default_value = "all")]
        verify: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run the amoeba stage with this many samples per `t`.
        #[arg(long, default_value_t = 0)]
        amoeba_samples: usize,
        /// Run the forms stage (curves only).
        #[arg(long)]
        forms: bool,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> anyhow::Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            print!("{}", to_json(value)?);
            Ok(())
        }
    }
}

fn code(pass: bool) -> ExitCode {
    if pass { ExitCode::SUCCESS } else { ExitCode::from(1) }
}

fn execute(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Enumerate { polytope, out } => {
            polytope.validate()?;
            emit(out.as_deref(), &PointsFile::new(&polytope))?;
        }
        Command::Subdivide { input, out } => {
            let (_, s, _) = input.build()?;
            emit(out.as_deref(), &s.to_file())?;
        }
        Command::Dual { input, out } => {
            let (_, _, pi) = input.build()?;
            emit(out.as_deref(), &pi.to_file()?)?;
        }
        Command::Verify { input, maximal, edges, translate, balanced, homology, coverage, all, seed, out } => {
            let flags = [maximal, edges, translate, balanced, homology, coverage];
            let checks: Vec<Check> = if all || !flags.contains(&true) {
                Check::ALL.to_vec()
            } else {
                Check::ALL.into_iter().zip(flags).filter(|(_, on)| *on).map(|(c, _)| c).collect()
            };
            let (_, s, pi) = input.build()?;
            let results = run_checks(&s, &pi, &checks, seed);
            for r in &results {
                eprintln!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            emit(out.as_deref(), &results)?;
            return Ok(code(results.iter().all(|r| r.passed)));
        }
        Command::Cycles { input, out } => {
            let (_, s, pi) = input.build()?;
            match cycle_family(&pi, &s) {
                Ok(family) => emit(out.as_deref(), &cycle_report(&pi, &family))?,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Amoeba { input, t, samples, seed, window, out_dir } => {
            let (_, _, pi) = input.build()?;
            let run = convergence_report(&pi, &t, samples, seed, &Window::cube(pi.n() + 1, window))?;
            std::fs::create_dir_all(&out_dir)?;
            write_json(&out_dir.join("amoeba.json"), &run.report)?;
            trop_cli::artifacts::write_samples_csv(&out_dir.join("samples.csv"), pi.n() + 1, &run.rows)?;
            return Ok(code(run.report.pass));
        }
        Command::Forms { input, samples, seed, out } => {
            let mut config = RunConfig::new(input.polytope, input.weights.clone(), ".");
            config.forms.samples = samples;
            config.seed = seed;
            config.validate()?;
            let (_, s, pi) = input.build()?;
            if pi.n() != 1 {
                bail!("the forms stage needs a plane curve");
            }
            let family = cycle_family(&pi, &s).ok();
            let report = forms_stage(&config, &s, &pi, family.as_ref())?;
            let pass = report.face_limits.iter().all(|r| r.pass)
                && report.decay.iter().all(|r| r.pass)
                && report.truncation.iter().all(|r| r.pass)
                && report.fibers.iter().all(|r| r.pass);
            emit(out.as_deref(), &report)?;
            return Ok(code(pass));
        }
        Command::Genus { g, out_dir } => {
            let (polytope, cells) = genus_target(g)?;
            std::fs::create_dir_all(&out_dir)?;
            write_json(&out_dir.join("target.json"), &RegularSubdivision::from_top_cells(polytope, cells.clone()).to_file())?;
            let interior_points = polytope.interior_points().len();
            let (realized, contacts) = match find_weights(&polytope, &cells)? {
                WeightSearch::Feasible(v) => {
                    write_json(&out_dir.join("weights.json"), &v.to_file())?;
                    let s = regular_subdivision(&v)?;
                    let pi = dual_complex(&s, &v)?;
                    let family = cycle_family(&pi, &s)?;
                    write_json(&out_dir.join("cycles.json"), &cycle_report(&pi, &family))?;
                    (s.cell_set() == cells.iter().cloned().collect(), pairwise_intersections(&pi, &family)?)
                }
                WeightSearch::Infeasible(cert) => {
                    write_json(&out_dir.join("certificate.json"), &CertificateFile::new(&polytope, &cert))?;
                    (false, Vec::new())
                }
            };
            let pass = realized
                && interior_points == g as usize
                && contacts.iter().all(|(_, _, c)| matches!(c, Contact::Disjoint | Contact::Point));
            let file = GenusFile { g, polytope, interior_points, realized, contacts, pass };
            write_json(&out_dir.join("genus.json"), &file)?;
            return Ok(code(pass));
        }
        Command::Realize { target, spiral, out } => {
            let (polytope, cells) = if spiral {
                spiral_target()
            } else {
                let path = target.expect("clap requires a target");
                let file: trop_core::subdivision::SubdivisionFile = read_json(&path)?;
                (file.polytope, file.cells)
            };
            return match find_weights(&polytope, &cells)? {
                WeightSearch::Feasible(v) => {
                    emit(out.as_deref(), &v.to_file())?;
                    Ok(ExitCode::SUCCESS)
                }
                WeightSearch::Infeasible(cert) => {
                    emit(out.as_deref(), &CertificateFile::new(&polytope, &cert))?;
                    Ok(ExitCode::from(1))
                }
            };
        }
        Command::Render { input, cycles, samples, t, out } => {
            let (_, s, pi) = input.build()?;
            let family = if cycles { Some(cycle_family(&pi, &s)?) } else { None };
            let points = match samples {
                Some(path) => read_samples(&path, t)?,
                None => Vec::new(),
            };
            let svg = render_svg(&s, &pi, &RenderOptions { cycles: family.as_ref(), samples: &points, window: None })?;
            match out {
                Some(path) => std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{svg}"),
            }
        }
        Command::Run { config, polytope, weights, verify, seed, amoeba_samples, forms, out_dir } => {
            let config = match config {
                Some(path) => read_json::<RunConfig>(&path)?,
                None => {
                    let mut c = RunConfig::new(polytope.expect("clap requires a polytope"), weights, out_dir);
                    c.verify = parse_checks(&verify)?;
                    c.seed = seed;
                    c.amoeba.samples = amoeba_samples;
                    if !forms {
                        c.forms.samples = 0;
                    }
                    c
                }
            };
            let outcome = run_pipeline(&config)?;
            for f in &outcome.failures {
                eprintln!("FAIL {}{}: {}", f.stage, f.check.as_deref().map(|c| format!("/{c}")).unwrap_or_default(), f.detail);
            }
            return Ok(ExitCode::from(outcome.exit_code() as u8));
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// `x_1, x_2` columns of the samples CSV at the requested (or largest) `t`.
fn read_samples(path: &Path, t: Option<f64>) -> anyhow::Result<Vec<Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let row: Vec<f64> = rec.iter().map(str::parse).collect::<Result<_, _>>()?;
        rows.push(row);
    }
    let Some(t) = t.or_else(|| rows.iter().map(|r| r[0]).reduce(f64::max)) else {
        return Ok(Vec::new());
    };
    Ok(rows.into_iter().filter(|r| r[0] == t).map(|r| r[1..3].to_vec()).collect())
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("TROP_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: TROP_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
