//! The `anosov` binary: model files in, deterministic artifacts out.
//!
//! Exit codes: 0 when the requested computation succeeds and finds nothing
//! alarming, 2 when an analyzer or verification suite finds a structural
//! contradiction, 1 on any error.  Outputs depend only on the config and
//! seed, never on the worker count.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use anosov::census::CensusTable;
use anosov::growth::{fit_growth, model_squeeze_check, GrowthEstimate, GrowthSample};
use anosov::homology::{build_e2_page, degeneration_check};
use anosov::models::{self, Model, ModelSpec};
use anosov::tol::Tolerances;
use anosov::verify;
use anosov::{Error, Result};

/// Exit status for a confirmed obstruction or failed verification.
const EXIT_OBSTRUCTION: u8 = 2;

#[derive(Parser)]
#[command(
    name = "anosov",
    version,
    about = "Periodic-orbit censuses, growth estimates, and index-parity \
             diagnostics for Anosov Reeb flows",
    after_help = "Exit codes: 0 success, 2 obstruction or failed \
                  verification, 1 error."
)]
struct Cli {
    /// Worker threads (overrides the ANOSOV_WORKERS environment variable;
    /// default: one per core). Results never depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(flatten)]
    tols: TolArgs,

    #[command(subcommand)]
    command: Command,
}

/// Validation-tolerance overrides. Each applies wherever the library uses
/// the corresponding tolerance; subcommands that never touch a quantity
/// ignore its override.
#[derive(Args, Clone, Copy)]
struct TolArgs {
    /// Symplecticity defect accepted when validating matrices.
    #[arg(long, global = true)]
    tol_symplectic: Option<f64>,
    /// Deviation of det from 1 accepted when validating matrices.
    #[arg(long, global = true)]
    tol_det_one: Option<f64>,
    /// Isotropy defect accepted for Lagrangian frames.
    #[arg(long, global = true)]
    tol_isotropy: Option<f64>,
    /// Relative defect accepted in block-form and invariance checks.
    #[arg(long, global = true)]
    tol_block: Option<f64>,
    /// Cutoff below which determinants count as degenerate.
    #[arg(long, global = true)]
    tol_degeneracy: Option<f64>,
    /// Power-iteration convergence tolerance for bundle computations.
    #[arg(long, global = true)]
    tol_convergence: Option<f64>,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(x) = self.tol_symplectic {
            t.symplectic = x;
        }
        if let Some(x) = self.tol_det_one {
            t.det_one = x;
        }
        if let Some(x) = self.tol_isotropy {
            t.isotropy = x;
        }
        if let Some(x) = self.tol_block {
            t.block = x;
        }
        if let Some(x) = self.tol_degeneracy {
            t.degeneracy = x;
        }
        t
    }

    fn convergence(&self) -> f64 {
        self.tol_convergence
            .unwrap_or(anosov::bundles::CONVERGENCE_TOL)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the orbit census of a model up to a period truncation.
    Census {
        /// Model spec file (JSON).
        #[arg(long)]
        model: PathBuf,
        /// Period truncation.
        #[arg(long)]
        tmax: f64,
        /// Census output path (JSON); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the exponential growth rate of orbit counts over a grid.
    Entropy {
        #[arg(long)]
        model: PathBuf,
        /// Truncation grid START:STOP:STEP, inclusive.
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
        /// Counts and fits as CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the polynomial growth exponent of orbit counts over a grid.
    Gamma {
        #[arg(long)]
        model: PathBuf,
        /// Truncation grid START:STOP:STEP, inclusive.
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the per-class, per-degree rank page of a census.
    E2page {
        /// Census file produced by `census` or assembled by hand.
        #[arg(long, conflicts_with = "model")]
        census: Option<PathBuf>,
        /// Model spec file; enumerates the census first (needs --tmax).
        #[arg(long, requires = "tmax")]
        model: Option<PathBuf>,
        #[arg(long)]
        tmax: Option<f64>,
        /// Rank rows as CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run structural identities over seeded random corpora.
    Verify {
        #[command(subcommand)]
        suite: VerifySuite,
    },
    /// Analyze a census for rank-pattern obstructions.
    Obstruct {
        #[command(subcommand)]
        target: ObstructTarget,
    },
    /// Check the roof-function entropy squeeze on a suspension model.
    Squeeze {
        #[arg(long)]
        model: PathBuf,
        /// Truncation grid START:STOP:STEP, inclusive.
        #[arg(long, value_parser = parse_grid)]
        grid: Grid,
    },
}

#[derive(Subcommand)]
enum VerifySuite {
    /// Block forms: recovery, determinant chain, determinant-sign parity.
    Blockform {
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Index engine: rotation oracle, iteration, additivity, parity.
    Cz {
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Parity-orientability equivalence, on a random corpus or a model.
    Parity {
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check a model census instead of the random corpus.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Census truncation for --model.
        #[arg(long, default_value_t = 6.0)]
        tmax: f64,
    },
}

#[derive(Subcommand)]
enum ObstructTarget {
    /// Compare a simply connected census against the ball rank pattern.
    Sphere {
        #[arg(long, conflicts_with = "model")]
        census: Option<PathBuf>,
        #[arg(long, requires = "tmax")]
        model: Option<PathBuf>,
        #[arg(long)]
        tmax: Option<f64>,
        /// Highest degree compared.
        #[arg(long, default_value_t = 51)]
        max_degree: i64,
        /// Report output path (JSON); stdout summary either way.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test a census against a homology rank bound.
    Bounded {
        #[arg(long, conflicts_with = "model")]
        census: Option<PathBuf>,
        #[arg(long, requires = "tmax")]
        model: Option<PathBuf>,
        #[arg(long)]
        tmax: Option<f64>,
        /// Rank bound C; the analyzer needs C + 1 orbits.
        #[arg(long, default_value_t = 5)]
        bound: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// An inclusive arithmetic truncation grid.
#[derive(Debug, Clone)]
struct Grid {
    points: Vec<f64>,
}

fn parse_grid(text: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("grid must be START:STOP:STEP, got '{text}'"));
    };
    let parse = |name: &str, s: &str| {
        s.parse::<f64>()
            .map_err(|_| format!("grid {name} '{s}' is not a number"))
    };
    let start = parse("start", start)?;
    let stop = parse("stop", stop)?;
    let step = parse("step", step)?;
    if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
        return Err("grid endpoints and step must be finite".into());
    }
    if step <= 0.0 {
        return Err(format!("grid step must be positive, got {step}"));
    }
    if stop < start {
        return Err(format!("grid stop {stop} is below start {start}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    let points = (0..count).map(|i| start + i as f64 * step).collect();
    Ok(Grid { points })
}

fn read_model(path: &Path) -> Result<Model> {
    let spec = ModelSpec::read_file(path)?;
    models::build(&spec)
}

fn load_census(
    census: &Option<PathBuf>,
    model: &Option<PathBuf>,
    tmax: Option<f64>,
) -> Result<CensusTable> {
    match (census, model) {
        (Some(path), None) => CensusTable::read_file(path),
        (None, Some(path)) => {
            let t = tmax.ok_or_else(|| {
                Error::BadArgument("--model needs --tmax to enumerate a census".into())
            })?;
            read_model(path)?.census(t)
        }
        _ => Err(Error::BadArgument(
            "provide exactly one of --census or --model".into(),
        )),
    }
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Counts over a grid: one enumeration pass for suspensions, per-point
/// closed-form counts for the other models.
fn grid_counts(model: &Model, grid: &Grid) -> Result<Vec<(f64, BigUint, BigUint)>> {
    match model {
        Model::Suspension(s) => s.growth_samples(&grid.points),
        other => grid
            .points
            .iter()
            .map(|&t| Ok((t, other.pair_count(t)?, other.good_pair_count(t)?)))
            .collect(),
    }
}

fn growth_csv(samples: &[(f64, BigUint, BigUint)], est: &GrowthEstimate) -> String {
    let mut out = String::from("T,P,Pg,rate_est,slope_est\n");
    for (t, p, pg) in samples {
        out.push_str(&format!(
            "{:.16e},{},{},{:.16e},{:.16e}\n",
            t, p, pg, est.exp_rate.slope, est.loglog_slope.slope
        ));
    }
    out
}

fn fit_over_grid(model: &Model, grid: &Grid) -> Result<(Vec<(f64, BigUint, BigUint)>, GrowthEstimate)> {
    let samples = grid_counts(model, grid)?;
    let est = fit_growth(
        samples
            .iter()
            .map(|(t, p, _)| GrowthSample {
                t: *t,
                count: p.clone(),
            })
            .collect(),
    )?;
    Ok((samples, est))
}

fn configure_workers(cli_workers: Option<usize>) -> Result<()> {
    let n = match cli_workers {
        Some(n) => Some(n),
        None => match std::env::var("ANOSOV_WORKERS") {
            Ok(text) => Some(text.parse::<usize>().map_err(|_| {
                Error::BadArgument(format!(
                    "ANOSOV_WORKERS must be a positive integer, got '{text}'"
                ))
            })?),
            Err(_) => None,
        },
    };
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(Error::BadArgument("worker count must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::BadArgument(format!("worker pool: {e}")))
}

fn run(cli: Cli) -> Result<u8> {
    configure_workers(cli.workers)?;
    let tols = cli.tols.tolerances();
    match cli.command {
        Command::Census { model, tmax, out } => {
            let table = read_model(&model)?.census(tmax)?;
            let (p, pg) = table.counts();
            write_or_print(&out, &table.to_json())?;
            if let Some(path) = &out {
                println!(
                    "census: {p} records ({pg} good) up to T = {tmax} -> {}",
                    path.display()
                );
            }
            Ok(0)
        }
        Command::Entropy { model, grid, out } => {
            let model = read_model(&model)?;
            let (samples, est) = fit_over_grid(&model, &grid)?;
            write_or_print(&out, &growth_csv(&samples, &est))?;
            if out.is_some() {
                println!(
                    "entropy: rate {:.6} (stderr {:.2e}, rms {:.2e}) over {} points",
                    est.exp_rate.slope,
                    est.exp_rate.stderr,
                    est.exp_rate.rms,
                    samples.len()
                );
            }
            Ok(0)
        }
        Command::Gamma { model, grid, out } => {
            let model = read_model(&model)?;
            let (samples, est) = fit_over_grid(&model, &grid)?;
            write_or_print(&out, &growth_csv(&samples, &est))?;
            if out.is_some() {
                println!(
                    "gamma: slope {:.6} (stderr {:.2e}, rms {:.2e}), growth {}",
                    est.loglog_slope.slope,
                    est.loglog_slope.stderr,
                    est.loglog_slope.rms,
                    if est.infinite_growth {
                        "faster than any polynomial"
                    } else {
                        "polynomial"
                    }
                );
            }
            Ok(0)
        }
        Command::E2page {
            census,
            model,
            tmax,
            out,
        } => {
            let table = load_census(&census, &model, tmax)?;
            let page = build_e2_page(&table)?;
            write_or_print(&out, &page.to_csv())?;
            if out.is_some() {
                let verdict = degeneration_check(&page);
                println!(
                    "e2page: {} classes, total rank {}, degeneration {}",
                    page.classes().len(),
                    page.total_rank(),
                    if verdict.passed() {
                        "coherent"
                    } else {
                        "NOT coherent"
                    }
                );
            }
            Ok(0)
        }
        Command::Verify { suite } => {
            let report = match suite {
                VerifySuite::Blockform { trials, seed } => {
                    verify::blockform_suite(seed, trials, &tols)?
                }
                VerifySuite::Cz { trials, seed } => verify::cz_suite(seed, trials)?,
                VerifySuite::Parity {
                    trials,
                    seed,
                    model,
                    tmax,
                } => match model {
                    Some(path) => {
                        let table = read_model(&path)?.census(tmax)?;
                        verify::census_parity_check(&table)?
                    }
                    None => verify::parity_suite(seed, trials, cli.tols.convergence())?,
                },
            };
            print!("{}", report.render());
            Ok(if report.all_passed() {
                0
            } else {
                EXIT_OBSTRUCTION
            })
        }
        Command::Obstruct { target } => match target {
            ObstructTarget::Sphere {
                census,
                model,
                tmax,
                max_degree,
                out,
            } => {
                let table = load_census(&census, &model, tmax)?;
                let report = anosov::homology::sphere_obstruction_analyzer(&table, max_degree)?;
                if let Some(path) = &out {
                    std::fs::write(path, report.to_json())?;
                }
                for f in &report.findings {
                    println!("{}: {}", f.code, f.detail);
                }
                Ok(if report.obstruction_found {
                    EXIT_OBSTRUCTION
                } else {
                    0
                })
            }
            ObstructTarget::Bounded {
                census,
                model,
                tmax,
                bound,
                out,
            } => {
                let table = load_census(&census, &model, tmax)?;
                let report = anosov::homology::bounded_homology_analyzer(&table, bound)?;
                if let Some(path) = &out {
                    std::fs::write(path, report.to_json())?;
                }
                for f in &report.findings {
                    println!("{}: {}", f.code, f.detail);
                }
                Ok(if report.obstruction_found {
                    EXIT_OBSTRUCTION
                } else {
                    0
                })
            }
        },
        Command::Squeeze { model, grid } => {
            let model = read_model(&model)?;
            let (lower, upper) = model_squeeze_check(&model, &grid.points)?;
            println!("squeeze: lower defect {lower:.6}, upper defect {upper:.6}");
            if lower < -0.1 || upper < -0.1 {
                println!("squeeze: VIOLATED beyond fit error");
                Ok(EXIT_OBSTRUCTION)
            } else {
                println!("squeeze: holds within fit error");
                Ok(0)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successes; anything else is a config
            // error, reported on the error exit code.
            use clap::error::ErrorKind;
            let kind = e.kind();
            if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
