//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 runtime failure.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load_config, Scenario, ValidationReport};
use crate::coverage::{write_coverage_csv, CoverageGrid};
use crate::package::{write_package, PackageError};
use crate::pipeline::{run_coverage, run_scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "raytwin", version, about = "Deterministic radio ray tracer and channel dataset generator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration and print a JSON report.
    Validate { config: PathBuf },
    /// Run the full scenario and write a package.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute one coverage grid; writes the image and a CSV next to it.
    Coverage {
        config: PathBuf,
        #[arg(long)]
        grid: String,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn init_threads(threads: Option<usize>) -> Result<(), String> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err("--threads must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn load(config: &Path, seed: Option<u64>) -> Result<Scenario, ValidationReport> {
    let (mut cfg, base) = load_config(config).map_err(|i| ValidationReport::from_issues(vec![i]))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Scenario::build(&cfg, &base).map_err(ValidationReport::from_issues)
}

fn report_invalid(r: &ValidationReport) -> i32 {
    for i in &r.issues {
        eprintln!("error: {i}");
    }
    EXIT_INVALID
}

pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Validate { config } => {
            let report = match load(&config, None) {
                Ok(_) => ValidationReport::from_issues(Vec::new()),
                Err(r) => r,
            };
            println!("{}", report.to_json());
            if report.ok {
                EXIT_OK
            } else {
                EXIT_INVALID
            }
        }
        Command::Run {
            config,
            output,
            threads,
            seed,
        } => {
            if let Err(e) = init_threads(threads) {
                eprintln!("error: {e}");
                return EXIT_RUNTIME;
            }
            if output.exists() && std::fs::read_dir(&output).map_or(true, |mut d| d.next().is_some()) {
                eprintln!("error: dataset_io: {}", PackageError::PackageExists(output));
                return EXIT_RUNTIME;
            }
            let scenario = match load(&config, seed) {
                Ok(s) => s,
                Err(r) => return report_invalid(&r),
            };
            let (results, summary) = match run_scenario(&scenario) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_RUNTIME;
                }
            };
            let pkg = match write_package(&results, &output) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: dataset_io: {e}");
                    return EXIT_RUNTIME;
                }
            };
            for (id, n) in &summary.link_paths {
                println!("link {id}: {n} paths");
            }
            println!("grids: {}", results.grids.len());
            println!(
                "rays launched: {}, segments: {}, candidates: {}",
                summary.stats.rays_launched, summary.stats.segments, summary.stats.candidates
            );
            println!("runtime: {:.3} s", summary.elapsed.as_secs_f64());
            println!("package: {} ({} files)", pkg.root.display(), pkg.manifest.len() + 1);
            EXIT_OK
        }
        Command::Coverage {
            config,
            grid,
            output,
            threads,
        } => {
            if let Err(e) = init_threads(threads) {
                eprintln!("error: {e}");
                return EXIT_RUNTIME;
            }
            let scenario = match load(&config, None) {
                Ok(s) => s,
                Err(r) => return report_invalid(&r),
            };
            let (g, image) = match run_coverage(&scenario, &grid) {
                Ok(r) => r,
                Err(e @ crate::pipeline::PipelineError::UnknownGrid { .. }) => {
                    eprintln!("error: {e}");
                    return EXIT_INVALID;
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_RUNTIME;
                }
            };
            match write_coverage_files(&g, &image, &output) {
                Ok(csv) => {
                    println!("wrote {} and {}", output.display(), csv.display());
                    EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: coverage: {e}");
                    EXIT_RUNTIME
                }
            }
        }
    }
}

fn write_coverage_files(g: &CoverageGrid, image: &[u8], output: &Path) -> Result<PathBuf, String> {
    let csv_path = output.with_extension("csv");
    std::fs::write(output, image).map_err(|e| format!("{}: {e}", output.display()))?;
    let f = std::fs::File::create(&csv_path).map_err(|e| format!("{}: {e}", csv_path.display()))?;
    write_coverage_csv(&g.cells(), std::io::BufWriter::new(f)).map_err(|e| format!("{}: {e}", csv_path.display()))?;
    Ok(csv_path)
}
