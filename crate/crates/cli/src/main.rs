use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scns_core::harness::oracle::{run_oracle, ORACLE_CASES};
use scns_core::harness::selftest::selftest;
use scns_core::harness::{parse_config, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "scns", version, about = "Monte Carlo experiments for stochastic compressible Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the base configuration (any sweep section is ignored).
    Run {
        config: PathBuf,
        /// Worker threads; overrides the config file.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run every point of the configured sweep.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the quick invariant suite.
    Selftest,
    /// Print reference values from a brute-force oracle.
    Oracle {
        /// One of: dft, heat, mass-derivative, energy-quadrature, mollified-bounds, theta-bound, truncation-lipschitz.
        case: String,
    },
}

fn load(path: &PathBuf, workers: Option<usize>) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut cfg = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(w) = workers {
        if w == 0 {
            return Err("--workers must be at least 1".into());
        }
        cfg.workers = w;
    }
    Ok(cfg)
}

fn execute(cfg: &ExperimentConfig) -> Result<bool, String> {
    let out = run_experiment(cfg).map_err(|e| e.to_string())?;
    for (entry, report) in out.manifest.points.iter().zip(&out.reports) {
        let value = entry.sweep_value.map_or("base".to_string(), |v| format!("{v}"));
        println!(
            "{} [{value}]: {} paths, {} aborted, tau_R fraction {:.4}, {}",
            entry.dir,
            report.paths,
            report.aborted,
            report.tau_r_fraction,
            if entry.passed { "ok" } else { "FAILED" }
        );
        for a in report.hard_assertions.iter().filter(|a| !a.passed) {
            println!("  assertion {} failed: {}", a.name, a.detail);
        }
    }
    println!("artifacts in {}", out.dir.display());
    Ok(out.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, workers } => load(&config, workers).and_then(|mut c| {
            c.sweep = None;
            execute(&c)
        }),
        Command::Sweep { config, workers } => load(&config, workers).and_then(|c| {
            if c.sweep.is_none() {
                return Err(format!("{}: no [sweep] section", config.display()));
            }
            execute(&c)
        }),
        Command::Selftest => selftest().map_err(|e| e.to_string()).map(|checks| {
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<40} {:.3e} (tol {:.0e})", c.name, c.value, c.tolerance);
            }
            checks.iter().all(|c| c.passed)
        }),
        Command::Oracle { case } => run_oracle(&case)
            .map_err(|e| format!("{e}\nknown cases: {}", ORACLE_CASES.join(", ")))
            .map(|rows| {
                for (name, v) in rows {
                    println!("{name:<40} {v:.15e}");
                }
                true
            }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
