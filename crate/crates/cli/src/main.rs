//! Command-line front end: config parsing, subcommand dispatch, deterministic
//! seeding, and result emission.
//!
//! All randomness flows from the seed in the config file (or the `--seed`
//! override); nothing is seeded from the clock.

mod config;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{Overrides, ParsedConfig};
use copula_lab::copula::classify_stationary_points;
use copula_lab::diagnostics::chronic_rejection_check;
use copula_lab::experiments::{run_study, write_outputs};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "copula-lab",
    about = "Copula priors, dependence-retention diagnostics, and posterior studies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Path to the TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of repetitions per cell.
    #[arg(long)]
    repetitions: Option<usize>,
    /// Output directory (default: out/<subcommand>).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (falls back to COPULA_LAB_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Reject unknown config keys (default).
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Ignore unknown config keys.
    #[arg(long)]
    lenient: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a prior dependence structure against the likelihood's limiting
    /// tau structure.
    Diagnose(CommonArgs),
    /// Posterior Kendall-tau retention study for the multinomial model.
    TauRetention(CommonArgs),
    /// HPD coverage study for the multinomial model.
    Coverage(CommonArgs),
    /// HPD coverage study for the gamma model.
    GammaCoverage(CommonArgs),
    /// Posterior-mode convergence study for the regression model.
    ModeConvergence(CommonArgs),
    /// HPD coverage and area study for the regression model.
    RegressionCoverage(CommonArgs),
    /// Locate and classify stationary points of a copula log-density ratio.
    CopulaInspect(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Diagnose(_) => "diagnose",
            Command::TauRetention(_) => "tau-retention",
            Command::Coverage(_) => "coverage",
            Command::GammaCoverage(_) => "gamma-coverage",
            Command::ModeConvergence(_) => "mode-convergence",
            Command::RegressionCoverage(_) => "regression-coverage",
            Command::CopulaInspect(_) => "copula-inspect",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Diagnose(a)
            | Command::TauRetention(a)
            | Command::Coverage(a)
            | Command::GammaCoverage(a)
            | Command::ModeConvergence(a)
            | Command::RegressionCoverage(a)
            | Command::CopulaInspect(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let args = cli.command.args().clone();
    let out_dir = args.output.clone().unwrap_or_else(|| PathBuf::from("out").join(name));
    match dispatch(name, &args, &out_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let record = ErrorRecord {
                status: "FAILED",
                subcommand: name,
                error: format!("{err:#}"),
            };
            let json = serde_json::to_string_pretty(&record)
                .unwrap_or_else(|_| format!("{{\"status\":\"FAILED\",\"error\":\"{err}\"}}"));
            eprintln!("{json}");
            if std::fs::create_dir_all(&out_dir).is_ok() {
                let _ = std::fs::write(out_dir.join("FAILED.json"), format!("{json}\n"));
            }
            ExitCode::FAILURE
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord {
    status: &'static str,
    subcommand: &'static str,
    error: String,
}

fn threads_override(args: &CommonArgs) -> Option<usize> {
    args.threads.or_else(|| {
        std::env::var("COPULA_LAB_THREADS").ok().and_then(|v| v.parse().ok())
    })
}

fn dispatch(name: &str, args: &CommonArgs, out_dir: &Path) -> Result<()> {
    let strict = !args.lenient;
    let overrides = Overrides {
        seed: args.seed,
        repetitions: args.repetitions,
        threads: threads_override(args),
    };
    let parsed = config::parse_config(&args.config, name, &overrides, strict)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    // Echo the input config so any output directory can reproduce its run
    // (study manifests additionally embed the resolved configuration).
    std::fs::copy(&args.config, out_dir.join("config_echo.toml"))
        .with_context(|| "echoing the config into the output directory")?;
    match parsed {
        ParsedConfig::Study(cfg) => {
            let result = run_study(&cfg)?;
            let written = write_outputs(&result, out_dir)?;
            for path in &written {
                println!("wrote {}", path.display());
            }
            for cell in &result.cells {
                let label = match (&cell.rho, &cell.case, &cell.prior) {
                    (Some(rho), _, _) => format!("rho={rho}"),
                    (_, Some(case), Some(prior)) => format!("case={case} prior={prior}"),
                    (_, Some(case), None) => format!("case={case}"),
                    _ => String::new(),
                };
                println!(
                    "n={} {label} {}={:.4} (se {:.4}, reps {}, failures {})",
                    cell.sample_size,
                    cell.statistic,
                    cell.estimate,
                    cell.mc_se,
                    cell.repetitions,
                    cell.failures
                );
            }
            Ok(())
        }
        ParsedConfig::Diagnose(spec) => {
            let model = spec.model.build()?;
            let prior_vine = spec.prior.vine()?;
            let probe = spec.probe.build(&spec.prior)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let verdict =
                chronic_rejection_check(&prior_vine, &model, &probe, spec.tolerance, &mut rng)?;
            #[derive(Serialize)]
            struct DiagnoseOutput<'a> {
                seed: u64,
                tolerance: f64,
                prior_edge_taus: Vec<(String, f64)>,
                verdict: &'a copula_lab::diagnostics::RejectionVerdict,
            }
            let output = DiagnoseOutput {
                seed: spec.seed,
                tolerance: spec.tolerance,
                prior_edge_taus: prior_vine
                    .edges()
                    .iter()
                    .map(|e| (e.label(), e.tau))
                    .collect(),
                verdict: &verdict,
            };
            let json = serde_json::to_string_pretty(&output)?;
            println!("{json}");
            let mut file = std::fs::File::create(out_dir.join("verdict.json"))?;
            writeln!(file, "{json}")?;
            Ok(())
        }
        ParsedConfig::CopulaInspect(spec) => {
            let c1 = spec.copula_one.build()?;
            let c2 = spec.copula_two.build()?;
            let scan = classify_stationary_points(&c1, &c2, spec.grid)?;
            let path = out_dir.join("stationary_points.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["u1", "u2", "class", "gradient_norm"])?;
            for p in &scan.points {
                let class = match p.class {
                    copula_lab::copula::StationaryClass::Maximum => "max",
                    copula_lab::copula::StationaryClass::Minimum => "min",
                    copula_lab::copula::StationaryClass::Saddle => "saddle",
                };
                w.write_record([
                    format!("{}", p.location[0]),
                    format!("{}", p.location[1]),
                    class.to_string(),
                    format!("{:.3e}", p.gradient_norm),
                ])?;
                println!(
                    "({:.6}, {:.6})  {class}  |grad| = {:.2e}",
                    p.location[0], p.location[1], p.gradient_norm
                );
            }
            w.flush()?;
            if scan.degenerate {
                println!("degenerate: the two copulas have identical log-densities");
            }
            println!(
                "{} stationary points, {} seeds skipped; wrote {}",
                scan.points.len(),
                scan.skipped_seeds,
                path.display()
            );
            Ok(())
        }
    }
}
