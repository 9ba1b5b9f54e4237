use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::bail;
use clap::{Parser, Subcommand};
use log::{info, warn};

use lanfa::config::{precision_override, Decimal, ExperimentConfig, DEFAULT_PRECISION_BITS};
use lanfa::figures::run_figure;
use lanfa::run::run;
use lanfa::sweep::{run_sweep, SweepConfig};
use lanfa::verify::{verify, Suite};
use lanfa_core::xlinalg::Precision;

#[derive(Parser)]
#[command(name = "lanfa", version, about = "Lanczos-FA near-optimality experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one JSON experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce one of the five figures.
    Fig {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=5))]
        id: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an invariant suite; exits nonzero on any failed check.
    Verify {
        #[arg(long)]
        suite: Suite,
    },
    /// Worst-case optimality ratios over a (κ, q) grid.
    Sweep {
        #[arg(long, default_value = "inv_power")]
        func: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        qs: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1e2,1e3,1e4,1e5,1e6")]
        kappas: Vec<f64>,
        #[arg(long, default_value_t = 16)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        d: usize,
        #[arg(long, default_value_t = 60)]
        k_max: usize,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse().cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Cmd) -> anyhow::Result<bool> {
    match cmd {
        Cmd::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let Some(out) = out.or_else(|| cfg.output_dir.clone()) else {
                bail!("no output directory: pass --out or set output_dir in the config");
            };
            let res = run(&cfg, &out)?;
            for fr in &res.functions {
                let max = fr.report.max_ratio().map(|r| r.to_f64());
                info!("{} {}: max ratio {max:?}", cfg.id, fr.label);
            }
        }
        Cmd::Fig { id, out } => {
            run_figure(id, &out)?;
            info!("figure {id} written to {}", out.display());
        }
        Cmd::Verify { suite } => {
            let prec = Precision::new(precision_override()?.unwrap_or(DEFAULT_PRECISION_BITS))?;
            let rep = verify(suite, &prec)?;
            for c in &rep.checks {
                if c.passed {
                    info!("{c}");
                } else {
                    warn!("{c}");
                }
            }
            let failed = rep.failures().count();
            println!(
                "suite {}: {} checks, {} failed",
                suite.name(),
                rep.checks.len(),
                failed
            );
            return Ok(rep.passed());
        }
        Cmd::Sweep {
            func,
            qs,
            kappas,
            budget,
            seed,
            d,
            k_max,
            out,
        } => {
            if func != "inv_power" {
                bail!("sweep supports only --func inv_power, got {func:?}");
            }
            let cfg = SweepConfig {
                kappas: kappas.into_iter().map(Decimal::from).collect(),
                qs,
                d,
                k_max,
                budget,
                seed,
                ..SweepConfig::default()
            };
            run_sweep(&cfg, &out)?;
            info!("sweep written to {}", out.display());
        }
    }
    Ok(true)
}
