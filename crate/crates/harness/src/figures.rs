//! Preset configs for the five figures.
//!
//! Figure 4 is the `(κ, q)` sweep and lives in [`crate::sweep`].

use std::path::Path;

use anyhow::bail;
use serde_json::json;

use crate::config::{BoundSpec, Decimal, ExperimentConfig, GridSpec, SpectrumSpec, BSpec, DEFAULT_PRECISION_BITS};
use crate::report::write_json;
use crate::run::{execute, write_run, RunResult};
use crate::sweep::{run_sweep, SweepConfig};

pub const FIG5_DEGREES: [usize; 5] = [3, 5, 7, 9, 13];

fn base(id: &str, spectrum: SpectrumSpec, functions: &[&str]) -> ExperimentConfig {
    ExperimentConfig {
        id: id.to_string(),
        spectrum,
        b: BSpec::Ones,
        functions: functions.iter().map(|s| s.to_string()).collect(),
        k_max: None,
        precision_bits: DEFAULT_PRECISION_BITS,
        grid: GridSpec::default(),
        bounds: BoundSpec::default(),
        lanczos_or: false,
        output_dir: None,
        seed: 0,
    }
}

/// The three condition-number-100 spectra of dimension 100.
pub fn kappa100_spectra() -> Vec<SpectrumSpec> {
    vec![
        SpectrumSpec::Uniform {
            d: 100,
            lo: Decimal::from("1"),
            hi: Decimal::from("100"),
        },
        SpectrumSpec::Geometric {
            d: 100,
            lo: Decimal::from("1"),
            hi: Decimal::from("100"),
        },
        SpectrumSpec::ClusterOutlier {
            d: 100,
            outlier: Decimal::from("1"),
            cluster_lo: Decimal::from("90"),
            cluster_hi: Decimal::from("100"),
        },
    ]
}

pub const FIG1_FUNCTIONS: [&str; 3] = ["inv_power:1", "sqrt", "exp:t=1,sign=-1"];
pub const FIG2_FUNCTIONS: [&str; 2] = ["pade_exp:m=5,t=1,sign=-1", "zolotarev:r=13"];
pub const FIG3_FUNCTIONS: [&str; 3] = ["inv_power:1", "rational:numer=[1];poles=[-0.5,2]", "sign"];

pub fn fig1_configs() -> Vec<ExperimentConfig> {
    kappa100_spectra()
        .into_iter()
        .map(|s| {
            let mut c = base(&format!("fig1-{}", s.label()), s, &FIG1_FUNCTIONS);
            c.bounds.uniform = true;
            c
        })
        .collect()
}

/// Runs to the Krylov grade: the rational-function bound only overtakes the uniform bound once
/// the discrete spectrum is resolved.
pub fn fig2_configs() -> Vec<ExperimentConfig> {
    kappa100_spectra()
        .into_iter()
        .map(|s| {
            let mut c = base(&format!("fig2-{}", s.label()), s, &FIG2_FUNCTIONS);
            c.k_max = Some(100);
            c.bounds.thm1 = true;
            c.bounds.uniform = true;
            c
        })
        .collect()
}

pub fn fig3_spectrum() -> SpectrumSpec {
    SpectrumSpec::IndefiniteSymmetric {
        d: 100,
        inner: Decimal::from("1"),
        outer: Decimal::from("100"),
    }
}

pub fn fig3_configs() -> Vec<ExperimentConfig> {
    vec![base("fig3-indefinite", fig3_spectrum(), &FIG3_FUNCTIONS)]
}

/// 10 eigenvalues near 1 and 90 near 100, each cluster 1% of its centre wide.
pub fn fig5_spectrum() -> SpectrumSpec {
    SpectrumSpec::TwoClusters {
        d1: 10,
        c1: Decimal::from("1"),
        width1: Decimal::from("0.01"),
        d2: 90,
        c2: Decimal::from("100"),
        width2: Decimal::from("1"),
    }
}

pub fn fig5_configs() -> Vec<ExperimentConfig> {
    let zolo: Vec<String> = FIG5_DEGREES.iter().map(|r| format!("zolotarev:r={r}")).collect();
    let mut functions = vec!["sqrt".to_string()];
    functions.extend(zolo.iter().cloned());
    let mut c = base("fig5-two-clusters", fig5_spectrum(), &[]);
    c.functions = functions;
    c.bounds.triangle = zolo;
    vec![c]
}

pub fn figure_configs(id: u32) -> anyhow::Result<Vec<ExperimentConfig>> {
    Ok(match id {
        1 => fig1_configs(),
        2 => fig2_configs(),
        3 => fig3_configs(),
        5 => fig5_configs(),
        4 => bail!("figure 4 is the sweep; use `lanfa sweep` or run_figure"),
        _ => bail!("unknown figure {id}; expected 1..5"),
    })
}

/// Runs every config of figure `id` and writes `index.json` under `out`.
pub fn run_figure(id: u32, out: &Path) -> anyhow::Result<Vec<RunResult>> {
    std::fs::create_dir_all(out)?;
    if id == 4 {
        run_sweep(&SweepConfig::default(), out)?;
        return Ok(vec![]);
    }
    let mut results = Vec::new();
    let mut entries = Vec::new();
    for cfg in figure_configs(id)? {
        let res = execute(&cfg)?;
        entries.extend(write_run(out, &res)?);
        results.push(res);
    }
    write_json(&out.join("index.json"), &json!({ "figure": id, "runs": entries }))?;
    Ok(results)
}
