//! Execution of a single experiment config.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use log::info;
use rayon::prelude::*;
use serde_json::json;

use lanfa_core::bounds::{thm1_prefactor, thm1_series, triangle_bound_prepared, uniform_bound_series, TriangleCandidate};
use lanfa_core::instances::{adversarial_b, ones_b, spectrum, AdversarialConfig, ProblemInstance};
use lanfa_core::krylov::{krylov_grade, lanczos, Reorth};
use lanfa_core::matfunc::{exact_apply, lanczos_fa_iterates, ScalarFunction};
use lanfa_core::optimal::{
    is_iteration_failure, lanczos_or_errors, opt2_errors_from, ratio_from_errors, Method,
};
use lanfa_core::xlinalg::{Precision, XVector};

use crate::config::{BSpec, ExperimentConfig, FunctionSpec, DEFAULT_K_MAX_CAP};
use crate::report::{write_json, Cell, ConvergenceReport, ReportRow};

/// Report for one function of a run, plus what is needed to describe it.
#[derive(Clone, Debug)]
pub struct FunctionRun {
    pub spec: String,
    pub label: String,
    pub function: ScalarFunction,
    pub report: ConvergenceReport,
    pub meta: serde_json::Value,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub instance: ProblemInstance,
    pub k_max: usize,
    pub functions: Vec<FunctionRun>,
    pub b_meta: serde_json::Value,
}

pub fn build_instance(cfg: &ExperimentConfig, prec: &Precision) -> anyhow::Result<(ProblemInstance, serde_json::Value)> {
    let lambda = spectrum(&cfg.spectrum.kind(prec)?, prec).context("building the spectrum")?;
    match &cfg.b {
        BSpec::Ones => {
            let w = ones_b(lambda.len(), prec)?;
            Ok((ProblemInstance::new(lambda, w, prec.clone())?, json!({"kind": "ones"})))
        }
        BSpec::Explicit { w } => {
            if w.len() != lambda.len() {
                bail!("field `b.w`: expected {} coefficients, got {}", lambda.len(), w.len());
            }
            let w = w.iter().map(|x| x.real(prec)).collect::<anyhow::Result<Vec<_>>>()?;
            Ok((
                ProblemInstance::new(lambda, XVector::new(w)?, prec.clone())?,
                json!({"kind": "explicit"}),
            ))
        }
        BSpec::Adversarial { seed, budget } => {
            let lo = &lambda[0];
            let hi = &lambda[lambda.len() - 1];
            let f = FunctionSpec::parse(&cfg.functions[0])?.resolve(lo, hi, prec)?;
            let acfg = AdversarialConfig {
                k_max: cfg.k_max.unwrap_or(DEFAULT_K_MAX_CAP.min(lambda.len())),
                budget: *budget,
                seed: *seed,
                method: Method::LanczosFa,
            };
            let res = adversarial_b(&lambda, &f, &acfg, prec)?;
            let meta = json!({
                "kind": "adversarial",
                "seed": seed,
                "budget": budget,
                "restarts": acfg.restarts(),
                "evaluations": res.evaluations,
                "search": "multi-start coordinate hill climbing, factors x2 and x1/2",
                "searched_function": cfg.functions[0],
                "worst_ratio": res.worst_ratio.to_sci(25),
                "worst_k": res.worst_k,
                "baseline_ratio": res.baseline_ratio.to_sci(25),
            });
            Ok((ProblemInstance::new(lambda, res.w, prec.clone())?, meta))
        }
    }
}

/// Computes every report of `cfg` without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> anyhow::Result<RunResult> {
    cfg.validate()?;
    let prec = cfg.precision()?;
    let (inst, b_meta) = build_instance(cfg, &prec)?;
    let grade = krylov_grade(&inst);
    let k_max = cfg.k_max.unwrap_or(grade.min(DEFAULT_K_MAX_CAP)).max(1);
    let functions = cfg
        .functions
        .iter()
        .map(|s| {
            info!("{}: {s}", cfg.id);
            run_function(cfg, &inst, s, k_max).with_context(|| format!("function {s:?} in {}", cfg.id))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(RunResult {
        config: cfg.clone(),
        instance: inst,
        k_max,
        functions,
        b_meta,
    })
}

fn run_function(cfg: &ExperimentConfig, inst: &ProblemInstance, spec_text: &str, k_max: usize) -> anyhow::Result<FunctionRun> {
    let prec = inst.precision();
    let (lo, hi) = (inst.lambda_min(), inst.lambda_max());
    let spec = FunctionSpec::parse(spec_text)?;
    let f = spec.resolve(lo, hi, prec)?;
    let rational = f.as_rational(prec);

    let target = exact_apply(inst, &f)?;
    let target_norm = target.norm2();
    let dec = lanczos(inst, k_max, Reorth::Full)?;
    let opt = opt2_errors_from(&dec, &target, k_max)?;
    let fa = lanczos_fa_iterates(&dec, &f, k_max, prec)
        .into_par_iter()
        .map(|it| match it {
            Ok(x) => Ok(Some(target.sub(&x)?.norm2())),
            Err(e) if is_iteration_failure(&e) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut notes = spec.artifact_notes();
    let mut meta = json!({"spec": spec_text, "resolved": f.to_string()});

    let thm1: Vec<Cell> = match (&rational, cfg.bounds.thm1) {
        (Some(r), true) => {
            let pre = thm1_prefactor(inst, r)?;
            if !pre.hypothesis_holds {
                notes.push("complex poles: thm1 column uses the extended kappa, hypothesis does not hold".into());
            }
            meta["thm1"] = json!({
                "prefactor": pre.prefactor.to_sci(25),
                "kappas": pre.kappas.iter().map(|k| k.to_sci(25)).collect::<Vec<_>>(),
                "gamma": pre.gamma.to_sci(25),
                "eta": pre.eta.to_sci(25),
                "hypothesis_holds": pre.hypothesis_holds,
            });
            thm1_series(inst, r, k_max)?
                .into_iter()
                .map(|rep| rep.map(|rep| rep.bound).into())
                .collect()
        }
        (None, true) => bail!("thm1 bound requested for non-rational {f}"),
        _ => vec![Cell::Empty; k_max],
    };

    let uniform: Vec<Cell> = if cfg.bounds.uniform {
        meta["uniform_grid"] = json!(cfg.grid.sup);
        uniform_bound_series(inst, &f, k_max, cfg.grid.sup)?
            .into_iter()
            .map(Cell::Value)
            .collect()
    } else {
        vec![Cell::Empty; k_max]
    };

    let triangle: Vec<Cell> = if cfg.bounds.triangle.is_empty() {
        vec![Cell::Empty; k_max]
    } else {
        let candidates = cfg
            .bounds
            .triangle
            .iter()
            .map(|c| {
                let cs = FunctionSpec::parse(c)?;
                notes.extend(cs.artifact_notes());
                let r = cs
                    .resolve(lo, hi, prec)?
                    .as_rational(prec)
                    .with_context(|| format!("triangle candidate {c:?} is not rational"))?;
                Ok(TriangleCandidate::new(inst, &f, r, cfg.grid.sup)?)
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        meta["triangle_candidates"] = json!(cfg.bounds.triangle);
        let b_norm = inst.b_norm();
        (1..=k_max)
            .map(|k| triangle_bound_prepared(k, &b_norm, &opt, &candidates).ok().map(|(v, _)| v).into())
            .collect()
    };

    let or: Vec<Cell> = match (&rational, cfg.lanczos_or) {
        (Some(r), true) => lanczos_or_errors(inst, r, k_max)?
            .into_iter()
            .map(|e| match e {
                Ok(v) => Cell::Value(v),
                Err(_) => Cell::Failed,
            })
            .collect(),
        (None, true) => bail!("Lanczos-OR requested for non-rational {f}"),
        _ => vec![Cell::Empty; k_max],
    };

    let rows = (0..k_max)
        .map(|i| ReportRow {
            k: i + 1,
            ratio: ratio_from_errors(fa[i].as_ref(), &opt[i], &target_norm, prec),
            err_lanczos_fa: fa[i].clone(),
            err_opt2: opt[i].clone(),
            bound_thm1: thm1[i].clone(),
            bound_uniform: uniform[i].clone(),
            bound_triangle: triangle[i].clone(),
            err_lanczos_or: or[i].clone(),
        })
        .collect();
    meta["artifact_choices"] = json!(notes);
    Ok(FunctionRun {
        spec: spec_text.to_string(),
        label: spec.label(),
        function: f,
        report: ConvergenceReport { rows },
        meta,
    })
}

/// Run directory of one function.
pub fn function_dir(root: &Path, cfg: &ExperimentConfig, label: &str) -> PathBuf {
    root.join(dir_name(&cfg.id)).join(label)
}

/// Experiment ids keep hyphens; anything else outside `[A-Za-z0-9_]` becomes `_`.
fn dir_name(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_') { c } else { '_' })
        .collect()
}

/// Writes `report.csv` and `meta.json` for every function under `root`,
/// and returns index entries.
pub fn write_run(root: &Path, res: &RunResult) -> anyhow::Result<Vec<serde_json::Value>> {
    let cfg = &res.config;
    let prec = res.instance.precision();
    let mut entries = Vec::new();
    for fr in &res.functions {
        let dir = function_dir(root, cfg, &fr.label);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        fr.report.save(&dir.join("report.csv"))?;
        let mut resolved = serde_json::to_value(cfg)?;
        resolved["k_max"] = json!(res.k_max);
        resolved["precision_bits"] = json!(prec.bits());
        let meta = json!({
            "experiment": cfg.id,
            "config": resolved,
            "precision_bits": prec.bits(),
            "library": {"name": "lanfa-core", "version": env!("CARGO_PKG_VERSION")},
            "spectrum": {
                "label": cfg.spectrum.label(),
                "dimension": res.instance.dim(),
                "lambda_min": res.instance.lambda_min().to_sci(25),
                "lambda_max": res.instance.lambda_max().to_sci(25),
                "krylov_grade": krylov_grade(&res.instance),
            },
            "b": res.b_meta,
            "function": fr.meta,
            "artifact_choices": artifact_defaults(cfg),
            "k_max_default": format!("min(grade, {DEFAULT_K_MAX_CAP})"),
        });
        write_json(&dir.join("meta.json"), &meta)?;
        let rel = dir.strip_prefix(root).unwrap_or(&dir);
        entries.push(json!({
            "experiment": cfg.id,
            "spectrum": cfg.spectrum.label(),
            "function": fr.spec,
            "dir": rel.to_string_lossy(),
            "rows": fr.report.rows.len(),
        }));
    }
    Ok(entries)
}

/// Config-level artifact choices: defaults the source leaves open.
fn artifact_defaults(cfg: &ExperimentConfig) -> Vec<String> {
    use crate::config::SpectrumSpec::*;
    let mut out = vec![];
    match &cfg.spectrum {
        ClusterOutlier {
            outlier,
            cluster_lo,
            cluster_hi,
            ..
        } => out.push(format!("cluster_outlier: outlier {outlier}, cluster [{cluster_lo}, {cluster_hi}]")),
        TwoClusters { width1, width2, c1, c2, .. } => {
            out.push(format!("two_clusters: total widths {width1} at {c1} and {width2} at {c2}"))
        }
        _ => {}
    }
    if cfg.k_max.is_none() {
        out.push(format!("k_max = min(grade, {DEFAULT_K_MAX_CAP})"));
    }
    out
}

/// Runs `cfg`, writes its files under `root` and the run's `index.json`.
pub fn run(cfg: &ExperimentConfig, root: &Path) -> anyhow::Result<RunResult> {
    let res = execute(cfg)?;
    let entries = write_run(root, &res)?;
    write_json(&root.join("index.json"), &json!({ "runs": entries }))?;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"id": "small", "spectrum": {"kind": "uniform", "d": 12, "lo": 1, "hi": 10},
                "functions": ["inv_power:2", "sqrt"], "bounds": {"uniform": true}, "grid": {"sup": 400}}"#,
        )
        .unwrap()
    }

    #[test]
    fn rows_follow_the_report_invariants() {
        let res = execute(&small()).unwrap();
        assert_eq!(res.k_max, 12);
        let p = res.instance.precision();
        for fr in &res.functions {
            let rows = &fr.report.rows;
            assert_eq!(rows.len(), 12);
            for w in rows.windows(2) {
                assert!(w[1].err_opt2 <= w[0].err_opt2);
            }
            for r in rows {
                if let Some(v) = r.ratio.value() {
                    assert!(v >= &(p.one() - p.tol()));
                }
            }
        }
    }

    #[test]
    fn rational_only_columns_are_rejected_for_sqrt() {
        let mut cfg = small();
        cfg.lanczos_or = true;
        assert!(execute(&cfg).is_err());
    }
}
