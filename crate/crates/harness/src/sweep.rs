//! Worst-case optimality ratios of `x^{−q}` over a `(κ, q)` grid.

use std::path::Path;

use anyhow::Context;
use log::info;
use rayon::prelude::*;
use serde_json::json;

use lanfa_core::bounds::thm1_prefactor;
use lanfa_core::instances::{adversarial_b, ones_b, spectrum, AdversarialConfig, ProblemInstance, SpectrumKind};
use lanfa_core::matfunc::ScalarFunction;
use lanfa_core::optimal::Method;
use lanfa_core::xlinalg::{Precision, Real};

use crate::config::{precision_override, Decimal, DEFAULT_PRECISION_BITS};
use crate::report::{write_json, CSV_DIGITS, EXACT};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub kappas: Vec<Decimal>,
    pub qs: Vec<u32>,
    pub d: usize,
    pub k_max: usize,
    /// Adversarial search evaluations per grid point.
    pub budget: usize,
    pub seed: u64,
    pub precision_bits: u32,
    pub methods: Vec<Method>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            kappas: [1e2, 1e3, 1e4, 1e5, 1e6].map(Decimal::from).to_vec(),
            qs: vec![1, 2, 4, 8, 16, 32, 64],
            d: 100,
            k_max: 60,
            budget: 16,
            seed: 0,
            precision_bits: DEFAULT_PRECISION_BITS,
            methods: vec![Method::LanczosFa, Method::LanczosOr],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub method: Method,
    pub kappa: Real,
    pub kappa_label: String,
    pub q: u32,
    /// `None` when every `k` is exact or undefined.
    pub worst_ratio: Option<Real>,
    pub worst_k: usize,
    pub baseline_ratio: Real,
    pub evaluations: usize,
    /// `q·Πκ(A_j)` for `x^{−q}`, which is `q·κ^q`.
    pub thm1_prefactor: Real,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub precision: Precision,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn get(&self, method: Method, kappa_label: &str, q: u32) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.method == method && p.kappa_label == kappa_label && p.q == q)
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::LanczosFa => "lanczos_fa",
        Method::LanczosOr => "lanczos_or",
    }
}

pub fn sweep_spectrum(d: usize, kappa: &Real, prec: &Precision) -> anyhow::Result<Vec<Real>> {
    Ok(spectrum(&SpectrumKind::UnitOutlier { d, kappa: kappa.clone() }, prec)?)
}

fn sweep_point(cfg: &SweepConfig, prec: &Precision, method: Method, kappa: &Decimal, q: u32) -> anyhow::Result<SweepPoint> {
    let k = kappa.real(prec)?;
    let lambda = sweep_spectrum(cfg.d, &k, prec)?;
    let f = ScalarFunction::inv_power(q)?;
    let acfg = AdversarialConfig {
        k_max: cfg.k_max,
        budget: cfg.budget,
        seed: cfg.seed,
        method,
    };
    let inst = ProblemInstance::new(lambda.clone(), ones_b(cfg.d, prec)?, prec.clone())?;
    let pre = thm1_prefactor(&inst, &f.as_rational(prec).expect("x^-q is rational"))?;
    let (worst_ratio, worst_k, baseline_ratio, evaluations) = match adversarial_b(&lambda, &f, &acfg, prec) {
        Ok(r) => (Some(r.worst_ratio), r.worst_k, r.baseline_ratio, r.evaluations),
        Err(lanfa_core::Error::Degenerate(_)) => (None, 0, prec.zero(), 0),
        Err(e) => return Err(e.into()),
    };
    info!(
        "{} kappa={kappa} q={q}: {:?}",
        method_name(method),
        worst_ratio.as_ref().map(Real::to_f64)
    );
    Ok(SweepPoint {
        method,
        kappa: k,
        kappa_label: kappa.to_string(),
        q,
        worst_ratio,
        worst_k,
        baseline_ratio,
        evaluations,
        thm1_prefactor: pre.prefactor,
    })
}

/// Computes every grid point without writing files.
pub fn execute_sweep(cfg: &SweepConfig) -> anyhow::Result<SweepResult> {
    let bits = precision_override()?.unwrap_or(cfg.precision_bits);
    let prec = Precision::new(bits)?;
    let mut jobs = Vec::new();
    for &m in &cfg.methods {
        for kappa in &cfg.kappas {
            for &q in &cfg.qs {
                jobs.push((m, kappa, q));
            }
        }
    }
    let points = jobs
        .into_par_iter()
        .map(|(m, kappa, q)| {
            sweep_point(cfg, &prec, m, kappa, q)
                .with_context(|| format!("{} kappa={kappa} q={q}", method_name(m)))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(SweepResult {
        config: cfg.clone(),
        precision: prec,
        points,
    })
}

fn matrix_csv(res: &SweepResult, method: Method) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["kappa".to_string()];
    header.extend(res.config.qs.iter().map(|q| format!("q={q}")));
    w.write_record(&header)?;
    for kappa in &res.config.kappas {
        let mut row = vec![kappa.to_string()];
        for &q in &res.config.qs {
            let p = res
                .get(method, &kappa.0, q)
                .context("missing sweep point")?;
            row.push(
                p.worst_ratio
                    .as_ref()
                    .map_or_else(|| EXACT.to_string(), |r| r.to_sci(CSV_DIGITS)),
            );
        }
        w.write_record(&row)?;
    }
    Ok(w.into_inner()?)
}

fn reference_csv(res: &SweepResult) -> anyhow::Result<Vec<u8>> {
    let prec = &res.precision;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kappa", "q", "sqrt_q_kappa", "kappa_pow_q_half", "thm1_prefactor"])?;
    for kappa in &res.config.kappas {
        let k = kappa.real(prec)?;
        for &q in &res.config.qs {
            let sqrt_qk = (&k * &prec.int(q as i64)).sqrt();
            let half = k.sqrt().powi(q as i32);
            let pre = &k.powi(q as i32) * &prec.int(q as i64);
            w.write_record([
                kappa.to_string(),
                q.to_string(),
                sqrt_qk.to_sci(CSV_DIGITS),
                half.to_sci(CSV_DIGITS),
                pre.to_sci(CSV_DIGITS),
            ])?;
        }
    }
    Ok(w.into_inner()?)
}

fn points_csv(res: &SweepResult) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "kappa", "q", "worst_ratio", "worst_k", "baseline_ratio", "evaluations"])?;
    for p in &res.points {
        w.write_record([
            method_name(p.method).to_string(),
            p.kappa_label.clone(),
            p.q.to_string(),
            p.worst_ratio
                .as_ref()
                .map_or_else(|| EXACT.to_string(), |r| r.to_sci(CSV_DIGITS)),
            p.worst_k.to_string(),
            p.baseline_ratio.to_sci(CSV_DIGITS),
            p.evaluations.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

/// Writes the worst-ratio matrices, the reference curves and `meta.json`.
pub fn write_sweep(res: &SweepResult, out: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for &m in &res.config.methods {
        let path = out.join(format!("worst_ratio_{}.csv", method_name(m)));
        std::fs::write(&path, matrix_csv(res, m)?).with_context(|| format!("writing {}", path.display()))?;
    }
    std::fs::write(out.join("reference.csv"), reference_csv(res)?)?;
    std::fs::write(out.join("sweep_points.csv"), points_csv(res)?)?;
    let cfg = &res.config;
    let meta = json!({
        "experiment": "fig4-sweep",
        "function": "inv_power:q",
        "spectrum": {"kind": "unit_outlier", "d": cfg.d, "layout": "lambda_1 = 1, rest uniform on [0.99995 kappa, kappa]"},
        "kappas": cfg.kappas.iter().map(|k| k.0.clone()).collect::<Vec<_>>(),
        "qs": cfg.qs,
        "k_max": cfg.k_max,
        "precision_bits": res.precision.bits(),
        "library": {"name": "lanfa-core", "version": env!("CARGO_PKG_VERSION")},
        "methods": cfg.methods.iter().map(|m| method_name(*m)).collect::<Vec<_>>(),
        "adversarial": {
            "budget": cfg.budget,
            "seed": cfg.seed,
            "search": "multi-start coordinate hill climbing, factors x2 and x1/2, ones_b baseline",
        },
        "lanczos_or_ratio_denominator": "2-norm optimum at the reduced dimension k - floor(q/2)",
    });
    write_json(&out.join("meta.json"), &meta)?;
    write_json(
        &out.join("index.json"),
        &json!({"runs": cfg.methods.iter().map(|m| format!("worst_ratio_{}.csv", method_name(*m))).collect::<Vec<_>>()}),
    )
}

pub fn run_sweep(cfg: &SweepConfig, out: &Path) -> anyhow::Result<SweepResult> {
    let res = execute_sweep(cfg)?;
    write_sweep(&res, out)?;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_sweep_writes_matrices() {
        let cfg = SweepConfig {
            kappas: vec![Decimal::from(1e2)],
            qs: vec![1, 2],
            d: 12,
            k_max: 8,
            budget: 2,
            ..SweepConfig::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let res = run_sweep(&cfg, dir.path()).unwrap();
        assert_eq!(res.points.len(), 4);
        let text = std::fs::read_to_string(dir.path().join("worst_ratio_lanczos_fa.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "kappa,q=1,q=2");
        assert!(lines[1].starts_with("100,"));
        let p = res.get(Method::LanczosFa, "100", 2).unwrap();
        assert_eq!(p.thm1_prefactor, res.precision.int(20_000));
    }
}
