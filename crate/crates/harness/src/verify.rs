//! Invariant suites run over fixed batteries of generated instances.

use std::fmt;
use std::str::FromStr;

use anyhow::bail;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lanfa_core::approx::remez_best_poly;
use lanfa_core::bounds::{indefinite_series, inv_minimax_exact, verify_cg_minres_relation};
use lanfa_core::instances::{hard_instance, ones_b, spectrum, ProblemInstance};
use lanfa_core::krylov::krylov_grade;
use lanfa_core::matfunc::{exact_apply, Polynomial, RationalFunction, ScalarFunction};
use lanfa_core::optimal::{opt2_errors, verify_lemma_opt_formula, verify_rj_transfer, verify_telescoping};
use lanfa_core::xlinalg::{Precision, Real, XVector};

use crate::config::FunctionSpec;
use crate::figures::{fig2_configs, fig3_spectrum, fig5_configs, kappa100_spectra};
use crate::run::execute;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Lemmas,
    Bounds,
    Indefinite,
    HardInstance,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Lemmas, Suite::Bounds, Suite::Indefinite, Suite::HardInstance];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Lemmas => "lemmas",
            Suite::Bounds => "bounds",
            Suite::Indefinite => "indefinite",
            Suite::HardInstance => "hard_instance",
        }
    }
}

impl FromStr for Suite {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> anyhow::Result<Self> {
        match Suite::ALL.iter().find(|x| x.name() == s) {
            Some(x) => Ok(*x),
            None => bail!("unknown suite {s:?}; expected one of lemmas, bounds, indefinite, hard_instance"),
        }
    }
}

/// One compared quantity: passes when `value ≤ threshold`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn le(name: impl Into<String>, value: &Real, threshold: &Real) -> Self {
        Check {
            name: name.into(),
            value: value.to_f64(),
            threshold: threshold.to_f64(),
            passed: value <= threshold,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} <= {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.threshold
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn verify(suite: Suite, prec: &Precision) -> anyhow::Result<SuiteReport> {
    let checks = match suite {
        Suite::Lemmas => lemma_checks(prec, 20, 0x1e33a)?,
        Suite::Bounds => bound_checks()?,
        Suite::Indefinite => indefinite_checks(prec)?,
        Suite::HardInstance => hard_instance_checks(prec)?,
    };
    Ok(SuiteReport { suite, checks })
}

/// A positive definite instance with a random rational function of
/// denominator degree `q` whose real poles lie outside the spectrum.
pub struct LemmaCase {
    pub inst: ProblemInstance,
    pub r: RationalFunction,
    pub k: usize,
}

pub fn random_lemma_case(rng: &mut ChaCha8Rng, q: usize, prec: &Precision) -> anyhow::Result<LemmaCase> {
    let d = rng.random_range(6..=30);
    let mut lam: Vec<f64> = (0..d).map(|_| rng.random_range(1.0..100.0)).collect();
    lam.sort_by(f64::total_cmp);
    lam.dedup();
    let lo = lam[0];
    let hi = lam[lam.len() - 1];
    let lambda: Vec<Real> = lam.iter().map(|x| prec.real(*x)).collect();
    let w: Vec<Real> = lam.iter().map(|_| prec.real(rng.random_range(0.1..1.0))).collect();
    let inst = ProblemInstance::new(lambda, XVector::new(w)?, prec.clone())?;

    let poles: Vec<Real> = (0..q)
        .map(|_| {
            let gap = rng.random_range(0.5..20.0);
            prec.real(if rng.random_bool(0.5) { lo - gap } else { hi + gap })
        })
        .collect();
    let deg = rng.random_range(0..q);
    let numer: Vec<Real> = (0..=deg).map(|_| prec.real(rng.random_range(-1.0..1.0))).collect();
    let r = RationalFunction::with_real_poles(Polynomial::new(numer)?, poles)?;
    let k = rng.random_range(q + 1..=(q + 10).min(inst.dim()));
    Ok(LemmaCase { inst, r, k })
}

pub fn lemma_checks(prec: &Precision, cases: usize, seed: u64) -> anyhow::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for case in 0..cases {
        let q = case % 4 + 1;
        let LemmaCase { inst, r, k } = random_lemma_case(&mut rng, q, prec)?;
        let scale_q = prec.tol() * &prec.int(10 * q as i64);
        for j in 1..=q {
            let target = exact_apply(&inst, &ScalarFunction::Rational(r.truncated(j)?))?.norm2();
            let dev = verify_lemma_opt_formula(&inst, &r, j, k)? / &target;
            checks.push(Check::le(format!("case {case}: opt formula j={j} (q={q}, k={k})"), &dev, &scale_q));
            let t = verify_rj_transfer(&inst, &r, j, k)?;
            let slack = prec.tol() * &t.rhs.clone().max(prec.tol().clone());
            checks.push(Check::le(
                format!("case {case}: transfer j={j} lhs/rhs"),
                &(&t.lhs / &(&t.rhs + &slack)),
                &prec.one(),
            ));
        }
        let norm = exact_apply(&inst, &ScalarFunction::Rational(r.clone()))?.norm2();
        let dev = verify_telescoping(&inst, &r, k)? / &norm;
        checks.push(Check::le(format!("case {case}: telescoping (q={q}, k={k})"), &dev, &scale_q));
    }
    Ok(checks)
}

/// `bound_thm1` on the Padé/Zolotarev settings, triangle bound on the
/// two-cluster instance and the closed-form minimax error of `1/x`.
pub fn bound_checks() -> anyhow::Result<Vec<Check>> {
    let mut checks = Vec::new();
    for mut cfg in fig2_configs() {
        cfg.bounds.uniform = false;
        let res = execute(&cfg)?;
        let prec = res.instance.precision();
        for fr in &res.functions {
            for row in &fr.report.rows {
                if let (Some(b), Some(e)) = (row.bound_thm1.value(), row.err_lanczos_fa.as_ref()) {
                    let slack = prec.tol() * b;
                    checks.push(Check::le(
                        format!("{} {} k={}: FA error / thm1 bound", cfg.id, fr.spec, row.k),
                        &(e / &(b + &slack)),
                        &prec.one(),
                    ));
                }
            }
        }
    }
    for cfg in fig5_configs() {
        let res = execute(&cfg)?;
        let prec = res.instance.precision();
        let sqrt = &res.functions[0];
        for row in &sqrt.report.rows {
            if let (Some(b), Some(e)) = (row.bound_triangle.value(), row.err_lanczos_fa.as_ref()) {
                checks.push(Check::le(
                    format!("{} k={}: FA error / triangle bound", cfg.id, row.k),
                    &(e / b),
                    &prec.one(),
                ));
            }
        }
    }
    checks.extend(inv_minimax_checks(&Precision::default())?);
    Ok(checks)
}

/// Closed-form minimax error of `1/x` on `[1, 100]` against Remez, `k = 1..=20`.
pub fn inv_minimax_checks(prec: &Precision) -> anyhow::Result<Vec<Check>> {
    let (lo, hi) = (prec.int(1), prec.int(100));
    let inv = ScalarFunction::inv_power(1)?;
    let threshold = prec.real(1e-6);
    (1..=20)
        .map(|k| {
            let closed = inv_minimax_exact(&lo, &hi, k, prec)?;
            let remez = remez_best_poly(&|x: &Real| inv.eval(x), &lo, &hi, k - 1, prec)?.error;
            Ok(Check::le(
                format!("1/x minimax k={k}: closed form vs Remez"),
                &((&closed - &remez).abs() / &remez),
                &threshold,
            ))
        })
        .collect()
}

pub fn indefinite_checks(prec: &Precision) -> anyhow::Result<Vec<Check>> {
    let mut checks = Vec::new();
    let lambda = spectrum(&fig3_spectrum().kind(prec)?, prec)?;
    let inst = ProblemInstance::new(lambda.clone(), ones_b(lambda.len(), prec)?, prec.clone())?;
    for rep in indefinite_series(&inst, krylov_grade(&inst))? {
        let slack = prec.tol() * &rep.minres_residuals[0];
        checks.push(Check::le(
            format!("indefinite k={} (k*={}): min CG residual / (e√k + 1/√k)·MINRES", rep.k, rep.k_star),
            &(&rep.lhs / &(&rep.rhs + &slack)),
            &prec.one(),
        ));
    }
    let threshold = prec.tol() * &prec.int(100);
    for s in kappa100_spectra() {
        let lambda = spectrum(&s.kind(prec)?, prec)?;
        let inst = ProblemInstance::new(lambda.clone(), ones_b(lambda.len(), prec)?, prec.clone())?;
        let rep = verify_cg_minres_relation(&inst, 60)?;
        checks.push(Check::le(
            format!("CG/MINRES relation on {} ({} iterations)", s.label(), rep.compared.len()),
            &rep.max_rel_deviation,
            &threshold,
        ));
        checks.push(Check {
            name: format!("CG/MINRES definedness agrees on {}", s.label()),
            value: rep.mismatched.len() as f64,
            threshold: 0.0,
            passed: rep.mismatched.is_empty(),
        });
    }
    Ok(checks)
}

pub fn hard_instance_checks(prec: &Precision) -> anyhow::Result<Vec<Check>> {
    let f = ScalarFunction::inv_power(1)?;
    let threshold = prec.real(1e-10);
    (1..=8)
        .map(|k| {
            let h = hard_instance(&f, &prec.int(1), &prec.int(100), k, prec)?;
            let opt = opt2_errors(&h.instance, &f, k)?;
            let rel_opt = &opt[k - 1] / &h.instance.b_norm();
            Ok(Check::le(
                format!("hard instance 1/x on [1,100] k={k}: |opt − ε|/ε"),
                &((&rel_opt - &h.epsilon).abs() / &h.epsilon),
                &threshold,
            ))
        })
        .collect()
}

/// Accepts the same function syntax as configs; used by the CLI.
pub fn parse_function(spec: &str, lo: &Real, hi: &Real, prec: &Precision) -> anyhow::Result<ScalarFunction> {
    FunctionSpec::parse(spec)?.resolve(lo, hi, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_lemma_battery_passes() {
        let p = Precision::default();
        let checks = lemma_checks(&p, 4, 7).unwrap();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn hard_instance_suite_passes() {
        let p = Precision::default();
        let rep = verify(Suite::HardInstance, &p).unwrap();
        assert_eq!(rep.checks.len(), 8);
        assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    }
}
