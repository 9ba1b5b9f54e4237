//! A-priori and near-optimality bounds: the rational-function bound with
//! its `γ`/`η` envelope, the uniform polynomial bound, the closed-form
//! minimax rate for `1/x`, the triangle bound for non-rational `f`, and the
//! CG/MINRES relation on indefinite systems.

use rayon::prelude::*;

use crate::approx::{chebyshev_interpolant, sup_error};
use crate::error::{Error, Result};
use crate::instances::ProblemInstance;
use crate::krylov::{lanczos, Reorth};
use crate::matfunc::{exact_apply, lanczos_fa_from, Pole, RationalFunction, ScalarFunction};
use crate::optimal::{is_iteration_failure, opt2_errors, OptimalSeries, WeightSpec};
use crate::xlinalg::{Precision, Real, XVector};

/// `κ(±(A − zI))` for a real `z` outside `[λ_min, λ_max]`.
pub fn kappa_shift(inst: &ProblemInstance, z: &Real) -> Result<Real> {
    let (lo, hi) = (inst.lambda_min(), inst.lambda_max());
    if z < lo {
        Ok((hi - z) / (lo - z))
    } else if z > hi {
        Ok((z - lo) / (z - hi))
    } else {
        Err(Error::Domain(format!(
            "shift {} lies inside [{}, {}]",
            z.to_f64(),
            lo.to_f64(),
            hi.to_f64()
        )))
    }
}

/// `max_{x∈𝓘} |x − z| / min_{x∈𝓘} |x − z|` and the distance from `z` to `𝓘`.
///
/// For a real pole outside `𝓘` this is [`kappa_shift`]. A complex pole has
/// no `A_j`; the same ratio is reported as an extension.
fn pole_kappa(inst: &ProblemInstance, pole: &Pole) -> Result<(Real, Real)> {
    let (lo, hi) = (inst.lambda_min(), inst.lambda_max());
    match pole {
        Pole::Real(z) => {
            let kappa = kappa_shift(inst, z)?;
            let dist = (z - lo).abs().min((z - hi).abs());
            Ok((kappa, dist))
        }
        Pole::Conjugate { re, im } => {
            let far = (lo - re).hypot(im).max((hi - re).hypot(im));
            let near_x = if re < lo {
                lo.clone()
            } else if re > hi {
                hi.clone()
            } else {
                re.clone()
            };
            let near = (&near_x - re).hypot(im);
            Ok((far / &near, near))
        }
    }
}

/// The iteration-independent part of the rational bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Thm1Prefactor {
    /// `κ(A_j)` per pole, conjugate pairs listed twice.
    pub kappas: Vec<Real>,
    /// `C = q·Πκ(A_j)`.
    pub prefactor: Real,
    pub gamma: Real,
    pub eta: Real,
    /// False when some pole is complex, so the bound is an extrapolation.
    pub hypothesis_holds: bool,
}

pub fn thm1_prefactor(inst: &ProblemInstance, r: &RationalFunction) -> Result<Thm1Prefactor> {
    if r.q() == 0 {
        return Err(Error::Parameter("rational function has no poles".into()));
    }
    let mut kappas = Vec::with_capacity(r.q());
    let mut eta: Option<Real> = None;
    let mut hypothesis_holds = true;
    for pole in r.poles() {
        let (kappa, dist) = pole_kappa(inst, pole)?;
        if matches!(pole, Pole::Conjugate { .. }) {
            hypothesis_holds = false;
        }
        for _ in 0..pole.multiplicity() {
            kappas.push(kappa.clone());
        }
        eta = Some(match eta {
            Some(e) => e.min(dist),
            None => dist,
        });
    }
    let eta = eta.expect("q >= 1");
    let width = inst.lambda_max() - inst.lambda_min();
    let gamma = &(&width / &eta) + 1.0;
    let product = kappas.iter().fold(inst.precision().one(), |acc, k| acc * k);
    let envelope = gamma.powi(kappas.len() as i32);
    let slack = inst.precision().tol() * &envelope;
    if product > &envelope + &slack {
        return Err(Error::Internal(format!(
            "Πκ = {:e} exceeds γ^q = {:e}",
            product.to_f64(),
            envelope.to_f64()
        )));
    }
    Ok(Thm1Prefactor {
        prefactor: product * (kappas.len() as i32),
        kappas,
        gamma,
        eta,
        hypothesis_holds,
    })
}

impl Thm1Prefactor {
    pub fn q(&self) -> usize {
        self.kappas.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Thm1Report {
    pub k: usize,
    pub kappas: Vec<Real>,
    pub prefactor: Real,
    /// 2-norm optimal error at dimension `k − q + 1`.
    pub opt_err_shifted: Real,
    pub bound: Real,
    pub gamma: Real,
    pub eta: Real,
    pub hypothesis_holds: bool,
}

impl Thm1Report {
    fn new(pre: &Thm1Prefactor, k: usize, opt_err_shifted: Real) -> Self {
        Thm1Report {
            k,
            kappas: pre.kappas.clone(),
            bound: &pre.prefactor * &opt_err_shifted,
            prefactor: pre.prefactor.clone(),
            opt_err_shifted,
            gamma: pre.gamma.clone(),
            eta: pre.eta.clone(),
            hypothesis_holds: pre.hypothesis_holds,
        }
    }
}

fn check_thm1_k(r: &RationalFunction, k: usize) -> Result<usize> {
    if k <= r.numer_degree() {
        return Err(Error::Parameter(format!("needs k > deg(n) = {}", r.numer_degree())));
    }
    match (k + 1).checked_sub(r.q()) {
        Some(m) if m >= 1 => Ok(m),
        _ => Err(Error::Parameter(format!("needs k ≥ q = {}", r.q()))),
    }
}

/// `q·Πκ(A_j)·min_{deg p < k−q+1} ‖r(A)b − p(A)b‖₂`.
pub fn thm1_bound(inst: &ProblemInstance, r: &RationalFunction, k: usize) -> Result<Thm1Report> {
    let pre = thm1_prefactor(inst, r)?;
    let m = check_thm1_k(r, k)?;
    let opt = opt2_errors(inst, &ScalarFunction::Rational(r.clone()), m)?;
    Ok(Thm1Report::new(&pre, k, opt[m - 1].clone()))
}

/// [`thm1_bound`] for `k = 1..=k_max`; `None` where `k` is too small.
pub fn thm1_series(inst: &ProblemInstance, r: &RationalFunction, k_max: usize) -> Result<Vec<Option<Thm1Report>>> {
    let pre = thm1_prefactor(inst, r)?;
    let opt = opt2_errors(inst, &ScalarFunction::Rational(r.clone()), k_max)?;
    Ok((1..=k_max)
        .map(|k| {
            check_thm1_k(r, k)
                .ok()
                .map(|m| Thm1Report::new(&pre, k, opt[m - 1].clone()))
        })
        .collect())
}

/// `2·max_{x∈grid} |f(x) − c_{k−1}(x)|` with `c_{k−1}` the Chebyshev
/// interpolant on `𝓘`; multiply by `‖b‖₂` for an absolute error bound.
pub fn uniform_bound(inst: &ProblemInstance, f: &ScalarFunction, k: usize, grid: usize) -> Result<Real> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if grid < 10 * k {
        return Err(Error::Parameter(format!("grid {grid} is below 10·k = {}", 10 * k)));
    }
    let (lo, hi) = (inst.lambda_min(), inst.lambda_max());
    if !f.continuous_on(lo, hi) {
        return Err(Error::Domain(format!(
            "{f} is not continuous on [{}, {}]",
            lo.to_f64(),
            hi.to_f64()
        )));
    }
    let eval = |x: &Real| f.eval(x);
    let c = chebyshev_interpolant(&eval, lo, hi, k - 1)?;
    let err = sup_error(&eval, &|x: &Real| Ok(c.eval(x)), lo, hi, grid)?;
    Ok(err * 2)
}

/// [`uniform_bound`] for `k = 1..=k_max`.
pub fn uniform_bound_series(inst: &ProblemInstance, f: &ScalarFunction, k_max: usize, grid: usize) -> Result<Vec<Real>> {
    (1..=k_max)
        .into_par_iter()
        .map(|k| uniform_bound(inst, f, k, grid))
        .collect()
}

/// `8t^{k+1} / ((t² − 1)²(hi − lo))` with `t = 1 − 2/(1 + √(hi/lo))`: the
/// error of the best polynomial of degree `< k` to `1/x` on `[lo, hi]`.
pub fn inv_minimax_exact(lo: &Real, hi: &Real, k: usize, prec: &Precision) -> Result<Real> {
    if !lo.is_positive() {
        return Err(Error::Domain("interval must be positive".into()));
    }
    if lo >= hi {
        return Err(Error::Parameter("empty interval".into()));
    }
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let t = prec.one() - prec.int(2) / (prec.one() + (hi / lo).sqrt());
    let num = t.powi(k as i32 + 1) * 8;
    let den = (t.square() - 1.0).square() * (hi - lo);
    Ok(num / den)
}

/// A rational approximant to `f` prepared for the triangle bound.
#[derive(Clone, Debug)]
pub struct TriangleCandidate {
    pub r: RationalFunction,
    /// `‖r − f‖_𝓘` on the sampling grid.
    pub sup_err: Real,
    pub prefactor: Thm1Prefactor,
}

impl TriangleCandidate {
    pub fn new(inst: &ProblemInstance, f: &ScalarFunction, r: RationalFunction, grid: usize) -> Result<Self> {
        let prefactor = thm1_prefactor(inst, &r)?;
        let sup_err = sup_error(
            &|x: &Real| f.eval(x),
            &|x: &Real| r.eval(x),
            inst.lambda_min(),
            inst.lambda_max(),
            grid,
        )?;
        Ok(TriangleCandidate { r, sup_err, prefactor })
    }

    /// `c_r = q − 1`.
    pub fn shift(&self) -> usize {
        self.prefactor.q() - 1
    }

    /// `(C_r + 2)‖b‖‖r − f‖ + C_r·opt₂(k − c_r)`, or `None` when `k` is too small.
    ///
    /// `opt2[m − 1]` is the 2-norm optimal error for `f` at dimension `m`.
    pub fn value(&self, k: usize, b_norm: &Real, opt2: &[Real]) -> Option<Real> {
        let m = k.checked_sub(self.shift()).filter(|m| *m >= 1)?;
        if k <= self.r.numer_degree() {
            return None;
        }
        let c = &self.prefactor.prefactor;
        let sup_term = &(&(c + 2.0) * b_norm) * &self.sup_err;
        Some(sup_term + c * &opt2[m - 1])
    }
}

/// The smallest candidate value at `k` and its index.
pub fn triangle_bound_prepared(
    k: usize,
    b_norm: &Real,
    opt2: &[Real],
    candidates: &[TriangleCandidate],
) -> Result<(Real, usize)> {
    candidates
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.value(k, b_norm, opt2).map(|v| (v, i)))
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .ok_or_else(|| Error::Parameter(format!("no triangle candidate is valid at k = {k}")))
}

/// `min_r {(C_r + 2)‖b‖₂‖r − f‖_𝓘 + C_r·min_{deg p < k−c_r}‖f(A)b − p(A)b‖₂}`.
pub fn triangle_bound(
    inst: &ProblemInstance,
    f: &ScalarFunction,
    k: usize,
    candidates: &[RationalFunction],
    grid: usize,
) -> Result<(Real, usize)> {
    let prepared = candidates
        .iter()
        .map(|r| TriangleCandidate::new(inst, f, r.clone(), grid))
        .collect::<Result<Vec<_>>>()?;
    let opt2 = opt2_errors(inst, f, k)?;
    triangle_bound_prepared(k, &inst.b_norm(), &opt2, &prepared)
}

fn require_nonsingular(inst: &ProblemInstance) -> Result<()> {
    if inst.lambda().iter().any(Real::is_zero) {
        return Err(Error::Domain("A is singular".into()));
    }
    Ok(())
}

/// MINRES residual norms `‖b − Aŷ_k‖₂` for `k = 0..=k_max`.
pub fn minres_residuals(inst: &ProblemInstance, k_max: usize) -> Result<Vec<Real>> {
    require_nonsingular(inst)?;
    let mut out = vec![inst.b_norm()];
    if k_max == 0 {
        return Ok(out);
    }
    let target = exact_apply(inst, &ScalarFunction::InvPower(1))?;
    let g = WeightSpec::PowerOfA(2).weights(inst)?;
    let dec = lanczos(inst, k_max, Reorth::Full)?;
    let series = OptimalSeries::new(&dec, &target, &g, inst.precision())?;
    let residuals: Vec<Real> = (1..=k_max)
        .into_par_iter()
        .map(|k| residual_norm(inst, &series.iterate(k)))
        .collect();
    out.extend(residuals);
    Ok(out)
}

/// `‖b − A x‖₂`.
fn residual_norm(inst: &ProblemInstance, x: &XVector) -> Real {
    let ax = inst.apply(x);
    inst.w()
        .iter()
        .zip(&ax)
        .map(|(b, a)| (b - a).square())
        .sum::<Real>()
        .sqrt()
}

/// CG residual norms `‖b − A·lan_k(1/x)‖₂` for `k = 0..=k_max`; `None`
/// where `T_k` is singular.
pub fn cg_residuals(inst: &ProblemInstance, k_max: usize) -> Result<Vec<Option<Real>>> {
    require_nonsingular(inst)?;
    let prec = inst.precision();
    let f = ScalarFunction::InvPower(1);
    let mut out = vec![Some(inst.b_norm())];
    if k_max == 0 {
        return Ok(out);
    }
    let dec = lanczos(inst, k_max, Reorth::Full)?;
    let rest = (1..=k_max)
        .into_par_iter()
        .map(|k| match lanczos_fa_from(&dec.prefix(k), &f, prec) {
            Ok(x) => Ok(Some(residual_norm(inst, &x))),
            Err(e) if is_iteration_failure(&e) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    out.extend(rest);
    Ok(out)
}

/// Outcome of comparing CG residuals with the MINRES-derived formula.
#[derive(Clone, Debug, PartialEq)]
pub struct CgMinresReport {
    /// Largest relative deviation over iterations where both sides are finite.
    pub max_rel_deviation: Real,
    /// Iterations compared.
    pub compared: Vec<usize>,
    /// Iterations where MINRES stagnates; CG must have failed there.
    pub stagnant: Vec<usize>,
    /// Iterations where exactly one side is defined.
    pub mismatched: Vec<usize>,
}

/// Checks `‖r_k‖ = ‖r^M_k‖ / √(1 − (‖r^M_k‖/‖r^M_{k−1}‖)²)` for `k = 1..=k_max`.
///
/// Iterations from the first one where MINRES reaches `tol·‖b‖` compare
/// rounding noise and are skipped.
pub fn verify_cg_minres_relation(inst: &ProblemInstance, k_max: usize) -> Result<CgMinresReport> {
    let prec = inst.precision();
    let minres = minres_residuals(inst, k_max)?;
    let cg = cg_residuals(inst, k_max)?;
    let floor = prec.tol() * &inst.b_norm();
    let mut report = CgMinresReport {
        max_rel_deviation: prec.zero(),
        compared: Vec::new(),
        stagnant: Vec::new(),
        mismatched: Vec::new(),
    };
    for k in 1..=k_max {
        if minres[k] <= floor {
            break;
        }
        let ratio = &minres[k] / &minres[k - 1];
        let gap = prec.one() - ratio.square();
        if gap <= *prec.tol() {
            report.stagnant.push(k);
            if cg[k].is_some() {
                report.mismatched.push(k);
            }
            continue;
        }
        let predicted = &minres[k] / &gap.sqrt();
        match &cg[k] {
            Some(actual) => {
                let dev = (actual - &predicted).abs() / &predicted;
                report.max_rel_deviation = report.max_rel_deviation.clone().max(dev);
                report.compared.push(k);
            }
            None => report.mismatched.push(k),
        }
    }
    Ok(report)
}

/// The CG/MINRES comparison behind the `k*` theorem at one `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndefiniteReport {
    pub k: usize,
    /// Best CG iteration in `0..=k`; `0` stands for the zero iterate.
    pub k_star: usize,
    /// Indexed `0..=k`.
    pub minres_residuals: Vec<Real>,
    /// Indexed `0..=k`; `None` where CG is undefined.
    pub cg_residuals: Vec<Option<Real>>,
    /// `e√k + 1/√k`.
    pub factor: Real,
    pub lhs: Real,
    pub rhs: Real,
}

impl IndefiniteReport {
    pub fn holds(&self, prec: &Precision) -> bool {
        let slack = prec.tol() * &self.minres_residuals[0];
        self.lhs <= &self.rhs + &slack
    }
}

fn indefinite_report(k: usize, minres: &[Real], cg: &[Option<Real>], prec: &Precision) -> IndefiniteReport {
    let (k_star, lhs) = cg[..=k]
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().map(|r| (i, r.clone())))
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("the zero iterate is always defined");
    let sk = prec.int(k as i64).sqrt();
    let factor = &(&prec.one().exp() * &sk) + &sk.recip();
    IndefiniteReport {
        k,
        k_star,
        minres_residuals: minres[..=k].to_vec(),
        cg_residuals: cg[..=k].to_vec(),
        rhs: &factor * &minres[k],
        factor,
        lhs,
    }
}

/// `min_{k' ≤ k} ‖b − A·lan_{k'}(1/x)‖₂` against `(e√k + 1/√k)·‖r^M_k‖₂`.
pub fn indefinite_theorem_check(inst: &ProblemInstance, k: usize) -> Result<IndefiniteReport> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let minres = minres_residuals(inst, k)?;
    let cg = cg_residuals(inst, k)?;
    Ok(indefinite_report(k, &minres, &cg, inst.precision()))
}

/// [`indefinite_theorem_check`] for every `k = 1..=k_max` from shared residuals.
pub fn indefinite_series(inst: &ProblemInstance, k_max: usize) -> Result<Vec<IndefiniteReport>> {
    let minres = minres_residuals(inst, k_max)?;
    let cg = cg_residuals(inst, k_max)?;
    Ok((1..=k_max)
        .map(|k| indefinite_report(k, &minres, &cg, inst.precision()))
        .collect())
}
