//! Krylov-optimal approximations in weighted norms, Lanczos-OR, optimality
//! ratios and runtime checks of the identities behind the rational bound.
//!
//! All norms are diagonal in the eigenbasis: `‖v‖_g² = Σ g(λᵢ) vᵢ²`.

use rayon::prelude::*;

use crate::bounds::kappa_shift;
use crate::error::{Error, Result};
use crate::instances::ProblemInstance;
use crate::krylov::{lanczos, KrylovDecomposition, Reorth};
use crate::matfunc::{exact_apply, lanczos_fa_from, lanczos_fa_outside, RationalFunction, ScalarFunction};
use crate::xlinalg::{solve_shifted_tridiag, Matrix, Precision, Real, XVector};

/// The norm in which a Krylov approximation is optimal.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    TwoNorm,
    /// `sign·(A − zI)`, which must be positive definite.
    ShiftedA { z: Real, sign: i8 },
    /// `|r(A)|`.
    AbsRational(RationalFunction),
    /// `A^p`.
    PowerOfA(i32),
}

impl WeightSpec {
    /// `A_j = ±(A − z_j I)`, the sign making it positive definite.
    pub fn for_pole(inst: &ProblemInstance, z: &Real) -> Result<Self> {
        let sign = if z < inst.lambda_min() {
            1
        } else if z > inst.lambda_max() {
            -1
        } else {
            return Err(Error::Domain(format!(
                "pole {} lies inside the spectral interval",
                z.to_f64()
            )));
        };
        Ok(WeightSpec::ShiftedA {
            z: z.clone(),
            sign,
        })
    }

    /// `g(λᵢ)` on the spectrum; every value is strictly positive.
    pub fn weights(&self, inst: &ProblemInstance) -> Result<Vec<Real>> {
        let g = inst
            .lambda()
            .iter()
            .map(|l| match self {
                WeightSpec::TwoNorm => Ok(l.one_like()),
                WeightSpec::ShiftedA { z, sign } => {
                    let v = l - z;
                    Ok(if *sign < 0 { -v } else { v })
                }
                WeightSpec::AbsRational(r) => Ok(r.eval(l)?.abs()),
                WeightSpec::PowerOfA(p) => Ok(l.powi(*p)),
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(i) = g.iter().position(|x| !x.is_positive() || !x.is_finite()) {
            return Err(Error::Domain(format!(
                "weight {:e} at eigenvalue {} is not positive",
                g[i].to_f64(),
                inst.lambda()[i].to_f64()
            )));
        }
        Ok(g)
    }
}

/// Weighted least-squares fits of a fixed target against every prefix of a
/// Lanczos basis.
///
/// Both factorizations leave an upper-triangular `R` and a vector `y` with
/// the prefix property: the optimum over the first `k` columns solves
/// `R[..k, ..k] c = y[..k]`.
#[derive(Clone, Debug)]
pub struct OptimalSeries {
    dec: KrylovDecomposition,
    target: XVector,
    r: Option<Matrix>,
    y: Vec<Real>,
    qr_fallback: bool,
}

impl OptimalSeries {
    pub fn new(dec: &KrylovDecomposition, target: &XVector, weight: &[Real], prec: &Precision) -> Result<Self> {
        if target.len() != weight.len() {
            return Err(Error::Dimension {
                expected: weight.len(),
                found: target.len(),
            });
        }
        if weight.iter().all(|g| *g == 1.0) {
            return Ok(Self::two_norm(dec, target));
        }
        let range = weight_range_bits(weight);
        if range > prec.bits() / 4 {
            return Self::qr(dec, target, weight, prec.bits() + range);
        }
        let k = dec.dim();
        let q = dec.columns();
        let gt: Vec<Real> = target.iter().zip(weight).map(|(t, g)| t * g).collect();
        let mut h = Matrix::zeros(prec.bits(), k, k);
        for i in 0..k {
            let gqi: Vec<Real> = q[i].iter().zip(weight).map(|(x, g)| x * g).collect();
            for j in i..k {
                let v = q[j].dot_unchecked(&gqi);
                h[(j, i)] = v.clone();
                h[(i, j)] = v;
            }
        }
        let rhs = dec.project(&gt);
        let limit = Real::pow2(prec.bits(), (prec.bits() / 4) as i32);
        if let Some(l) = h.cholesky() {
            let diag: Vec<Real> = (0..k).map(|i| l[(i, i)].clone()).collect();
            let hi = diag.iter().cloned().reduce(Real::max).expect("k >= 1");
            let lo = diag.iter().cloned().reduce(Real::min).expect("k >= 1");
            if lo.is_positive() && (hi / lo).square() <= limit {
                let y = forward_substitute(&l, &rhs);
                return Ok(OptimalSeries {
                    dec: dec.clone(),
                    target: target.clone(),
                    r: Some(l.transpose()),
                    y,
                    qr_fallback: false,
                });
            }
        }
        Self::qr(dec, target, weight, prec.bits() + range)
    }

    fn two_norm(dec: &KrylovDecomposition, target: &XVector) -> Self {
        // Modified Gram–Schmidt against the target: y_k = q_kᵀ r_{k−1}.
        let mut res = target.clone();
        let mut y = Vec::with_capacity(dec.dim());
        for qk in dec.columns() {
            let c = qk.dot_unchecked(&res);
            res.axpy(&-&c, qk);
            y.push(c);
        }
        OptimalSeries {
            dec: dec.clone(),
            target: target.clone(),
            r: None,
            y,
            qr_fallback: false,
        }
    }

    /// Modified Gram–Schmidt QR of `G^{1/2} Q`, two passes per column, at
    /// `work_bits`. Rows of `G^{1/2} Q` differ in scale by up to the weight
    /// range, and orthogonalization cancels that many leading bits.
    fn qr(dec: &KrylovDecomposition, target: &XVector, weight: &[Real], work_bits: u32) -> Result<Self> {
        let k = dec.dim();
        let sg: Vec<Real> = weight.iter().map(|g| g.with_prec(work_bits).sqrt()).collect();
        let mut u: Vec<XVector> = Vec::with_capacity(k);
        let mut r = Matrix::zeros(work_bits, k, k);
        for j in 0..k {
            let mut v = dec.column(j).hadamard(&sg)?;
            for _ in 0..2 {
                for (i, ui) in u.iter().enumerate() {
                    let c = ui.dot_unchecked(&v);
                    v.axpy(&-&c, ui);
                    r[(i, j)] += &c;
                }
            }
            let n = v.norm2();
            if n.is_zero() {
                return Err(Error::Degenerate("weighted Krylov basis is rank deficient".into()));
            }
            r[(j, j)] = n.clone();
            u.push(v.scale(&n.recip()));
        }
        let mut res = target.hadamard(&sg)?;
        let mut y = Vec::with_capacity(k);
        for ui in &u {
            let c = ui.dot_unchecked(&res);
            res.axpy(&-&c, ui);
            y.push(c);
        }
        Ok(OptimalSeries {
            dec: dec.clone(),
            target: target.clone(),
            r: Some(r),
            y,
            qr_fallback: true,
        })
    }

    /// Largest available subspace dimension.
    pub fn max_dim(&self) -> usize {
        self.dec.dim()
    }

    /// True when the normal equations were too ill-conditioned and QR was used.
    pub fn used_qr_fallback(&self) -> bool {
        self.qr_fallback
    }

    /// Optimum over the first `k` basis columns; `k` is clamped to `max_dim`.
    pub fn iterate(&self, k: usize) -> XVector {
        let k = k.clamp(1, self.max_dim());
        let c = match &self.r {
            None => self.y[..k].to_vec(),
            Some(r) => back_substitute(r, &self.y[..k]),
        };
        let bits = self.target[0].prec();
        let mut out = XVector::zeros(bits, self.target.len());
        for (qj, cj) in self.dec.columns().iter().zip(&c) {
            out.axpy(cj, qj);
        }
        if out.iter().any(|x| x.prec() != bits) {
            out = XVector::from_vec(out.iter().map(|x| x.with_prec(bits)).collect());
        }
        out
    }

    /// `‖target − iterate(k)‖₂`.
    pub fn error2(&self, k: usize) -> Real {
        let it = self.iterate(k);
        self.target.sub(&it).expect("same length").norm2()
    }

    pub fn target(&self) -> &XVector {
        &self.target
    }
}

/// `⌈log₂(max g / min g)⌉` for strictly positive weights.
fn weight_range_bits(weight: &[Real]) -> u32 {
    let exps = weight.iter().filter_map(Real::exponent);
    match (exps.clone().max(), exps.min()) {
        (Some(hi), Some(lo)) => (hi - lo + 1).max(0) as u32,
        _ => 0,
    }
}

fn forward_substitute(l: &Matrix, b: &[Real]) -> Vec<Real> {
    let n = b.len();
    let mut y: Vec<Real> = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = b[i].clone();
        for (j, yj) in y.iter().enumerate() {
            s -= &(&l[(i, j)] * yj);
        }
        y.push(s / &l[(i, i)]);
    }
    y
}

/// Solves the leading `y.len()` block of the upper-triangular `r`.
fn back_substitute(r: &Matrix, y: &[Real]) -> Vec<Real> {
    let n = y.len();
    let mut c = y.to_vec();
    for i in (0..n).rev() {
        let mut s = c[i].clone();
        for j in i + 1..n {
            s -= &(&r[(i, j)] * &c[j]);
        }
        c[i] = s / &r[(i, i)];
    }
    c
}

/// `argmin_{x ∈ 𝒦_k} ‖f(A)b − x‖_g`.
pub fn krylov_optimal(
    inst: &ProblemInstance,
    f: &ScalarFunction,
    k: usize,
    weight: &WeightSpec,
) -> Result<XVector> {
    let target = exact_apply(inst, f)?;
    krylov_optimal_target(inst, &target, k, weight)
}

/// As [`krylov_optimal`] for an explicit target vector.
pub fn krylov_optimal_target(
    inst: &ProblemInstance,
    target: &XVector,
    k: usize,
    weight: &WeightSpec,
) -> Result<XVector> {
    let g = weight.weights(inst)?;
    let dec = lanczos(inst, k, Reorth::Full)?;
    Ok(OptimalSeries::new(&dec, target, &g, inst.precision())?.iterate(k))
}

/// `min_{deg p < k} ‖f(A)b − p(A)b‖₂` for `k = 1..=k_max`.
pub fn opt2_errors(inst: &ProblemInstance, f: &ScalarFunction, k_max: usize) -> Result<Vec<Real>> {
    let target = exact_apply(inst, f)?;
    let dec = lanczos(inst, k_max, Reorth::Full)?;
    opt2_errors_from(&dec, &target, k_max)
}

/// 2-norm optimal errors against the prefixes of `dec`; dimensions beyond
/// `dec.dim()` reuse the full basis.
pub fn opt2_errors_from(dec: &KrylovDecomposition, target: &XVector, k_max: usize) -> Result<Vec<Real>> {
    let mut res = target.clone();
    let mut out = Vec::with_capacity(k_max);
    for k in 0..k_max {
        if let Some(qk) = dec.columns().get(k) {
            let c = qk.dot_unchecked(&res);
            res.axpy(&-&c, qk);
        }
        out.push(res.norm2());
    }
    Ok(out)
}

/// Subspace dimension `k − ⌊q/2⌋` used by Lanczos-OR at iteration `k`.
pub fn or_dimension(r: &RationalFunction, k: usize) -> Result<usize> {
    if k <= r.numer_degree() {
        return Err(Error::Parameter(format!(
            "Lanczos-OR needs k > deg(n) = {}",
            r.numer_degree()
        )));
    }
    match k.checked_sub(r.q() / 2) {
        Some(m) if m >= 1 => Ok(m),
        _ => Err(Error::Parameter(format!(
            "Lanczos-OR at k = {k} leaves no subspace for q = {}",
            r.q()
        ))),
    }
}

/// The Lanczos-OR iterate: the `|r(A)|`-norm optimum over `𝒦_{k−⌊q/2⌋}`.
pub fn lanczos_or(inst: &ProblemInstance, r: &RationalFunction, k: usize) -> Result<XVector> {
    let m = or_dimension(r, k)?;
    krylov_optimal(
        inst,
        &ScalarFunction::Rational(r.clone()),
        m,
        &WeightSpec::AbsRational(r.clone()),
    )
}

/// `‖r(A)b − lanczos_or(r, k)‖₂` for `k = 1..=k_max`; invalid `k` are `Err`.
pub fn lanczos_or_errors(inst: &ProblemInstance, r: &RationalFunction, k_max: usize) -> Result<Vec<Result<Real>>> {
    let target = exact_apply(inst, &ScalarFunction::Rational(r.clone()))?;
    let g = WeightSpec::AbsRational(r.clone()).weights(inst)?;
    let dec = lanczos(inst, k_max.max(1), Reorth::Full)?;
    let series = OptimalSeries::new(&dec, &target, &g, inst.precision())?;
    Ok((1..=k_max)
        .into_par_iter()
        .map(|k| Ok(series.error2(or_dimension(r, k)?)))
        .collect())
}

/// Which approximation an optimality ratio measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    LanczosFa,
    LanczosOr,
}

/// An optimality ratio with its two sentinels.
#[derive(Clone, Debug, PartialEq)]
pub enum RatioOutcome {
    Ratio(Real),
    /// The method is undefined at this iteration (e.g. a singular shift).
    Failed,
    /// The optimal error is below `tol·‖f(A)b‖₂`.
    Exact,
}

impl RatioOutcome {
    pub fn value(&self) -> Option<&Real> {
        match self {
            RatioOutcome::Ratio(r) => Some(r),
            _ => None,
        }
    }
}

/// Combines a method error and an optimal error into a [`RatioOutcome`].
pub fn ratio_from_errors(method_err: Option<&Real>, opt_err: &Real, target_norm: &Real, prec: &Precision) -> RatioOutcome {
    if opt_err <= &(prec.tol() * target_norm) {
        return RatioOutcome::Exact;
    }
    match method_err {
        Some(e) => RatioOutcome::Ratio(e / opt_err),
        None => RatioOutcome::Failed,
    }
}

/// Errors that make a method undefined at one iteration rather than invalid overall.
pub fn is_iteration_failure(e: &Error) -> bool {
    matches!(e, Error::SingularShift { .. } | Error::Domain(_))
}

/// `‖f(A)b − method_k‖₂ / ‖f(A)b − opt₂‖₂`.
///
/// For Lanczos-OR the denominator is the 2-norm optimum over the same
/// reduced subspace `𝒦_{k−⌊q/2⌋}` the method searches.
pub fn optimality_ratio(
    inst: &ProblemInstance,
    f: &ScalarFunction,
    k: usize,
    method: Method,
) -> Result<RatioOutcome> {
    Ok(ratio_series(inst, f, k, method)?.pop().expect("k >= 1"))
}

/// [`optimality_ratio`] for `k = 1..=k_max` from one Lanczos run.
pub fn ratio_series(
    inst: &ProblemInstance,
    f: &ScalarFunction,
    k_max: usize,
    method: Method,
) -> Result<Vec<RatioOutcome>> {
    if k_max == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let prec = inst.precision();
    let target = exact_apply(inst, f)?;
    let target_norm = target.norm2();
    let dec = lanczos(inst, k_max, Reorth::Full)?;
    let opt = opt2_errors_from(&dec, &target, k_max)?;
    let fast = fast_rational(inst, f);
    match method {
        Method::LanczosFa => (1..=k_max)
            .into_par_iter()
            .map(|k| {
                let err = fa_error(inst, &dec.prefix(k), f, fast.as_ref(), &target)?;
                Ok(ratio_from_errors(err.as_ref(), &opt[k - 1], &target_norm, prec))
            })
            .collect(),
        Method::LanczosOr => {
            let r = f
                .as_rational(prec)
                .ok_or_else(|| Error::Parameter(format!("Lanczos-OR needs a rational function, got {f}")))?;
            let or = lanczos_or_errors(inst, &r, k_max)?;
            or.into_iter()
                .enumerate()
                .map(|(i, err)| {
                    let k = i + 1;
                    match err {
                        Ok(e) => {
                            let m = or_dimension(&r, k)?;
                            Ok(ratio_from_errors(Some(&e), &opt[m - 1], &target_norm, prec))
                        }
                        Err(Error::Parameter(_)) => Ok(RatioOutcome::Failed),
                        Err(e) if is_iteration_failure(&e) => Ok(RatioOutcome::Failed),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        }
    }
}

/// Largest optimality ratio over `k = 1..=k_max` and the `k` attaining it.
///
/// Stops at the first `k` where the optimum is exact, since every later `k`
/// is exact too. `None` if no `k` yields a finite ratio.
pub fn worst_ratio(
    inst: &ProblemInstance,
    f: &ScalarFunction,
    k_max: usize,
    method: Method,
) -> Result<Option<(Real, usize)>> {
    if k_max == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if method == Method::LanczosOr {
        let series = ratio_series(inst, f, k_max, method)?;
        return Ok(max_ratio(series.iter().enumerate().map(|(i, o)| (o, i + 1))));
    }
    let prec = inst.precision();
    let target = exact_apply(inst, f)?;
    let target_norm = target.norm2();
    let dec = lanczos(inst, k_max, Reorth::Full)?;
    let opt = opt2_errors_from(&dec, &target, k_max)?;
    let fast = fast_rational(inst, f);
    let mut outcomes = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        if opt[k - 1] <= prec.tol() * &target_norm {
            break;
        }
        let err = fa_error(inst, &dec.prefix(k), f, fast.as_ref(), &target)?;
        outcomes.push(ratio_from_errors(err.as_ref(), &opt[k - 1], &target_norm, prec));
    }
    Ok(max_ratio(outcomes.iter().enumerate().map(|(i, o)| (o, i + 1))))
}

/// First maximum wins ties.
fn max_ratio<'a>(it: impl Iterator<Item = (&'a RatioOutcome, usize)>) -> Option<(Real, usize)> {
    let mut best: Option<(Real, usize)> = None;
    for (o, k) in it {
        if let Some(v) = o.value() {
            if best.as_ref().is_none_or(|(b, _)| v > b) {
                best = Some((v.clone(), k));
            }
        }
    }
    best
}

/// `f` as a rational function whose poles are real and separated from `I(A)`.
fn fast_rational(inst: &ProblemInstance, f: &ScalarFunction) -> Option<RationalFunction> {
    let r = f.as_rational(inst.precision())?;
    let margin = inst.precision().tol() * &inst.norm_a();
    let lo = inst.lambda_min();
    let hi = inst.lambda_max();
    let ok = r
        .real_poles()?
        .iter()
        .all(|z| z <= &(lo - &margin) || z >= &(hi + &margin));
    ok.then_some(r)
}

/// Lanczos-FA error, `None` when the iteration is undefined.
fn fa_error(
    inst: &ProblemInstance,
    dec: &KrylovDecomposition,
    f: &ScalarFunction,
    fast: Option<&RationalFunction>,
    target: &XVector,
) -> Result<Option<Real>> {
    let prec = inst.precision();
    let x = match fast {
        Some(r) => lanczos_fa_outside(dec, r, inst.lambda_min(), inst.lambda_max(), prec),
        None => lanczos_fa_from(dec, f, prec),
    };
    match x {
        Ok(x) => Ok(Some(target.sub(&x)?.norm2())),
        Err(e) if is_iteration_failure(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

fn real_poles_outside(inst: &ProblemInstance, r: &RationalFunction) -> Result<Vec<Real>> {
    let poles = r
        .real_poles()
        .ok_or_else(|| Error::Domain("the rational identities need real poles".into()))?;
    for z in &poles {
        WeightSpec::for_pole(inst, z)?;
    }
    Ok(poles)
}

/// `Q (T − zI)⁻¹ Qᵀ v`.
fn shifted_projector(dec: &KrylovDecomposition, z: &Real, v: &[Real], prec: &Precision) -> Result<XVector> {
    let c = dec.project(v);
    let y = solve_shifted_tridiag(dec.t(), z, &c, prec)?;
    Ok(dec.combine(&y))
}

/// `opt_k(r_j)_{A_j}` computed by weighted least squares.
fn opt_rj(inst: &ProblemInstance, dec: &KrylovDecomposition, r: &RationalFunction, j: usize, z: &Real) -> Result<(XVector, XVector)> {
    let rj = r.truncated(j)?;
    let target = exact_apply(inst, &ScalarFunction::Rational(rj))?;
    let g = WeightSpec::for_pole(inst, z)?.weights(inst)?;
    let opt = OptimalSeries::new(dec, &target, &g, inst.precision())?.iterate(dec.dim());
    Ok((target, opt))
}

/// `‖opt_k(r_j)_{A_j} − Q(T − z_j I)⁻¹Qᵀ r_{j−1}(A)b‖₂`, which vanishes in
/// exact arithmetic.
pub fn verify_lemma_opt_formula(inst: &ProblemInstance, r: &RationalFunction, j: usize, k: usize) -> Result<Real> {
    let poles = real_poles_outside(inst, r)?;
    if j == 0 || j > poles.len() {
        return Err(Error::Parameter(format!("j = {j} outside 1..={}", poles.len())));
    }
    let prec = inst.precision();
    let dec = lanczos(inst, k, Reorth::Full)?;
    let (_, lhs) = opt_rj(inst, &dec, r, j, &poles[j - 1])?;
    let prev = exact_apply(inst, &ScalarFunction::Rational(r.truncated(j - 1)?))?;
    let rhs = shifted_projector(&dec, &poles[j - 1], &prev, prec)?;
    Ok(lhs.sub(&rhs)?.norm2())
}

/// 2-norm deviation between the Lanczos-FA error for `r` and the sum
/// `Σ_j [Π_{i>j} Q(T − z_i I)⁻¹Qᵀ](r_j(A)b − opt_k(r_j)_{A_j})`.
pub fn verify_telescoping(inst: &ProblemInstance, r: &RationalFunction, k: usize) -> Result<Real> {
    let poles = real_poles_outside(inst, r)?;
    if k <= r.numer_degree() {
        return Err(Error::Parameter(format!("needs k > deg(n) = {}", r.numer_degree())));
    }
    let prec = inst.precision();
    let dec = lanczos(inst, k, Reorth::Full)?;
    let f = ScalarFunction::Rational(r.clone());
    let err = exact_apply(inst, &f)?.sub(&lanczos_fa_from(&dec, &f, prec)?)?;

    let terms = (1..=poles.len())
        .into_par_iter()
        .map(|j| {
            let (target, opt) = opt_rj(inst, &dec, r, j, &poles[j - 1])?;
            let mut term = target.sub(&opt)?;
            for z in &poles[j..] {
                term = shifted_projector(&dec, z, &term, prec)?;
            }
            Ok(term)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = XVector::zeros(prec.bits(), inst.dim());
    for t in &terms {
        sum = sum.add(t)?;
    }
    Ok(err.sub(&sum)?.norm2())
}

/// Both sides of the transfer inequality
/// `‖r_j(A)b − opt_k(r_j)_{A_j}‖₂ ≤ κ(A_j)^{1/2}·‖m_{j+1,q}(A)‖₂·opt₂(r, k − (q − j))`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferCheck {
    pub lhs: Real,
    pub rhs: Real,
}

impl TransferCheck {
    pub fn holds(&self, slack: &Real) -> bool {
        self.lhs <= &self.rhs + slack
    }
}

pub fn verify_rj_transfer(inst: &ProblemInstance, r: &RationalFunction, j: usize, k: usize) -> Result<TransferCheck> {
    let poles = real_poles_outside(inst, r)?;
    let q = poles.len();
    if j == 0 || j > q {
        return Err(Error::Parameter(format!("j = {j} outside 1..={q}")));
    }
    if k <= q - j {
        return Err(Error::Parameter(format!("needs k > q − j = {}", q - j)));
    }
    let dec = lanczos(inst, k, Reorth::Full)?;
    let z = &poles[j - 1];
    let (target, opt) = opt_rj(inst, &dec, r, j, z)?;
    let lhs = target.sub(&opt)?.norm2();

    let m_norm = inst
        .lambda()
        .iter()
        .map(|l| r.partial_denominator(j + 1, q, l).abs())
        .reduce(Real::max)
        .expect("non-empty spectrum");
    let full = exact_apply(inst, &ScalarFunction::Rational(r.clone()))?;
    let reduced = k - (q - j);
    let opt2 = opt2_errors_from(&dec, &full, reduced)?.pop().expect("reduced >= 1");
    let rhs = kappa_shift(inst, z)?.sqrt() * m_norm * opt2;
    Ok(TransferCheck { lhs, rhs })
}
