//! Scalar functions, exact `f(A) b` and the Lanczos-FA iterate
//! `lan_k(f) = Q f(T) Qᵀ b`.

mod function;

pub use function::{Pole, Polynomial, RationalFunction, ScalarFunction};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instances::ProblemInstance;
use crate::krylov::{lanczos, KrylovDecomposition, Reorth};
use crate::xlinalg::tridiag::solve_shifted_unchecked;
use crate::xlinalg::{
    solve_shifted_tridiag_with_ritz, tridiag_eig, Matrix, Precision, Real, Tridiagonal,
    XVector,
};

pub fn eval_scalar(f: &ScalarFunction, x: &Real) -> Result<Real> {
    f.eval(x)
}

/// `f(A) b`, i.e. `f(λᵢ) wᵢ` entrywise.
pub fn exact_apply(inst: &ProblemInstance, f: &ScalarFunction) -> Result<XVector> {
    let v = inst
        .lambda()
        .iter()
        .zip(inst.w().iter())
        .map(|(l, w)| Ok(f.eval(l)? * w))
        .collect::<Result<Vec<_>>>()?;
    XVector::new(v)
}

/// The `k`-th Lanczos-FA iterate, through the eigendecomposition of `T`.
///
/// When `k` exceeds the number of steps the recurrence can take, every
/// available column is used and the iterate is exact.
pub fn lanczos_fa(inst: &ProblemInstance, f: &ScalarFunction, k: usize) -> Result<XVector> {
    let dec = lanczos(inst, k, Reorth::Full)?;
    lanczos_fa_from(&dec, f, inst.precision())
}

/// Lanczos-FA over all columns of an existing decomposition.
pub fn lanczos_fa_from(
    dec: &KrylovDecomposition,
    f: &ScalarFunction,
    prec: &Precision,
) -> Result<XVector> {
    let eig = tridiag_eig(dec.t())?;
    check_ritz(&eig.values, &operator_scale(dec, &eig.values), f, prec)?;
    let fvals = eig
        .values
        .iter()
        .map(|th| f.eval(th))
        .collect::<Result<Vec<_>>>()?;
    let y = eig.apply_to_e1(&fvals);
    Ok(dec.combine(&scaled(&y, dec.b_norm())))
}

/// Lanczos-FA for a rational function through shifted solves with `T`:
/// `r(T) e₁ = m(T)⁻¹ n(T) e₁`, one tridiagonal solve per real pole and one
/// positive-definite solve per conjugate pair.
pub fn lanczos_fa_rational_solve(
    dec: &KrylovDecomposition,
    r: &RationalFunction,
    prec: &Precision,
) -> Result<XVector> {
    let t = dec.t();
    let eig = tridiag_eig(t)?;
    check_poles(&eig.values, &operator_scale(dec, &eig.values), r.poles(), prec)?;
    let mut u = numer_e1(t, r, prec)?;
    for p in r.poles() {
        u = match p {
            Pole::Real(z) => solve_shifted_tridiag_with_ritz(t, &eig.values, z, &u, prec)?.into_inner(),
            Pole::Conjugate { re, im } => solve_conjugate_pair(t, re, im, &u)?,
        };
    }
    Ok(dec.combine(&scaled(&u, dec.b_norm())))
}

/// `n(T) e₁` by Horner's rule.
fn numer_e1(t: &Tridiagonal, r: &RationalFunction, prec: &Precision) -> Result<Vec<Real>> {
    let coeffs = r.numer().coeffs();
    let mut u: Vec<Real> = (0..t.dim()).map(|_| prec.zero()).collect();
    u[0] = coeffs[coeffs.len() - 1].clone();
    for c in coeffs.iter().rev().skip(1) {
        u = t.matvec(&u)?;
        u[0] += c;
    }
    Ok(u)
}

/// Lanczos-FA for `r` whose poles are real and lie outside `[lo, hi] ⊇ Λ(A)`.
///
/// Ritz values lie in `[lo, hi]`, so every shifted solve is definite and
/// no eigendecomposition of `T` is needed. Poles within `tol·max(|lo|, |hi|)`
/// of the interval are rejected.
pub fn lanczos_fa_outside(
    dec: &KrylovDecomposition,
    r: &RationalFunction,
    lo: &Real,
    hi: &Real,
    prec: &Precision,
) -> Result<XVector> {
    let margin = prec.tol() * &lo.abs().max(hi.abs());
    let poles = r
        .real_poles()
        .ok_or_else(|| Error::Domain("complex poles need the checked solve".into()))?;
    for z in &poles {
        if z > &(lo - &margin) && z < &(hi + &margin) {
            return Err(Error::Domain(format!(
                "pole {} is not separated from [{}, {}]",
                z.to_f64(),
                lo.to_f64(),
                hi.to_f64()
            )));
        }
    }
    let t = dec.t();
    let mut u = numer_e1(t, r, prec)?;
    for z in &poles {
        u = solve_shifted_unchecked(t, z, &u)?;
    }
    Ok(dec.combine(&scaled(&u, dec.b_norm())))
}

/// Solves `((T − re)² + im²) y = rhs`, a symmetric positive-definite system.
fn solve_conjugate_pair(t: &Tridiagonal, re: &Real, im: &Real, rhs: &[Real]) -> Result<Vec<Real>> {
    let k = t.dim();
    let bits = re.prec();
    let shifted = Matrix::from_fn(k, k, |i, j| {
        if i == j {
            &t.alpha()[i] - re
        } else if i + 1 == j {
            t.beta()[i].clone()
        } else if j + 1 == i {
            t.beta()[j].clone()
        } else {
            Real::zero(bits)
        }
    });
    let mut s = shifted.matmul(&shifted)?;
    let im2 = im.square();
    for i in 0..k {
        s[(i, i)] += &im2;
    }
    let l = s
        .cholesky()
        .ok_or_else(|| Error::Internal("conjugate-pair system is not positive definite".into()))?;
    Ok(Matrix::cholesky_solve(&l, rhs))
}

fn scaled(y: &[Real], s: &Real) -> Vec<Real> {
    y.iter().map(|x| x * s).collect()
}

/// A lower bound on `‖A‖₂`: `max(‖T_k‖₂, β_{k+1})`.
///
/// The Ritz values alone are not a usable scale: at `k = 1` on a symmetric
/// spectrum the only Ritz value is a rounding-level zero.
fn operator_scale(dec: &KrylovDecomposition, ritz: &[Real]) -> Real {
    ritz.iter()
        .map(Real::abs)
        .fold(dec.beta_next().abs(), Real::max)
}

/// Rejects Ritz values where `f` is singular or undefined, using the
/// threshold `tol·scale` with `scale` an estimate of `‖A‖₂`.
pub(crate) fn check_ritz(ritz: &[Real], scale: &Real, f: &ScalarFunction, prec: &Precision) -> Result<()> {
    let floor = ritz_floor(scale, prec);
    let zero = prec.zero();
    match f {
        ScalarFunction::Rational(r) => check_poles(ritz, scale, r.poles(), prec),
        ScalarFunction::InvPower(_) | ScalarFunction::InvSqrt => {
            check_poles(ritz, scale, &[Pole::Real(zero)], prec)?;
            if matches!(f, ScalarFunction::InvSqrt) {
                if let Some(th) = ritz.iter().find(|th| th.is_negative()) {
                    return Err(Error::Domain(format!(
                        "inv_sqrt undefined at Ritz value {}",
                        th.to_f64()
                    )));
                }
            }
            Ok(())
        }
        ScalarFunction::Sqrt => match ritz.iter().find(|th| th.is_negative()) {
            Some(th) => Err(Error::Domain(format!(
                "sqrt undefined at Ritz value {}",
                th.to_f64()
            ))),
            None => Ok(()),
        },
        ScalarFunction::Sign => match ritz.iter().find(|th| th.abs() <= floor) {
            Some(th) => Err(Error::Domain(format!(
                "sign undefined at Ritz value {:e} (within {:e} of 0)",
                th.to_f64(),
                floor.to_f64()
            ))),
            None => Ok(()),
        },
        ScalarFunction::Polynomial(_) | ScalarFunction::ExpScaled { .. } => Ok(()),
    }
}

fn ritz_floor(scale: &Real, prec: &Precision) -> Real {
    if scale.is_zero() {
        prec.tol().clone()
    } else {
        prec.tol() * scale
    }
}

fn check_poles(ritz: &[Real], scale: &Real, poles: &[Pole], prec: &Precision) -> Result<()> {
    let floor = ritz_floor(scale, prec);
    for p in poles {
        for th in ritz {
            let distance = p.distance(th);
            if distance <= floor {
                let shift = match p {
                    Pole::Real(z) => z.to_f64(),
                    Pole::Conjugate { re, .. } => re.to_f64(),
                };
                return Err(Error::SingularShift {
                    shift,
                    ritz: th.to_f64(),
                    distance: distance.to_f64(),
                });
            }
        }
    }
    Ok(())
}

/// `‖f(A)b − lan_k(f)‖₂` for `k = 1..=k_max` from a single factorization.
///
/// Per-iteration failures (singular shifts, undefined Ritz values) are kept
/// as `Err` entries; the outer error is for failures that affect every `k`.
pub fn lanczos_fa_series(
    inst: &ProblemInstance,
    f: &ScalarFunction,
    k_max: usize,
) -> Result<Vec<Result<Real>>> {
    let fb = exact_apply(inst, f)?;
    let dec = lanczos(inst, k_max, Reorth::Full)?;
    Ok(lanczos_fa_iterates(&dec, f, k_max, inst.precision())
        .into_iter()
        .map(|it| it.and_then(|x| Ok(fb.sub(&x)?.norm2())))
        .collect())
}

/// Lanczos-FA iterates for `k = 1..=k_max` over prefixes of `dec`.
pub fn lanczos_fa_iterates(
    dec: &KrylovDecomposition,
    f: &ScalarFunction,
    k_max: usize,
    prec: &Precision,
) -> Vec<Result<XVector>> {
    (1..=k_max)
        .into_par_iter()
        .map(|k| lanczos_fa_from(&dec.prefix(k), f, prec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    fn inst(lambda: &[f64], w: &[f64]) -> ProblemInstance {
        let p = p();
        ProblemInstance::new(
            lambda.iter().map(|&x| p.real(x)).collect(),
            XVector::from_f64(256, w).unwrap(),
            p,
        )
        .unwrap()
    }

    fn close(a: &Real, b: &Real) -> bool {
        (a - b).abs() <= Real::pow2(256, -190)
    }

    fn inv() -> ScalarFunction {
        ScalarFunction::InvPower(1)
    }

    #[test]
    fn exact_apply_examples() {
        let p = p();
        let sq = ScalarFunction::Polynomial(Polynomial::new(vec![p.zero(), p.zero(), p.one()]).unwrap());
        let v = exact_apply(&inst(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]), &sq).unwrap();
        assert_eq!(v.to_vec(), vec![p.int(1), p.int(4), p.int(9)]);
        let v = exact_apply(&inst(&[1.0, 2.0], &[1.0, 1.0]), &inv()).unwrap();
        assert_eq!(v.to_vec(), vec![p.int(1), p.real(0.5)]);
        let v = exact_apply(&inst(&[-1.0, 1.0], &[1.0, 1.0]), &ScalarFunction::Sign).unwrap();
        assert_eq!(v.to_vec(), vec![p.int(-1), p.int(1)]);
        let pole = ScalarFunction::parse("rational:numer=[1];poles=[2]", &p).unwrap();
        assert!(matches!(
            exact_apply(&inst(&[1.0, 2.0], &[1.0, 1.0]), &pole),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn one_step_inverse() {
        let x = lanczos_fa(&inst(&[1.0, 2.0], &[1.0, 1.0]), &inv(), 1).unwrap();
        let two_thirds = p().int(2) / 3;
        assert!(close(&x[0], &two_thirds) && close(&x[1], &two_thirds));
    }

    #[test]
    fn full_grade_is_exact() {
        let i = inst(&[0.5, 1.0, 2.0, 7.0], &[1.0, -2.0, 0.5, 3.0]);
        for f in [ScalarFunction::Sqrt, inv(), ScalarFunction::Sign] {
            let x = lanczos_fa(&i, &f, 4).unwrap();
            let e = exact_apply(&i, &f).unwrap();
            assert!(e.sub(&x).unwrap().norm2() <= p().tol() * &e.norm2(), "{f}");
        }
    }

    #[test]
    fn series_examples() {
        let p = p();
        let s = lanczos_fa_series(&inst(&[1.0, 2.0], &[1.0, 1.0]), &inv(), 2).unwrap();
        let e1 = (p.one() / 9 + p.one() / 36).sqrt();
        assert!(close(s[0].as_ref().unwrap(), &e1));
        assert!(*s[1].as_ref().unwrap() <= *p.tol());

        let s = lanczos_fa_series(&inst(&[-1.0, 1.0], &[1.0, 1.0]), &inv(), 2).unwrap();
        assert!(matches!(s[0], Err(Error::SingularShift { .. })));
        assert!(*s[1].as_ref().unwrap() <= *p.tol());

        let quad = ScalarFunction::parse("poly:[1,-2,3]", &p).unwrap();
        let i = inst(&[1.0, 2.0, 3.0, 5.0, 8.0, 9.0], &[1.0; 6]);
        let s = lanczos_fa_series(&i, &quad, 5).unwrap();
        let scale = exact_apply(&i, &quad).unwrap().norm2();
        assert!(*s[0].as_ref().unwrap() > 1.0 && *s[1].as_ref().unwrap() > 1.0);
        for e in &s[2..] {
            assert!(*e.as_ref().unwrap() <= p.tol() * &scale);
        }
    }

    #[test]
    fn series_entries_match_single_calls() {
        let i = inst(&[1.0, 2.0, 3.0, 5.0, 8.0, 9.0], &[1.0, 0.5, 1.0, 2.0, 1.0, 0.25]);
        let f = ScalarFunction::Sqrt;
        let fb = exact_apply(&i, &f).unwrap();
        let s = lanczos_fa_series(&i, &f, 6).unwrap();
        for k in 1..=6 {
            let single = fb.sub(&lanczos_fa(&i, &f, k).unwrap()).unwrap().norm2();
            assert_eq!(s[k - 1].as_ref().unwrap(), &single);
        }
    }

    #[test]
    fn sign_at_zero_ritz_value_is_a_domain_error() {
        let i = inst(&[-1.0, 1.0], &[1.0, 1.0]);
        assert!(matches!(
            lanczos_fa(&i, &ScalarFunction::Sign, 1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rounding_level_ritz_value_is_singular_at_the_first_step() {
        use crate::instances::{spectrum, SpectrumKind};
        let p = p();
        let kind = SpectrumKind::IndefiniteSymmetric { d: 100, inner: p.int(1), outer: p.int(100) };
        let i = ProblemInstance::with_ones(spectrum(&kind, &p).unwrap(), p.clone()).unwrap();
        let alpha = lanczos(&i, 1, Reorth::Full).unwrap().t().alpha()[0].clone();
        assert!(alpha.abs() <= *p.tol());
        assert!(matches!(lanczos_fa(&i, &inv(), 1), Err(Error::SingularShift { .. })));
        assert!(matches!(lanczos_fa(&i, &ScalarFunction::Sign, 1), Err(Error::Domain(_))));
        assert!(lanczos_fa(&i, &inv(), 2).is_ok());
    }

    #[test]
    fn rational_paths_agree() {
        let p = p();
        let i = inst(&[1.0, 1.5, 2.0, 4.0, 7.0, 10.0], &[1.0, 2.0, 0.5, 1.0, 3.0, 1.0]);
        let r = RationalFunction::new(
            Polynomial::new(vec![p.int(1), p.int(2)]).unwrap(),
            vec![
                Pole::Real(p.int(-1)),
                Pole::Real(p.real(0.5)),
                Pole::Conjugate {
                    re: p.int(-2),
                    im: p.int(3),
                },
            ],
        )
        .unwrap();
        let f = ScalarFunction::Rational(r.clone());
        let dec = lanczos(&i, 6, Reorth::Full).unwrap();
        for k in 2..=6 {
            let d = dec.prefix(k);
            let a = lanczos_fa_from(&d, &f, &p).unwrap();
            let b = lanczos_fa_rational_solve(&d, &r, &p).unwrap();
            assert!(a.sub(&b).unwrap().norm2() <= p.tol() * &a.norm2() * 10);
        }
    }
}
