//! Instances on which the best polynomial in the Krylov space is exactly the
//! uniform best approximation of `f`.
//!
//! `A = diag(λ₁, …, λ_{k+1})` with the `λᵢ` at the equioscillation points of
//! the degree-`(k−1)` minimax polynomial `p*`. The weights
//! `b_ℓ² ∝ 1 / Πᵢ≠ℓ |λ_ℓ − λᵢ|` make the alternating residual `f − p*`
//! orthogonal to every polynomial of degree below `k`, since those weights
//! with alternating signs form the `k`-th divided difference functional.

use crate::approx::{discrete_best_poly, remez_best_poly, BestApprox, ChebPoly};
use crate::error::{Error, Result};
use crate::matfunc::ScalarFunction;
use crate::xlinalg::{Precision, Real, XVector};

use super::ProblemInstance;

#[derive(Clone, Debug)]
pub struct HardInstance {
    pub instance: ProblemInstance,
    /// Minimax error of the best polynomial of degree `k − 1`.
    pub epsilon: Real,
    pub equioscillation_points: Vec<Real>,
    pub best_poly: ChebPoly,
}

/// Hard instance for `f` on `[lo, hi]` at Krylov dimension `k`.
pub fn hard_instance(f: &ScalarFunction, lo: &Real, hi: &Real, k: usize, prec: &Precision) -> Result<HardInstance> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if !f.continuous_on(lo, hi) {
        return Err(Error::Domain(format!(
            "{f} is not continuous on [{}, {}]",
            lo.to_f64(),
            hi.to_f64()
        )));
    }
    let best = remez_best_poly(&|x: &Real| f.eval(x), lo, hi, k - 1, prec)?;
    build(best, prec)
}

/// Hard instance on `k + 1` active points of the discrete minimax problem.
pub fn discrete_hard_instance(
    f: &ScalarFunction,
    points: &[Real],
    k: usize,
    prec: &Precision,
) -> Result<HardInstance> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    let best = discrete_best_poly(&|x: &Real| f.eval(x), points, k - 1, prec)?;
    build(best, prec)
}

fn build(best: BestApprox, prec: &Precision) -> Result<HardInstance> {
    if best.degenerate || best.error <= *prec.tol() {
        return Err(Error::Degenerate(format!(
            "minimax error {:e} is below tolerance",
            best.error.to_f64()
        )));
    }
    let pts = best.alt_points;
    let mut b2: Vec<Real> = Vec::with_capacity(pts.len());
    for (l, pl) in pts.iter().enumerate() {
        let mut prod = prec.one();
        for (i, pi) in pts.iter().enumerate() {
            if i != l {
                prod *= &(pl - pi).abs();
            }
        }
        let v = prod.recip();
        if !v.is_positive() || !v.is_finite() {
            return Err(Error::Internal(format!("weight {l} is {:e}", v.to_f64())));
        }
        b2.push(v);
    }
    let total = b2.iter().fold(prec.zero(), |acc, v| acc + v);
    let w: Vec<Real> = b2.iter().map(|v| (v / &total).sqrt()).collect();
    let instance = ProblemInstance::new(pts.clone(), XVector::new(w)?, prec.clone())?;
    Ok(HardInstance {
        instance,
        epsilon: best.error,
        equioscillation_points: pts,
        best_poly: best.poly,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimal::opt2_errors;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn two_point_inverse() {
        let p = p();
        let h = hard_instance(&ScalarFunction::inv_power(1).unwrap(), &p.int(1), &p.int(2), 1, &p).unwrap();
        let tol = p.tol() * &p.int(10);
        assert!((&h.epsilon - &(p.one() / &p.int(4))).abs() <= tol);
        let lam = h.instance.lambda();
        assert!((&lam[0] - &p.int(1)).abs() <= tol);
        assert!((&lam[1] - &p.int(2)).abs() <= tol);
        let half = (p.one() / &p.int(2)).sqrt();
        for wi in h.instance.w().iter() {
            assert!((wi - &half).abs() <= tol);
        }
        assert!((&h.best_poly.eval(&p.int(1)) - &(p.int(3) / &p.int(4))).abs() <= tol);
    }

    #[test]
    fn representable_target_is_degenerate() {
        let p = p();
        let f = ScalarFunction::parse("poly:[0,1]", &p).unwrap();
        let e = hard_instance(&f, &p.int(1), &p.int(5), 2, &p).unwrap_err();
        assert!(matches!(e, Error::Degenerate(_)));
        let sq = ScalarFunction::parse("poly:[0,0,1]", &p).unwrap();
        let pts: Vec<Real> = (1..=4).map(|i| p.int(i)).collect();
        let e = discrete_hard_instance(&sq, &pts, 3, &p).unwrap_err();
        assert!(matches!(e, Error::Degenerate(_)));
        // Degree below 2 on {1, 2, 3}: the best line is 4x − 7/2 with error 1/2.
        let h = discrete_hard_instance(&sq, &pts[..3], 2, &p).unwrap();
        assert!((&h.epsilon - &(p.one() / &p.int(2))).abs() <= p.tol() * &p.int(10));
    }

    #[test]
    fn optimal_error_equals_minimax_error() {
        let p = p();
        let f = ScalarFunction::inv_power(1).unwrap();
        for k in 1..=6 {
            let h = hard_instance(&f, &p.int(1), &p.int(100), k, &p).unwrap();
            assert_eq!(h.instance.dim(), k + 1);
            let opt = opt2_errors(&h.instance, &f, k).unwrap();
            let rel = (&opt[k - 1] - &h.epsilon).abs() / &h.epsilon;
            assert!(rel.to_f64() < 1e-10, "k={k}: rel {:e}", rel.to_f64());
        }
    }

    #[test]
    fn weights_are_normalized_and_alternation_holds() {
        let p = p();
        let f = ScalarFunction::inv_power(1).unwrap();
        let h = hard_instance(&f, &p.int(1), &p.int(100), 5, &p).unwrap();
        let sum = h.instance.w().iter().fold(p.zero(), |a, v| a + &v.square());
        assert!((sum - p.one()).abs() <= p.tol() * &p.int(10));
        let slack = p.tol() * &p.int(100);
        let err = |x: &Real| f.eval(x).unwrap() - h.best_poly.eval(x);
        let sign0 = err(&h.equioscillation_points[0]).signum();
        for (i, x) in h.equioscillation_points.iter().enumerate() {
            let mut expect = &sign0 * &h.epsilon;
            if i % 2 == 1 {
                expect = -expect;
            }
            assert!((err(x) - &expect).abs() <= slack, "point {i}");
        }
    }

    #[test]
    fn discrete_instance_matches_discrete_minimax() {
        let p = p();
        let f = ScalarFunction::inv_power(1).unwrap();
        let pts: Vec<Real> = (1..=10).map(|i| p.int(i)).collect();
        let h = discrete_hard_instance(&f, &pts, 3, &p).unwrap();
        assert_eq!(h.instance.dim(), 4);
        let opt = opt2_errors(&h.instance, &f, 3).unwrap();
        let rel = (&opt[2] - &h.epsilon).abs() / &h.epsilon;
        assert!(rel <= p.tol() * &p.int(100), "rel {:e}", rel.to_f64());

        let two = vec![p.int(1), p.int(2)];
        let d = discrete_hard_instance(&f, &two, 1, &p).unwrap();
        assert!((&d.epsilon - &(p.one() / &p.int(4))).abs() <= p.tol() * &p.int(10));
    }
}
