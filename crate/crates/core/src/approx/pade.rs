use crate::error::{Error, Result};
use crate::matfunc::{Pole, Polynomial, RationalFunction};
use crate::xlinalg::{Precision, Real};

/// Coefficients `a_j = (2m − j)! m! / ((2m)! j! (m − j)!)` of the diagonal
/// Padé numerator `P(s)`; the approximant to `exp(s)` is `P(s) / P(−s)`.
pub fn pade_exp_coeffs(m: usize, prec: &Precision) -> Vec<Real> {
    let mut a = vec![prec.one()];
    // a_{j+1} / a_j = (m − j) / ((2m − j)(j + 1))
    for j in 0..m {
        let next = &a[j] * ((m - j) as i32) / (((2 * m - j) * (j + 1)) as i32);
        a.push(next);
    }
    a
}

/// `[m/m]` Padé approximant to `exp(x)`.
pub fn pade_exp(m: usize, prec: &Precision) -> Result<RationalFunction> {
    pade_exp_scaled(m, &prec.one(), 1, prec)
}

/// `[m/m]` Padé approximant to `exp(sign · t · x)` about 0, with the
/// denominator made monic and its roots found at working precision.
///
/// Denominator roots are `−u_i / (sign·t)` where `u_i` are the roots of `P`,
/// which lie in the open left half-plane; with `sign·t < 0` the poles are in
/// the left half-plane. For `m ≥ 2` they are complex.
pub fn pade_exp_scaled(m: usize, t: &Real, sign: i8, prec: &Precision) -> Result<RationalFunction> {
    if m == 0 {
        return Err(Error::Parameter("Padé degree must be at least 1".into()));
    }
    if t.is_zero() {
        return Err(Error::Parameter("exponent scale must be nonzero".into()));
    }
    let a = pade_exp_coeffs(m, prec);
    let s = if sign < 0 { -t } else { t.clone() };
    // n(x) = P(s x), d(x) = P(−s x)
    let mut numer = Vec::with_capacity(m + 1);
    let mut denom = Vec::with_capacity(m + 1);
    let mut pow = prec.one();
    for (j, aj) in a.iter().enumerate() {
        numer.push(aj * &pow);
        let d = aj * &pow;
        denom.push(if j % 2 == 0 { d } else { -d });
        pow *= &s;
    }
    let lead = denom[m].clone();
    let numer: Vec<Real> = numer.iter().map(|c| c / &lead).collect();
    let monic: Vec<Real> = denom.iter().map(|c| c / &lead).collect();
    let roots = polynomial_roots(&monic, prec)?;
    let poles = group_conjugates(roots, prec)?;
    RationalFunction::new(Polynomial::new(numer)?, poles)
}

#[derive(Clone, Debug)]
struct Complex {
    re: Real,
    im: Real,
}

impl Complex {
    fn mul(&self, o: &Complex) -> Complex {
        Complex {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }

    fn sub(&self, o: &Complex) -> Complex {
        Complex {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    fn div(&self, o: &Complex) -> Complex {
        let den = &o.re.square() + &o.im.square();
        Complex {
            re: (&(&self.re * &o.re) + &(&self.im * &o.im)) / &den,
            im: (&(&self.im * &o.re) - &(&self.re * &o.im)) / &den,
        }
    }

    fn abs(&self) -> Real {
        self.re.hypot(&self.im)
    }
}

/// Roots of a monic real polynomial (ascending coefficients) by Durand–Kerner.
fn polynomial_roots(monic: &[Real], prec: &Precision) -> Result<Vec<Complex>> {
    let n = monic.len() - 1;
    let eval = |z: &Complex| {
        let mut acc = Complex {
            re: monic[n].clone(),
            im: prec.zero(),
        };
        for c in monic.iter().rev().skip(1) {
            acc = acc.mul(z);
            acc.re += c;
        }
        acc
    };
    // Cauchy bound for the root radius.
    let radius = prec.one()
        + monic[..n]
            .iter()
            .map(Real::abs)
            .reduce(Real::max)
            .unwrap_or_else(|| prec.zero());
    let seed = Complex {
        re: prec.parse("0.4")?,
        im: prec.parse("0.9")?,
    };
    let mut z: Vec<Complex> = Vec::with_capacity(n);
    let mut acc = Complex {
        re: radius.clone(),
        im: prec.zero(),
    };
    for _ in 0..n {
        acc = acc.mul(&seed);
        z.push(acc.clone());
    }
    // Quadratic convergence: once steps fall below `tol` a few more reach full precision.
    let mut polish = 0;
    for _ in 0..2000 {
        let mut change = prec.zero();
        for i in 0..n {
            let mut den = Complex {
                re: prec.one(),
                im: prec.zero(),
            };
            for j in 0..n {
                if i != j {
                    den = den.mul(&z[i].sub(&z[j]));
                }
            }
            let step = eval(&z[i]).div(&den);
            let rel = &step.abs() / &z[i].abs().max(prec.one());
            change = change.max(rel);
            z[i] = z[i].sub(&step);
        }
        if change <= *prec.tol() {
            polish += 1;
            if polish == 3 {
                return Ok(z);
            }
        }
    }
    Err(Error::Convergence {
        method: "durand-kerner",
        iterations: 2000,
        detail: format!("degree {n}"),
    })
}

fn group_conjugates(roots: Vec<Complex>, prec: &Precision) -> Result<Vec<Pole>> {
    let mut poles = Vec::new();
    for r in &roots {
        let small = prec.tol() * &r.abs();
        if r.im.abs() <= small {
            poles.push(Pole::Real(r.re.clone()));
        } else if r.im.is_positive() {
            poles.push(Pole::Conjugate {
                re: r.re.clone(),
                im: r.im.clone(),
            });
        }
    }
    let q: usize = poles.iter().map(Pole::multiplicity).sum();
    if q != roots.len() {
        return Err(Error::Internal(format!(
            "roots do not pair into conjugates ({q} of {})",
            roots.len()
        )));
    }
    poles.sort_by(|a, b| pole_key(a).total_cmp(&pole_key(b)));
    Ok(poles)
}

fn pole_key(p: &Pole) -> Real {
    match p {
        Pole::Real(z) => z.clone(),
        Pole::Conjugate { re, .. } => re.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfunc::ScalarFunction;

    fn p() -> Precision {
        Precision::default()
    }

    /// `n − exp·d` vanishes through order `2m`.
    fn taylor_defect(r: &RationalFunction, m: usize, prec: &Precision) -> Real {
        let n = r.numer().coeffs();
        // Expand the monic denominator into monomial coefficients.
        let mut d = vec![prec.one()];
        for pole in r.poles() {
            let factor: Vec<Real> = match pole {
                Pole::Real(z) => vec![-z, prec.one()],
                Pole::Conjugate { re, im } => {
                    vec![&re.square() + &im.square(), -(re * 2), prec.one()]
                }
            };
            let mut next = vec![prec.zero(); d.len() + factor.len() - 1];
            for (i, a) in d.iter().enumerate() {
                for (j, b) in factor.iter().enumerate() {
                    next[i + j] += &(a * b);
                }
            }
            d = next;
        }
        let mut inv_fact = vec![prec.one()];
        for k in 1..=2 * m {
            let v = &inv_fact[k - 1] / (k as i32);
            inv_fact.push(v);
        }
        let mut worst = prec.zero();
        for k in 0..=2 * m {
            let mut c = prec.zero();
            for (j, dj) in d.iter().enumerate().take(k + 1) {
                c += &(dj * &inv_fact[k - j]);
            }
            let nk = n.get(k).cloned().unwrap_or_else(|| prec.zero());
            worst = worst.max((nk - c).abs());
        }
        worst
    }

    #[test]
    fn first_order_is_the_bilinear_form() {
        let p = p();
        let r = pade_exp(1, &p).unwrap();
        // (1 + x/2)/(1 − x/2) = −(x + 2)/(x − 2)
        assert_eq!(r.poles(), &[Pole::Real(p.int(2))][..]);
        let c = r.numer().coeffs();
        assert!((&c[0] + 2.0).abs() <= Real::pow2(256, -200));
        assert!((&c[1] + 1.0).abs() <= Real::pow2(256, -200));
    }

    #[test]
    fn second_order_coefficients() {
        let p = p();
        let a = pade_exp_coeffs(2, &p);
        assert_eq!(a[1], 0.5);
        assert_eq!(a[2], p.one() / 12);
        let r = pade_exp(2, &p).unwrap();
        assert!(taylor_defect(&r, 2, &p) <= Real::pow2(256, -200));
        assert!(r.real_poles().is_none());
    }

    #[test]
    fn matches_taylor_series_and_is_one_at_zero() {
        let p = p();
        for m in 1..=8 {
            let r = pade_exp(m, &p).unwrap();
            assert!(taylor_defect(&r, m, &p) <= Real::pow2(256, -180), "m={m}");
            assert!((r.eval(&p.zero()).unwrap() - 1.0).abs() <= Real::pow2(256, -200));
        }
    }

    #[test]
    fn decaying_exponential_has_left_half_plane_poles() {
        let p = p();
        let r = pade_exp_scaled(5, &p.one(), -1, &p).unwrap();
        assert_eq!(r.q(), 5);
        for pole in r.poles() {
            let re = match pole {
                Pole::Real(z) => z,
                Pole::Conjugate { re, .. } => re,
            };
            assert!(re.is_negative());
        }
        let f = ScalarFunction::ExpScaled { t: p.one(), sign: -1 };
        let x = p.real(0.1);
        let err = (r.eval(&x).unwrap() - f.eval(&x).unwrap()).abs();
        assert!(err <= 1e-15);
    }
}
