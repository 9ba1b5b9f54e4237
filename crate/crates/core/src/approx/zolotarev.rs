use crate::error::{Error, Result};
use crate::matfunc::{Pole, Polynomial, RationalFunction};
use crate::xlinalg::{Precision, Real};

use super::chebyshev::check_interval;

const MAX_AGM_STEPS: usize = 200;

/// Arithmetic-geometric mean of `a` and `b`.
pub fn agm(a: &Real, b: &Real, prec: &Precision) -> Result<Real> {
    let (mut a, mut b) = (a.clone(), b.clone());
    let stop = prec.eps() * 4;
    for _ in 0..MAX_AGM_STEPS {
        if (&a - &b).abs() <= &stop * &a.abs() {
            return Ok(a);
        }
        let next = (&a + &b) / 2;
        b = (&a * &b).sqrt();
        a = next;
    }
    Err(Error::Solver {
        sweeps: MAX_AGM_STEPS,
        residual: (&a - &b).abs().to_f64(),
    })
}

/// Complete elliptic integral of the first kind `K(k) = π / (2 AGM(1, √(1 − k²)))`.
pub fn ellip_k(k: &Real, prec: &Precision) -> Result<Real> {
    let kc = (prec.one() - k.square()).sqrt();
    Ok(Real::pi(prec.bits()) / (agm(&prec.one(), &kc, prec)? * 2))
}

/// Jacobi `(sn, cn, dn)(u | k)` for modulus `0 ≤ k < 1`, given the
/// complementary parameter `mc = 1 − k²`, by descending Landen transformation.
pub fn sncndn(u: &Real, mc: &Real, prec: &Precision) -> Result<(Real, Real, Real)> {
    if !mc.is_positive() {
        return Err(Error::Parameter("complementary parameter must be positive".into()));
    }
    let stop = prec.tol().clone();
    let mut em = Vec::new();
    let mut en = Vec::new();
    let mut a = prec.one();
    let mut emc = mc.clone();
    let mut c = prec.one();
    let mut converged = false;
    for _ in 0..MAX_AGM_STEPS {
        em.push(a.clone());
        emc = emc.sqrt();
        en.push(emc.clone());
        c = (&a + &emc) / 2;
        if (&a - &emc).abs() <= &stop * &a {
            converged = true;
            break;
        }
        emc *= &a;
        a = c.clone();
    }
    if !converged {
        return Err(Error::Solver {
            sweeps: MAX_AGM_STEPS,
            residual: (&a - &emc).abs().to_f64(),
        });
    }
    let uu = u * &c;
    let mut sn = uu.sin();
    let mut cn = uu.cos();
    let mut dn = prec.one();
    if !sn.is_zero() {
        let mut a = &cn / &sn;
        c = &c * &a;
        for i in (0..em.len()).rev() {
            let b = em[i].clone();
            a = &a * &c;
            c = &c * &dn;
            dn = (&en[i] + &a) / (&b + &a);
            a = &c / &b;
        }
        a = (c.square() + 1.0).sqrt().recip();
        sn = if sn.is_negative() { -&a } else { a };
        cn = &c * &sn;
    }
    Ok((sn, cn, dn))
}

/// Best relative type-`(r, r)` rational approximation to `√x` on `[lo, hi]`.
///
/// On `[ℓ², 1]` with `ℓ² = lo/hi` the approximant is
/// `C Π_{j=1}^{r} (u + c_{2j−1}) / (u + c_{2j})` with
/// `c_i = ℓ² sn²(iK′/(2r+1); ℓ′) / cn²(iK′/(2r+1); ℓ′)`, `ℓ′ = √(1 − ℓ²)`,
/// `K′ = K(ℓ′)`; `C` balances the relative error. Poles are `−hi·c_{2j}`.
pub fn zolotarev_sqrt(lo: &Real, hi: &Real, r: usize, prec: &Precision) -> Result<RationalFunction> {
    check_interval(lo, hi)?;
    if !lo.is_positive() {
        return Err(Error::Domain("Zolotarev interval must be positive".into()));
    }
    if r == 0 {
        return Err(Error::Parameter("Zolotarev degree must be at least 1".into()));
    }
    let l2 = lo / hi;
    let lp = (prec.one() - &l2).sqrt();
    let kp = ellip_k(&lp, prec)?;
    let c: Vec<Real> = (1..=2 * r)
        .map(|i| {
            let u = &kp * (i as i32) / ((2 * r + 1) as i32);
            let (sn, cn, _) = sncndn(&u, &l2, prec)?;
            Ok(&l2 * &(sn.square() / cn.square()))
        })
        .collect::<Result<_>>()?;
    let odd: Vec<Real> = c.iter().step_by(2).cloned().collect();
    let even: Vec<Real> = c.iter().skip(1).step_by(2).cloned().collect();

    // g(u) = √u Π (u + c_even)/(u + c_odd); s = C/g·√u·... balances C/g − 1.
    let g = |u: &Real| {
        let mut v = u.sqrt();
        for (o, e) in odd.iter().zip(&even) {
            v *= &(u + e) / &(u + o);
        }
        v
    };
    let (gmin, gmax) = g_extremes(&g, &l2, prec);
    let big_c = &(&gmin * &gmax * 2) / &(&gmin + &gmax);

    // r(x) = √hi · C · Π (x + hi c_odd)/(x + hi c_even)
    let mut numer = vec![&hi.sqrt() * &big_c];
    for o in &odd {
        let root = hi * o;
        let mut next = vec![prec.zero(); numer.len() + 1];
        for (i, a) in numer.iter().enumerate() {
            next[i] += &(a * &root);
            next[i + 1] += a;
        }
        numer = next;
    }
    let poles = even.iter().map(|e| Pole::Real(-(hi * e))).collect();
    RationalFunction::new(Polynomial::new(numer)?, poles)
}

/// Extremes of `g` on `[l2, 1]`: endpoints plus refined interior local extrema.
fn g_extremes<G: Fn(&Real) -> Real>(g: &G, l2: &Real, prec: &Precision) -> (Real, Real) {
    // Sample in log scale, where the equioscillation points are spread out.
    let n = 4000;
    let log_lo = l2.ln();
    let xs: Vec<Real> = (0..=n)
        .map(|i| {
            if i == n {
                prec.one()
            } else if i == 0 {
                l2.clone()
            } else {
                (&log_lo * ((n - i) as i32) / (n as i32)).exp()
            }
        })
        .collect();
    let vals: Vec<Real> = xs.iter().map(g).collect();
    let mut gmin = vals[0].clone().min(vals[n].clone());
    let mut gmax = vals[0].clone().max(vals[n].clone());
    for i in 1..n {
        let is_max = vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1];
        let is_min = vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1];
        if is_max || is_min {
            let v = golden(g, &xs[i - 1], &xs[i + 1], is_max, prec);
            if is_max {
                gmax = gmax.max(v);
            } else {
                gmin = gmin.min(v);
            }
        }
    }
    (gmin, gmax)
}

fn golden<G: Fn(&Real) -> Real>(g: &G, a: &Real, b: &Real, maximize: bool, prec: &Precision) -> Real {
    let invphi = (prec.int(5).sqrt() - 1) / 2;
    let key = |x: &Real| if maximize { g(x) } else { -g(x) };
    let stop = prec.tol() * &b.abs();
    let (mut lo, mut hi) = (a.clone(), b.clone());
    let mut c = &hi - &(&(&hi - &lo) * &invphi);
    let mut d = &lo + &(&(&hi - &lo) * &invphi);
    let mut fc = key(&c);
    let mut fd = key(&d);
    while (&hi - &lo) > stop {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = &hi - &(&(&hi - &lo) * &invphi);
            fc = key(&c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = &lo + &(&(&hi - &lo) * &invphi);
            fd = key(&d);
        }
    }
    let best = fc.max(fd);
    if maximize {
        best
    } else {
        -best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn elliptic_special_values() {
        let p = p();
        // K(0) = π/2.
        let k0 = ellip_k(&p.zero(), &p).unwrap();
        assert!((&k0 - &(Real::pi(256) / 2)).abs() <= Real::pow2(256, -240));
        // sn(K) = 1, cn(K) = 0, dn(K) = k'.
        let k = p.int(3) / 5;
        let kk = ellip_k(&k, &p).unwrap();
        let mc = p.one() - k.square();
        let (sn, cn, dn) = sncndn(&kk, &mc, &p).unwrap();
        let tiny = Real::pow2(256, -120);
        assert!((&sn - 1.0).abs() <= tiny);
        assert!(cn.abs() <= tiny);
        assert!((&dn - &(p.int(4) / 5)).abs() <= tiny);
        // sn² + cn² = 1 at an arbitrary argument.
        let (sn, cn, dn) = sncndn(&p.real(0.7), &mc, &p).unwrap();
        assert!((sn.square() + cn.square() - 1.0).abs() <= Real::pow2(256, -200));
        assert!((&(&dn.square() + &(&k.square() * &sn.square())) - 1.0).abs() <= Real::pow2(256, -200));
    }

    #[test]
    fn poles_are_negative_and_distinct() {
        let p = p();
        let r = zolotarev_sqrt(&p.int(1), &p.int(100), 7, &p).unwrap();
        let poles = r.real_poles().unwrap();
        assert_eq!(poles.len(), 7);
        for w in poles.windows(2) {
            assert!((&w[0] - &w[1]).abs() > *p.tol());
        }
        assert!(poles.iter().all(Real::is_negative));
    }
}
