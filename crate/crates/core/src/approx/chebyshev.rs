use crate::error::{Error, Result};
use crate::xlinalg::Real;

/// Polynomial `Σ c_j T_j(t)` in the Chebyshev basis of `[lo, hi]`, where
/// `t = (2x − lo − hi) / (hi − lo)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebPoly {
    coeffs: Vec<Real>,
    lo: Real,
    hi: Real,
}

impl ChebPoly {
    pub fn new(coeffs: Vec<Real>, lo: Real, hi: Real) -> Result<Self> {
        check_interval(&lo, &hi)?;
        if coeffs.is_empty() {
            return Err(Error::Parameter("Chebyshev series needs a coefficient".into()));
        }
        Ok(ChebPoly { coeffs, lo, hi })
    }

    pub fn coeffs(&self) -> &[Real] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn interval(&self) -> (&Real, &Real) {
        (&self.lo, &self.hi)
    }

    pub(crate) fn to_unit(&self, x: &Real) -> Real {
        let num = &(x * 2) - &(&self.lo + &self.hi);
        num / &(&self.hi - &self.lo)
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, x: &Real) -> Real {
        let t = self.to_unit(x);
        let two_t = &t * 2;
        let mut b1 = x.zero_like();
        let mut b2 = x.zero_like();
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = &(&(&two_t * &b1) - &b2) + c;
            b2 = b1;
            b1 = b0;
        }
        &(&(&t * &b1) - &b2) + &self.coeffs[0]
    }

    /// Monomial coefficients in `x`, ascending. For display and small degrees only.
    pub fn to_monomial(&self) -> Vec<Real> {
        let n = self.coeffs.len();
        let zero = self.lo.zero_like();
        // T_j as polynomials in t, then substitute t = a x + c.
        let mut t_prev = vec![zero.one_like()];
        let mut t_cur = vec![zero.clone(), zero.one_like()];
        let mut in_t = vec![zero.clone(); n];
        for (j, c) in self.coeffs.iter().enumerate() {
            let tj: &[Real] = match j {
                0 => &t_prev,
                1 => &t_cur,
                _ => {
                    let mut next = vec![zero.clone(); j + 1];
                    for (i, v) in t_cur.iter().enumerate() {
                        next[i + 1] += &(v * 2);
                    }
                    for (i, v) in t_prev.iter().enumerate() {
                        next[i] -= v;
                    }
                    t_prev = std::mem::replace(&mut t_cur, next);
                    &t_cur
                }
            };
            for (i, v) in tj.iter().enumerate() {
                in_t[i] += &(v * c);
            }
        }
        let width = &self.hi - &self.lo;
        let a = zero.int_like(2) / &width;
        let c = -(&(&self.lo + &self.hi) / &width);
        let mut out = vec![zero.clone(); n];
        // Horner in t with t = a x + c.
        let mut acc: Vec<Real> = vec![zero.clone()];
        for coef in in_t.iter().rev() {
            let mut next = vec![zero.clone(); acc.len() + 1];
            for (i, v) in acc.iter().enumerate() {
                next[i] += &(v * &c);
                next[i + 1] += &(v * &a);
            }
            next[0] += coef;
            acc = next;
        }
        for (i, v) in acc.into_iter().enumerate().take(n) {
            out[i] = v;
        }
        out
    }
}

pub(crate) fn check_interval(lo: &Real, hi: &Real) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::Parameter(format!(
            "invalid interval [{}, {}]",
            lo.to_f64(),
            hi.to_f64()
        )));
    }
    Ok(())
}

/// Chebyshev points of the first kind (the `n` roots of `T_n`) on `[lo, hi]`, ascending.
pub fn chebyshev_roots(lo: &Real, hi: &Real, n: usize) -> Vec<Real> {
    let pi = Real::pi(lo.prec());
    let mid = (lo + hi) / 2;
    let half = (hi - lo) / 2;
    (0..n)
        .rev()
        .map(|j| {
            if 2 * j + 1 == n {
                return mid.clone();
            }
            let theta = &pi * (2 * j as i32 + 1) / (2 * n as i32);
            &mid + &(&half * &theta.cos())
        })
        .collect()
}

/// Chebyshev points of the second kind (extrema of `T_{n−1}`, endpoints
/// included) on `[lo, hi]`, ascending.
pub fn chebyshev_extrema(lo: &Real, hi: &Real, n: usize) -> Vec<Real> {
    if n == 1 {
        return vec![(lo + hi) / 2];
    }
    let pi = Real::pi(lo.prec());
    let mid = (lo + hi) / 2;
    let half = (hi - lo) / 2;
    let mut pts: Vec<Real> = (0..n)
        .rev()
        .map(|j| {
            if 2 * j + 1 == n {
                return mid.clone();
            }
            let theta = &pi * (j as i32) / ((n - 1) as i32);
            &mid + &(&half * &theta.cos())
        })
        .collect();
    pts[0] = lo.clone();
    pts[n - 1] = hi.clone();
    pts
}

/// Degree-`degree` interpolant of `f` at the Chebyshev roots of `[lo, hi]`.
pub fn chebyshev_interpolant<F>(f: &F, lo: &Real, hi: &Real, degree: usize) -> Result<ChebPoly>
where
    F: Fn(&Real) -> Result<Real> + ?Sized,
{
    check_interval(lo, hi)?;
    let n = degree + 1;
    let pi = Real::pi(lo.prec());
    let mid = (lo + hi) / 2;
    let half = (hi - lo) / 2;
    let mut thetas = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let theta = &pi * (2 * k as i32 + 1) / (2 * n as i32);
        let x = &mid + &(&half * &theta.cos());
        values.push(f(&x)?);
        thetas.push(theta);
    }
    let coeffs = (0..n)
        .map(|j| {
            let mut acc = lo.zero_like();
            for (theta, v) in thetas.iter().zip(&values) {
                acc += &(&(theta * j as i32).cos() * v);
            }
            let scale = if j == 0 { 1 } else { 2 };
            acc * scale / (n as i32)
        })
        .collect();
    ChebPoly::new(coeffs, lo.clone(), hi.clone())
}

/// `max |f − g|` over `grid` Chebyshev extrema of `[lo, hi]`.
pub fn sup_error<F, G>(f: &F, g: &G, lo: &Real, hi: &Real, grid: usize) -> Result<Real>
where
    F: Fn(&Real) -> Result<Real> + ?Sized,
    G: Fn(&Real) -> Result<Real> + ?Sized,
{
    check_interval(lo, hi)?;
    if grid < 2 {
        return Err(Error::Parameter("grid needs at least 2 points".into()));
    }
    let mut worst = lo.zero_like();
    for x in chebyshev_extrema(lo, hi, grid) {
        worst = worst.max((f(&x)? - g(&x)?).abs());
    }
    Ok(worst)
}
