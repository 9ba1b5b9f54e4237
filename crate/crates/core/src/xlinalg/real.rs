//! Working-precision real scalar.
//!
//! [`Real`] wraps an MPFR float. Binary operations round to the larger of the
//! two operand precisions, so a computation seeded from one [`Precision`]
//! stays at that precision throughout.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Extended-precision real number.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Real(Float);

impl Real {
    pub fn from_f64(bits: u32, v: f64) -> Self {
        Real(Float::with_val(bits, v))
    }

    pub fn from_i64(bits: u32, v: i64) -> Self {
        Real(Float::with_val(bits, v))
    }

    pub fn zero(bits: u32) -> Self {
        Real(Float::new(bits))
    }

    pub fn one(bits: u32) -> Self {
        Real(Float::with_val(bits, 1))
    }

    pub fn pi(bits: u32) -> Self {
        Real(Float::with_val(bits, Constant::Pi))
    }

    /// Parses a decimal literal directly at `bits` precision (no detour via `f64`).
    pub fn parse(bits: u32, s: &str) -> Result<Self> {
        let parsed = Float::parse(s.trim())
            .map_err(|e| Error::Parameter(format!("cannot parse {s:?} as a real: {e}")))?;
        let v = Float::with_val(bits, parsed);
        if !v.is_finite() {
            return Err(Error::Parameter(format!("{s:?} is not finite")));
        }
        Ok(Real(v))
    }

    /// `2^exp` at `bits` precision.
    pub fn pow2(bits: u32, exp: i32) -> Self {
        let mut v = Float::with_val(bits, 1);
        if exp >= 0 {
            v <<= exp as u32;
        } else {
            v >>= exp.unsigned_abs();
        }
        Real(v)
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Rounds (or exactly extends) to `bits` of precision.
    pub fn with_prec(&self, bits: u32) -> Self {
        Real(Float::with_val(bits, &self.0))
    }

    pub fn zero_like(&self) -> Self {
        Real::zero(self.prec())
    }

    pub fn one_like(&self) -> Self {
        Real::one(self.prec())
    }

    pub fn lit(&self, v: f64) -> Self {
        Real::from_f64(self.prec(), v)
    }

    pub fn int_like(&self, v: i64) -> Self {
        Real::from_i64(self.prec(), v)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn from_float(f: Float) -> Self {
        Real(f)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// Base-2 exponent, `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_sign_positive() && !self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    pub fn abs(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.abs_ref()))
    }

    pub fn sqrt(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.sqrt_ref()))
    }

    pub fn exp(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.exp_ref()))
    }

    pub fn ln(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.ln_ref()))
    }

    pub fn cos(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.cos_ref()))
    }

    pub fn sin(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.sin_ref()))
    }

    pub fn square(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.square_ref()))
    }

    pub fn recip(&self) -> Self {
        Real(Float::with_val(self.prec(), self.0.recip_ref()))
    }

    pub fn powi(&self, n: i32) -> Self {
        Real(Float::with_val(self.prec(), (&self.0).pow(n)))
    }

    pub fn powf(&self, e: &Real) -> Self {
        Real(Float::with_val(self.prec(), (&self.0).pow(&e.0)))
    }

    pub fn hypot(&self, other: &Real) -> Self {
        let p = self.prec().max(other.prec());
        Real(Float::with_val(p, self.0.hypot_ref(&other.0)))
    }

    /// +1, -1, or 0 at the same precision.
    pub fn signum(&self) -> Self {
        if self.0.is_zero() {
            self.zero_like()
        } else if self.0.is_sign_negative() {
            self.int_like(-1)
        } else {
            self.one_like()
        }
    }

    /// Magnitude of `self` with the sign of `sign` (Fortran `SIGN`).
    pub fn copysign(&self, sign: &Real) -> Self {
        let a = self.abs();
        if sign.0.is_sign_negative() {
            -a
        } else {
            a
        }
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn total_cmp(&self, other: &Real) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    /// Decimal string with `digits` significant digits in scientific notation,
    /// trailing zeros of the mantissa removed.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        let s = self
            .0
            .to_string_radix_round(10, Some(digits), Round::Nearest);
        normalize_sci(&s)
    }
}

fn normalize_sci(s: &str) -> String {
    let (mant, exp) = match s.find('e') {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    match exp {
        Some(e) => {
            let e: i64 = e.parse().unwrap_or(0);
            if e == 0 {
                mant.to_string()
            } else {
                format!("{mant}e{e}")
            }
        }
        None => mant.to_string(),
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(20))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(17).max(1);
        write!(f, "{}", self.to_sci(digits))
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let p = self.0.prec().max(rhs.0.prec());
                Real(Float::with_val(p, $tr::$m(&self.0, &rhs.0)))
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                $tr::$m(self, &rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(mut self, rhs: &Real) -> Real {
                if rhs.0.prec() > self.0.prec() {
                    return $tr::$m(&self, rhs);
                }
                $atr::$am(&mut self.0, &rhs.0);
                self
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                $tr::$m(self, &rhs)
            }
        }
        impl $atr<&Real> for Real {
            fn $am(&mut self, rhs: &Real) {
                if rhs.0.prec() > self.0.prec() {
                    self.0.set_prec(rhs.0.prec());
                }
                $atr::$am(&mut self.0, &rhs.0);
            }
        }
        impl $atr<Real> for Real {
            fn $am(&mut self, rhs: Real) {
                $atr::$am(self, &rhs);
            }
        }
        impl $tr<f64> for &Real {
            type Output = Real;
            fn $m(self, rhs: f64) -> Real {
                Real(Float::with_val(self.0.prec(), $tr::$m(&self.0, rhs)))
            }
        }
        impl $tr<f64> for Real {
            type Output = Real;
            fn $m(mut self, rhs: f64) -> Real {
                $atr::$am(&mut self.0, rhs);
                self
            }
        }
        impl $tr<i32> for &Real {
            type Output = Real;
            fn $m(self, rhs: i32) -> Real {
                Real(Float::with_val(self.0.prec(), $tr::$m(&self.0, rhs)))
            }
        }
        impl $tr<i32> for Real {
            type Output = Real;
            fn $m(mut self, rhs: i32) -> Real {
                $atr::$am(&mut self.0, rhs);
                self
            }
        }
    };
}

real_binop!(Add, add, AddAssign, add_assign);
real_binop!(Sub, sub, SubAssign, sub_assign);
real_binop!(Mul, mul, MulAssign, mul_assign);
real_binop!(Div, div, DivAssign, div_assign);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(-self.0)
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(Float::with_val(self.0.prec(), -&self.0))
    }
}

impl PartialEq<f64> for Real {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Real {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

impl<'a> Sum<&'a Real> for Real {
    /// Left-to-right sum. Panics on an empty iterator because the precision
    /// would be unknown; callers sum non-empty sequences.
    fn sum<I: Iterator<Item = &'a Real>>(mut iter: I) -> Real {
        let mut acc = iter.next().expect("sum of empty sequence").clone();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl Sum<Real> for Real {
    fn sum<I: Iterator<Item = Real>>(mut iter: I) -> Real {
        let mut acc = iter.next().expect("sum of empty sequence");
        for x in iter {
            acc += &x;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_is_exact_at_working_precision() {
        let a = Real::parse(256, "0.1").unwrap();
        let b = Real::from_f64(256, 0.1);
        assert!(a != b);
        let ten = Real::from_i64(256, 10);
        let back = &a * &ten;
        assert!((back - 1.0).abs() < Real::pow2(256, -250));
    }

    #[test]
    fn sci_formatting_trims_zeros() {
        let x = Real::from_f64(256, 0.25);
        assert_eq!(x.to_sci(25), "2.5e-1");
        assert_eq!(Real::from_i64(256, 3).to_sci(25), "3");
        assert_eq!(Real::zero(256).to_sci(25), "0");
        let third = Real::one(256) / 3;
        assert_eq!(third.to_sci(5), "3.3333e-1");
    }

    #[test]
    fn exponent_range_exceeds_double() {
        let tiny = Real::from_f64(256, 1e-300).powi(5);
        assert!(tiny.is_positive());
        assert!(tiny.to_f64() == 0.0);
    }

    #[test]
    fn mixed_precision_promotes() {
        let a = Real::one(64);
        let b = Real::one(256) / 3;
        let c = &a + &b;
        assert_eq!(c.prec(), 256);
    }
}
