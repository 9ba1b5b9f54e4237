//! Extended-precision vectors, weighted inner products and symmetric
//! tridiagonal kernels.

mod dense;
mod real;
pub(crate) mod tridiag;

pub use dense::Matrix;
pub use real::Real;
pub use tridiag::{
    solve_shifted_tridiag, solve_shifted_tridiag_with_ritz, tridiag_eig, tridiag_eigenvalues,
    Tridiagonal, TridiagEig,
};

use std::ops::{Deref, Index};

use crate::error::{Error, Result};

/// Working precision of a run.
///
/// `tol` is the acceptance tolerance used by identity checks and breakdown
/// tests; it defaults to `2^(-bits/2)`.
#[derive(Clone, Debug)]
pub struct Precision {
    bits: u32,
    tol: Real,
}

impl Precision {
    pub const DEFAULT_BITS: u32 = 256;
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self> {
        Self::check_bits(bits)?;
        let half = i32::try_from(bits / 2).map_err(|_| Error::Parameter("bits too large".into()))?;
        Ok(Precision {
            bits,
            tol: Real::pow2(bits, -half),
        })
    }

    pub fn with_tol(bits: u32, tol: Real) -> Result<Self> {
        Self::check_bits(bits)?;
        if !tol.is_positive() {
            return Err(Error::Parameter("tolerance must be positive".into()));
        }
        Ok(Precision { bits, tol })
    }

    fn check_bits(bits: u32) -> Result<()> {
        if bits < Self::MIN_BITS {
            return Err(Error::Parameter(format!(
                "precision must be at least {} bits, got {bits}",
                Self::MIN_BITS
            )));
        }
        Ok(())
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn tol(&self) -> &Real {
        &self.tol
    }

    pub fn zero(&self) -> Real {
        Real::zero(self.bits)
    }

    pub fn one(&self) -> Real {
        Real::one(self.bits)
    }

    pub fn real(&self, v: f64) -> Real {
        Real::from_f64(self.bits, v)
    }

    pub fn int(&self, v: i64) -> Real {
        Real::from_i64(self.bits, v)
    }

    pub fn parse(&self, s: &str) -> Result<Real> {
        Real::parse(self.bits, s)
    }

    /// Unit roundoff `2^(1-bits)`.
    pub fn eps(&self) -> Real {
        Real::pow2(self.bits, 1 - self.bits as i32)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::new(Self::DEFAULT_BITS).expect("default precision is valid")
    }
}

/// Dense vector of working-precision reals; non-empty with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct XVector(Vec<Real>);

impl XVector {
    pub fn new(entries: Vec<Real>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Parameter("vector must have at least one entry".into()));
        }
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("vector entry {i} is not finite")));
        }
        Ok(XVector(entries))
    }

    /// Builds a vector the caller knows to be valid (non-empty, finite).
    pub(crate) fn from_vec(entries: Vec<Real>) -> Self {
        debug_assert!(!entries.is_empty());
        XVector(entries)
    }

    pub fn zeros(bits: u32, len: usize) -> Self {
        XVector((0..len).map(|_| Real::zero(bits)).collect())
    }

    pub fn from_f64(bits: u32, values: &[f64]) -> Result<Self> {
        XVector::new(values.iter().map(|&v| Real::from_f64(bits, v)).collect())
    }

    pub fn into_inner(self) -> Vec<Real> {
        self.0
    }

    pub fn dot(&self, other: &XVector) -> Result<Real> {
        check_len(self.len(), other.len())?;
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &[Real]) -> Real {
        let mut acc = self.0[0].zero_like();
        for (a, b) in self.0.iter().zip(other) {
            acc += a * b;
        }
        acc
    }

    pub fn norm2(&self) -> Real {
        let mut acc = self.0[0].zero_like();
        for a in &self.0 {
            acc += a.square();
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> Real {
        self.0
            .iter()
            .map(Real::abs)
            .reduce(Real::max)
            .expect("non-empty")
    }

    pub fn scale(&self, s: &Real) -> XVector {
        XVector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn sub(&self, other: &XVector) -> Result<XVector> {
        check_len(self.len(), other.len())?;
        Ok(XVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn add(&self, other: &XVector) -> Result<XVector> {
        check_len(self.len(), other.len())?;
        Ok(XVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// `self += s * x`.
    pub fn axpy(&mut self, s: &Real, x: &[Real]) {
        debug_assert_eq!(self.0.len(), x.len());
        for (a, b) in self.0.iter_mut().zip(x) {
            *a += s * b;
        }
    }

    /// Entrywise product with `d` (application of a diagonal matrix).
    pub fn hadamard(&self, d: &[Real]) -> Result<XVector> {
        check_len(self.len(), d.len())?;
        Ok(XVector(self.0.iter().zip(d).map(|(a, b)| a * b).collect()))
    }
}

impl Deref for XVector {
    type Target = [Real];
    fn deref(&self) -> &[Real] {
        &self.0
    }
}

impl Index<usize> for XVector {
    type Output = Real;
    fn index(&self, i: usize) -> &Real {
        &self.0[i]
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// `Σ w_i u_i v_i`, summed left to right at working precision.
///
/// Realizes the `M`-inner product for any `M` that is diagonal in the
/// eigenbasis. With unit weights the result is bit-identical to
/// [`XVector::dot`].
pub fn weighted_dot(u: &[Real], v: &[Real], w: &[Real]) -> Result<Real> {
    check_len(u.len(), v.len())?;
    check_len(u.len(), w.len())?;
    if u.is_empty() {
        return Err(Error::Parameter("empty vectors".into()));
    }
    if let Some(i) = w.iter().position(|x| !x.is_positive()) {
        return Err(Error::Domain(format!(
            "weight {i} is not positive ({})",
            w[i].to_f64()
        )));
    }
    let mut acc = u[0].zero_like();
    for ((a, b), g) in u.iter().zip(v).zip(w) {
        acc += &(g * a) * b;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> XVector {
        XVector::from_f64(256, xs).unwrap()
    }

    #[test]
    fn weighted_dot_examples() {
        let one = v(&[1.0, 1.0]);
        assert_eq!(weighted_dot(&one, &one, &one).unwrap(), 2.0);
        let r = weighted_dot(&v(&[1.0, 0.0]), &v(&[0.0, 1.0]), &v(&[5.0, 5.0])).unwrap();
        assert!(r.is_zero());
        let r = weighted_dot(&v(&[1.0, 1.0]), &v(&[1.0, -1.0]), &v(&[2.0, 1.0])).unwrap();
        assert_eq!(r, 1.0);
    }

    #[test]
    fn weighted_dot_errors() {
        let a = v(&[1.0, 2.0]);
        let b = v(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            weighted_dot(&a, &b, &a),
            Err(Error::Dimension { .. })
        ));
        let w = v(&[1.0, 0.0]);
        assert!(matches!(weighted_dot(&a, &a, &w), Err(Error::Domain(_))));
        let w = v(&[1.0, -2.0]);
        assert!(matches!(weighted_dot(&a, &a, &w), Err(Error::Domain(_))));
    }

    #[test]
    fn unit_weights_match_plain_dot_exactly() {
        let p = Precision::default();
        let a: Vec<Real> = (1..=7).map(|i| p.one() / i).collect();
        let b: Vec<Real> = (1..=7).map(|i| p.int(i).sqrt()).collect();
        let ones: Vec<Real> = (0..7).map(|_| p.one()).collect();
        let a = XVector::new(a).unwrap();
        let b = XVector::new(b).unwrap();
        assert_eq!(weighted_dot(&a, &b, &ones).unwrap(), a.dot(&b).unwrap());
    }

    #[test]
    fn precision_defaults() {
        let p = Precision::default();
        assert_eq!(p.bits(), 256);
        assert_eq!(*p.tol(), Real::pow2(256, -128));
        assert!(Precision::new(53).is_err());
        assert!(Precision::with_tol(128, Real::zero(128)).is_err());
    }

    #[test]
    fn vector_invariants() {
        assert!(XVector::new(vec![]).is_err());
        let nan = Real::from_f64(128, f64::NAN);
        assert!(XVector::new(vec![nan]).is_err());
    }
}
