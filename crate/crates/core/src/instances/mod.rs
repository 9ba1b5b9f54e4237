//! Problem instances `(A, b)` in the eigenbasis of `A`.
//!
//! `A` is stored as its spectrum and `b` as its coefficients in the
//! eigenbasis, so `f(A) b` is the entrywise product `f(λᵢ) wᵢ`. Every
//! quantity computed in this crate is invariant under orthogonal change of
//! basis, so nothing is lost.

mod adversarial;
mod hard;

pub use adversarial::{adversarial_b, AdversarialConfig, AdversarialResult};
pub use hard::{discrete_hard_instance, hard_instance, HardInstance};

use crate::error::{Error, Result};
use crate::xlinalg::{Precision, Real, XVector};

/// Spectrum `λ` (strictly ascending) and right-hand side coefficients `w`.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    lambda: Vec<Real>,
    w: XVector,
    precision: Precision,
}

impl ProblemInstance {
    pub fn new(lambda: Vec<Real>, w: XVector, precision: Precision) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Parameter("spectrum must be non-empty".into()));
        }
        if lambda.len() != w.len() {
            return Err(Error::Dimension {
                expected: lambda.len(),
                found: w.len(),
            });
        }
        check_ascending(&lambda)?;
        if w.iter().all(Real::is_zero) {
            return Err(Error::Parameter("right-hand side must be nonzero".into()));
        }
        Ok(ProblemInstance {
            lambda,
            w,
            precision,
        })
    }

    /// Instance with `b` the sum of the eigenvectors.
    pub fn with_ones(lambda: Vec<Real>, precision: Precision) -> Result<Self> {
        let w = ones_b(lambda.len(), &precision)?;
        ProblemInstance::new(lambda, w, precision)
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[Real] {
        &self.lambda
    }

    pub fn w(&self) -> &XVector {
        &self.w
    }

    pub fn precision(&self) -> &Precision {
        &self.precision
    }

    pub fn lambda_min(&self) -> &Real {
        &self.lambda[0]
    }

    pub fn lambda_max(&self) -> &Real {
        &self.lambda[self.lambda.len() - 1]
    }

    /// `‖A‖₂ = max |λᵢ|`.
    pub fn norm_a(&self) -> Real {
        self.lambda_min().abs().max(self.lambda_max().abs())
    }

    pub fn b_norm(&self) -> Real {
        self.w.norm2()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.lambda_min().is_positive()
    }

    /// `κ(A)` for a positive-definite instance.
    pub fn condition_number(&self) -> Result<Real> {
        if !self.is_positive_definite() {
            return Err(Error::Domain("condition number of an indefinite matrix".into()));
        }
        Ok(self.lambda_max() / self.lambda_min())
    }

    /// `A v`.
    pub fn apply(&self, v: &[Real]) -> Vec<Real> {
        self.lambda.iter().zip(v).map(|(l, x)| l * x).collect()
    }

    /// Same spectrum with a different right-hand side.
    pub fn with_w(&self, w: XVector) -> Result<Self> {
        ProblemInstance::new(self.lambda.clone(), w, self.precision.clone())
    }

    /// The instance `(A − zI, b)`.
    pub fn shifted(&self, z: &Real) -> ProblemInstance {
        ProblemInstance {
            lambda: self.lambda.iter().map(|l| l - z).collect(),
            w: self.w.clone(),
            precision: self.precision.clone(),
        }
    }
}

fn check_ascending(lambda: &[Real]) -> Result<()> {
    if let Some(i) = lambda.iter().position(|x| !x.is_finite()) {
        return Err(Error::Parameter(format!("eigenvalue {i} is not finite")));
    }
    if let Some(i) = lambda.windows(2).position(|p| p[0] >= p[1]) {
        return Err(Error::Parameter(format!(
            "spectrum must be strictly ascending (entries {i} and {})",
            i + 1
        )));
    }
    Ok(())
}

/// Coefficients of the sum of the eigenvectors: `d` ones.
pub fn ones_b(d: usize, prec: &Precision) -> Result<XVector> {
    XVector::new((0..d).map(|_| prec.one()).collect())
}

/// Closed-form spectra. Parameters are working-precision reals.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumKind {
    Uniform { d: usize, lo: Real, hi: Real },
    Geometric { d: usize, lo: Real, hi: Real },
    /// One eigenvalue at `outlier` followed by `d − 1` uniform on the cluster.
    ClusterOutlier {
        d: usize,
        outlier: Real,
        cluster_lo: Real,
        cluster_hi: Real,
    },
    /// Geometric on `[inner, outer]` mirrored about 0; `d` even.
    IndefiniteSymmetric { d: usize, inner: Real, outer: Real },
    /// Uniform clusters of total width `width_i` centred at `c_i`.
    TwoClusters {
        d1: usize,
        c1: Real,
        width1: Real,
        d2: usize,
        c2: Real,
        width2: Real,
    },
    /// `λ₁ = 1`, then `d − 1` uniform on `[0.99995 κ, κ]`.
    UnitOutlier { d: usize, kappa: Real },
}

/// Spectrum of the named construction, strictly ascending.
pub fn spectrum(kind: &SpectrumKind, prec: &Precision) -> Result<Vec<Real>> {
    let out = match kind {
        SpectrumKind::Uniform { d, lo, hi } => uniform(*d, lo, hi)?,
        SpectrumKind::Geometric { d, lo, hi } => geometric(*d, lo, hi)?,
        SpectrumKind::ClusterOutlier {
            d,
            outlier,
            cluster_lo,
            cluster_hi,
        } => {
            if *d < 2 {
                return Err(Error::Parameter("cluster_outlier needs d >= 2".into()));
            }
            let mut v = vec![outlier.clone()];
            v.extend(uniform(d - 1, cluster_lo, cluster_hi)?);
            v
        }
        SpectrumKind::IndefiniteSymmetric { d, inner, outer } => {
            if *d == 0 || d % 2 == 1 {
                return Err(Error::Parameter(format!(
                    "indefinite_symmetric needs an even positive d, got {d}"
                )));
            }
            if !inner.is_positive() {
                return Err(Error::Parameter("inner radius must be positive".into()));
            }
            let half = geometric(d / 2, inner, outer)?;
            let mut v: Vec<Real> = half.iter().rev().map(|x| -x).collect();
            v.extend(half);
            v
        }
        SpectrumKind::TwoClusters {
            d1,
            c1,
            width1,
            d2,
            c2,
            width2,
        } => {
            let mut v = cluster(*d1, c1, width1)?;
            v.extend(cluster(*d2, c2, width2)?);
            v
        }
        SpectrumKind::UnitOutlier { d, kappa } => {
            if *d < 2 {
                return Err(Error::Parameter("unit_outlier needs d >= 2".into()));
            }
            let lo = prec.parse("0.99995")? * kappa;
            let mut v = vec![prec.one()];
            v.extend(uniform(d - 1, &lo, kappa)?);
            v
        }
    };
    check_ascending(&out)?;
    Ok(out)
}

fn check_range(d: usize, lo: &Real, hi: &Real) -> Result<()> {
    if d == 0 {
        return Err(Error::Parameter("spectrum size must be at least 1".into()));
    }
    if lo >= hi {
        return Err(Error::Parameter(format!(
            "empty range [{}, {}]",
            lo.to_f64(),
            hi.to_f64()
        )));
    }
    Ok(())
}

fn uniform(d: usize, lo: &Real, hi: &Real) -> Result<Vec<Real>> {
    check_range(d, lo, hi)?;
    if d == 1 {
        return Ok(vec![lo.clone()]);
    }
    let span = hi - lo;
    let n = (d - 1) as i64;
    Ok((0..d)
        .map(|i| {
            if i + 1 == d {
                hi.clone()
            } else {
                lo + &(&span * lo.int_like(i as i64) / &lo.int_like(n))
            }
        })
        .collect())
}

fn geometric(d: usize, lo: &Real, hi: &Real) -> Result<Vec<Real>> {
    check_range(d, lo, hi)?;
    if !lo.is_positive() {
        return Err(Error::Parameter("geometric spacing needs lo > 0".into()));
    }
    if d == 1 {
        return Ok(vec![lo.clone()]);
    }
    let log_ratio = (hi / lo).ln();
    let n = (d - 1) as i64;
    Ok((0..d)
        .map(|i| {
            if i + 1 == d {
                hi.clone()
            } else {
                lo * &(&log_ratio * lo.int_like(i as i64) / &lo.int_like(n)).exp()
            }
        })
        .collect())
}

fn cluster(d: usize, center: &Real, width: &Real) -> Result<Vec<Real>> {
    if d == 1 {
        return Ok(vec![center.clone()]);
    }
    let half = width / 2;
    uniform(d, &(center - &half), &(center + &half))
}
