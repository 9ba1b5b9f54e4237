//! Lanczos iteration in the eigenbasis representation.

use crate::error::{Error, Result};
use crate::instances::ProblemInstance;
use crate::xlinalg::{Real, Tridiagonal, XVector};

/// Reorthogonalization strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Reorth {
    /// Two passes of modified Gram–Schmidt against every previous column.
    #[default]
    Full,
    /// Plain three-term recurrence.
    None,
}

/// Orthonormal Krylov basis `Q` and Jacobi matrix `T = QᵀAQ`.
#[derive(Clone, Debug)]
pub struct KrylovDecomposition {
    q: Vec<XVector>,
    t: Tridiagonal,
    grade_reached: bool,
    beta_next: Real,
    b_norm: Real,
}

impl KrylovDecomposition {
    /// Number of columns `k`.
    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn column(&self, j: usize) -> &XVector {
        &self.q[j]
    }

    pub fn columns(&self) -> &[XVector] {
        &self.q
    }

    pub fn t(&self) -> &Tridiagonal {
        &self.t
    }

    /// True when the recurrence broke down, i.e. `𝒦_k` is `A`-invariant.
    pub fn grade_reached(&self) -> bool {
        self.grade_reached
    }

    /// Norm of the residual that would start column `k + 1`.
    pub fn beta_next(&self) -> &Real {
        &self.beta_next
    }

    pub fn b_norm(&self) -> &Real {
        &self.b_norm
    }

    /// The decomposition after `k` steps. Identical to rerunning with `k`.
    pub fn prefix(&self, k: usize) -> KrylovDecomposition {
        let k = k.clamp(1, self.dim());
        if k == self.dim() {
            return self.clone();
        }
        KrylovDecomposition {
            q: self.q[..k].to_vec(),
            t: self.t.leading(k),
            grade_reached: false,
            beta_next: self.t.beta()[k - 1].clone(),
            b_norm: self.b_norm.clone(),
        }
    }

    /// `Qᵀ v`.
    pub fn project(&self, v: &[Real]) -> Vec<Real> {
        self.q.iter().map(|qj| qj.dot_unchecked(v)).collect()
    }

    /// `Q c`.
    pub fn combine(&self, c: &[Real]) -> XVector {
        let bits = self.b_norm.prec();
        let mut out = XVector::zeros(bits, self.q[0].len());
        for (qj, cj) in self.q.iter().zip(c) {
            out.axpy(cj, qj);
        }
        out
    }

    /// `max |QᵀQ − I|`.
    pub fn orthogonality_loss(&self) -> Real {
        let mut worst = self.b_norm.zero_like();
        for (i, qi) in self.q.iter().enumerate() {
            for qj in &self.q[i..] {
                let mut g = qi.dot_unchecked(qj);
                if std::ptr::eq(qi, qj) {
                    g -= &g.one_like();
                }
                worst = worst.max(g.abs());
            }
        }
        worst
    }
}

/// Runs up to `k` Lanczos steps on `(A, b)`.
///
/// Stops early with `grade_reached` set when `β_j ≤ tol·‖A‖`.
pub fn lanczos(inst: &ProblemInstance, k: usize, reorth: Reorth) -> Result<KrylovDecomposition> {
    if k == 0 {
        return Err(Error::Parameter("Lanczos needs k >= 1".into()));
    }
    let prec = inst.precision();
    let lambda = inst.lambda();
    let b_norm = inst.b_norm();
    if b_norm.is_zero() {
        return Err(Error::Parameter("right-hand side has zero norm".into()));
    }
    let threshold = prec.tol() * &inst.norm_a();

    let mut q: Vec<XVector> = vec![inst.w().scale(&b_norm.recip())];
    let mut alpha: Vec<Real> = Vec::with_capacity(k);
    let mut beta: Vec<Real> = Vec::with_capacity(k);
    let (beta_next, grade_reached) = loop {
        let j = q.len() - 1;
        let qj = &q[j];
        let mut v = qj.hadamard(lambda)?;
        let a = qj.dot_unchecked(&v);
        v.axpy(&-&a, qj);
        if j > 0 {
            v.axpy(&-&beta[j - 1], &q[j - 1]);
        }
        if reorth == Reorth::Full {
            for _ in 0..2 {
                for qi in &q {
                    let c = qi.dot_unchecked(&v);
                    v.axpy(&-c, qi);
                }
            }
        }
        alpha.push(a);
        let b = v.norm2();
        if b <= threshold {
            break (b, true);
        }
        if q.len() == k {
            break (b, false);
        }
        q.push(v.scale(&b.recip()));
        beta.push(b);
    };
    Ok(KrylovDecomposition {
        q,
        t: Tridiagonal::new(alpha, beta)?,
        grade_reached,
        beta_next,
        b_norm,
    })
}

/// Exact Krylov grade: the number of eigenvalues with a nonzero coefficient in `b`.
pub fn krylov_grade(inst: &ProblemInstance) -> usize {
    inst.w().iter().filter(|x| !x.is_zero()).count()
}
