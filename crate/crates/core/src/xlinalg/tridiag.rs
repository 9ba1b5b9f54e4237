use crate::error::{Error, Result};

use super::{Matrix, Precision, Real, XVector};

/// Symmetric tridiagonal matrix with diagonal `alpha` and strictly positive
/// off-diagonal `beta`.
///
/// A zero off-diagonal would mean the Krylov process broke down; that is
/// represented upstream by truncating, never by a zero entry here.
#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal {
    alpha: Vec<Real>,
    beta: Vec<Real>,
}

impl Tridiagonal {
    pub fn new(alpha: Vec<Real>, beta: Vec<Real>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Parameter("tridiagonal matrix must be at least 1x1".into()));
        }
        if beta.len() + 1 != alpha.len() {
            return Err(Error::Dimension {
                expected: alpha.len() - 1,
                found: beta.len(),
            });
        }
        if let Some(i) = beta.iter().position(|b| !b.is_positive()) {
            return Err(Error::Parameter(format!(
                "off-diagonal entry {i} must be positive"
            )));
        }
        Ok(Tridiagonal { alpha, beta })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Real] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Real] {
        &self.beta
    }

    pub fn bits(&self) -> u32 {
        self.alpha[0].prec()
    }

    /// Leading `k x k` block.
    pub fn leading(&self, k: usize) -> Tridiagonal {
        let k = k.clamp(1, self.dim());
        Tridiagonal {
            alpha: self.alpha[..k].to_vec(),
            beta: self.beta[..k - 1].to_vec(),
        }
    }

    /// Infinity norm, an upper bound on the spectral norm.
    pub fn norm_inf(&self) -> Real {
        let n = self.dim();
        let mut best = self.alpha[0].zero_like();
        for i in 0..n {
            let mut row = self.alpha[i].abs();
            if i > 0 {
                row += &self.beta[i - 1];
            }
            if i + 1 < n {
                row += &self.beta[i];
            }
            best = best.max(row);
        }
        best
    }

    /// `(T - z I) x`.
    pub fn shifted_matvec(&self, z: &Real, x: &[Real]) -> Result<Vec<Real>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: x.len(),
            });
        }
        Ok((0..n)
            .map(|i| {
                let mut y = &(&self.alpha[i] - z) * &x[i];
                if i > 0 {
                    y += &self.beta[i - 1] * &x[i - 1];
                }
                if i + 1 < n {
                    y += &self.beta[i] * &x[i + 1];
                }
                y
            })
            .collect())
    }

    pub fn matvec(&self, x: &[Real]) -> Result<Vec<Real>> {
        self.shifted_matvec(&self.alpha[0].zero_like(), x)
    }
}

/// Eigendecomposition `T = V diag(values) Vᵀ` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct TridiagEig {
    pub values: Vec<Real>,
    /// Column `j` is the eigenvector for `values[j]`.
    pub vectors: Matrix,
}

impl TridiagEig {
    /// `V f(Θ) Vᵀ e₁` given `f(θ_j)` for every Ritz value.
    pub fn apply_to_e1(&self, fvals: &[Real]) -> Vec<Real> {
        let k = self.values.len();
        (0..k)
            .map(|i| {
                let mut acc = fvals[0].zero_like();
                for j in 0..k {
                    acc += &(&self.vectors[(i, j)] * &fvals[j]) * &self.vectors[(0, j)];
                }
                acc
            })
            .collect()
    }
}

/// Symmetric tridiagonal eigendecomposition by implicit-shift QL, entirely in
/// working precision. Fails after `50 k` sweeps.
pub fn tridiag_eig(t: &Tridiagonal) -> Result<TridiagEig> {
    let n = t.dim();
    let mut d = t.alpha.clone();
    let mut e = t.beta.clone();
    e.push(t.alpha[0].zero_like());
    let mut z = Matrix::identity(t.bits(), n);
    implicit_ql(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i].clone()).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| z[(r, order[c])].clone());
    Ok(TridiagEig { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn tridiag_eigenvalues(t: &Tridiagonal) -> Result<Vec<Real>> {
    let mut d = t.alpha.clone();
    let mut e = t.beta.clone();
    e.push(t.alpha[0].zero_like());
    implicit_ql(&mut d, &mut e, None)?;
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

fn implicit_ql(d: &mut [Real], e: &mut [Real], mut z: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    let cap = 50 * n;
    let mut sweeps = 0usize;
    let one = d[0].one_like();
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = &d[m].abs() + &d[m + 1].abs();
                if &e[m].abs() + &dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > cap {
                let residual = e[..n - 1]
                    .iter()
                    .map(Real::abs)
                    .reduce(Real::max)
                    .map(|x| x.to_f64())
                    .unwrap_or(0.0);
                return Err(Error::Solver { sweeps, residual });
            }
            let mut g = (&d[l + 1] - &d[l]) / (&e[l] * 2);
            let mut r = g.hypot(&one);
            g = &(&d[m] - &d[l]) + &(&e[l] / &(&g + &r.copysign(&g)));
            let mut s = one.clone();
            let mut c = one.clone();
            let mut p = one.zero_like();
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = &s * &e[i];
                let b = &c * &e[i];
                r = f.hypot(&g);
                e[i + 1] = r.clone();
                if r.is_zero() {
                    d[i + 1] -= &p;
                    e[m] = r.zero_like();
                    underflow = true;
                    break;
                }
                s = &f / &r;
                c = &g / &r;
                g = &d[i + 1] - &p;
                r = &(&(&d[i] - &g) * &s) + &(&(&c * &b) * 2);
                p = &s * &r;
                d[i + 1] = &g + &p;
                g = &(&c * &r) - &b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[(k, i + 1)].clone();
                        let zi = z[(k, i)].clone();
                        z[(k, i + 1)] = &(&s * &zi) + &(&c * &f);
                        z[(k, i)] = &(&c * &zi) - &(&s * &f);
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= &p;
            e[l] = g;
            e[m] = one.zero_like();
        }
    }
    Ok(())
}

/// Solves `(T − zI) y = rhs`, refusing shifts within `tol·‖T‖` of a Ritz value.
pub fn solve_shifted_tridiag(
    t: &Tridiagonal,
    z: &Real,
    rhs: &[Real],
    prec: &Precision,
) -> Result<XVector> {
    let ritz = tridiag_eigenvalues(t)?;
    solve_shifted_tridiag_with_ritz(t, &ritz, z, rhs, prec)
}

/// As [`solve_shifted_tridiag`] with precomputed Ritz values.
pub fn solve_shifted_tridiag_with_ritz(
    t: &Tridiagonal,
    ritz: &[Real],
    z: &Real,
    rhs: &[Real],
    prec: &Precision,
) -> Result<XVector> {
    let n = t.dim();
    if rhs.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: rhs.len(),
        });
    }
    check_shift(ritz, z, prec)?;
    let x = pivoted_tridiag_solve(t, z, rhs)?;
    Ok(XVector::from_vec(x))
}

/// `(T − zI) y = rhs` without the Ritz-value check, for shifts known to be
/// separated from the spectrum of `T`.
pub(crate) fn solve_shifted_unchecked(t: &Tridiagonal, z: &Real, rhs: &[Real]) -> Result<Vec<Real>> {
    if rhs.len() != t.dim() {
        return Err(Error::Dimension {
            expected: t.dim(),
            found: rhs.len(),
        });
    }
    pivoted_tridiag_solve(t, z, rhs)
}

/// Errors with [`Error::SingularShift`] when `z` is within `tol·‖T‖₂` of a Ritz value.
pub(crate) fn check_shift(ritz: &[Real], z: &Real, prec: &Precision) -> Result<()> {
    let norm = ritz
        .iter()
        .map(Real::abs)
        .reduce(Real::max)
        .expect("non-empty spectrum");
    let (nearest, distance) = ritz
        .iter()
        .map(|th| (th, (th - z).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty spectrum");
    let floor = if norm.is_zero() { prec.tol().clone() } else { prec.tol() * &norm };
    if distance <= floor {
        return Err(Error::SingularShift {
            shift: z.to_f64(),
            ritz: nearest.to_f64(),
            distance: distance.to_f64(),
        });
    }
    Ok(())
}

/// Gaussian elimination with partial pivoting on a tridiagonal system
/// (the LAPACK `gttrf`/`gttrs` scheme).
fn pivoted_tridiag_solve(t: &Tridiagonal, z: &Real, rhs: &[Real]) -> Result<Vec<Real>> {
    let n = t.dim();
    let mut b: Vec<Real> = rhs.to_vec();
    if n == 1 {
        let d = &t.alpha[0] - z;
        if d.is_zero() {
            return Err(Error::Domain("singular 1x1 system".into()));
        }
        return Ok(vec![&b[0] / &d]);
    }
    let mut d: Vec<Real> = t.alpha.iter().map(|a| a - z).collect();
    let mut dl: Vec<Real> = t.beta.clone();
    let mut du: Vec<Real> = t.beta.clone();
    let mut du2: Vec<Real> = (0..n.saturating_sub(2)).map(|_| z.zero_like()).collect();
    let mut swapped = vec![false; n - 1];

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if !d[i].is_zero() {
                let fact = &dl[i] / &d[i];
                d[i + 1] -= &fact * &du[i];
                dl[i] = fact;
            }
        } else {
            let fact = &d[i] / &dl[i];
            d[i] = dl[i].clone();
            dl[i] = fact.clone();
            let temp = du[i].clone();
            du[i] = d[i + 1].clone();
            d[i + 1] = &temp - &(&fact * &d[i + 1]);
            if i + 2 < n {
                du2[i] = du[i + 1].clone();
                du[i + 1] = -(&fact * &du[i + 1]);
            }
            swapped[i] = true;
        }
    }
    if let Some(i) = d.iter().position(Real::is_zero) {
        return Err(Error::Domain(format!("zero pivot at row {i}")));
    }

    for i in 0..n - 1 {
        if swapped[i] {
            let temp = b[i].clone();
            b[i] = b[i + 1].clone();
            b[i + 1] = &temp - &(&dl[i] * &b[i]);
        } else {
            let t = &dl[i] * &b[i];
            b[i + 1] -= t;
        }
    }
    b[n - 1] = &b[n - 1] / &d[n - 1];
    b[n - 2] = &(&b[n - 2] - &(&du[n - 2] * &b[n - 1])) / &d[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        let s = &(&b[i] - &(&du[i] * &b[i + 1])) - &(&du2[i] * &b[i + 2]);
        b[i] = s / &d[i];
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Precision {
        Precision::default()
    }

    fn tri(alpha: &[f64], beta: &[f64]) -> Tridiagonal {
        let p = p();
        Tridiagonal::new(
            alpha.iter().map(|&a| p.real(a)).collect(),
            beta.iter().map(|&b| p.real(b)).collect(),
        )
        .unwrap()
    }

    fn close(a: &Real, b: &Real) -> bool {
        (a - b).abs() <= Real::pow2(256, -200)
    }

    fn check_decomposition(t: &Tridiagonal, eig: &TridiagEig) {
        let p = p();
        let n = t.dim();
        let v = &eig.vectors;
        let vtv = v.transpose().matmul(v).unwrap();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { p.one() } else { p.zero() };
                assert!((&vtv[(i, j)] - &target).abs() <= *p.tol());
            }
        }
        let tnorm = t.norm_inf();
        for j in 0..n {
            let col = v.column(j);
            let tv = t.matvec(&col).unwrap();
            for i in 0..n {
                let res = (&tv[i] - &(&eig.values[j] * &col[i])).abs();
                assert!(res <= p.tol() * &tnorm);
            }
        }
    }

    #[test]
    fn one_by_one() {
        let t = tri(&[2.0], &[]);
        let eig = tridiag_eig(&t).unwrap();
        assert_eq!(eig.values[0], 2.0);
        assert_eq!(eig.vectors[(0, 0)].abs(), 1.0);
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        let t = tri(&[0.0, 0.0], &[1.0]);
        let eig = tridiag_eig(&t).unwrap();
        assert!(close(&eig.values[0], &p().real(-1.0)));
        assert!(close(&eig.values[1], &p().real(1.0)));
        check_decomposition(&t, &eig);
    }

    #[test]
    fn uniform_tridiagonal_closed_form() {
        let t = tri(&[2.0, 2.0, 2.0], &[1.0, 1.0]);
        let eig = tridiag_eig(&t).unwrap();
        let s2 = p().int(2).sqrt();
        let expected = [&p().int(2) - &s2, p().int(2), &p().int(2) + &s2];
        for (a, b) in eig.values.iter().zip(&expected) {
            assert!(close(a, b));
        }
        check_decomposition(&t, &eig);
    }

    #[test]
    fn uniform_tridiagonal_general_size() {
        // Eigenvalues of tridiag(1, 2, 1) of size n are 2 + 2cos(jπ/(n+1)).
        let n = 12;
        let t = tri(&vec![2.0; n], &vec![1.0; n - 1]);
        let eig = tridiag_eig(&t).unwrap();
        let pi = Real::pi(256);
        let mut expected: Vec<Real> = (1..=n)
            .map(|j| {
                let c = (&pi * (j as i32) / (n as i32 + 1)).cos();
                &p().int(2) + &(c * 2)
            })
            .collect();
        expected.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in eig.values.iter().zip(&expected) {
            assert!(close(a, b));
        }
        check_decomposition(&t, &eig);
        let values_only = tridiag_eigenvalues(&t).unwrap();
        for (a, b) in values_only.iter().zip(&eig.values) {
            assert!(close(a, b));
        }
    }

    #[test]
    fn rejects_nonpositive_offdiagonal() {
        let p = p();
        assert!(Tridiagonal::new(vec![p.one(), p.one()], vec![p.zero()]).is_err());
        assert!(Tridiagonal::new(vec![p.one(), p.one()], vec![]).is_err());
    }

    #[test]
    fn shifted_solve_examples() {
        let prec = p();
        let t = tri(&[2.0], &[]);
        let y = solve_shifted_tridiag(&t, &prec.zero(), &[prec.one()], &prec).unwrap();
        assert_eq!(y[0], 0.5);

        // [[0,1],[1,0]] has eigenvalues ±1, so the zero shift is regular;
        // its leading 1x1 block is the singular one.
        let t = tri(&[0.0, 0.0], &[1.0]);
        let y = solve_shifted_tridiag(&t, &prec.zero(), &[prec.one(), prec.zero()], &prec).unwrap();
        assert!(y[0].is_zero() && y[1] == 1.0);
        let err = solve_shifted_tridiag(&t.leading(1), &prec.zero(), &[prec.one()], &prec)
            .unwrap_err();
        assert!(matches!(err, Error::SingularShift { .. }));
        let err = solve_shifted_tridiag(&t, &prec.one(), &[prec.one(), prec.zero()], &prec)
            .unwrap_err();
        assert!(matches!(err, Error::SingularShift { .. }));

        let t = tri(&[3.0, 3.0], &[1.0]);
        let y = solve_shifted_tridiag(&t, &prec.one(), &[prec.one(), prec.one()], &prec).unwrap();
        let third = prec.one() / 3;
        assert!(close(&y[0], &third) && close(&y[1], &third));
    }

    #[test]
    fn shifted_solve_reproduces_rhs_with_pivoting() {
        let prec = p();
        // Indefinite shift forces row interchanges.
        let t = tri(&[0.1, -3.0, 2.0, 0.5, 7.0], &[4.0, 0.3, 2.5, 1.0]);
        let z = prec.real(0.25);
        let rhs: Vec<Real> = (1..=5).map(|i| prec.int(i)).collect();
        let y = solve_shifted_tridiag(&t, &z, &rhs, &prec).unwrap();
        let back = t.shifted_matvec(&z, &y).unwrap();
        for (a, b) in back.iter().zip(&rhs) {
            assert!(close(a, b));
        }
    }
}
