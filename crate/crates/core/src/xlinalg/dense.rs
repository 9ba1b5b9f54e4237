use crate::error::{Error, Result};

use super::Real;

/// Small dense row-major matrix used for Gram systems, Remez reference
/// systems and eigenvector blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Real>,
}

impl Matrix {
    pub fn zeros(bits: u32, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| Real::zero(bits)).collect(),
        }
    }

    pub fn identity(bits: u32, n: usize) -> Self {
        let mut m = Matrix::zeros(bits, n, n);
        for i in 0..n {
            m[(i, i)] = Real::one(bits);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Real) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Real> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> &[Real] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                expected: self.cols,
                found: other.rows,
            });
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = self[(i, 0)].zero_like();
            for l in 0..self.cols {
                acc += &self[(i, l)] * &other[(l, j)];
            }
            acc
        }))
    }

    pub fn matvec(&self, x: &[Real]) -> Result<Vec<Real>> {
        if self.cols != x.len() {
            return Err(Error::Dimension {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = x[0].zero_like();
                for (a, b) in self.row(i).iter().zip(x) {
                    acc += a * b;
                }
                acc
            })
            .collect())
    }

    pub fn max_abs(&self) -> Real {
        self.data
            .iter()
            .map(Real::abs)
            .reduce(Real::max)
            .expect("non-empty matrix")
    }

    /// Solves `self * x = b` by Gaussian elimination with partial pivoting.
    pub fn lu_solve(&self, b: &[Real]) -> Result<Vec<Real>> {
        let n = self.rows;
        if self.cols != n || b.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: b.len(),
            });
        }
        let mut a = self.clone();
        let mut x: Vec<Real> = b.to_vec();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .expect("non-empty range");
            if a[(piv, col)].is_zero() {
                return Err(Error::Domain("singular linear system".into()));
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                }
                x.swap(piv, col);
            }
            for i in col + 1..n {
                let factor = &a[(i, col)] / &a[(col, col)];
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let t = &factor * &a[(col, j)];
                    a[(i, j)] -= t;
                }
                let t = &factor * &x[col];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i].clone();
            for j in i + 1..n {
                s -= &a[(i, j)] * &x[j];
            }
            x[i] = s / &a[(i, i)];
        }
        Ok(x)
    }

    /// Cholesky factor `L` (lower, row-major) of a symmetric positive-definite
    /// matrix, or `None` when a pivot is not positive.
    pub fn cholesky(&self) -> Option<Matrix> {
        let n = self.rows;
        let mut l = Matrix::zeros(self.data[0].prec(), n, n);
        for j in 0..n {
            let mut d = self[(j, j)].clone();
            for k in 0..j {
                d -= l[(j, k)].square();
            }
            if !d.is_positive() {
                return None;
            }
            let djj = d.sqrt();
            for i in j + 1..n {
                let mut s = self[(i, j)].clone();
                for k in 0..j {
                    s -= &l[(i, k)] * &l[(j, k)];
                }
                l[(i, j)] = s / &djj;
            }
            l[(j, j)] = djj;
        }
        Some(l)
    }

    /// Solves `L Lᵀ x = b` given the Cholesky factor `L`.
    pub fn cholesky_solve(l: &Matrix, b: &[Real]) -> Vec<Real> {
        let n = l.rows;
        let mut y: Vec<Real> = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = b[i].clone();
            for (k, yk) in y.iter().enumerate() {
                s -= &l[(i, k)] * yk;
            }
            y.push(s / &l[(i, i)]);
        }
        for i in (0..n).rev() {
            let mut s = y[i].clone();
            for k in i + 1..n {
                s -= &l[(k, i)] * &y[k];
            }
            y[i] = s / &l[(i, i)];
        }
        y
    }

    /// Least-squares solution of `min ‖self x − b‖₂` by Householder QR.
    ///
    /// Rows are processed in order of decreasing norm so that strongly
    /// row-scaled problems keep their small rows accurate.
    pub fn lstsq(&self, b: &[Real]) -> Result<Vec<Real>> {
        let (m, n) = (self.rows, self.cols);
        if b.len() != m {
            return Err(Error::Dimension {
                expected: m,
                found: b.len(),
            });
        }
        if m < n {
            return Err(Error::Parameter("underdetermined least-squares problem".into()));
        }
        let row_norm = |i: usize| -> Real {
            self.row(i)
                .iter()
                .map(Real::abs)
                .reduce(Real::max)
                .expect("non-empty row")
        };
        let mut order: Vec<usize> = (0..m).collect();
        let norms: Vec<Real> = (0..m).map(row_norm).collect();
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

        let mut a = Matrix::from_fn(m, n, |i, j| self[(order[i], j)].clone());
        let mut rhs: Vec<Real> = order.iter().map(|&i| b[i].clone()).collect();

        for k in 0..n {
            let mut alpha2 = a[(k, k)].zero_like();
            for i in k..m {
                alpha2 += a[(i, k)].square();
            }
            if alpha2.is_zero() {
                return Err(Error::Domain("rank-deficient least-squares problem".into()));
            }
            let alpha = alpha2.sqrt().copysign(&a[(k, k)]);
            // v = x + sign(x1)‖x‖ e1, stored in place of column k.
            let v0 = &a[(k, k)] + &alpha;
            let mut v: Vec<Real> = Vec::with_capacity(m - k);
            v.push(v0);
            for i in k + 1..m {
                v.push(a[(i, k)].clone());
            }
            let mut vtv = v[0].zero_like();
            for x in &v {
                vtv += x.square();
            }
            for j in k..n {
                let mut s = v[0].zero_like();
                for (i, vi) in v.iter().enumerate() {
                    s += vi * &a[(k + i, j)];
                }
                let f = (s * 2) / &vtv;
                for (i, vi) in v.iter().enumerate() {
                    let t = &f * vi;
                    a[(k + i, j)] -= t;
                }
            }
            let mut s = v[0].zero_like();
            for (i, vi) in v.iter().enumerate() {
                s += vi * &rhs[k + i];
            }
            let f = (s * 2) / &vtv;
            for (i, vi) in v.iter().enumerate() {
                let t = &f * vi;
                rhs[k + i] -= t;
            }
        }
        let mut x: Vec<Real> = (0..n).map(|_| rhs[0].zero_like()).collect();
        for i in (0..n).rev() {
            let mut s = rhs[i].clone();
            for j in i + 1..n {
                s -= &a[(i, j)] * &x[j];
            }
            x[i] = s / &a[(i, i)];
        }
        Ok(x)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Real;
    fn index(&self, (i, j): (usize, usize)) -> &Real {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Real {
        &mut self.data[i * self.cols + j]
    }
}
