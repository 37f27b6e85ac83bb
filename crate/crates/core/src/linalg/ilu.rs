//! Zero fill-in incomplete LU factorization in natural ordering.

use crate::error::{PdcpError, Result};

use super::SparseMatrix;

/// ILU(0) factors stored on the pattern of the input matrix: unit lower
/// triangle strictly below the diagonal, upper triangle on and above it.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: SparseMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        Self::factor_shifted(a, 0.0)
    }

    /// Factorizes `a`; on a zero pivot retries once with the diagonal
    /// shifted by `1e-12 * max|diag|`.
    pub fn factor_with_retry(a: &SparseMatrix) -> Result<Self> {
        match Self::factor(a) {
            Err(PdcpError::SingularMatrix { row }) => {
                let dmax = a
                    .diagonal_positions()
                    .iter()
                    .flatten()
                    .map(|&k| a.values()[k].abs())
                    .fold(0.0, f64::max);
                let shift = 1e-12 * dmax;
                if shift == 0.0 {
                    return Err(PdcpError::SingularMatrix { row });
                }
                Self::factor_shifted(a, shift)
            }
            other => other,
        }
    }

    fn factor_shifted(a: &SparseMatrix, shift: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(PdcpError::DimensionMismatch("ILU(0) needs a square matrix".into()));
        }
        let mut lu = a.clone();
        let diag: Vec<usize> = lu
            .diagonal_positions()
            .into_iter()
            .enumerate()
            .map(|(r, p)| p.ok_or(PdcpError::SingularMatrix { row: r }))
            .collect::<Result<_>>()?;
        if shift != 0.0 {
            for &k in &diag {
                lu.values_mut()[k] += shift;
            }
        }
        let row_ptr = lu.row_ptr().to_vec();
        let col_idx = lu.col_idx().to_vec();
        let mut pos = vec![usize::MAX; n];
        let vals = lu.values_mut();
        for i in 0..n {
            let (start, end) = (row_ptr[i], row_ptr[i + 1]);
            for k in start..end {
                pos[col_idx[k]] = k;
            }
            for kk in start..diag[i] {
                let k = col_idx[kk];
                let pivot = vals[diag[k]];
                if pivot == 0.0 || !pivot.is_finite() {
                    return Err(PdcpError::SingularMatrix { row: k });
                }
                let lik = vals[kk] / pivot;
                vals[kk] = lik;
                for kj in diag[k] + 1..row_ptr[k + 1] {
                    let p = pos[col_idx[kj]];
                    if p != usize::MAX {
                        vals[p] -= lik * vals[kj];
                    }
                }
            }
            for k in start..end {
                pos[col_idx[k]] = usize::MAX;
            }
            if vals[diag[i]] == 0.0 || !vals[diag[i]].is_finite() {
                return Err(PdcpError::SingularMatrix { row: i });
            }
        }
        Ok(Self { lu, diag })
    }

    /// Solves `L U x = b` in place.
    pub fn apply(&self, x: &mut [f64]) {
        let n = self.diag.len();
        let rp = self.lu.row_ptr();
        let ci = self.lu.col_idx();
        let v = self.lu.values();
        for i in 0..n {
            let mut acc = x[i];
            for k in rp[i]..self.diag[i] {
                acc -= v[k] * x[ci[k]];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in self.diag[i] + 1..rp[i + 1] {
                acc -= v[k] * x[ci[k]];
            }
            x[i] = acc / v[self.diag[i]];
        }
    }

    /// Dense `(L, U)` for inspection in tests and diagnostics.
    pub fn dense_factors(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = self.diag.len();
        let mut l = vec![vec![0.0; n]; n];
        let mut u = vec![vec![0.0; n]; n];
        for i in 0..n {
            l[i][i] = 1.0;
            for (c, v) in self.lu.row(i) {
                if c < i {
                    l[i][c] = v;
                } else {
                    u[i][c] = v;
                }
            }
        }
        (l, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;

    fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut c = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    #[test]
    fn tridiagonal_ilu_is_exact() {
        let n = 8;
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.push(i, i, 3.0 + i as f64 * 0.1);
            if i > 0 {
                t.push(i, i - 1, -1.0 - 0.05 * i as f64);
            }
            if i + 1 < n {
                t.push(i, i + 1, -0.7);
            }
        }
        let a = t.build();
        let f = Ilu0::factor(&a).unwrap();
        let (l, u) = f.dense_factors();
        let lu = matmul(&l, &u);
        let d = a.to_dense();
        let tol = 1e-12 * a.norm_inf();
        for i in 0..n {
            for j in 0..n {
                assert!((lu[i][j] - d[i][j]).abs() <= tol);
            }
        }
    }

    #[test]
    fn identity_factors() {
        let f = Ilu0::factor(&SparseMatrix::identity(4)).unwrap();
        let (l, u) = f.dense_factors();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_eq!(l[i][j], e);
                assert_eq!(u[i][j], e);
            }
        }
    }

    #[test]
    fn zero_pivot_and_shift_retry() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 0, 0.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 2.0);
        let a = t.build();
        assert!(matches!(Ilu0::factor(&a), Err(PdcpError::SingularMatrix { row: 0 })));
        assert!(Ilu0::factor_with_retry(&a).is_ok());
    }

    #[test]
    fn missing_diagonal_rejected() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 1, 1.0);
        t.push(1, 1, 1.0);
        assert!(Ilu0::factor(&t.build()).is_err());
    }
}
