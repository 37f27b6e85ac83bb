use crate::error::{PdcpError, Result};

use super::SparseMatrix;

/// Square tridiagonal matrix; `lower[i]` sits at `(i+1, i)`, `upper[i]` at `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(PdcpError::DimensionMismatch(format!(
                "tridiagonal bands {}/{}/{}",
                lower.len(),
                n,
                upper.len()
            )));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn identity(n: usize) -> Self {
        Self { lower: vec![0.0; n - 1], diag: vec![1.0; n], upper: vec![0.0; n - 1] }
    }

    /// Extracts the three central bands of a square sparse matrix. Fails if
    /// any entry lies outside them.
    pub fn from_sparse(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        let mut t = Self { lower: vec![0.0; n.saturating_sub(1)], diag: vec![0.0; n], upper: vec![0.0; n.saturating_sub(1)] };
        for r in 0..n {
            for (c, v) in a.row(r) {
                if c == r {
                    t.diag[r] = v;
                } else if c + 1 == r {
                    t.lower[c] = v;
                } else if c == r + 1 {
                    t.upper[r] = v;
                } else {
                    return Err(PdcpError::DimensionMismatch(format!(
                        "entry ({r},{c}) outside the tridiagonal band"
                    )));
                }
            }
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.lower[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.upper[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Adds `d` to the main diagonal.
    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (a, b) in self.diag.iter_mut().zip(d) {
            *a += b;
        }
    }
}

/// Thomas algorithm without pivoting.
pub fn solve_tridiagonal(mat: &TridiagonalMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = mat.len();
    if rhs.len() != n {
        return Err(PdcpError::DimensionMismatch(format!("rhs {} vs matrix {n}", rhs.len())));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = mat.diag[0];
    if denom == 0.0 {
        return Err(PdcpError::SingularMatrix { row: 0 });
    }
    if n > 1 {
        c[0] = mat.upper[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = mat.diag[i] - mat.lower[i - 1] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(PdcpError::SingularMatrix { row: i });
        }
        if i + 1 < n {
            c[i] = mat.upper[i] / denom;
        }
        d[i] = (rhs[i] - mat.lower[i - 1] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}
