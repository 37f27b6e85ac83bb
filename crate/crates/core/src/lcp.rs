//! Brennan–Schwartz direct solver for tridiagonal linear complementarity
//! problems `M x >= b`, `x >= g`, `(x - g)ᵀ(M x - b) = 0`.
//!
//! The solver is exact when the contact set `{x = g}` is a single block
//! at the low-index end, which is the structure of an American put.

use crate::error::{PdcpError, Result};
use crate::linalg::TridiagonalMatrix;

#[derive(Debug, Clone)]
pub struct TridiagonalLcp {
    pub matrix: TridiagonalMatrix,
    pub rhs: Vec<f64>,
    pub obstacle: Vec<f64>,
}

impl TridiagonalLcp {
    pub fn new(matrix: TridiagonalMatrix, rhs: Vec<f64>, obstacle: Vec<f64>) -> Result<Self> {
        let n = matrix.len();
        if rhs.len() != n || obstacle.len() != n {
            return Err(PdcpError::DimensionMismatch(format!(
                "LCP of size {n} with rhs {} and obstacle {}",
                rhs.len(),
                obstacle.len()
            )));
        }
        Ok(Self { matrix, rhs, obstacle })
    }

    /// Componentwise `min(x - g, M x - b)`; zero at an exact solution.
    pub fn complementarity_residual(&self, x: &[f64]) -> Vec<f64> {
        let mx = self.matrix.mul_vec(x);
        x.iter()
            .zip(&self.obstacle)
            .zip(mx.iter().zip(&self.rhs))
            .map(|((xi, gi), (mi, bi))| (xi - gi).min(mi - bi))
            .collect()
    }
}

/// Eliminates the superdiagonal from the last row upward, then substitutes
/// forward from the first row, projecting each unknown onto its obstacle.
pub fn brennan_schwartz_solve(lcp: &TridiagonalLcp) -> Result<Vec<f64>> {
    let m = &lcp.matrix;
    let n = m.len();
    let mut d = m.diag.clone();
    let mut b = lcp.rhs.clone();
    if d[n - 1] == 0.0 {
        return Err(PdcpError::SingularMatrix { row: n - 1 });
    }
    for i in (0..n - 1).rev() {
        let f = m.upper[i] / d[i + 1];
        d[i] -= f * m.lower[i];
        b[i] -= f * b[i + 1];
        if d[i] == 0.0 || !d[i].is_finite() {
            return Err(PdcpError::SingularMatrix { row: i });
        }
    }
    let mut x = vec![0.0; n];
    x[0] = (b[0] / d[0]).max(lcp.obstacle[0]);
    for i in 1..n {
        x[i] = ((b[i] - m.lower[i - 1] * x[i - 1]) / d[i]).max(lcp.obstacle[i]);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve_tridiagonal;

    fn sample_matrix(n: usize) -> TridiagonalMatrix {
        TridiagonalMatrix::new(
            (0..n - 1).map(|i| -0.4 - 0.01 * i as f64).collect(),
            (0..n).map(|i| 2.0 + 0.02 * i as f64).collect(),
            (0..n - 1).map(|i| -0.5 + 0.005 * i as f64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn slack_obstacle_is_plain_solve() {
        let n = 40;
        let m = sample_matrix(n);
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let lcp = TridiagonalLcp::new(m.clone(), rhs.clone(), vec![-1e9; n]).unwrap();
        let x = brennan_schwartz_solve(&lcp).unwrap();
        let y = solve_tridiagonal(&m, &rhs).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_with_binding_constraint() {
        let g: Vec<f64> = (0..10).map(|i| (100.0 - 15.0 * i as f64).max(0.0)).collect();
        let lcp = TridiagonalLcp::new(TridiagonalMatrix::identity(10), vec![0.0; 10], g.clone()).unwrap();
        assert_eq!(brennan_schwartz_solve(&lcp).unwrap(), g);
    }

    #[test]
    fn put_like_contact_at_low_end() {
        // Obstacle decreasing and large at the low end, rhs below it there.
        let n = 50;
        let m = sample_matrix(n);
        let g: Vec<f64> = (0..n).map(|i| (25.0 - i as f64).max(0.0)).collect();
        let rhs: Vec<f64> = (0..n).map(|i| 0.5 * (30.0 - i as f64).max(0.0)).collect();
        let lcp = TridiagonalLcp::new(m, rhs, g).unwrap();
        let x = brennan_schwartz_solve(&lcp).unwrap();
        let res = lcp.complementarity_residual(&x);
        assert!(res.iter().all(|v| v.abs() < 1e-10), "{res:?}");
        let contact: Vec<bool> = x.iter().zip(&lcp.obstacle).map(|(a, b)| a == b).collect();
        let first_free = contact.iter().position(|c| !c).unwrap();
        assert!(first_free > 0);
        assert!(contact[first_free..].iter().all(|c| !c));
    }
}
