//! The linear systems `(B + diag(P)) x = b` solved inside penalty iterations,
//! where `B = I - c A` is fixed over one stage.

use serde::{Deserialize, Serialize};

use crate::error::{PdcpError, Result};
use crate::linalg::{bicgstab, BicgstabOptions, Ilu0, IterativeSolveReport, SparseMatrix, TridiagonalMatrix};
use crate::linalg::solve_tridiagonal;

use super::StepTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearRoute {
    /// Tridiagonal direct solves for 1D θ-P/DIRK-P, ILU(0)-BiCGSTAB otherwise.
    Auto,
    Direct,
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearConfig {
    pub route: LinearRoute,
    /// Relative residual target in the Euclidean norm.
    pub tol: f64,
    /// `None` means `10 * M`.
    pub max_iter: Option<usize>,
    /// A Krylov solve that stagnates above `tol` is accepted (and counted
    /// in the step trace) if its relative residual is below this bound.
    pub accept_residual: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        Self { route: LinearRoute::Auto, tol: 1e-15, max_iter: None, accept_residual: 1e-11 }
    }
}

impl LinearConfig {
    pub(crate) fn bicgstab_options(&self) -> BicgstabOptions {
        BicgstabOptions { tol: self.tol, max_iter: self.max_iter, ..Default::default() }
    }

    /// Records a Krylov report in the trace and decides whether to accept it.
    pub(crate) fn check_report(&self, rep: &IterativeSolveReport, trace: &mut StepTrace) -> Result<()> {
        trace.linear_solves += 1;
        trace.linear_iterations += rep.iterations;
        trace.max_linear_residual = trace.max_linear_residual.max(rep.relative_residual);
        if rep.converged {
            return Ok(());
        }
        if rep.relative_residual <= self.accept_residual {
            trace.linear_unconverged += 1;
            Ok(())
        } else {
            Err(PdcpError::LinearNotConverged { iterations: rep.iterations, residual: rep.relative_residual })
        }
    }
}

/// `B = I - c A` in the storage its solver needs.
pub(crate) enum StageMatrix {
    Tridiagonal(TridiagonalMatrix),
    Sparse { matrix: SparseMatrix, diag: Vec<usize> },
}

impl StageMatrix {
    pub(crate) fn new(a: &SparseMatrix, c: f64, direct: bool) -> Result<Self> {
        let b = a.shifted(1.0, -c);
        if direct {
            Ok(StageMatrix::Tridiagonal(TridiagonalMatrix::from_sparse(&b)?))
        } else {
            let diag = b
                .diagonal_positions()
                .into_iter()
                .map(|p| p.expect("shifted matrix stores its diagonal"))
                .collect();
            Ok(StageMatrix::Sparse { matrix: b, diag })
        }
    }

    /// Solves `(B + diag(p)) x = rhs` starting from `guess` (Krylov route only).
    pub(crate) fn solve(
        &self,
        p: &[f64],
        rhs: &[f64],
        guess: &[f64],
        cfg: &LinearConfig,
        trace: &mut StepTrace,
    ) -> Result<Vec<f64>> {
        match self {
            StageMatrix::Tridiagonal(t) => {
                let mut t = t.clone();
                t.add_diagonal(p);
                trace.linear_solves += 1;
                solve_tridiagonal(&t, rhs)
            }
            StageMatrix::Sparse { matrix, diag } => {
                let mut m = matrix.clone();
                {
                    let vals = m.values_mut();
                    for (&k, &pv) in diag.iter().zip(p) {
                        vals[k] += pv;
                    }
                }
                solve_krylov(&m, rhs, guess, cfg, trace)
            }
        }
    }
}

pub(crate) fn solve_krylov(
    m: &SparseMatrix,
    rhs: &[f64],
    guess: &[f64],
    cfg: &LinearConfig,
    trace: &mut StepTrace,
) -> Result<Vec<f64>> {
    // Equilibrate rows so penalty rows do not dominate the residual norm.
    let mut m = m.clone();
    let mut rhs = rhs.to_vec();
    for (r, b) in rhs.iter_mut().enumerate() {
        let d = m.get(r, r).abs();
        let s = if d > 0.0 { 1.0 / d } else { 1.0 };
        let (lo, hi) = (m.row_ptr()[r], m.row_ptr()[r + 1]);
        m.values_mut()[lo..hi].iter_mut().for_each(|v| *v *= s);
        *b *= s;
    }
    let ilu = Ilu0::factor_with_retry(&m)?;
    let (x, rep) = bicgstab(&m, &rhs, Some(&ilu), Some(guess), &cfg.bicgstab_options())?;
    cfg.check_report(&rep, trace)?;
    Ok(x)
}
