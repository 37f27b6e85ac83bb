//! Linear algebra used inside the penalty iterations.

mod bicgstab;
mod ilu;
mod sparse;
mod tridiag;

pub use bicgstab::{bicgstab, BicgstabOptions, IterativeSolveReport};
pub use ilu::Ilu0;
pub use sparse::{SparseMatrix, TripletBuilder};
pub use tridiag::{solve_tridiagonal, TridiagonalMatrix};

use crate::error::{PdcpError, Result};

/// Builds the 2M × 2M coupled system for one Lobatto IIIC penalty pass,
/// acting on the stacked unknown `(Y, Z)`:
///
/// ```text
/// [ I - dt/2 A + P      dt/2 A - Q    ] [Y]
/// [ -(dt/2 A - P)    I - dt/2 A + Q   ] [Z]
/// ```
pub fn assemble_lobatto_block(
    a: &SparseMatrix,
    dt: f64,
    p_diag: &[f64],
    q_diag: &[f64],
) -> Result<SparseMatrix> {
    let n = a.nrows();
    if a.ncols() != n || p_diag.len() != n || q_diag.len() != n {
        return Err(PdcpError::DimensionMismatch(format!(
            "lobatto block: A is {}x{}, P has {}, Q has {}",
            n,
            a.ncols(),
            p_diag.len(),
            q_diag.len()
        )));
    }
    let half = 0.5 * dt;
    let mut b = TripletBuilder::new(2 * n, 2 * n);
    for row in 0..n {
        b.push(row, row, 1.0 + p_diag[row]);
        b.push(row, n + row, -q_diag[row]);
        b.push(n + row, row, p_diag[row]);
        b.push(n + row, n + row, 1.0 + q_diag[row]);
        for (col, v) in a.row(row) {
            let hv = half * v;
            b.push(row, col, -hv);
            b.push(row, n + col, hv);
            b.push(n + row, col, -hv);
            b.push(n + row, n + col, -hv);
        }
    }
    Ok(b.build())
}
