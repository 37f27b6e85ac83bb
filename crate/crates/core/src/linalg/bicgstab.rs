//! Preconditioned BiCGSTAB (right preconditioning, so the monitored
//! residual is the unpreconditioned `b - A x`).

use crate::error::{PdcpError, Result};

use super::{Ilu0, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeSolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct BicgstabOptions {
    pub tol: f64,
    /// `None` means `10 * n`.
    pub max_iter: Option<usize>,
    /// Consecutive iterations without a new minimum residual before the
    /// solve is declared stagnated.
    pub stagnation_window: usize,
}

impl Default for BicgstabOptions {
    fn default() -> Self {
        Self { tol: 1e-15, max_iter: None, stagnation_window: 40 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn true_residual(a: &SparseMatrix, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    a.mul_vec_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

fn precondition(m: Option<&Ilu0>, src: &[f64], dst: &mut [f64]) {
    dst.copy_from_slice(src);
    if let Some(m) = m {
        m.apply(dst);
    }
}

/// Solves `a x = b`. `x0` is the initial guess (zero when `None`).
///
/// A zero inner product triggers one restart from the current iterate with
/// a fresh shadow residual; a second breakdown is an error. Failing to reach
/// `tol` is reported through `converged = false`, never silently.
pub fn bicgstab(
    a: &SparseMatrix,
    b: &[f64],
    precond: Option<&Ilu0>,
    x0: Option<&[f64]>,
    opts: &BicgstabOptions,
) -> Result<(Vec<f64>, IterativeSolveReport)> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n || x0.is_some_and(|x| x.len() != n) {
        return Err(PdcpError::DimensionMismatch("bicgstab operand sizes".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(PdcpError::InvalidParameter("bicgstab tol must be > 0".into()));
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n).max(1);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], IterativeSolveReport { iterations: 0, relative_residual: 0.0, converged: true }));
    }

    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let mut r = vec![0.0; n];
    let mut rel = true_residual(a, b, &x, &mut r) / bnorm;
    if rel < opts.tol {
        return Ok((x, IterativeSolveReport { iterations: 0, relative_residual: rel, converged: true }));
    }

    let mut best_x = x.clone();
    let mut best_rel = rel;
    let mut r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut rho_old, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut fresh = true;
    let mut restarted = false;
    let mut since_best = 0usize;
    let mut iterations = 0usize;

    let mut breakdown = |x: &[f64], r: &mut Vec<f64>, r_hat: &mut Vec<f64>, iters: usize, rel: f64| -> Result<()> {
        if restarted {
            return Err(PdcpError::Breakdown { iterations: iters, residual: rel });
        }
        restarted = true;
        true_residual(a, b, x, r);
        r_hat.copy_from_slice(r);
        Ok(())
    };

    while iterations < max_iter {
        iterations += 1;
        let rho = dot(&r_hat, &r);
        if rho == 0.0 || !rho.is_finite() {
            breakdown(&x, &mut r, &mut r_hat, iterations, rel)?;
            fresh = true;
            continue;
        }
        if fresh {
            p.copy_from_slice(&r);
            fresh = false;
        } else {
            let beta = (rho / rho_old) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
        }
        precondition(precond, &p, &mut p_hat);
        a.mul_vec_into(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 || !rv.is_finite() {
            breakdown(&x, &mut r, &mut r_hat, iterations, rel)?;
            fresh = true;
            continue;
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm < opts.tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
        } else {
            precondition(precond, &s, &mut s_hat);
            a.mul_vec_into(&s_hat, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                breakdown(&x, &mut r, &mut r_hat, iterations, rel)?;
                fresh = true;
                continue;
            }
            omega = dot(&t, &s) / tt;
            for i in 0..n {
                x[i] += alpha * p_hat[i] + omega * s_hat[i];
                r[i] = s[i] - omega * t[i];
            }
            rho_old = rho;
            let est = norm(&r) / bnorm;
            if omega == 0.0 {
                breakdown(&x, &mut r, &mut r_hat, iterations, rel)?;
                fresh = true;
                continue;
            }
            if est >= opts.tol {
                // Recursive estimate only; it is confirmed against the true
                // residual once it drops under tol.
                if est < best_rel {
                    rel = est;
                    best_rel = est;
                    best_x.copy_from_slice(&x);
                    since_best = 0;
                } else {
                    since_best += 1;
                    if since_best >= opts.stagnation_window {
                        break;
                    }
                }
                continue;
            }
        }
        // The recursive residual claims convergence: verify against the true one.
        rel = true_residual(a, b, &x, &mut r) / bnorm;
        if rel < best_rel {
            best_rel = rel;
            best_x.copy_from_slice(&x);
            since_best = 0;
        } else {
            since_best += 1;
        }
        if rel < opts.tol {
            return Ok((x, IterativeSolveReport { iterations, relative_residual: rel, converged: true }));
        }
        if since_best >= opts.stagnation_window {
            break;
        }
        // Residual replacement: continue from the true residual.
        fresh = true;
    }

    let mut r_best = vec![0.0; n];
    let final_rel = true_residual(a, b, &best_x, &mut r_best) / bnorm;
    Ok((
        best_x,
        IterativeSolveReport { iterations, relative_residual: final_rel, converged: final_rel < opts.tol },
    ))
}
