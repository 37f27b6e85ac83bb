//! One time step of each penalty method, plus the exact-LCP variants of
//! the θ-method and DIRK used as 1D oracles.

use crate::error::{PdcpError, Result};
use crate::lcp::{brennan_schwartz_solve, TridiagonalLcp};
use crate::linalg::{assemble_lobatto_block, TridiagonalMatrix};
use crate::operator::DiscreteProblem;

use super::penalty::{penalty_diag, penalty_displacement};
use super::system::{solve_krylov, LinearRoute, StageMatrix};
use super::{SolverConfig, StepTrace};

fn use_direct(problem: &DiscreteProblem, cfg: &SolverConfig) -> bool {
    match cfg.linear.route {
        LinearRoute::Direct => true,
        LinearRoute::Krylov => false,
        LinearRoute::Auto => problem.dims() <= 1,
    }
}

fn check_inputs(problem: &DiscreteProblem, u_prev: &[f64], dt: f64) -> Result<()> {
    if u_prev.len() != problem.size() {
        return Err(PdcpError::DimensionMismatch(format!(
            "state has {} entries, problem has {}",
            u_prev.len(),
            problem.size()
        )));
    }
    if !(dt > 0.0) {
        return Err(PdcpError::InvalidParameter(format!("time step must be > 0, got {dt}")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(PdcpError::InvalidParameter(format!("theta must be > 0, got {theta}")))
    }
}

/// `x + c y`
fn axpy(x: &[f64], c: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + c * b).collect()
}

/// Runs the penalty iteration for `(B + P^{(k)}) Y^{(k+1)} = rhs + P^{(k)} u0`
/// from `Y^{(0)} = start`; returns the final iterate and κ.
fn penalty_stage(
    sys: &StageMatrix,
    rhs: &[f64],
    start: &[f64],
    u0: &[f64],
    stage: usize,
    cfg: &SolverConfig,
    trace: &mut StepTrace,
) -> Result<(Vec<f64>, usize)> {
    let pc = &cfg.penalty;
    let mut y = start.to_vec();
    let mut p = penalty_diag(&y, u0, pc.large);
    for k in 1..=pc.max_penalty_iters {
        let b: Vec<f64> = rhs.iter().zip(&p).zip(u0).map(|((r, pi), g)| r + pi * g).collect();
        let y_new = sys.solve(&p, &b, &y, &cfg.linear, trace)?;
        let p_new = penalty_diag(&y_new, u0, pc.large);
        let disp = penalty_displacement(&y_new, &y);
        y = y_new;
        if disp < pc.tol || p_new == p {
            return Ok((y, k));
        }
        p = p_new;
    }
    Err(PdcpError::PenaltyNotConverged { max_iters: pc.max_penalty_iters, stage })
}

/// θ-P: `(I - θΔt A + P) Y = U + (1-θ)Δt A U + P U0`.
pub fn step_theta_p(
    problem: &DiscreteProblem,
    u_prev: &[f64],
    dt: f64,
    theta: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, StepTrace)> {
    check_inputs(problem, u_prev, dt)?;
    check_theta(theta)?;
    let mut trace = StepTrace::new(0);
    let a = &problem.a_matrix;
    let au = a.mul_vec(u_prev);
    let rhs = axpy(u_prev, (1.0 - theta) * dt, &au);
    let sys = StageMatrix::new(a, theta * dt, use_direct(problem, cfg))?;
    let (y, k) = penalty_stage(&sys, &rhs, u_prev, &problem.u0, 1, cfg, &mut trace)?;
    trace.kappa.push(k);
    Ok((y, trace))
}

/// DIRK-P: stage one is a θ-P pass giving Ŷ; stage two solves
/// `(I - θΔt A + Q) Z = U + ½Δt A U + (½-θ)Δt A Ŷ + Q U0` from `Z^{(0)} = U`.
pub fn step_dirk_p(
    problem: &DiscreteProblem,
    u_prev: &[f64],
    dt: f64,
    theta: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, StepTrace)> {
    check_inputs(problem, u_prev, dt)?;
    check_theta(theta)?;
    let mut trace = StepTrace::new(0);
    let a = &problem.a_matrix;
    let au = a.mul_vec(u_prev);
    let sys = StageMatrix::new(a, theta * dt, use_direct(problem, cfg))?;

    let rhs1 = axpy(u_prev, (1.0 - theta) * dt, &au);
    let (y_hat, k1) = penalty_stage(&sys, &rhs1, u_prev, &problem.u0, 1, cfg, &mut trace)?;
    trace.kappa.push(k1);

    let ay = a.mul_vec(&y_hat);
    let rhs2: Vec<f64> = (0..u_prev.len())
        .map(|l| u_prev[l] + 0.5 * dt * au[l] + (0.5 - theta) * dt * ay[l])
        .collect();
    let (z, k2) = penalty_stage(&sys, &rhs2, u_prev, &problem.u0, 2, cfg, &mut trace)?;
    trace.kappa.push(k2);
    Ok((z, trace))
}

/// Lobatto-P: both stages solved together as one 2M system per penalty
/// pass, with `P` refreshed from `Y^{(k)}` and `Q` from `Z^{(k)}`. The
/// displacement test is applied to `Z`; the active-set test to `(P, Q)`.
pub fn step_lobatto_p(
    problem: &DiscreteProblem,
    u_prev: &[f64],
    dt: f64,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, StepTrace)> {
    check_inputs(problem, u_prev, dt)?;
    let mut trace = StepTrace::new(0);
    let n = u_prev.len();
    let u0 = &problem.u0;
    let pc = &cfg.penalty;
    let mut y = u_prev.to_vec();
    let mut z = u_prev.to_vec();
    let mut p = penalty_diag(&y, u0, pc.large);
    let mut q = penalty_diag(&z, u0, pc.large);
    for k in 1..=pc.max_penalty_iters {
        let block = assemble_lobatto_block(&problem.a_matrix, dt, &p, &q)?;
        let mut rhs = Vec::with_capacity(2 * n);
        rhs.extend((0..n).map(|l| u_prev[l] + (p[l] - q[l]) * u0[l]));
        rhs.extend((0..n).map(|l| u_prev[l] + (p[l] + q[l]) * u0[l]));
        let mut guess = y.clone();
        guess.extend_from_slice(&z);
        let x = solve_krylov(&block, &rhs, &guess, &cfg.linear, &mut trace)?;
        let (y_new, z_new) = x.split_at(n);
        let p_new = penalty_diag(y_new, u0, pc.large);
        let q_new = penalty_diag(z_new, u0, pc.large);
        let disp = penalty_displacement(z_new, &z);
        y = y_new.to_vec();
        z = z_new.to_vec();
        if disp < pc.tol || (p_new == p && q_new == q) {
            trace.kappa.push(k);
            return Ok((z, trace));
        }
        p = p_new;
        q = q_new;
    }
    Err(PdcpError::PenaltyNotConverged { max_iters: pc.max_penalty_iters, stage: 1 })
}

fn lcp_stage(b: &TridiagonalMatrix, rhs: Vec<f64>, u0: &[f64], trace: &mut StepTrace) -> Result<Vec<f64>> {
    let lcp = TridiagonalLcp::new(b.clone(), rhs, u0.to_vec())?;
    let x = brennan_schwartz_solve(&lcp)?;
    let res = lcp.complementarity_residual(&x).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    trace.lcp_residual = Some(trace.lcp_residual.unwrap_or(0.0).max(res));
    trace.linear_solves += 1;
    Ok(x)
}

/// θ-method step with the complementarity condition solved exactly by
/// Brennan–Schwartz (1D only).
pub fn step_theta_lcp(problem: &DiscreteProblem, u_prev: &[f64], dt: f64, theta: f64) -> Result<(Vec<f64>, StepTrace)> {
    check_inputs(problem, u_prev, dt)?;
    check_theta(theta)?;
    let mut trace = StepTrace::new(0);
    let a = &problem.a_matrix;
    let b = TridiagonalMatrix::from_sparse(&a.shifted(1.0, -theta * dt))?;
    let au = a.mul_vec(u_prev);
    let x = lcp_stage(&b, axpy(u_prev, (1.0 - theta) * dt, &au), &problem.u0, &mut trace)?;
    trace.kappa.push(1);
    Ok((x, trace))
}

/// DIRK step with each stage solved as an exact LCP (1D only).
pub fn step_dirk_lcp(problem: &DiscreteProblem, u_prev: &[f64], dt: f64, theta: f64) -> Result<(Vec<f64>, StepTrace)> {
    check_inputs(problem, u_prev, dt)?;
    check_theta(theta)?;
    let mut trace = StepTrace::new(0);
    let a = &problem.a_matrix;
    let b = TridiagonalMatrix::from_sparse(&a.shifted(1.0, -theta * dt))?;
    let au = a.mul_vec(u_prev);
    let y = lcp_stage(&b, axpy(u_prev, (1.0 - theta) * dt, &au), &problem.u0, &mut trace)?;
    let ay = a.mul_vec(&y);
    let rhs2: Vec<f64> = (0..u_prev.len())
        .map(|l| u_prev[l] + 0.5 * dt * au[l] + (0.5 - theta) * dt * ay[l])
        .collect();
    let z = lcp_stage(&b, rhs2, &problem.u0, &mut trace)?;
    trace.kappa.extend([1, 1]);
    Ok((z, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{SparseMatrix, TripletBuilder};
    use crate::stepper::{stability_function, Method};
    use num_complex::Complex64;

    fn scalar(a: f64, u0: f64) -> DiscreteProblem {
        let mut t = TripletBuilder::new(1, 1);
        t.push(0, 0, a);
        DiscreteProblem::from_parts(t.build(), vec![u0]).unwrap()
    }

    fn zero_problem(u0: Vec<f64>) -> DiscreteProblem {
        let n = u0.len();
        DiscreteProblem::from_parts(TripletBuilder::new(n, n).build(), u0).unwrap()
    }

    #[test]
    fn theta_p_trivial_identity_system() {
        let u0 = vec![3.0, 1.0, 0.0, 0.0];
        let pb = zero_problem(u0.clone());
        let (y, tr) = step_theta_p(&pb, &u0, 0.1, 0.5, &SolverConfig::default()).unwrap();
        assert_eq!(y, u0);
        assert_eq!(tr.kappa, vec![1]);
    }

    #[test]
    fn backward_euler_scalar() {
        let pb = scalar(-1.0, 0.0);
        let (y, _) = step_theta_p(&pb, &[1.0], 1.0, 1.0, &SolverConfig::default()).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dirk_and_lobatto_trivial() {
        let u0 = vec![2.0, 0.5];
        let pb = zero_problem(u0.clone());
        let cfg = SolverConfig::default();
        assert_eq!(step_dirk_p(&pb, &u0, 0.2, 1.0 / 3.0, &cfg).unwrap().0, u0);
        let (z, _) = step_lobatto_p(&pb, &[3.0, 1.0], 0.2, &cfg).unwrap();
        assert!((z[0] - 3.0).abs() < 1e-14 && (z[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_maps_equal_stability_functions() {
        let cfg = SolverConfig::default();
        for &(a, dt) in &[(-1.0, 1.0), (-37.0, 0.1), (0.3, 0.5), (-1e4, 0.02)] {
            let pb = scalar(a, -1e12);
            let z = Complex64::new(a * dt, 0.0);
            for m in [Method::BE, Method::CN, Method::DIRK_A, Method::DIRK_B, Method::LOBATTO] {
                let (u, _) = match m {
                    Method::ThetaP(t) => step_theta_p(&pb, &[1.0], dt, t, &cfg),
                    Method::DirkP(t) => step_dirk_p(&pb, &[1.0], dt, t, &cfg),
                    Method::LobattoP => step_lobatto_p(&pb, &[1.0], dt, &cfg),
                }
                .unwrap();
                let r = stability_function(m, z).unwrap().re;
                assert!((u[0] - r).abs() <= 1e-12 * r.abs().max(1.0), "{m:?} z={z}: {} vs {r}", u[0]);
            }
        }
    }

    #[test]
    fn l_stable_dirk_damps_stiff_scalar() {
        let pb = scalar(-1e9, -1e12);
        let (u, _) = step_dirk_p(&pb, &[1.0], 1.0, crate::stepper::THETA_DIRK_A, &SolverConfig::default()).unwrap();
        assert!(u[0].abs() < 1e-8);
        let (u, _) = step_lobatto_p(&pb, &[1.0], 1.0, &SolverConfig::default()).unwrap();
        assert!(u[0].abs() < 1e-8);
    }

    #[test]
    fn penalty_enforces_obstacle() {
        // Strong decay pulls the state below the obstacle; the penalty holds it there.
        let pb = scalar(-10.0, 0.8);
        let cfg = SolverConfig::default();
        let (y, tr) = step_theta_p(&pb, &[1.0], 1.0, 1.0, &cfg).unwrap();
        assert!((y[0] - 0.8).abs() < 1e-6);
        assert!(tr.kappa[0] >= 2);
        let (y, _) = step_theta_lcp(&pb, &[1.0], 1.0, 1.0).unwrap();
        assert_eq!(y[0], 0.8);
    }

    #[test]
    fn penalty_cap_is_an_error() {
        let pb = scalar(-10.0, 0.8);
        let mut cfg = SolverConfig::default();
        cfg.penalty.max_penalty_iters = 1;
        assert!(matches!(
            step_theta_p(&pb, &[1.0], 1.0, 1.0, &cfg),
            Err(PdcpError::PenaltyNotConverged { .. })
        ));
    }

    #[test]
    fn size_mismatch() {
        let pb = zero_problem(vec![0.0; 3]);
        assert!(step_theta_p(&pb, &[0.0; 2], 0.1, 1.0, &SolverConfig::default()).is_err());
        let _ = SparseMatrix::identity(1);
    }
}
