use serde::{Deserialize, Serialize};

use crate::error::{PdcpError, Result};
use crate::operator::DiscreteProblem;

use super::step::{step_dirk_lcp, step_dirk_p, step_lobatto_p, step_theta_lcp, step_theta_p};
use super::{make_temporal_grid, Method, SolverConfig, StepTrace, StepperSpec};

/// How the complementarity condition is enforced in each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintMode {
    Penalty,
    /// Exact per-stage LCP solves by Brennan–Schwartz; 1D θ-method and DIRK only.
    BrennanSchwartz,
}

/// Integrates from `U0` at `t = 0` to `t = T` (the problem's maturity)
/// with the penalty methods. The first `damping_steps` steps are BE-P.
pub fn solve_pdcp(problem: &DiscreteProblem, spec: &StepperSpec, cfg: &SolverConfig) -> Result<(Vec<f64>, Vec<StepTrace>)> {
    solve_pdcp_with(problem, spec, cfg, ConstraintMode::Penalty)
}

pub fn solve_pdcp_with(
    problem: &DiscreteProblem,
    spec: &StepperSpec,
    cfg: &SolverConfig,
    mode: ConstraintMode,
) -> Result<(Vec<f64>, Vec<StepTrace>)> {
    spec.validate()?;
    cfg.penalty.validate()?;
    if mode == ConstraintMode::BrennanSchwartz {
        if problem.dims() > 1 {
            return Err(PdcpError::InvalidParameter("Brennan–Schwartz stepping is 1D only".into()));
        }
        if spec.method == Method::LobattoP {
            return Err(PdcpError::InvalidParameter("no Brennan–Schwartz variant of Lobatto IIIC".into()));
        }
    }
    let grid = make_temporal_grid(spec.n_steps, problem.maturity, spec.grid_kind)?;
    let mut u = problem.u0.clone();
    let mut traces = Vec::with_capacity(spec.n_steps);
    for n in 1..=spec.n_steps {
        let dt = grid.step(n);
        let method = if n <= spec.damping_steps { Method::BE } else { spec.method };
        let result = match (mode, method) {
            (ConstraintMode::Penalty, Method::ThetaP(t)) => step_theta_p(problem, &u, dt, t, cfg),
            (ConstraintMode::Penalty, Method::DirkP(t)) => step_dirk_p(problem, &u, dt, t, cfg),
            (ConstraintMode::Penalty, Method::LobattoP) => step_lobatto_p(problem, &u, dt, cfg),
            (ConstraintMode::BrennanSchwartz, Method::ThetaP(t)) => step_theta_lcp(problem, &u, dt, t),
            (ConstraintMode::BrennanSchwartz, Method::DirkP(t)) => step_dirk_lcp(problem, &u, dt, t),
            (ConstraintMode::BrennanSchwartz, Method::LobattoP) => unreachable!(),
        };
        let (next, mut trace) = result.map_err(|e| PdcpError::Step { step: n, source: Box::new(e) })?;
        trace.step = n;
        u = next;
        traces.push(trace);
    }
    Ok((u, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::market::MarketParams1D;
    use crate::operator::assemble_1d;
    use crate::stepper::GridKind;

    fn put(m: usize) -> DiscreteProblem {
        let p = MarketParams1D::reference_put();
        assemble_1d(&p, &build_grid(m, p.strike, p.s_max).unwrap()).unwrap()
    }

    #[test]
    fn damping_covering_all_steps_is_backward_euler() {
        let pb = put(60);
        let cfg = SolverConfig::default();
        let (a, _) = solve_pdcp(&pb, &StepperSpec::new(Method::CN, 2, GridKind::Quadratic, 2), &cfg).unwrap();
        let (b, _) = solve_pdcp(&pb, &StepperSpec::new(Method::BE, 0, GridKind::Quadratic, 2), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lobatto_has_no_lcp_variant() {
        let pb = put(20);
        let spec = StepperSpec::new(Method::LobattoP, 2, GridKind::Quadratic, 4);
        assert!(solve_pdcp_with(&pb, &spec, &SolverConfig::default(), ConstraintMode::BrennanSchwartz).is_err());
    }

    #[test]
    fn step_errors_carry_the_index() {
        let pb = put(40);
        let mut cfg = SolverConfig::default();
        cfg.penalty.max_penalty_iters = 1;
        let err = solve_pdcp(&pb, &StepperSpec::new(Method::BE, 0, GridKind::Uniform, 5), &cfg).unwrap_err();
        assert!(matches!(err, PdcpError::Step { step: 1, .. }), "{err}");
    }

    #[test]
    fn solution_respects_obstacle() {
        let pb = put(100);
        let spec = StepperSpec::new(Method::DIRK_A, 2, GridKind::Quadratic, 20);
        let (u, traces) = solve_pdcp(&pb, &spec, &SolverConfig::default()).unwrap();
        assert_eq!(traces.len(), 20);
        for (a, g) in u.iter().zip(&pb.u0) {
            assert!(*a >= g - 1e-4 * pb.strike);
        }
        assert!(traces.iter().all(|t| t.kappa.iter().all(|k| *k <= 100)));
    }
}
