//! Penalty time stepping for the semidiscrete complementarity problem.
//!
//! Three Runge–Kutta families are adapted to `U' >= A U, U >= U0` by an
//! active-set penalty iteration inside every implicit stage:
//!
//! * θ-P: the θ-method (BE-P for θ = 1, CN-P for θ = 1/2),
//! * DIRK-P: the two-implicit-stage DIRK with tableau parameter θ,
//! * Lobatto-P: two-stage Lobatto IIIC with both stages coupled.

mod penalty;
mod solve;
mod stability;
mod step;
mod system;
mod temporal;

pub use penalty::{penalty_diag, penalty_displacement};
pub use solve::{solve_pdcp, solve_pdcp_with, ConstraintMode};
pub use stability::stability_function;
pub use step::{step_dirk_lcp, step_dirk_p, step_lobatto_p, step_theta_lcp, step_theta_p};
pub use system::{LinearConfig, LinearRoute};
pub use temporal::{make_temporal_grid, GridKind, TemporalGrid};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::PdcpError;

/// θ of the L-stable DIRK member, `1 - √2/2`.
pub const THETA_DIRK_A: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
/// θ commonly used with the MCS scheme.
pub const THETA_DIRK_B: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    ThetaP(f64),
    DirkP(f64),
    LobattoP,
}

impl Method {
    pub const BE: Method = Method::ThetaP(1.0);
    pub const CN: Method = Method::ThetaP(0.5);
    pub const DIRK_A: Method = Method::DirkP(THETA_DIRK_A);
    pub const DIRK_B: Method = Method::DirkP(THETA_DIRK_B);
    pub const LOBATTO: Method = Method::LobattoP;

    pub fn theta(&self) -> Option<f64> {
        match *self {
            Method::ThetaP(t) | Method::DirkP(t) => Some(t),
            Method::LobattoP => None,
        }
    }

    /// Short key used in configs and CSV files (`be`, `cn`, `dirka`, `dirkb`,
    /// `lobatto`, or `theta:<θ>` / `dirk:<θ>` for other parameters).
    pub fn key(&self) -> String {
        match *self {
            m if m == Method::BE => "be".into(),
            m if m == Method::CN => "cn".into(),
            m if m == Method::DIRK_A => "dirka".into(),
            m if m == Method::DIRK_B => "dirkb".into(),
            Method::LobattoP => "lobatto".into(),
            Method::ThetaP(t) => format!("theta:{t}"),
            Method::DirkP(t) => format!("dirk:{t}"),
        }
    }

    /// Display name such as `DIRKa-P`.
    pub fn label(&self) -> String {
        match *self {
            m if m == Method::BE => "BE-P".into(),
            m if m == Method::CN => "CN-P".into(),
            m if m == Method::DIRK_A => "DIRKa-P".into(),
            m if m == Method::DIRK_B => "DIRKb-P".into(),
            Method::LobattoP => "Lobatto-P".into(),
            Method::ThetaP(t) => format!("theta({t})-P"),
            Method::DirkP(t) => format!("DIRK({t})-P"),
        }
    }

    pub fn validate(&self) -> Result<(), PdcpError> {
        match self.theta() {
            Some(t) if !(t > 0.0 && t.is_finite()) => {
                Err(PdcpError::InvalidParameter(format!("theta must be > 0, got {t}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for Method {
    type Err = PdcpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let parse_theta = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| PdcpError::Config(format!("bad theta in method '{s}'")))
        };
        let m = match s.as_str() {
            "be" | "be-p" => Method::BE,
            "cn" | "cn-p" => Method::CN,
            "dirka" | "dirka-p" => Method::DIRK_A,
            "dirkb" | "dirkb-p" => Method::DIRK_B,
            "lobatto" | "lobatto-p" => Method::LobattoP,
            other => {
                if let Some(v) = other.strip_prefix("theta:") {
                    Method::ThetaP(parse_theta(v)?)
                } else if let Some(v) = other.strip_prefix("dirk:") {
                    Method::DirkP(parse_theta(v)?)
                } else {
                    return Err(PdcpError::Config(format!("unknown method '{other}'")));
                }
            }
        };
        m.validate()?;
        Ok(m)
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which method to run, with how many leading BE-P damping steps, on which
/// temporal grid and with how many steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperSpec {
    pub method: Method,
    pub damping_steps: usize,
    pub grid_kind: GridKind,
    pub n_steps: usize,
}

impl StepperSpec {
    pub fn new(method: Method, damping_steps: usize, grid_kind: GridKind, n_steps: usize) -> Self {
        Self { method, damping_steps, grid_kind, n_steps }
    }

    pub fn validate(&self) -> Result<(), PdcpError> {
        self.method.validate()?;
        if self.n_steps < 1 {
            return Err(PdcpError::InvalidParameter("N must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyConfig {
    pub large: f64,
    pub tol: f64,
    pub max_penalty_iters: usize,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self { large: 1e7, tol: 1e-7, max_penalty_iters: 100 }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<(), PdcpError> {
        if !(self.large > 1.0) || !(self.tol > 0.0) || self.max_penalty_iters == 0 {
            return Err(PdcpError::InvalidParameter(
                "penalty config needs large > 1, tol > 0, max_penalty_iters >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Penalty and linear-solver settings for a solve.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub penalty: PenaltyConfig,
    pub linear: LinearConfig,
}

/// Diagnostics of one time step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepTrace {
    /// 1-based time step index.
    pub step: usize,
    /// Penalty iteration count per implicit stage (κ, or κ₁ and κ₂).
    pub kappa: Vec<usize>,
    pub linear_solves: usize,
    pub linear_iterations: usize,
    /// Krylov solves that stopped short of the tolerance but were accepted.
    pub linear_unconverged: usize,
    pub max_linear_residual: f64,
    /// `max |min(x - g, M x - b)|` when the step was solved as an exact LCP.
    pub lcp_residual: Option<f64>,
}

impl StepTrace {
    pub(crate) fn new(step: usize) -> Self {
        Self { step, ..Default::default() }
    }
}

/// Step traces as CSV: `step,kappa1,kappa2,linear_solves,linear_iterations,linear_unconverged`.
pub fn traces_to_csv(traces: &[StepTrace]) -> String {
    let mut s = String::from("step,kappa1,kappa2,linear_solves,linear_iterations,linear_unconverged\n");
    for t in traces {
        let k1 = t.kappa.first().copied().unwrap_or(0);
        let k2 = t.kappa.get(1).map(|k| k.to_string()).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t.step, k1, k2, t.linear_solves, t.linear_iterations, t.linear_unconverged
        ));
    }
    s
}
