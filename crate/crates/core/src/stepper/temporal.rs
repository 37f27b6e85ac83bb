use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PdcpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    /// `t_n = (n/N)² T`: smallest step first, steps growing linearly in n.
    Quadratic,
}

impl fmt::Display for GridKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridKind::Uniform => "uniform",
            GridKind::Quadratic => "quadratic",
        })
    }
}

impl FromStr for GridKind {
    type Err = PdcpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(GridKind::Uniform),
            "quadratic" | "nonuniform" => Ok(GridKind::Quadratic),
            other => Err(PdcpError::Config(format!("unknown temporal grid '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGrid {
    pub times: Vec<f64>,
    pub kind: GridKind,
}

impl TemporalGrid {
    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    /// `Δt_n = t_n - t_{n-1}` for `n = 1..=N`.
    pub fn step(&self, n: usize) -> f64 {
        self.times[n] - self.times[n - 1]
    }

    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }
}

pub fn make_temporal_grid(n_steps: usize, maturity: f64, kind: GridKind) -> Result<TemporalGrid> {
    if n_steps < 1 {
        return Err(PdcpError::InvalidParameter("N must be >= 1".into()));
    }
    if !(maturity > 0.0) {
        return Err(PdcpError::InvalidParameter("T must be > 0".into()));
    }
    let nf = n_steps as f64;
    let mut times: Vec<f64> = (0..=n_steps)
        .map(|n| {
            let x = n as f64 / nf;
            match kind {
                GridKind::Uniform => x * maturity,
                GridKind::Quadratic => x * x * maturity,
            }
        })
        .collect();
    times[n_steps] = maturity;
    Ok(TemporalGrid { times, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_two_steps() {
        let g = make_temporal_grid(2, 1.0, GridKind::Quadratic).unwrap();
        assert_eq!(g.times, vec![0.0, 0.25, 1.0]);
    }

    #[test]
    fn uniform_four_steps() {
        let g = make_temporal_grid(4, 0.5, GridKind::Uniform).unwrap();
        assert_eq!(g.times, vec![0.0, 0.125, 0.25, 0.375, 0.5]);
    }

    #[test]
    fn quadratic_steps_grow_linearly() {
        let g = make_temporal_grid(10, 0.5, GridKind::Quadratic).unwrap();
        assert!((g.step(1) - 0.005).abs() < 1e-15);
        assert!((g.step(10) - 0.095).abs() < 1e-15);
        let steps: Vec<f64> = g.steps().collect();
        for w in steps.windows(2) {
            assert!((w[1] - w[0] - 0.01).abs() < 1e-14);
        }
        assert!(steps.iter().all(|d| *d > 0.0));
    }

    #[test]
    fn zero_steps_rejected() {
        assert!(make_temporal_grid(0, 1.0, GridKind::Uniform).is_err());
    }
}
