//! Temporal convergence studies: reference solutions, max-norm errors on a
//! region of interest around the strike, N-sweeps and fitted orders.

mod reference;
mod sweep;

pub use reference::{
    build_reference, build_reference_1d, build_reference_2d, ReferenceCache, ReferenceProtocol, ReferenceSolution,
};
pub use sweep::{
    convergence_sweep, estimate_order, ErrorReport, ErrorRow, MethodRun, OrderEstimate, OrderFit, RunSummary,
};

use serde::{Deserialize, Serialize};

use crate::error::{PdcpError, Result};
use crate::greeks::{greeks_1d, greeks_2d, surfaces_1d_csv, surfaces_2d_csv};
use crate::grid::{build_grid, SpatialGrid};
use crate::market::{MarketParams1D, MarketParams2D};
use crate::operator::{assemble_1d, assemble_2d, DiscreteProblem};

/// Market data of either supported contract. Serialized untagged: the
/// field names tell the two apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Market {
    TwoAsset(MarketParams2D),
    OneAsset(MarketParams1D),
}

impl Market {
    pub fn dims(&self) -> usize {
        match self {
            Market::OneAsset(_) => 1,
            Market::TwoAsset(_) => 2,
        }
    }

    pub fn strike(&self) -> f64 {
        match self {
            Market::OneAsset(p) => p.strike,
            Market::TwoAsset(p) => p.strike,
        }
    }

    pub fn s_max(&self) -> f64 {
        match self {
            Market::OneAsset(p) => p.s_max,
            Market::TwoAsset(p) => p.s_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Market::OneAsset(p) => p.validate(),
            Market::TwoAsset(p) => p.validate(),
        }
    }

    /// Canonical text used in cache keys; `{:?}` prints f64 round-trip exact.
    pub(crate) fn fingerprint(&self) -> String {
        match self {
            Market::OneAsset(p) => format!(
                "dim=1 sigma={:?} r={:?} T={:?} K={:?} smax={:?}",
                p.sigma, p.r, p.maturity, p.strike, p.s_max
            ),
            Market::TwoAsset(p) => format!(
                "dim=2 sigma1={:?} sigma2={:?} rho={:?} r={:?} T={:?} K={:?} smax={:?}",
                p.sigma1, p.sigma2, p.rho, p.r, p.maturity, p.strike, p.s_max
            ),
        }
    }
}

/// A market on an `m`-point grid per direction together with its
/// semidiscrete problem.
#[derive(Debug, Clone)]
pub struct Setup {
    pub market: Market,
    pub m: usize,
    pub grid: SpatialGrid,
    pub problem: DiscreteProblem,
}

impl Setup {
    pub fn new(market: Market, m: usize) -> Result<Self> {
        market.validate()?;
        let grid = build_grid(m, market.strike(), market.s_max())?;
        let problem = match &market {
            Market::OneAsset(p) => assemble_1d(p, &grid)?,
            Market::TwoAsset(p) => assemble_2d(p, &grid, &grid)?,
        };
        Ok(Self { market, m, grid, problem })
    }

    pub fn dims(&self) -> usize {
        self.market.dims()
    }

    /// One grid per direction.
    pub fn grids(&self) -> Vec<&SpatialGrid> {
        vec![&self.grid; self.dims()]
    }

    /// Names of the reported quantities, value first.
    pub fn quantity_names(&self) -> &'static [&'static str] {
        quantity_names(self.dims())
    }

    /// Value and Greek surfaces in the order of [`Setup::quantity_names`].
    pub fn quantities(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        match self.dims() {
            1 => {
                let g = greeks_1d(&self.grid, u)?;
                Ok(vec![u.to_vec(), g.delta, g.gamma])
            }
            _ => {
                let g = greeks_2d(&self.grid, &self.grid, u)?;
                Ok(vec![u.to_vec(), g.delta1, g.delta2, g.gamma11, g.gamma12, g.gamma22])
            }
        }
    }

    /// Value and Greek surfaces as CSV, one row per node.
    pub fn surfaces_csv(&self, u: &[f64]) -> Result<String> {
        match self.dims() {
            1 => Ok(surfaces_1d_csv(&self.grid, u, &greeks_1d(&self.grid, u)?)),
            _ => Ok(surfaces_2d_csv(&self.grid, &self.grid, u, &greeks_2d(&self.grid, &self.grid, u)?)),
        }
    }

    /// `u` interpolated at `s = K` (or `(K, K)`) by quadratics through the
    /// three nearest nodes per direction.
    pub fn value_at_strike(&self, u: &[f64]) -> Result<f64> {
        let k = self.market.strike();
        interpolate(&self.grids(), u, &vec![k; self.dims()])
    }
}

pub fn quantity_names(dims: usize) -> &'static [&'static str] {
    if dims == 1 {
        &["value", "delta", "gamma"]
    } else {
        &["value", "delta1", "delta2", "gamma11", "gamma12", "gamma22"]
    }
}

fn quadratic_weights(grid: &SpatialGrid, x: f64) -> ([usize; 3], [f64; 3]) {
    let p = grid.points();
    let m = p.len();
    let nearest = p
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let c = nearest.clamp(1, m - 2);
    let nodes = [c - 1, c, c + 1];
    let xs = [p[c - 1], p[c], p[c + 1]];
    let mut w = [0.0; 3];
    for k in 0..3 {
        let mut l = 1.0;
        for q in 0..3 {
            if q != k {
                l *= (x - xs[q]) / (xs[k] - xs[q]);
            }
        }
        w[k] = l;
    }
    (nodes, w)
}

/// Tensor-product quadratic interpolation of a row-major nodal vector.
pub fn interpolate(grids: &[&SpatialGrid], u: &[f64], at: &[f64]) -> Result<f64> {
    if grids.len() != at.len() || grids.is_empty() || grids.len() > 2 {
        return Err(PdcpError::DimensionMismatch("point and grid dimensions differ".into()));
    }
    let size: usize = grids.iter().map(|g| g.len()).product();
    if u.len() != size {
        return Err(PdcpError::DimensionMismatch(format!("u has {} entries, grid {size}", u.len())));
    }
    for (g, &x) in grids.iter().zip(at) {
        if !(0.0..=g.s_max()).contains(&x) {
            return Err(PdcpError::InvalidParameter(format!("{x} outside the grid")));
        }
    }
    let (n1, w1) = quadratic_weights(grids[0], at[0]);
    if grids.len() == 1 {
        return Ok((0..3).map(|k| w1[k] * u[n1[k]]).sum());
    }
    let (n2, w2) = quadratic_weights(grids[1], at[1]);
    let m2 = grids[1].len();
    let mut v = 0.0;
    for k in 0..3 {
        for q in 0..3 {
            v += w1[k] * w2[q] * u[n1[k] * m2 + n2[q]];
        }
    }
    Ok(v)
}

/// Open interval `(lo, hi)` in 1D, open square `(lo, hi)²` in 2D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionOfInterest {
    pub lo: f64,
    pub hi: f64,
}

impl RegionOfInterest {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// `(0.8K, 1.2K)` in 1D and `(0.9K, 1.1K)²` in 2D.
    pub fn default_for(market: &Market) -> Self {
        let k = market.strike();
        match market.dims() {
            1 => Self::new(k * 8.0 / 10.0, k * 12.0 / 10.0),
            _ => Self::new(k * 9.0 / 10.0, k * 11.0 / 10.0),
        }
    }

    pub fn validate(&self, s_max: f64) -> Result<()> {
        if !(self.lo >= 0.0 && self.lo < self.hi && self.hi <= s_max) {
            return Err(PdcpError::InvalidParameter(format!(
                "ROI ({}, {}) must satisfy 0 <= lo < hi <= s_max = {s_max}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Row-major indices of the nodes strictly inside the region.
    pub fn node_indices(&self, grids: &[&SpatialGrid]) -> Result<Vec<usize>> {
        let inside: Vec<Vec<usize>> = grids
            .iter()
            .map(|g| (0..g.len()).filter(|&i| self.contains(g.points()[i])).collect())
            .collect();
        let idx: Vec<usize> = match grids.len() {
            1 => inside[0].clone(),
            2 => {
                let m2 = grids[1].len();
                inside[0].iter().flat_map(|&i| inside[1].iter().map(move |&j| i * m2 + j)).collect()
            }
            d => return Err(PdcpError::DimensionMismatch(format!("{d} dimensions"))),
        };
        if idx.is_empty() {
            return Err(PdcpError::EmptyRoi);
        }
        Ok(idx)
    }
}

/// `max |u_ref - u_hat|` over the nodes strictly inside the region.
pub fn roi_max_error(u_ref: &[f64], u_hat: &[f64], grids: &[&SpatialGrid], roi: &RegionOfInterest) -> Result<f64> {
    let size: usize = grids.iter().map(|g| g.len()).product();
    if u_ref.len() != size || u_hat.len() != size {
        return Err(PdcpError::DimensionMismatch(format!(
            "vectors of length {} and {} on a grid of {size} nodes",
            u_ref.len(),
            u_hat.len()
        )));
    }
    let idx = roi.node_indices(grids)?;
    Ok(idx.iter().map(|&l| (u_ref[l] - u_hat[l]).abs()).fold(0.0, f64::max))
}
