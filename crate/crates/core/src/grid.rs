//! Smooth nonuniform spatial mesh and cell-averaged payoff vectors.
//!
//! The mesh is uniform on `[0, 2K]` and continues with an exponential
//! stretching map `s(ξ) = 2K + h (e^{γ(ξ-ξ*)} - 1) / γ` on the remaining
//! nodes. At the junction `ξ*` the map has slope `h`, so the grid map is C¹.

use crate::error::{PdcpError, Result};
use crate::market::{payoff_put_1d, payoff_put_on_average};

/// A strictly increasing 1D mesh on `[0, s_max]` with finite-volume cell edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    points: Vec<f64>,
    cell_edges: Vec<f64>,
    uniform_count: usize,
}

/// Number of nodes placed uniformly on `[0, 2K]`: `ceil(0.8 m)`, leaving at
/// least one stretched node so the last node can reach `s_max`.
pub fn uniform_node_count(m: usize) -> usize {
    ((4 * m).div_ceil(5)).min(m - 1)
}

impl SpatialGrid {
    /// Builds a grid from explicit nodes. Nodes must start at 0 and increase strictly.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 3 {
            return Err(PdcpError::InvalidParameter("grid needs at least 3 points".into()));
        }
        if points[0] != 0.0 || points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(PdcpError::InvalidParameter(
                "grid points must start at 0 and increase strictly".into(),
            ));
        }
        let cell_edges = midpoint_edges(&points);
        Ok(Self { points, cell_edges, uniform_count: 0 })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn cell_edges(&self) -> &[f64] {
        &self.cell_edges
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn s_max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Length of the leading uniform block (0 for grids built from explicit points).
    pub fn uniform_count(&self) -> usize {
        self.uniform_count
    }

    /// Spacing to the left and right of interior node `i`.
    pub fn spacings(&self, i: usize) -> (f64, f64) {
        (self.points[i] - self.points[i - 1], self.points[i + 1] - self.points[i])
    }
}

fn midpoint_edges(points: &[f64]) -> Vec<f64> {
    let m = points.len();
    let mut edges = Vec::with_capacity(m + 1);
    edges.push(0.0);
    edges.extend(points.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    edges.push(points[m - 1]);
    edges
}

/// Builds the `m`-point mesh on `[0, s_max]` with a fine uniform block on `[0, 2K]`.
pub fn build_grid(m: usize, strike: f64, s_max: f64) -> Result<SpatialGrid> {
    if m < 3 {
        return Err(PdcpError::InvalidParameter(format!("m must be >= 3, got {m}")));
    }
    if !(strike > 0.0) {
        return Err(PdcpError::InvalidParameter("K must be > 0".into()));
    }
    if !(s_max > 2.0 * strike) || !s_max.is_finite() {
        return Err(PdcpError::InvalidParameter(format!(
            "s_max ({s_max}) must exceed 2K ({})",
            2.0 * strike
        )));
    }

    let m_u = uniform_node_count(m);
    let two_k = 2.0 * strike;
    let intervals = (m_u - 1) as f64;
    let h = two_k / intervals;
    let stretched = m - m_u;
    let gamma = solve_stretching(h, stretched, s_max - two_k)?;

    let mut points = Vec::with_capacity(m);
    points.extend((0..m_u).map(|i| two_k * i as f64 / intervals));
    points[m_u - 1] = two_k;
    for k in 1..=stretched {
        points.push(two_k + h * (gamma * k as f64).exp_m1() / gamma);
    }
    points[m - 1] = s_max;

    if points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(PdcpError::GridConstruction("stretched nodes are not increasing".into()));
    }
    let cell_edges = midpoint_edges(&points);
    Ok(SpatialGrid { points, cell_edges, uniform_count: m_u })
}

/// Finds γ > 0 with `h (e^{γ n} - 1) / γ = length` by bisection.
fn solve_stretching(h: f64, n: usize, length: f64) -> Result<f64> {
    let nf = n as f64;
    let f = |g: f64| h * (g * nf).exp_m1() / g - length;
    // f(0+) = h n - length; the map is strictly increasing in γ.
    if h * nf >= length {
        return Err(PdcpError::GridConstruction(format!(
            "uniform spacing {h} over {n} stretched nodes already covers the outer interval {length}"
        )));
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(PdcpError::GridConstruction("no stretching parameter found".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = if mid == 0.0 { h * nf - length } else { f(mid) };
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g = 0.5 * (lo + hi);
    if !(g > 0.0) || !g.is_finite() {
        return Err(PdcpError::GridConstruction("stretching root solve failed".into()));
    }
    Ok(g)
}

/// Exact mean of `max(K - s, 0)` over `[a, b]`.
fn hinge_average(a: f64, b: f64, strike: f64) -> f64 {
    if strike <= a {
        0.0
    } else if strike >= b {
        strike - 0.5 * (a + b)
    } else {
        (strike - a).powi(2) / (2.0 * (b - a))
    }
}

/// Payoff sampled at the nodes, replaced by the exact cell mean in the cell
/// whose interior contains the kink `s = K`.
pub fn cell_average_payoff_1d(grid: &SpatialGrid, strike: f64) -> Vec<f64> {
    let edges = grid.cell_edges();
    grid.points()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let (a, b) = (edges[i], edges[i + 1]);
            if a < strike && strike < b {
                hinge_average(a, b, strike)
            } else {
                payoff_put_1d(s, strike)
            }
        })
        .collect()
}

/// Exact mean of `max(0, K - (s1 + s2)/2)` over the rectangle `[a1,b1] x [a2,b2]`.
///
/// The rectangle is clipped to the half-plane `s1 + s2 <= 2K`; the payoff is
/// linear there, so its integral is area times the value at the centroid.
pub fn rectangle_average_put_on_average(a1: f64, b1: f64, a2: f64, b2: f64, strike: f64) -> f64 {
    let corners = [(a1, a2), (b1, a2), (b1, b2), (a1, b2)];
    let line = 2.0 * strike;
    let inside = |p: (f64, f64)| p.0 + p.1 <= line;
    let mut poly: Vec<(f64, f64)> = Vec::with_capacity(5);
    for k in 0..4 {
        let p = corners[k];
        let q = corners[(k + 1) % 4];
        let (pin, qin) = (inside(p), inside(q));
        if pin {
            poly.push(p);
        }
        if pin != qin {
            let dp = p.0 + p.1 - line;
            let dq = q.0 + q.1 - line;
            let t = dp / (dp - dq);
            poly.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    let cell_area = (b1 - a1) * (b2 - a2);
    if poly.len() < 3 {
        return 0.0;
    }
    // Shoelace area and centroid, relative to the first vertex for accuracy.
    let (ox, oy) = poly[0];
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for k in 0..poly.len() {
        let (x0, y0) = (poly[k].0 - ox, poly[k].1 - oy);
        let (x1, y1) = (poly[(k + 1) % poly.len()].0 - ox, poly[(k + 1) % poly.len()].1 - oy);
        let cross = x0 * y1 - x1 * y0;
        area2 += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    if area2.abs() == 0.0 {
        return 0.0;
    }
    let area = 0.5 * area2;
    let gx = ox + cx / (3.0 * area2);
    let gy = oy + cy / (3.0 * area2);
    area.abs() * payoff_put_on_average(gx, gy, strike) / cell_area
}

/// Row-major (`l = i * m + j`, `i` the s1 index) payoff vector with exact
/// cell averages on cells whose interior meets the line `s1 + s2 = 2K`.
pub fn cell_average_payoff_2d(grid1: &SpatialGrid, grid2: &SpatialGrid, strike: f64) -> Vec<f64> {
    let (e1, e2) = (grid1.cell_edges(), grid2.cell_edges());
    let line = 2.0 * strike;
    let mut out = Vec::with_capacity(grid1.len() * grid2.len());
    for (i, &s1) in grid1.points().iter().enumerate() {
        for (j, &s2) in grid2.points().iter().enumerate() {
            let (a1, b1, a2, b2) = (e1[i], e1[i + 1], e2[j], e2[j + 1]);
            if a1 + a2 < line && line < b1 + b2 {
                out.push(rectangle_average_put_on_average(a1, b1, a2, b2, strike));
            } else {
                out.push(payoff_put_on_average(s1, s2, strike));
            }
        }
    }
    out
}
