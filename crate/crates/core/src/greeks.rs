//! Delta and Gamma surfaces from a solution vector, using the operator's
//! finite-difference stencils at interior nodes and one-sided quadratic
//! stencils at the two ends of each grid line.

use crate::error::{PdcpError, Result};
use crate::grid::SpatialGrid;
use crate::operator::{fd_weights, lagrange_weights};

#[derive(Debug, Clone, PartialEq)]
pub struct GreekSurfaces1D {
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl GreekSurfaces1D {
    /// Endpoint entries come from one-sided stencils.
    pub fn is_extrapolated(&self, i: usize) -> bool {
        i == 0 || i + 1 == self.delta.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreekSurfaces2D {
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
    pub gamma11: Vec<f64>,
    pub gamma12: Vec<f64>,
    pub gamma22: Vec<f64>,
}

/// Node indices and derivative weights used at node `i` of `grid`.
struct AxisStencil {
    nodes: [usize; 3],
    first: [f64; 3],
    second: [f64; 3],
}

fn axis_stencil(grid: &SpatialGrid, i: usize) -> AxisStencil {
    let p = grid.points();
    let m = p.len();
    if i > 0 && i + 1 < m {
        let (hl, hr) = grid.spacings(i);
        let w = fd_weights(hl, hr).expect("grid spacings are positive");
        AxisStencil { nodes: [i - 1, i, i + 1], first: w.first, second: w.second }
    } else {
        let nodes = if i == 0 { [0, 1, 2] } else { [m - 3, m - 2, m - 1] };
        let (first, second) = lagrange_weights([p[nodes[0]], p[nodes[1]], p[nodes[2]]], p[i]);
        AxisStencil { nodes, first, second }
    }
}

pub fn greeks_1d(grid: &SpatialGrid, u: &[f64]) -> Result<GreekSurfaces1D> {
    let m = grid.len();
    if u.len() != m {
        return Err(PdcpError::DimensionMismatch(format!("u has {} entries, grid {m}", u.len())));
    }
    let mut delta = Vec::with_capacity(m);
    let mut gamma = Vec::with_capacity(m);
    for i in 0..m {
        let st = axis_stencil(grid, i);
        delta.push((0..3).map(|k| st.first[k] * u[st.nodes[k]]).sum());
        gamma.push((0..3).map(|k| st.second[k] * u[st.nodes[k]]).sum());
    }
    Ok(GreekSurfaces1D { delta, gamma })
}

/// Row-major layout `l = i * m2 + j`; the mixed derivative uses the tensor
/// product of first-derivative stencils.
pub fn greeks_2d(grid1: &SpatialGrid, grid2: &SpatialGrid, u: &[f64]) -> Result<GreekSurfaces2D> {
    let (m1, m2) = (grid1.len(), grid2.len());
    if u.len() != m1 * m2 {
        return Err(PdcpError::DimensionMismatch(format!("u has {} entries, grid {m1}x{m2}", u.len())));
    }
    let s1: Vec<AxisStencil> = (0..m1).map(|i| axis_stencil(grid1, i)).collect();
    let s2: Vec<AxisStencil> = (0..m2).map(|j| axis_stencil(grid2, j)).collect();
    let n = m1 * m2;
    let mut out = GreekSurfaces2D {
        delta1: Vec::with_capacity(n),
        delta2: Vec::with_capacity(n),
        gamma11: Vec::with_capacity(n),
        gamma12: Vec::with_capacity(n),
        gamma22: Vec::with_capacity(n),
    };
    let at = |i: usize, j: usize| u[i * m2 + j];
    for (i, a) in s1.iter().enumerate() {
        for (j, b) in s2.iter().enumerate() {
            let (mut d1, mut g11, mut d2, mut g22, mut g12) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for k in 0..3 {
                d1 += a.first[k] * at(a.nodes[k], j);
                g11 += a.second[k] * at(a.nodes[k], j);
                d2 += b.first[k] * at(i, b.nodes[k]);
                g22 += b.second[k] * at(i, b.nodes[k]);
                for q in 0..3 {
                    g12 += a.first[k] * b.first[q] * at(a.nodes[k], b.nodes[q]);
                }
            }
            out.delta1.push(d1);
            out.delta2.push(d2);
            out.gamma11.push(g11);
            out.gamma12.push(g12);
            out.gamma22.push(g22);
        }
    }
    Ok(out)
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// CSV with columns `s,value,delta,gamma`.
pub fn surfaces_1d_csv(grid: &SpatialGrid, u: &[f64], g: &GreekSurfaces1D) -> String {
    let mut s = String::from("s,value,delta,gamma\n");
    for (i, x) in grid.points().iter().enumerate() {
        s.push_str(&format!("{},{},{},{}\n", fmt(*x), fmt(u[i]), fmt(g.delta[i]), fmt(g.gamma[i])));
    }
    s
}

/// CSV with columns `s1,s2,value,delta1,delta2,gamma11,gamma12,gamma22`.
pub fn surfaces_2d_csv(grid1: &SpatialGrid, grid2: &SpatialGrid, u: &[f64], g: &GreekSurfaces2D) -> String {
    let mut s = String::from("s1,s2,value,delta1,delta2,gamma11,gamma12,gamma22\n");
    let m2 = grid2.len();
    for (i, x) in grid1.points().iter().enumerate() {
        for (j, y) in grid2.points().iter().enumerate() {
            let l = i * m2 + j;
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt(*x),
                fmt(*y),
                fmt(u[l]),
                fmt(g.delta1[l]),
                fmt(g.delta2[l]),
                fmt(g.gamma11[l]),
                fmt(g.gamma12[l]),
                fmt(g.gamma22[l])
            ));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::market::MarketParams1D;
    use crate::operator::assemble_1d;

    #[test]
    fn quadratic_is_exact_everywhere() {
        let g = build_grid(40, 100.0, 500.0).unwrap();
        let u: Vec<f64> = g.points().iter().map(|s| s * s).collect();
        let gr = greeks_1d(&g, &u).unwrap();
        for (i, s) in g.points().iter().enumerate() {
            assert!((gr.delta[i] - 2.0 * s).abs() <= 1e-9 * s.max(1.0));
            assert!((gr.gamma[i] - 2.0).abs() <= 1e-8);
        }
        assert!(gr.is_extrapolated(0) && gr.is_extrapolated(39) && !gr.is_extrapolated(5));
    }

    #[test]
    fn constants_have_zero_greeks() {
        let g = build_grid(15, 100.0, 500.0).unwrap();
        let gr = greeks_1d(&g, &[4.2; 15]).unwrap();
        assert!(gr.delta.iter().chain(&gr.gamma).all(|v| v.abs() < 1e-12));
        let gr = greeks_2d(&g, &g, &vec![4.2; 225]).unwrap();
        for v in [&gr.delta1, &gr.delta2, &gr.gamma11, &gr.gamma12, &gr.gamma22] {
            assert!(v.iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn bilinear_cross_derivative() {
        let g = build_grid(20, 100.0, 500.0).unwrap();
        let p = g.points();
        let u: Vec<f64> = (0..400).map(|l| p[l / 20] * p[l % 20]).collect();
        let gr = greeks_2d(&g, &g, &u).unwrap();
        for l in 0..400 {
            assert!((gr.gamma12[l] - 1.0).abs() < 1e-9);
            assert!(gr.gamma11[l].abs() < 1e-9 && gr.gamma22[l].abs() < 1e-9);
            assert!((gr.delta1[l] - p[l % 20]).abs() < 1e-8 * p[l % 20].max(1.0));
        }
    }

    #[test]
    fn greeks_reassemble_the_operator() {
        let par = MarketParams1D::reference_put();
        let g = build_grid(80, par.strike, par.s_max).unwrap();
        let pb = assemble_1d(&par, &g).unwrap();
        let u: Vec<f64> = g.points().iter().map(|s| (s / 37.0).sin() * 50.0 + s).collect();
        let gr = greeks_1d(&g, &u).unwrap();
        let au = pb.a_matrix.mul_vec(&u);
        for (i, s) in g.points().iter().enumerate().take(79).skip(1) {
            let v = 0.5 * par.sigma * par.sigma * s * s * gr.gamma[i] + par.r * s * gr.delta[i] - par.r * u[i];
            assert!((v - au[i]).abs() <= 1e-10 * au[i].abs().max(1.0));
        }
    }

    #[test]
    fn linearity() {
        let g = build_grid(25, 100.0, 500.0).unwrap();
        let a: Vec<f64> = g.points().iter().map(|s| s.sqrt()).collect();
        let b: Vec<f64> = g.points().iter().map(|s| (s / 50.0).cos()).collect();
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
        let (ga, gb, gc) = (greeks_1d(&g, &a).unwrap(), greeks_1d(&g, &b).unwrap(), greeks_1d(&g, &c).unwrap());
        for i in 0..25 {
            assert!((gc.delta[i] - (2.0 * ga.delta[i] - 3.0 * gb.delta[i])).abs() < 1e-12);
            assert!((gc.gamma[i] - (2.0 * ga.gamma[i] - 3.0 * gb.gamma[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_shapes() {
        let g = build_grid(5, 1.0, 5.0).unwrap();
        let u = vec![1.0; 5];
        let gr = greeks_1d(&g, &u).unwrap();
        let csv = surfaces_1d_csv(&g, &u, &gr);
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("s,value,delta,gamma\n"));
    }
}
