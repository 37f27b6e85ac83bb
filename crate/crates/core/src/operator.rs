//! Central finite-difference discretization of the Black–Scholes operator
//! on nonuniform grids.
//!
//! The boundary `s = 0` needs no special stencil: every derivative term of
//! the operator carries a factor `s` or `s²`, so the row reduces to `-r`.
//! Far-field nodes at `s_max` are pinned to zero by leaving their rows empty.

use crate::error::{PdcpError, Result};
use crate::grid::{cell_average_payoff_1d, cell_average_payoff_2d, SpatialGrid};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::market::{MarketParams1D, MarketParams2D};

/// Three-point weights `(left, center, right)` for the first and second derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilWeights {
    pub first: [f64; 3],
    pub second: [f64; 3],
    pub h_left: f64,
    pub h_right: f64,
}

/// Central weights on the stencil `s - h_left, s, s + h_right`; both are
/// exact for quadratics.
pub fn fd_weights(h_left: f64, h_right: f64) -> Result<StencilWeights> {
    if !(h_left > 0.0 && h_right > 0.0) {
        return Err(PdcpError::InvalidParameter(format!(
            "stencil spacings must be positive, got ({h_left}, {h_right})"
        )));
    }
    let (hl, hr) = (h_left, h_right);
    let first = [-hr / (hl * (hl + hr)), (hr - hl) / (hl * hr), hl / (hr * (hl + hr))];
    let second = [2.0 / (hl * (hl + hr)), -2.0 / (hl * hr), 2.0 / (hr * (hl + hr))];
    Ok(StencilWeights { first, second, h_left, h_right })
}

/// First- and second-derivative weights at `at` from the quadratic through
/// three distinct nodes. Used for one-sided boundary stencils.
pub fn lagrange_weights(nodes: [f64; 3], at: f64) -> ([f64; 3], [f64; 3]) {
    let mut first = [0.0; 3];
    let mut second = [0.0; 3];
    for k in 0..3 {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        let denom = (nodes[k] - nodes[a]) * (nodes[k] - nodes[b]);
        first[k] = ((at - nodes[a]) + (at - nodes[b])) / denom;
        second[k] = 2.0 / denom;
    }
    (first, second)
}

/// Semidiscrete system `U' >= A U`, `U >= U0` on a 1D or 2D grid.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub a_matrix: SparseMatrix,
    pub u0: Vec<f64>,
    pub grids: Vec<SpatialGrid>,
    pub dirichlet_mask: Vec<bool>,
    pub rate: f64,
    pub strike: f64,
    pub maturity: f64,
}

impl DiscreteProblem {
    pub fn dims(&self) -> usize {
        self.grids.len()
    }

    /// Nodes per direction (of the first direction when the grids differ).
    pub fn m(&self) -> usize {
        self.grids[0].len()
    }

    pub fn size(&self) -> usize {
        self.u0.len()
    }

    /// Builds a problem from explicit parts; used for scalar and test systems.
    pub fn from_parts(a_matrix: SparseMatrix, u0: Vec<f64>) -> Result<Self> {
        let n = u0.len();
        if a_matrix.nrows() != n || a_matrix.ncols() != n {
            return Err(PdcpError::DimensionMismatch(format!(
                "A is {}x{}, u0 has {n}",
                a_matrix.nrows(),
                a_matrix.ncols()
            )));
        }
        Ok(Self {
            a_matrix,
            u0,
            grids: Vec::new(),
            dirichlet_mask: vec![false; n],
            rate: 0.0,
            strike: 0.0,
            maturity: 1.0,
        })
    }

    pub fn with_maturity(mut self, maturity: f64) -> Self {
        self.maturity = maturity;
        self
    }
}

/// Per-node stencil contributions of `coef2 * d²/ds² + coef1 * d/ds` along one direction.
fn axis_stencil(grid: &SpatialGrid, i: usize, coef2: f64, coef1: f64) -> Result<Option<[f64; 3]>> {
    if i == 0 || i + 1 >= grid.len() {
        return Ok(None);
    }
    let (hl, hr) = grid.spacings(i);
    let w = fd_weights(hl, hr)?;
    Ok(Some([
        coef2 * w.second[0] + coef1 * w.first[0],
        coef2 * w.second[1] + coef1 * w.first[1],
        coef2 * w.second[2] + coef1 * w.first[2],
    ]))
}

pub fn assemble_1d(params: &MarketParams1D, grid: &SpatialGrid) -> Result<DiscreteProblem> {
    params.validate()?;
    let m = grid.len();
    let r = params.r;
    let mut b = TripletBuilder::new(m, m);
    let mut mask = vec![false; m];
    mask[m - 1] = true;
    for (i, &s) in grid.points().iter().enumerate().take(m - 1) {
        b.push(i, i, -r);
        if s > 0.0 {
            if let Some(w) = axis_stencil(grid, i, 0.5 * params.sigma * params.sigma * s * s, r * s)? {
                for (k, v) in w.iter().enumerate() {
                    b.push(i, i + k - 1, *v);
                }
            }
        }
    }
    Ok(DiscreteProblem {
        a_matrix: b.build(),
        u0: cell_average_payoff_1d(grid, params.strike),
        grids: vec![grid.clone()],
        dirichlet_mask: mask,
        rate: r,
        strike: params.strike,
        maturity: params.maturity,
    })
}

/// Two-asset operator with the cross term on the 9-point stencil formed by
/// the tensor product of first-derivative weights. Row-major ordering
/// `l = i * m2 + j` with `i` the s1 index.
pub fn assemble_2d(params: &MarketParams2D, grid1: &SpatialGrid, grid2: &SpatialGrid) -> Result<DiscreteProblem> {
    params.validate()?;
    let (m1, m2) = (grid1.len(), grid2.len());
    let n = m1 * m2;
    let r = params.r;
    let idx = |i: usize, j: usize| i * m2 + j;
    let mut b = TripletBuilder::new(n, n);
    let mut mask = vec![false; n];
    let (p1, p2) = (grid1.points(), grid2.points());
    let cross = params.rho * params.sigma1 * params.sigma2;

    for i in 0..m1 {
        for j in 0..m2 {
            let l = idx(i, j);
            if i == m1 - 1 || j == m2 - 1 {
                mask[l] = true;
                continue;
            }
            let (s1, s2) = (p1[i], p2[j]);
            b.push(l, l, -r);
            if s1 > 0.0 {
                let coef2 = 0.5 * params.sigma1 * params.sigma1 * s1 * s1;
                if let Some(w) = axis_stencil(grid1, i, coef2, r * s1)? {
                    for (k, v) in w.iter().enumerate() {
                        b.push(l, idx(i + k - 1, j), *v);
                    }
                }
            }
            if s2 > 0.0 {
                let coef2 = 0.5 * params.sigma2 * params.sigma2 * s2 * s2;
                if let Some(w) = axis_stencil(grid2, j, coef2, r * s2)? {
                    for (k, v) in w.iter().enumerate() {
                        b.push(l, idx(i, j + k - 1), *v);
                    }
                }
            }
            if s1 > 0.0 && s2 > 0.0 && cross != 0.0 {
                let (h1l, h1r) = grid1.spacings(i);
                let (h2l, h2r) = grid2.spacings(j);
                let w1 = fd_weights(h1l, h1r)?.first;
                let w2 = fd_weights(h2l, h2r)?.first;
                let c = cross * s1 * s2;
                for (p, a) in w1.iter().enumerate() {
                    for (q, bq) in w2.iter().enumerate() {
                        b.push(l, idx(i + p - 1, j + q - 1), c * a * bq);
                    }
                }
            }
        }
    }
    Ok(DiscreteProblem {
        a_matrix: b.build(),
        u0: cell_average_payoff_2d(grid1, grid2, params.strike),
        grids: vec![grid1.clone(), grid2.clone()],
        dirichlet_mask: mask,
        rate: r,
        strike: params.strike,
        maturity: params.maturity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn uniform_weights_are_classical() {
        let h = 0.25;
        let w = fd_weights(h, h).unwrap();
        assert_eq!(w.first, [-1.0 / (2.0 * h), 0.0, 1.0 / (2.0 * h)]);
        assert_eq!(w.second, [1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)]);
    }

    /// Solves the 3×3 moment system `sum_k w_k (x_k - x)^p = p! [p == order]`
    /// by Gaussian elimination.
    fn vandermonde_weights(hl: f64, hr: f64, order: usize) -> [f64; 3] {
        let xs = [-hl, 0.0, hr];
        let mut a = [[0.0; 4]; 3];
        for p in 0..3 {
            for k in 0..3 {
                a[p][k] = xs[k].powi(p as i32);
            }
            a[p][3] = match (p, order) {
                (1, 1) => 1.0,
                (2, 2) => 2.0,
                _ => 0.0,
            };
        }
        for c in 0..3 {
            let piv = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, piv);
            for rr in 0..3 {
                if rr != c {
                    let f = a[rr][c] / a[c][c];
                    for k in c..4 {
                        a[rr][k] -= f * a[c][k];
                    }
                }
            }
        }
        [a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]]
    }

    #[test]
    fn nonuniform_weights_match_moment_system() {
        let w = fd_weights(1.0, 2.0).unwrap();
        let f = vandermonde_weights(1.0, 2.0, 1);
        let s = vandermonde_weights(1.0, 2.0, 2);
        let expected_first = [-2.0 / 3.0, 0.5, 1.0 / 6.0];
        let expected_second = [2.0 / 3.0, -1.0, 1.0 / 3.0];
        for k in 0..3 {
            assert!((w.first[k] - expected_first[k]).abs() < 1e-15);
            assert!((w.second[k] - expected_second[k]).abs() < 1e-15);
            assert!((f[k] - expected_first[k]).abs() < 1e-14);
            assert!((s[k] - expected_second[k]).abs() < 1e-14);
        }
        for (hl, hr) in [(0.3, 0.7), (2.0, 0.5), (1e-2, 3e-2)] {
            let w = fd_weights(hl, hr).unwrap();
            let f = vandermonde_weights(hl, hr, 1);
            let s = vandermonde_weights(hl, hr, 2);
            for k in 0..3 {
                assert!((w.first[k] - f[k]).abs() <= 1e-10 * f[k].abs().max(1.0));
                assert!((w.second[k] - s[k]).abs() <= 1e-10 * s[k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn quadratic_exactness() {
        let x = 3.7;
        for (hl, hr) in [(0.1, 0.3), (1.0, 1.0), (0.9, 0.2)] {
            let w = fd_weights(hl, hr).unwrap();
            let f = [(x - hl) * (x - hl), x * x, (x + hr) * (x + hr)];
            let d1: f64 = w.first.iter().zip(&f).map(|(a, b)| a * b).sum();
            let d2: f64 = w.second.iter().zip(&f).map(|(a, b)| a * b).sum();
            assert!((d1 - 2.0 * x).abs() < 1e-12);
            assert!((d2 - 2.0).abs() < 1e-10);
        }
        assert!(fd_weights(0.0, 1.0).is_err());
    }

    #[test]
    fn lagrange_reproduces_central() {
        let (f, s) = lagrange_weights([-1.0, 0.0, 2.0], 0.0);
        let w = fd_weights(1.0, 2.0).unwrap();
        for k in 0..3 {
            assert!((f[k] - w.first[k]).abs() < 1e-14);
            assert!((s[k] - w.second[k]).abs() < 1e-14);
        }
    }

    fn put_problem(m: usize) -> DiscreteProblem {
        let p = MarketParams1D::reference_put();
        let g = build_grid(m, p.strike, p.s_max).unwrap();
        assemble_1d(&p, &g).unwrap()
    }

    #[test]
    fn one_d_rows() {
        let pb = put_problem(60);
        let a = &pb.a_matrix;
        let r = pb.rate;
        assert_eq!(a.row(0).collect::<Vec<_>>(), vec![(0, -r)]);
        assert_eq!(a.row(59).count(), 0);
        assert!(pb.dirichlet_mask[59] && !pb.dirichlet_mask[58]);
        assert_eq!(pb.u0[59], 0.0);
        assert!((0..60).all(|i| a.row(i).count() <= 3));

        let ones = a.mul_vec(&vec![1.0; 60]);
        for v in &ones[..59] {
            assert!((v + r).abs() <= 1e-10 * r);
        }
        let s = pb.grids[0].points().to_vec();
        let as_ = a.mul_vec(&s);
        for i in 1..58 {
            assert!(as_[i].abs() <= 1e-9 * (r * s[i]), "node {i}: {}", as_[i]);
        }
    }

    #[test]
    fn one_d_quadratic_exact() {
        let pb = put_problem(80);
        let p = MarketParams1D::reference_put();
        let s = pb.grids[0].points();
        let u: Vec<f64> = s.iter().map(|x| x * x).collect();
        let au = pb.a_matrix.mul_vec(&u);
        for i in 1..78 {
            let exact = 0.5 * p.sigma * p.sigma * s[i] * s[i] * 2.0 + p.r * s[i] * 2.0 * s[i] - p.r * s[i] * s[i];
            assert!((au[i] - exact).abs() <= 1e-9 * exact.abs().max(1.0));
        }
    }

    fn avg_problem(m: usize, rho: f64) -> DiscreteProblem {
        let mut p = MarketParams2D::reference_put_on_average();
        p.rho = rho;
        let g = build_grid(m, p.strike, p.s_max).unwrap();
        assemble_2d(&p, &g, &g).unwrap()
    }

    #[test]
    fn two_d_constants_and_bilinear() {
        let m = 30;
        let pb = avg_problem(m, 0.5);
        let p = MarketParams2D::reference_put_on_average();
        let a = &pb.a_matrix;
        assert!((0..m * m).all(|l| a.row(l).count() <= 9));
        let ones = a.mul_vec(&vec![1.0; m * m]);
        for l in 0..m * m {
            if pb.dirichlet_mask[l] {
                assert_eq!(a.row(l).count(), 0);
                assert_eq!(pb.u0[l], 0.0);
            } else {
                assert!((ones[l] + p.r).abs() <= 1e-10 * p.r);
            }
        }
        let s = pb.grids[0].points();
        let u: Vec<f64> = (0..m * m).map(|l| s[l / m] * s[l % m]).collect();
        let au = a.mul_vec(&u);
        for i in 1..m - 1 {
            for j in 1..m - 1 {
                let exact = (p.r + p.rho * p.sigma1 * p.sigma2) * s[i] * s[j];
                assert!((au[i * m + j] - exact).abs() <= 1e-8 * exact.abs());
            }
        }
        // edge s1 = 0 carries only the s2 operator and the reaction term
        let row: Vec<_> = a.row(5).collect();
        assert!(row.iter().all(|(c, _)| *c < m));
        assert_eq!(a.row(0).collect::<Vec<_>>(), vec![(0, -p.r)]);
    }

    #[test]
    fn uncorrelated_is_kronecker_sum() {
        let m = 20;
        let pb = avg_problem(m, 0.0);
        let p = MarketParams2D::reference_put_on_average();
        let g = &pb.grids[0];
        let l1 = assemble_1d(&MarketParams1D::new(p.sigma1, p.r, p.maturity, p.strike, p.s_max).unwrap(), g).unwrap();
        let l2 = assemble_1d(&MarketParams1D::new(p.sigma2, p.r, p.maturity, p.strike, p.s_max).unwrap(), g).unwrap();
        for i in 0..m - 1 {
            for j in 0..m - 1 {
                let l = i * m + j;
                for ii in 0..m {
                    for jj in 0..m {
                        let mut expect = 0.0;
                        if jj == j {
                            expect += l1.a_matrix.get(i, ii) + if ii == i { p.r } else { 0.0 };
                        }
                        if ii == i {
                            expect += l2.a_matrix.get(j, jj) + if jj == j { p.r } else { 0.0 };
                        }
                        if ii == i && jj == j {
                            expect -= p.r;
                        }
                        let got = pb.a_matrix.get(l, ii * m + jj);
                        assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn coordinate_dump() {
        let pb = put_problem(5);
        let txt = pb.a_matrix.to_coordinate_text();
        assert_eq!(txt.lines().count(), pb.a_matrix.nnz());
        assert!(txt.starts_with("0 0 "));
    }
}
