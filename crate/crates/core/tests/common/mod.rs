//! Independent pricing oracles used to check the PDE solver: a
//! Cox–Ross–Rubinstein tree for one asset and a four-branch correlated
//! binomial lattice for two assets, plus the Black–Scholes put formula.
#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};

/// Black–Scholes European put.
pub fn bs_put(s: f64, k: f64, r: f64, sigma: f64, t: f64) -> f64 {
    let n = Normal::standard();
    let sq = sigma * t.sqrt();
    let d1 = ((s / k).ln() + (r + 0.5 * sigma * sigma) * t) / sq;
    let d2 = d1 - sq;
    k * (-r * t).exp() * n.cdf(-d2) - s * n.cdf(-d1)
}

/// Cox–Ross–Rubinstein put price with `steps` steps.
pub fn crr_put(s0: f64, k: f64, r: f64, sigma: f64, t: f64, steps: usize, american: bool) -> f64 {
    let dt = t / steps as f64;
    let u = (sigma * dt.sqrt()).exp();
    let d = 1.0 / u;
    let disc = (-r * dt).exp();
    let p = ((r * dt).exp() - d) / (u - d);
    let q = 1.0 - p;
    // node j at level n has j up moves: S = s0 u^(2j - n)
    let mut v: Vec<f64> = (0..=steps)
        .map(|j| (k - s0 * u.powi(2 * j as i32 - steps as i32)).max(0.0))
        .collect();
    for n in (0..steps).rev() {
        let mut s = s0 * u.powi(-(n as i32));
        let up2 = u * u;
        for j in 0..=n {
            let cont = disc * (p * v[j + 1] + q * v[j]);
            v[j] = if american { cont.max(k - s) } else { cont };
            s *= up2;
        }
    }
    v[0]
}

/// Two-asset binomial lattice with four branches whose probabilities match
/// the means, variances and correlation of the log prices. Pays
/// `payoff(s1, s2)` and allows early exercise if `american`.
#[allow(clippy::too_many_arguments)]
pub fn lattice_2d(
    s1: f64,
    s2: f64,
    r: f64,
    sigma1: f64,
    sigma2: f64,
    rho: f64,
    t: f64,
    steps: usize,
    american: bool,
    payoff: impl Fn(f64, f64) -> f64,
) -> f64 {
    let dt = t / steps as f64;
    let h = dt.sqrt();
    let (a1, a2) = (sigma1 * h, sigma2 * h);
    let (nu1, nu2) = (r - 0.5 * sigma1 * sigma1, r - 0.5 * sigma2 * sigma2);
    let (m1, m2) = (nu1 * h / sigma1, nu2 * h / sigma2);
    let puu = 0.25 * (1.0 + rho + m1 + m2);
    let pud = 0.25 * (1.0 - rho + m1 - m2);
    let pdu = 0.25 * (1.0 - rho - m1 + m2);
    let pdd = 0.25 * (1.0 + rho - m1 - m2);
    assert!([puu, pud, pdu, pdd].iter().all(|&p| p >= 0.0), "lattice probabilities must be nonnegative");
    let disc = (-r * dt).exp();
    let w = steps + 1;
    let level = |n: usize, a: f64, s0: f64| -> Vec<f64> {
        (0..=n).map(|j| s0 * (a * (2.0 * j as f64 - n as f64)).exp()).collect()
    };
    let x = level(steps, a1, s1);
    let y = level(steps, a2, s2);
    let mut v = vec![0.0; w * w];
    for j in 0..=steps {
        for k in 0..=steps {
            v[j * w + k] = payoff(x[j], y[k]);
        }
    }
    for n in (0..steps).rev() {
        let x = level(n, a1, s1);
        let y = level(n, a2, s2);
        for j in 0..=n {
            for k in 0..=n {
                let cont = disc
                    * (puu * v[(j + 1) * w + k + 1]
                        + pud * v[(j + 1) * w + k]
                        + pdu * v[j * w + k + 1]
                        + pdd * v[j * w + k]);
                v[j * w + k] = if american { cont.max(payoff(x[j], y[k])) } else { cont };
            }
        }
    }
    v[0]
}

pub fn put_on_average(k: f64) -> impl Fn(f64, f64) -> f64 {
    move |a, b| (k - 0.5 * (a + b)).max(0.0)
}
