//! Black–Scholes market parameters and the two payoffs studied here:
//! the one-asset American put and the two-asset put-on-the-average.

use serde::{Deserialize, Serialize};

use crate::error::{PdcpError, Result};

/// Parameters of a one-asset put under Black–Scholes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams1D {
    pub sigma: f64,
    pub r: f64,
    pub maturity: f64,
    pub strike: f64,
    pub s_max: f64,
}

/// Parameters of a two-asset put-on-the-average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams2D {
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
    pub r: f64,
    pub maturity: f64,
    pub strike: f64,
    pub s_max: f64,
}

fn require(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(PdcpError::InvalidParameter(msg.to_string()))
    }
}

fn check_common(r: f64, maturity: f64, strike: f64, s_max: f64) -> Result<()> {
    require(r > 0.0 && r.is_finite(), "r must be > 0")?;
    require(maturity > 0.0 && maturity.is_finite(), "T must be > 0")?;
    require(strike > 0.0 && strike.is_finite(), "K must be > 0")?;
    require(s_max.is_finite() && s_max > 2.0 * strike, "s_max must exceed 2K")
}

impl MarketParams1D {
    pub fn new(sigma: f64, r: f64, maturity: f64, strike: f64, s_max: f64) -> Result<Self> {
        let p = Self { sigma, r, maturity, strike, s_max };
        p.validate()?;
        Ok(p)
    }

    /// σ = 0.40, r = 0.02, T = 0.5, K = 100, S_max = 5K.
    pub fn reference_put() -> Self {
        Self { sigma: 0.40, r: 0.02, maturity: 0.5, strike: 100.0, s_max: 500.0 }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.sigma > 0.0 && self.sigma.is_finite(), "sigma must be > 0")?;
        check_common(self.r, self.maturity, self.strike, self.s_max)
    }

    pub fn payoff(&self, s: f64) -> f64 {
        payoff_put_1d(s, self.strike)
    }
}

impl MarketParams2D {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        sigma1: f64,
        sigma2: f64,
        rho: f64,
        r: f64,
        maturity: f64,
        strike: f64,
        s_max: f64,
    ) -> Result<Self> {
        let p = Self { sigma1, sigma2, rho, r, maturity, strike, s_max };
        p.validate()?;
        Ok(p)
    }

    /// σ₁ = 0.30, σ₂ = 0.40, ρ = 0.50, r = 0.01, T = 0.5, K = 100, S_max = 5K.
    pub fn reference_put_on_average() -> Self {
        Self {
            sigma1: 0.30,
            sigma2: 0.40,
            rho: 0.50,
            r: 0.01,
            maturity: 0.5,
            strike: 100.0,
            s_max: 500.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.sigma1 > 0.0 && self.sigma1.is_finite(), "sigma1 must be > 0")?;
        require(self.sigma2 > 0.0 && self.sigma2.is_finite(), "sigma2 must be > 0")?;
        require((-1.0..=1.0).contains(&self.rho), "rho must lie in [-1, 1]")?;
        check_common(self.r, self.maturity, self.strike, self.s_max)
    }

    pub fn payoff(&self, s1: f64, s2: f64) -> f64 {
        payoff_put_on_average(s1, s2, self.strike)
    }
}

/// `max(K - s, 0)`.
pub fn payoff_put_1d(s: f64, strike: f64) -> f64 {
    (strike - s).max(0.0)
}

/// `max(0, K - (s1 + s2) / 2)`.
pub fn payoff_put_on_average(s1: f64, s2: f64, strike: f64) -> f64 {
    (strike - 0.5 * (s1 + s2)).max(0.0)
}
