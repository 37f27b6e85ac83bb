//! Run configuration: a TOML file of flat `key = value` sections, presets
//! for the one- and two-asset studies, and command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PdcpError, Result};
use crate::experiments::{Market, MethodRun, ReferenceProtocol, RegionOfInterest};
use crate::market::{MarketParams1D, MarketParams2D};
use crate::stepper::{GridKind, LinearConfig, Method, PenaltyConfig, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Grid points per direction.
    pub m: usize,
    pub methods: Vec<Method>,
    pub n_list: Vec<usize>,
    pub grid_kind: GridKind,
    /// Leading BE-P steps for every method. Unset: 2 in 1D; in 2D 0 for
    /// the DIRK methods and 2 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping_steps: Option<usize>,
    /// Worker threads for sweeps, 0 for all available cores.
    #[serde(default)]
    pub jobs: usize,
    pub out: PathBuf,
    /// Reference cache directory, `<out>/cache` when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    /// Extra `[N_min, N_max]` windows for order fits; the full list is always fitted.
    #[serde(default)]
    pub fit_ranges: Vec<[usize; 2]>,
    pub market: Market,
    pub roi: RegionOfInterest,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    #[serde(default)]
    pub linear: LinearConfig,
    pub reference: ReferenceProtocol,
}

/// Named starting points for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    OneAsset,
    TwoAsset,
}

impl std::str::FromStr for Preset {
    type Err = PdcpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1d" | "1" => Ok(Preset::OneAsset),
            "2d" | "2" => Ok(Preset::TwoAsset),
            other => Err(PdcpError::Config(format!("unknown preset '{other}', expected 1d or 2d"))),
        }
    }
}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        let market = match preset {
            Preset::OneAsset => Market::OneAsset(MarketParams1D::reference_put()),
            Preset::TwoAsset => Market::TwoAsset(MarketParams2D::reference_put_on_average()),
        };
        let (m, methods) = match preset {
            Preset::OneAsset => (200, vec![Method::BE, Method::CN, Method::DIRK_A, Method::DIRK_B, Method::LOBATTO]),
            Preset::TwoAsset => (100, vec![Method::BE, Method::CN, Method::DIRK_A, Method::DIRK_B]),
        };
        Self {
            m,
            methods,
            n_list: vec![10, 20, 40, 80],
            grid_kind: GridKind::Quadratic,
            damping_steps: None,
            jobs: 0,
            out: PathBuf::from("out"),
            cache_dir: None,
            fit_ranges: Vec::new(),
            roi: RegionOfInterest::default_for(&market),
            market,
            penalty: PenaltyConfig::default(),
            linear: LinearConfig::default(),
            reference: ReferenceProtocol::default_for(market.dims()),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| PdcpError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PdcpError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| PdcpError::Config(e.to_string()))
    }

    pub fn dims(&self) -> usize {
        self.market.dims()
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig { penalty: self.penalty, linear: self.linear }
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.out.join("cache"))
    }

    pub fn damping_for(&self, method: Method) -> usize {
        match self.damping_steps {
            Some(k) => k,
            None if self.dims() == 2 && matches!(method, Method::DirkP(_)) => 0,
            None => 2,
        }
    }

    pub fn method_runs(&self) -> Vec<MethodRun> {
        self.methods.iter().map(|&m| MethodRun::new(m, self.damping_for(m))).collect()
    }

    /// Checks every invariant; called before any solve.
    pub fn validate(&self) -> Result<()> {
        self.market.validate()?;
        if self.m < 3 {
            return Err(PdcpError::InvalidParameter(format!("m must be >= 3, got {}", self.m)));
        }
        if self.methods.is_empty() {
            return Err(PdcpError::Config("no methods given".into()));
        }
        for m in &self.methods {
            m.validate()?;
        }
        if self.n_list.is_empty() {
            return Err(PdcpError::Config("empty N list".into()));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n == 0) {
            return Err(PdcpError::InvalidParameter(format!("N must be >= 1, got {n}")));
        }
        for r in &self.fit_ranges {
            if r[0] >= r[1] {
                return Err(PdcpError::Config(format!("fit range [{}, {}] is empty", r[0], r[1])));
            }
        }
        self.roi.validate(self.market.s_max())?;
        self.penalty.validate()?;
        self.reference.spec().validate()?;
        if self.reference.constraint == crate::stepper::ConstraintMode::BrennanSchwartz
            && (self.dims() != 1 || self.reference.method == Method::LobattoP)
        {
            return Err(PdcpError::Config(
                "a Brennan–Schwartz reference needs a 1D market and a θ or DIRK method".into(),
            ));
        }
        Ok(())
    }
}

/// Parses `a,b,c` lists used by the command line.
pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| PdcpError::Config(format!("bad {what} entry '{t}'"))))
        .collect()
}
