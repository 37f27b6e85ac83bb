use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::market::{MarketParams1D, MarketParams2D};
use crate::stepper::{solve_pdcp_with, ConstraintMode, GridKind, Method, SolverConfig, StepperSpec};

use super::{Market, Setup};

/// How a reference solution is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceProtocol {
    pub method: Method,
    pub constraint: ConstraintMode,
    pub n_steps: usize,
    pub damping_steps: usize,
    pub grid_kind: GridKind,
}

impl ReferenceProtocol {
    /// DIRKa with exact Brennan–Schwartz stages, N = 2000 on the quadratic
    /// grid after two BE damping steps.
    pub fn one_asset() -> Self {
        Self {
            method: Method::DIRK_A,
            constraint: ConstraintMode::BrennanSchwartz,
            n_steps: 2000,
            damping_steps: 2,
            grid_kind: GridKind::Quadratic,
        }
    }

    /// DIRKa-P, N = 500 on the quadratic grid, no damping.
    pub fn two_asset() -> Self {
        Self {
            method: Method::DIRK_A,
            constraint: ConstraintMode::Penalty,
            n_steps: 500,
            damping_steps: 0,
            grid_kind: GridKind::Quadratic,
        }
    }

    pub fn default_for(dims: usize) -> Self {
        if dims == 1 {
            Self::one_asset()
        } else {
            Self::two_asset()
        }
    }

    pub fn spec(&self) -> StepperSpec {
        StepperSpec::new(self.method, self.damping_steps, self.grid_kind, self.n_steps)
    }
}

/// Reference value at `t = T` with its Greeks.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub u_ref: Vec<f64>,
    /// Value and Greeks in the order of [`Setup::quantity_names`].
    pub quantities: Vec<Vec<f64>>,
    pub protocol: ReferenceProtocol,
    /// Hex SHA-256 of the market, grid and protocol description.
    pub key: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

fn cache_key(setup: &Setup, protocol: &ReferenceProtocol, cfg: &SolverConfig) -> String {
    let mut text = format!(
        "pdcp-reference v1\n{}\nm={}\ngrid=uniform-0.8-on-[0,2K]+exp-stretch cell-average\n",
        setup.market.fingerprint(),
        setup.m
    );
    text.push_str(&format!(
        "method={} constraint={:?} N={} damping={} grid={}\n",
        protocol.method.key(),
        protocol.constraint,
        protocol.n_steps,
        protocol.damping_steps,
        protocol.grid_kind
    ));
    text.push_str(&format!(
        "large={:?} tol={:?} maxit={} linear_tol={:?}\n",
        cfg.penalty.large, cfg.penalty.tol, cfg.penalty.max_penalty_iters, cfg.linear.tol
    ));
    let mut bytes = text.into_bytes();
    for x in setup.grid.points() {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    sha256_hex(&bytes)
}

fn with_quantities(setup: &Setup, u_ref: Vec<f64>, protocol: ReferenceProtocol, key: String) -> Result<ReferenceSolution> {
    let quantities = setup.quantities(&u_ref)?;
    Ok(ReferenceSolution { u_ref, quantities, protocol, key })
}

/// Runs `protocol` on `setup` without any caching.
pub fn build_reference(setup: &Setup, protocol: &ReferenceProtocol, cfg: &SolverConfig) -> Result<ReferenceSolution> {
    let (u, _) = solve_pdcp_with(&setup.problem, &protocol.spec(), cfg, protocol.constraint)?;
    with_quantities(setup, u, *protocol, cache_key(setup, protocol, cfg))
}

pub fn build_reference_1d(params: &MarketParams1D, m: usize) -> Result<ReferenceSolution> {
    let setup = Setup::new(Market::OneAsset(*params), m)?;
    build_reference(&setup, &ReferenceProtocol::one_asset(), &SolverConfig::default())
}

pub fn build_reference_2d(params: &MarketParams2D, m: usize) -> Result<ReferenceSolution> {
    let setup = Setup::new(Market::TwoAsset(*params), m)?;
    build_reference(&setup, &ReferenceProtocol::two_asset(), &SolverConfig::default())
}

/// Directory of cached references: `<key>.bin` holds the little-endian
/// f64 values, `<key>.txt` a `key = value` sidecar with the checksum.
#[derive(Debug, Clone)]
pub struct ReferenceCache {
    dir: PathBuf,
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn paths(&self, key: &str) -> (PathBuf, PathBuf) {
        (self.dir.join(format!("{key}.bin")), self.dir.join(format!("{key}.txt")))
    }

    /// Cached reference if present and intact.
    pub fn load(&self, setup: &Setup, protocol: &ReferenceProtocol, cfg: &SolverConfig) -> Result<Option<ReferenceSolution>> {
        let key = cache_key(setup, protocol, cfg);
        let (bin, txt) = self.paths(&key);
        if !bin.exists() || !txt.exists() {
            return Ok(None);
        }
        let data = fs::read(&bin)?;
        let sidecar = fs::read_to_string(&txt)?;
        let expected = sidecar
            .lines()
            .find_map(|l| l.strip_prefix("sha256 = "))
            .map(str::trim)
            .unwrap_or_default();
        if data.len() != 8 * setup.problem.size() || sha256_hex(&data) != expected {
            return Ok(None);
        }
        let u: Vec<f64> = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        with_quantities(setup, u, *protocol, key).map(Some)
    }

    pub fn store(&self, setup: &Setup, reference: &ReferenceSolution) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let (bin, txt) = self.paths(&reference.key);
        let data: Vec<u8> = reference.u_ref.iter().flat_map(|x| x.to_le_bytes()).collect();
        let p = &reference.protocol;
        let sidecar = format!(
            "key = {}\nmarket = {}\nm = {}\nmethod = {}\nconstraint = {:?}\nN = {}\ndamping_steps = {}\ngrid_kind = {}\nlength = {}\nsha256 = {}\n",
            reference.key,
            setup.market.fingerprint(),
            setup.m,
            p.method.key(),
            p.constraint,
            p.n_steps,
            p.damping_steps,
            p.grid_kind,
            reference.u_ref.len(),
            sha256_hex(&data)
        );
        fs::write(bin, data)?;
        fs::write(txt, sidecar)?;
        Ok(())
    }

    /// Loads the reference or builds and stores it.
    pub fn load_or_build(&self, setup: &Setup, protocol: &ReferenceProtocol, cfg: &SolverConfig) -> Result<ReferenceSolution> {
        if let Some(r) = self.load(setup, protocol, cfg)? {
            return Ok(r);
        }
        let r = build_reference(setup, protocol, cfg)?;
        self.store(setup, &r)?;
        Ok(r)
    }
}
