//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_list, Preset, RunConfig};
use crate::error::{PdcpError, Result};
use crate::experiments::{convergence_sweep, ErrorReport, ReferenceCache, ReferenceSolution, RegionOfInterest, Setup};
use crate::stepper::{solve_pdcp, traces_to_csv, GridKind, Method, StepperSpec};

#[derive(Debug, Parser)]
#[command(name = "pdcp", version, about = "American option pricing by penalty time stepping")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve once with the first method and first N; write value and Greek surfaces.
    Price(Overrides),
    /// Build or load the reference, sweep methods over N, write errors and fitted orders.
    Converge(Overrides),
    /// Build or load the reference solution and write its surfaces.
    Reference(Overrides),
    /// Print the resolved configuration as TOML.
    ShowConfig(Overrides),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML run configuration; presets are used when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `1d` (one-asset put) or `2d` (put on the average).
    #[arg(long)]
    pub preset: Option<String>,
    /// Dimension, selects the matching preset.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated step counts, e.g. `10,20,40,80`.
    #[arg(long)]
    pub n_list: Option<String>,
    /// Comma-separated methods: be, cn, dirka, dirkb, lobatto, theta:<x>, dirk:<x>.
    #[arg(long)]
    pub methods: Option<String>,
    /// Temporal grid: uniform or quadratic.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub damping_steps: Option<usize>,
    /// Region of interest as `lo,hi`.
    #[arg(long)]
    pub roi: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

impl Overrides {
    /// Base configuration (file or preset) with the flags applied.
    pub fn resolve(&self) -> Result<RunConfig> {
        let preset = match (&self.preset, self.dim) {
            (Some(p), dim) => {
                let p: Preset = p.parse()?;
                let want = if p == Preset::OneAsset { 1 } else { 2 };
                if dim.is_some_and(|d| d != want) {
                    return Err(PdcpError::Config("--dim contradicts --preset".into()));
                }
                Some(p)
            }
            (None, Some(1)) => Some(Preset::OneAsset),
            (None, Some(2)) => Some(Preset::TwoAsset),
            (None, Some(d)) => return Err(PdcpError::Config(format!("--dim must be 1 or 2, got {d}"))),
            (None, None) => None,
        };
        let mut cfg = match (&self.config, preset) {
            (Some(path), None) => RunConfig::load(path)?,
            (Some(path), Some(_)) if self.preset.is_none() => {
                let cfg = RunConfig::load(path)?;
                if Some(cfg.dims()) != self.dim {
                    return Err(PdcpError::Config("--dim contradicts the config file".into()));
                }
                cfg
            }
            (Some(_), Some(_)) => return Err(PdcpError::Config("give either --config or --preset".into())),
            (None, p) => RunConfig::preset(p.unwrap_or(Preset::OneAsset)),
        };
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(s) = &self.n_list {
            cfg.n_list = parse_list(s, "N")?;
        }
        if let Some(s) = &self.methods {
            cfg.methods = parse_list::<Method>(s, "method")?;
        }
        if let Some(s) = &self.grid {
            cfg.grid_kind = s.parse::<GridKind>()?;
        }
        if let Some(k) = self.damping_steps {
            cfg.damping_steps = Some(k);
        }
        if let Some(s) = &self.roi {
            let v: Vec<f64> = parse_list(s, "ROI")?;
            if v.len() != 2 {
                return Err(PdcpError::Config(format!("--roi needs lo,hi, got '{s}'")));
            }
            cfg.roi = RegionOfInterest::new(v[0], v[1]);
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(j) = self.jobs {
            cfg.jobs = j;
        }
        if let Some(c) = &self.cache_dir {
            cfg.cache_dir = Some(c.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).map_err(|e| PdcpError::Io(format!("{}: {e}", path.display())))
}

fn strike_label(setup: &Setup) -> &'static str {
    if setup.dims() == 1 {
        "u(K,T)"
    } else {
        "u(K,K,T)"
    }
}

fn file_key(method: Method) -> String {
    method.key().replace(':', "_")
}

pub fn cmd_price(cfg: &RunConfig) -> Result<i32> {
    let setup = Setup::new(cfg.market, cfg.m)?;
    let method = cfg.methods[0];
    let n = cfg.n_list[0];
    let spec = StepperSpec::new(method, cfg.damping_for(method), cfg.grid_kind, n);
    let (u, traces) = solve_pdcp(&setup.problem, &spec, &cfg.solver())?;
    let stem = format!("price_{}_N{n}", file_key(method));
    write(&cfg.out.join(format!("{stem}.csv")), &setup.surfaces_csv(&u)?)?;
    write(&cfg.out.join(format!("{stem}_trace.csv")), &traces_to_csv(&traces))?;
    let kappas: Vec<usize> = traces.iter().flat_map(|t| t.kappa.iter().copied()).collect();
    let total: usize = kappas.iter().sum();
    let unconverged: usize = traces.iter().map(|t| t.linear_unconverged).sum();
    println!(
        "{} m={} N={n} grid={} damping={}",
        method.label(),
        cfg.m,
        cfg.grid_kind,
        spec.damping_steps
    );
    println!("{} = {:.10}", strike_label(&setup), setup.value_at_strike(&u)?);
    println!(
        "penalty iterations: total {total}, max {}, mean {:.2} per stage",
        kappas.iter().max().copied().unwrap_or(0),
        total as f64 / kappas.len().max(1) as f64
    );
    if unconverged > 0 {
        println!("linear solves accepted short of tolerance: {unconverged}");
    }
    println!("wrote {}", cfg.out.join(format!("{stem}.csv")).display());
    Ok(0)
}

fn reference(cfg: &RunConfig, setup: &Setup) -> Result<ReferenceSolution> {
    ReferenceCache::new(cfg.cache_dir()).load_or_build(setup, &cfg.reference, &cfg.solver())
}

pub fn cmd_reference(cfg: &RunConfig) -> Result<i32> {
    let setup = Setup::new(cfg.market, cfg.m)?;
    let r = reference(cfg, &setup)?;
    write(&cfg.out.join("reference.csv"), &setup.surfaces_csv(&r.u_ref)?)?;
    println!(
        "reference {} N={} ({:?}), key {}",
        r.protocol.method.label(),
        r.protocol.n_steps,
        r.protocol.constraint,
        r.key
    );
    println!("{} = {:.10}", strike_label(&setup), setup.value_at_strike(&r.u_ref)?);
    Ok(0)
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PdcpError::Config(format!("thread pool: {e}")))
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<i32> {
    let setup = Setup::new(cfg.market, cfg.m)?;
    let r = reference(cfg, &setup)?;
    let runs = cfg.method_runs();
    let solver = cfg.solver();
    let report = thread_pool(cfg.jobs)?
        .install(|| convergence_sweep(&setup, &r, &runs, &cfg.n_list, cfg.grid_kind, &cfg.roi, &solver))?;
    let mut fits = report.fit_orders(None);
    for range in &cfg.fit_ranges {
        fits.extend(report.fit_orders(Some((range[0], range[1]))));
    }
    write(&cfg.out.join("errors.csv"), &report.errors_csv())?;
    write(&cfg.out.join("orders.csv"), &ErrorReport::orders_csv(&fits))?;
    write(&cfg.out.join("runs.csv"), &report.runs_csv())?;
    println!("{:<10} {:<9} {:>9} {:>8}", "method", "quantity", "N range", "order");
    for f in &fits {
        let order = match &f.estimate {
            Ok(e) => {
                if e.excluded > 0 {
                    eprintln!(
                        "warning: {} {}: {} nonpositive errors left out of the fit",
                        f.method, f.quantity, e.excluded
                    );
                }
                format!("{:.3}", e.order)
            }
            Err(msg) => msg.clone(),
        };
        println!("{:<10} {:<9} {:>9} {:>8}", f.method, f.quantity, format!("{}-{}", f.n_min, f.n_max), order);
    }
    for run in report.runs.iter().filter(|r| r.failure.is_some()) {
        eprintln!("error: {} N={}: {}", run.method, run.n, run.failure.as_deref().unwrap_or_default());
    }
    println!("wrote {}", cfg.out.join("errors.csv").display());
    Ok(if report.all_succeeded() { 0 } else { 1 })
}

pub fn cmd_show_config(cfg: &RunConfig) -> Result<i32> {
    print!("{}", cfg.to_toml()?);
    if cfg.damping_steps.is_none() {
        println!();
        println!("# damping_steps unset: 2 in 1D; in 2D 0 for dirka/dirkb and 2 otherwise");
    }
    Ok(0)
}

/// Runs a parsed command line and returns the exit status.
pub fn run(cli: Cli) -> i32 {
    let (opts, cmd): (&Overrides, fn(&RunConfig) -> Result<i32>) = match &cli.command {
        Command::Price(o) => (o, cmd_price),
        Command::Converge(o) => (o, cmd_converge),
        Command::Reference(o) => (o, cmd_reference),
        Command::ShowConfig(o) => (o, cmd_show_config),
    };
    match opts.resolve().and_then(|cfg| cmd(&cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
