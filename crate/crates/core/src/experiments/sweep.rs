use rayon::prelude::*;

use crate::error::{PdcpError, Result};
use crate::stepper::{solve_pdcp, GridKind, Method, SolverConfig, StepTrace, StepperSpec};

use super::{roi_max_error, ReferenceSolution, RegionOfInterest, Setup};

/// A method with its number of leading BE-P damping steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodRun {
    pub method: Method,
    pub damping_steps: usize,
}

impl MethodRun {
    pub fn new(method: Method, damping_steps: usize) -> Self {
        Self { method, damping_steps }
    }
}

/// One line of the error CSV. `error` is `Err(message)` when the run failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub method: String,
    pub m: usize,
    pub n: usize,
    pub grid_kind: GridKind,
    pub quantity: String,
    pub error: std::result::Result<f64, String>,
}

/// Solver statistics of one sweep entry.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub method: String,
    pub n: usize,
    pub penalty_iterations: usize,
    pub max_kappa: usize,
    pub linear_unconverged: usize,
    pub failure: Option<String>,
}

impl RunSummary {
    fn from_traces(method: String, n: usize, traces: &[StepTrace]) -> Self {
        Self {
            method,
            n,
            penalty_iterations: traces.iter().flat_map(|t| t.kappa.iter()).sum(),
            max_kappa: traces.iter().flat_map(|t| t.kappa.iter()).copied().max().unwrap_or(0),
            linear_unconverged: traces.iter().map(|t| t.linear_unconverged).sum(),
            failure: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderEstimate {
    pub order: f64,
    pub used: usize,
    /// Pairs dropped for a nonpositive or nonfinite error.
    pub excluded: usize,
}

/// Negative least-squares slope of `log(error)` against `log(N)`.
pub fn estimate_order(pairs: &[(usize, f64)]) -> Result<OrderEstimate> {
    let usable: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(n, e)| *n > 0 && *e > 0.0 && e.is_finite())
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(PdcpError::TooFewPoints(usable.len()));
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(PdcpError::InvalidParameter("order fit needs at least two distinct N".into()));
    }
    Ok(OrderEstimate { order: -sxy / sxx, used: usable.len(), excluded: pairs.len() - usable.len() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub method: String,
    pub m: usize,
    pub grid_kind: GridKind,
    pub quantity: String,
    pub n_min: usize,
    pub n_max: usize,
    pub estimate: std::result::Result<OrderEstimate, String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
    pub runs: Vec<RunSummary>,
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

impl ErrorReport {
    /// `(N, error)` pairs of one method and quantity, in sweep order.
    pub fn series(&self, method: &str, quantity: &str) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.quantity == quantity)
            .filter_map(|r| r.error.as_ref().ok().map(|e| (r.n, *e)))
            .collect()
    }

    pub fn error(&self, method: &str, quantity: &str, n: usize) -> Option<f64> {
        self.series(method, quantity).into_iter().find(|p| p.0 == n).map(|p| p.1)
    }

    pub fn all_succeeded(&self) -> bool {
        self.runs.iter().all(|r| r.failure.is_none())
    }

    /// Appends the rows and runs of `other`.
    pub fn extend(&mut self, other: ErrorReport) {
        self.rows.extend(other.rows);
        self.runs.extend(other.runs);
    }

    /// Order fits per (method, m, grid kind, quantity), restricted to
    /// `n_min <= N <= n_max` when a range is given.
    pub fn fit_orders(&self, range: Option<(usize, usize)>) -> Vec<OrderFit> {
        let mut groups: Vec<(String, usize, GridKind, String)> = Vec::new();
        for r in &self.rows {
            let g = (r.method.clone(), r.m, r.grid_kind, r.quantity.clone());
            if !groups.contains(&g) {
                groups.push(g);
            }
        }
        groups
            .into_iter()
            .map(|(method, m, grid_kind, quantity)| {
                let pairs: Vec<(usize, f64)> = self
                    .rows
                    .iter()
                    .filter(|r| r.method == method && r.m == m && r.grid_kind == grid_kind && r.quantity == quantity)
                    .filter(|r| range.is_none_or(|(lo, hi)| r.n >= lo && r.n <= hi))
                    .filter_map(|r| r.error.as_ref().ok().map(|e| (r.n, *e)))
                    .collect();
                let n_min = pairs.iter().map(|p| p.0).min().unwrap_or(0);
                let n_max = pairs.iter().map(|p| p.0).max().unwrap_or(0);
                OrderFit {
                    method,
                    m,
                    grid_kind,
                    quantity,
                    n_min,
                    n_max,
                    estimate: estimate_order(&pairs).map_err(|e| e.to_string()),
                }
            })
            .collect()
    }

    /// `method,m,N,grid_kind,quantity,error`; failed runs carry `failed`.
    pub fn errors_csv(&self) -> String {
        let mut s = String::from("method,m,N,grid_kind,quantity,error\n");
        for r in &self.rows {
            let e = match &r.error {
                Ok(v) => fmt(*v),
                Err(_) => "failed".to_string(),
            };
            s.push_str(&format!("{},{},{},{},{},{}\n", r.method, r.m, r.n, r.grid_kind, r.quantity, e));
        }
        s
    }

    /// `method,m,grid_kind,quantity,N_min,N_max,points,order`.
    pub fn orders_csv(fits: &[OrderFit]) -> String {
        let mut s = String::from("method,m,grid_kind,quantity,N_min,N_max,points,order\n");
        for f in fits {
            let (points, order) = match &f.estimate {
                Ok(e) => (e.used.to_string(), format!("{:.6}", e.order)),
                Err(_) => ("0".to_string(), "failed".to_string()),
            };
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                f.method, f.m, f.grid_kind, f.quantity, f.n_min, f.n_max, points, order
            ));
        }
        s
    }

    /// `method,N,penalty_iterations,max_kappa,linear_unconverged,status`.
    pub fn runs_csv(&self) -> String {
        let mut s = String::from("method,N,penalty_iterations,max_kappa,linear_unconverged,status\n");
        for r in &self.runs {
            let status = if r.failure.is_some() { "failed" } else { "ok" };
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.method, r.n, r.penalty_iterations, r.max_kappa, r.linear_unconverged, status
            ));
        }
        s
    }
}

/// Runs every `(method, N)` pair and records ROI max errors of the value
/// and all Greeks against `reference`. Entries run in parallel on the
/// current rayon pool; rows come out in input order. A failed run yields
/// rows with an error marker.
pub fn convergence_sweep(
    setup: &Setup,
    reference: &ReferenceSolution,
    runs: &[MethodRun],
    n_values: &[usize],
    grid_kind: GridKind,
    roi: &RegionOfInterest,
    cfg: &SolverConfig,
) -> Result<ErrorReport> {
    roi.validate(setup.market.s_max())?;
    let grids = setup.grids();
    roi.node_indices(&grids)?;
    if reference.u_ref.len() != setup.problem.size() {
        return Err(PdcpError::DimensionMismatch("reference does not match the setup".into()));
    }
    let names = setup.quantity_names();
    let jobs: Vec<(MethodRun, usize)> =
        runs.iter().flat_map(|r| n_values.iter().map(move |&n| (*r, n))).collect();
    let results: Vec<(Vec<ErrorRow>, RunSummary)> = jobs
        .par_iter()
        .map(|&(run, n)| {
            let key = run.method.key();
            let spec = StepperSpec::new(run.method, run.damping_steps, grid_kind, n);
            let outcome = solve_pdcp(&setup.problem, &spec, cfg).and_then(|(u, traces)| {
                let q = setup.quantities(&u)?;
                let errs = q
                    .iter()
                    .zip(&reference.quantities)
                    .map(|(a, b)| roi_max_error(b, a, &grids, roi))
                    .collect::<Result<Vec<f64>>>()?;
                Ok((errs, traces))
            });
            let row = |quantity: &str, error| ErrorRow {
                method: key.clone(),
                m: setup.m,
                n,
                grid_kind,
                quantity: quantity.to_string(),
                error,
            };
            match outcome {
                Ok((errs, traces)) => (
                    names.iter().zip(errs).map(|(q, e)| row(q, Ok(e))).collect(),
                    RunSummary::from_traces(key.clone(), n, &traces),
                ),
                Err(e) => {
                    let msg = e.to_string();
                    (
                        names.iter().map(|q| row(q, Err(msg.clone()))).collect(),
                        RunSummary {
                            method: key.clone(),
                            n,
                            penalty_iterations: 0,
                            max_kappa: 0,
                            linear_unconverged: 0,
                            failure: Some(msg),
                        },
                    )
                }
            }
        })
        .collect();
    let mut report = ErrorReport::default();
    for (rows, summary) in results {
        report.rows.extend(rows);
        report.runs.push(summary);
    }
    Ok(report)
}
