//! Pricing of one- and two-asset American options by penalty time stepping
//! of the semidiscrete complementarity problem, with Delta and Gamma taken
//! from the same solve, and a harness for measuring temporal convergence.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod greeks;
pub mod grid;
pub mod lcp;
pub mod linalg;
pub mod market;
pub mod operator;
pub mod stepper;

pub use error::{PdcpError, Result};
pub use greeks::{greeks_1d, greeks_2d, GreekSurfaces1D, GreekSurfaces2D};
pub use grid::{build_grid, cell_average_payoff_1d, cell_average_payoff_2d, SpatialGrid};
pub use market::{payoff_put_1d, payoff_put_on_average, MarketParams1D, MarketParams2D};
pub use operator::{assemble_1d, assemble_2d, fd_weights, DiscreteProblem, StencilWeights};
pub use stepper::{
    solve_pdcp, GridKind, LinearConfig, Method, PenaltyConfig, SolverConfig, StepTrace, StepperSpec,
};
pub use experiments::{
    convergence_sweep, estimate_order, roi_max_error, ErrorReport, Market, MethodRun, ReferenceProtocol,
    ReferenceSolution, RegionOfInterest, Setup,
};
