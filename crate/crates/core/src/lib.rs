//! Sideband cooling of multiple mechanical modes through magnon–photon
//! polaritons.
//!
//! The crate builds the linearized fluctuation model of a driven
//! cavity–magnon–mechanics system, solves its steady-state covariance,
//! compares it against analytic sideband rates, and tunes the polariton
//! spectrum so that each mechanical mode sits on its own red sideband.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod constants;
pub mod drive;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod optimize;
pub mod params;
pub mod pipeline;
pub mod polariton;
pub mod steady;
pub mod sweep;
pub mod thermal;
pub mod tuning;

pub use analytics::{
    cooling_analysis, effective_cooling, network_cooling, polariton_rates,
    quantum_backaction_limit, scattering_rates, CoolingAnalysis, EffectiveCooling, Flag,
    ModeCooling, SidebandRates,
};
pub use drive::{calibrate_drive, DriveCalibration, DriveInput, PowerReference, RabiConvention};
pub use dynamics::{
    build_diffusion, build_drift, build_network, linear_model, solve_averages, AveragesMode,
    LinearModel, ModeKind, ModeLabel, Network, NetworkPolariton, SteadyStateAverages,
};
pub use error::{Error, Result};
pub use optimize::{optimize, Bound, FreeVariable, OptimizeResult, OptimizeSpec, TraceEntry};
pub use params::{MechanicalMode, SystemParams};
pub use pipeline::{evaluate, evaluate_network, Evaluation, PointReport, Scenario};
pub use polariton::{
    diagonalize_polaritons, photon_matter_diagonalize, HybridPolariton, MatterMode,
    PolaritonBasis, PolaritonSpectrum,
};
pub use steady::{
    check_stability, extract_occupations, integrate_covariance, max_integration_step,
    solve_lyapunov, solve_steady_state, uncertainty_margin, LyapunovSolution, Stability,
    SteadyState,
};
pub use sweep::{interior_grid, linear_grid, run_sweep, SweepRow, SweepSpec, SweepVariable};
pub use thermal::thermal_occupation;
pub use tuning::{tune_n_mode, tune_two_mode, NModeRequest, NModeTuning, Placement, TwoModeTuning};
