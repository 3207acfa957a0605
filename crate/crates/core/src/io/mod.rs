//! Configuration files, sweep tables and reports.

mod config;
mod output;
mod report;

pub use config::{
    BoundConfig, DriveConfig, GridConfig, MechanicsConfig, OptimizeConfig, OutputConfig, RunConfig,
    RunMode, SweepConfig, SystemConfig, TuneConfig, TuneKind,
};
pub use output::{plot_data, sweep_csv, write_file, CSV_COLUMNS};
pub use report::{
    to_toml, FreeValue, MatterEntry, ModeEntry, NModeEntry, OptimizeReport, PointSummary,
    PolaritonEntry, RateEntry, TraceRow, TuneReport, TwoModeEntry,
};
