//! Parameter sweeps over a two-polariton scenario.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::Flag;
use crate::drive::{calibrate_drive, DriveCalibration, DriveInput};
use crate::dynamics::AveragesMode;
use crate::error::{Error, Result};
use crate::pipeline::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    /// Mixing angle (rad); every point is retuned.
    Theta,
    /// Bath temperature (K).
    Temperature,
    /// Drive power (W); needs a calibration with a power reference.
    Power,
    /// Drive field amplitude (T); needs a calibration.
    Field,
}

impl SweepVariable {
    pub fn unit(&self) -> &'static str {
        match self {
            SweepVariable::Theta => "rad",
            SweepVariable::Temperature => "K",
            SweepVariable::Power => "W",
            SweepVariable::Field => "T",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::Theta => "theta",
            SweepVariable::Temperature => "temperature",
            SweepVariable::Power => "power",
            SweepVariable::Field => "field",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    /// Mixing angles crossed with `values` when the variable is not θ.
    /// Rows are ordered by value first, then by θ.
    pub theta: Vec<f64>,
    pub calibration: Option<DriveCalibration>,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, values: Vec<f64>) -> Self {
        Self { variable, values, theta: Vec::new(), calibration: None }
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_calibration(mut self, calibration: DriveCalibration) -> Self {
        self.calibration = Some(calibration);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len() * self.theta.len().max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::param("sweep.values", "grid must not be empty"));
        }
        if self.variable == SweepVariable::Theta && !self.theta.is_empty() {
            return Err(Error::param(
                "sweep.theta",
                "a θ grid cannot be crossed with a θ sweep",
            ));
        }
        if matches!(self.variable, SweepVariable::Power | SweepVariable::Field) {
            match &self.calibration {
                None => return Err(Error::param("drive", "a drive calibration is required")),
                Some(c) => c.validate()?,
            }
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("sweep.values[{i}]"), "must be finite"));
        }
        Ok(())
    }

    fn points(&self) -> Vec<(f64, Option<f64>)> {
        if self.theta.is_empty() {
            self.values.iter().map(|&v| (v, None)).collect()
        } else {
            self.values
                .iter()
                .flat_map(|&v| self.theta.iter().map(move |&t| (v, Some(t))))
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable: f64,
    /// Mixing angle of the evaluated basis (NaN if the point failed early).
    pub theta: f64,
    pub coupling: f64,
    pub magnon_freq: f64,
    pub drive_freq: f64,
    pub effective_damping: Vec<f64>,
    pub analytic: Vec<f64>,
    /// NaN for unstable or failed points.
    pub numeric: Vec<f64>,
    pub stable: bool,
    pub flags: Vec<Flag>,
}

impl SweepRow {
    fn failed(variable: f64, modes: usize, error: &Error) -> Self {
        Self {
            variable,
            theta: f64::NAN,
            coupling: f64::NAN,
            magnon_freq: f64::NAN,
            drive_freq: f64::NAN,
            effective_damping: vec![f64::NAN; modes],
            analytic: vec![f64::NAN; modes],
            numeric: vec![f64::NAN; modes],
            stable: false,
            flags: vec![Flag::Error(error.to_string())],
        }
    }
}

fn point_scenario(base: &Scenario, spec: &SweepSpec, value: f64, theta: Option<f64>) -> Result<Scenario> {
    let mut s = base.clone();
    if let Some(t) = theta {
        s.theta = Some(t);
    }
    match spec.variable {
        SweepVariable::Theta => s.theta = Some(value),
        SweepVariable::Temperature => s.params.temperature = value,
        SweepVariable::Power | SweepVariable::Field => {
            let cal = spec
                .calibration
                .as_ref()
                .ok_or_else(|| Error::param("drive", "a drive calibration is required"))?;
            let input = if spec.variable == SweepVariable::Power {
                DriveInput::Power(value)
            } else {
                DriveInput::Field(value)
            };
            s.params.rabi_freq = calibrate_drive(cal, input)?;
        }
    }
    Ok(s)
}

/// Evaluates one grid point, folding any error into the row.
pub fn sweep_point(
    base: &Scenario,
    spec: &SweepSpec,
    value: f64,
    theta: Option<f64>,
    mode: AveragesMode,
) -> SweepRow {
    let modes = base.params.mechanics.len();
    let report = point_scenario(base, spec, value, theta).and_then(|s| s.evaluate(mode));
    match report {
        Err(e) => SweepRow::failed(value, modes, &e),
        Ok(r) => {
            let e = &r.evaluation;
            SweepRow {
                variable: value,
                theta: r.basis.theta,
                coupling: r.params.coupling,
                magnon_freq: r.params.magnon_freq,
                drive_freq: r.params.drive_freq,
                effective_damping: e.effective_dampings(),
                analytic: e.analytic_occupations(),
                numeric: e.numeric_occupations().unwrap_or_else(|| vec![f64::NAN; modes]),
                stable: e.stable(),
                flags: e.flags.clone(),
            }
        }
    }
}

/// Evaluates every grid point in parallel; rows come back in grid order
/// and do not depend on the number of worker threads.
pub fn run_sweep(base: &Scenario, spec: &SweepSpec, mode: AveragesMode) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points = spec.points();
    let (first, theta) = points[0];
    point_scenario(base, spec, first, theta)?.resolve()?.0.validate()?;
    Ok(points
        .into_par_iter()
        .map(|(value, theta)| sweep_point(base, spec, value, theta, mode))
        .collect())
}

/// `points` evenly spaced values strictly inside `(start, stop)`, as used
/// for open-interval sweeps such as θ ∈ (0, π/2).
pub fn interior_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    let step = (stop - start) / (points + 1) as f64;
    (1..=points).map(|i| start + step * i as f64).collect()
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (points - 1) as f64;
            (0..points).map(|i| start + step * i as f64).collect()
        }
    }
}
