//! Run configuration: a TOML file with frequencies in Hz.
//!
//! Every `*_hz` field is a cyclic frequency; it is multiplied by 2π on load,
//! so `damping_hz = 100` means κ = 2π × 100 rad/s.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constants::{hz, GYROMAGNETIC_RATIO, YIG_SPIN_DENSITY};
use crate::drive::{calibrate_drive, DriveCalibration, DriveInput, PowerReference, RabiConvention};
use crate::dynamics::{AveragesMode, Network};
use crate::error::{Error, Result};
use crate::optimize::{Bound, FreeVariable, OptimizeSpec};
use crate::params::{MechanicalMode, SystemParams};
use crate::pipeline::Scenario;
use crate::sweep::{interior_grid, linear_grid, SweepSpec, SweepVariable};
use crate::tuning::{tune_n_mode, NModeRequest, NModeTuning, Placement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    #[default]
    Simulate,
    Rates,
    Sweep,
    Tune,
    Optimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub averages: AveragesMode,
    pub system: SystemConfig,
    pub drive: DriveConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tune: Option<TuneConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeConfig>,
    #[serde(default, skip_serializing_if = "OutputConfig::is_empty")]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub cavity_freq_hz: f64,
    pub cavity_linewidth_hz: f64,
    pub magnon_linewidth_hz: f64,
    pub temperature_k: f64,
    /// Mixing angle in rad. When set, the magnon frequency, coupling and
    /// drive frequency are derived from it and must be omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnon_freq_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_freq_hz: Option<f64>,
    /// Shift of the drive away from the tuned or given frequency.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub drive_offset_hz: f64,
    pub mechanics: Vec<MechanicsConfig>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanicsConfig {
    pub freq_hz: f64,
    pub damping_hz: f64,
    pub coupling_hz: f64,
}

/// Drive strength: exactly one of `rabi_hz`, `field_t` or `power_w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_diameter_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_density_m3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gyromagnetic_ratio_hz_per_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_field_t: Option<f64>,
    #[serde(default)]
    pub convention: RabiConvention,
}

/// A list of values, or `points` samples between `start` and `stop`.
/// With `open = true` the endpoints are excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub open: bool,
}

impl GridConfig {
    pub fn values(&self) -> Vec<f64> {
        if !self.values.is_empty() {
            return self.values.clone();
        }
        match (self.start, self.stop, self.points) {
            (Some(a), Some(b), Some(n)) if self.open => interior_grid(a, b, n),
            (Some(a), Some(b), Some(n)) => linear_grid(a, b, n),
            _ => Vec::new(),
        }
    }

    fn validate(&self, path: &str, errors: &mut Vec<Error>) {
        let ranged = self.start.is_some() || self.stop.is_some() || self.points.is_some();
        if !self.values.is_empty() && ranged {
            errors.push(Error::param(path, "give either `values` or `start`/`stop`/`points`"));
        } else if self.values().is_empty() {
            errors.push(Error::param(path, "grid must not be empty"));
        }
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            errors.push(Error::param(format!("{path}.values[{i}]"), "must be finite"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub grid: GridConfig,
    /// Mixing angles crossed with `grid` when the variable is not θ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<GridConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneKind {
    TwoMode,
    NMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    /// Defaults to `two_mode` for two mechanical modes, `n_mode` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<TuneKind>,
    /// Mixing angles to tabulate for the two-mode schedule.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theta: Vec<f64>,
    /// Drive frequency for the N-mode solve; centred when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_freq_hz: Option<f64>,
    /// Matter-mode placement fractions for the N-mode solve.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fractions: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matter_linewidth_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_coupling_hz: Option<f64>,
    /// Amplitude of each matter mode in the driven magnon mode; defaults to
    /// the first matter mode alone.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub participation: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub variable: FreeVariable,
    /// Radians for θ, Hz for the drive offset and Rabi frequency.
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub free: Vec<BoundConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Main output: report for simulate/rates/tune/optimize, CSV for sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Optional gnuplot table for sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

impl OutputConfig {
    fn is_empty(&self) -> bool {
        self.path.is_none() && self.plot.is_none()
    }
}

struct Checker {
    errors: Vec<Error>,
}

impl Checker {
    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.errors.push(Error::param(path, format!("must be positive and finite, got {v}")));
        }
    }

    fn non_negative(&mut self, path: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.errors.push(Error::param(path, format!("must be non-negative and finite, got {v}")));
        }
    }

    fn opt_positive(&mut self, path: &str, v: Option<f64>) {
        if let Some(v) = v {
            self.positive(path, v);
        }
    }

    fn require(&mut self, path: &str, v: Option<f64>, why: &str) {
        match v {
            Some(v) => self.positive(path, v),
            None => self.errors.push(Error::param(path, format!("is required {why}"))),
        }
    }

    fn forbid<T>(&mut self, path: &str, v: &Option<T>, why: &str) {
        if v.is_some() {
            self.errors.push(Error::param(path, format!("must be omitted {why}")));
        }
    }

    fn finish(mut self) -> Result<()> {
        match self.errors.len() {
            0 => Ok(()),
            1 => Err(self.errors.pop().unwrap()),
            _ => Err(Error::Validation(self.errors)),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every field and reports all problems with their paths.
    pub fn validate(&self) -> Result<()> {
        let mut c = Checker { errors: Vec::new() };
        let s = &self.system;
        c.positive("system.cavity_freq_hz", s.cavity_freq_hz);
        c.positive("system.cavity_linewidth_hz", s.cavity_linewidth_hz);
        c.positive("system.magnon_linewidth_hz", s.magnon_linewidth_hz);
        c.non_negative("system.temperature_k", s.temperature_k);
        if !s.drive_offset_hz.is_finite() {
            c.errors.push(Error::param("system.drive_offset_hz", "must be finite"));
        }
        match s.theta {
            Some(theta) => {
                if !(theta > 0.0 && theta < FRAC_PI_2) {
                    c.errors.push(Error::param("system.theta", "must lie strictly inside (0, π/2)"));
                }
                let why = "when theta is set";
                c.forbid("system.magnon_freq_hz", &s.magnon_freq_hz, why);
                c.forbid("system.coupling_hz", &s.coupling_hz, why);
                c.forbid("system.drive_freq_hz", &s.drive_freq_hz, why);
                if s.mechanics.len() < 2 {
                    c.errors.push(Error::param(
                        "system.mechanics",
                        "theta tuning needs at least two mechanical modes",
                    ));
                } else if !(s.mechanics[1].freq_hz > s.mechanics[0].freq_hz) {
                    c.errors.push(Error::param(
                        "system.mechanics[1].freq_hz",
                        "must exceed mechanics[0].freq_hz for theta tuning",
                    ));
                }
            }
            None if !self.uses_n_mode() => {
                let why = "unless theta is set";
                c.require("system.magnon_freq_hz", s.magnon_freq_hz, why);
                c.require("system.coupling_hz", s.coupling_hz, why);
                c.require("system.drive_freq_hz", s.drive_freq_hz, why);
            }
            None => {}
        }
        if s.mechanics.is_empty() {
            c.errors.push(Error::param("system.mechanics", "at least one mechanical mode is required"));
        }
        for (i, m) in s.mechanics.iter().enumerate() {
            c.positive(&format!("system.mechanics[{i}].freq_hz"), m.freq_hz);
            c.positive(&format!("system.mechanics[{i}].damping_hz"), m.damping_hz);
            c.non_negative(&format!("system.mechanics[{i}].coupling_hz"), m.coupling_hz);
            if s.mechanics[..i].iter().any(|o| o.freq_hz == m.freq_hz) {
                c.errors.push(Error::param(
                    format!("system.mechanics[{i}].freq_hz"),
                    "duplicates another mechanical frequency",
                ));
            }
        }
        self.validate_drive(&mut c);
        self.validate_mode(&mut c);
        c.finish()
    }

    fn validate_drive(&self, c: &mut Checker) {
        let d = &self.drive;
        let sources = [d.rabi_hz.is_some(), d.field_t.is_some(), d.power_w.is_some()]
            .iter()
            .filter(|x| **x)
            .count();
        let sweeps_drive = self
            .sweep
            .as_ref()
            .is_some_and(|s| matches!(s.variable, SweepVariable::Power | SweepVariable::Field));
        if sources > 1 {
            c.errors.push(Error::param("drive", "give only one of rabi_hz, field_t, power_w"));
        } else if sources == 0 && !sweeps_drive {
            c.errors.push(Error::param("drive", "one of rabi_hz, field_t, power_w is required"));
        }
        if let Some(r) = d.rabi_hz {
            c.non_negative("drive.rabi_hz", r);
        }
        if let Some(b) = d.field_t {
            c.non_negative("drive.field_t", b);
        }
        if let Some(p) = d.power_w {
            c.non_negative("drive.power_w", p);
        }
        c.opt_positive("drive.sphere_diameter_m", d.sphere_diameter_m);
        c.opt_positive("drive.spin_density_m3", d.spin_density_m3);
        c.opt_positive("drive.gyromagnetic_ratio_hz_per_t", d.gyromagnetic_ratio_hz_per_t);
        c.opt_positive("drive.reference_power_w", d.reference_power_w);
        c.opt_positive("drive.reference_field_t", d.reference_field_t);
        let calibrated = d.field_t.is_some() || d.power_w.is_some() || sweeps_drive;
        if calibrated && d.sphere_diameter_m.is_none() {
            c.errors.push(Error::param(
                "drive.sphere_diameter_m",
                "is required to convert a field or power into a Rabi frequency",
            ));
        }
        let needs_reference = d.power_w.is_some()
            || self.sweep.as_ref().is_some_and(|s| s.variable == SweepVariable::Power);
        if needs_reference {
            if d.reference_power_w.is_none() {
                c.errors.push(Error::param("drive.reference_power_w", "is required for a power input"));
            }
            if d.reference_field_t.is_none() {
                c.errors.push(Error::param("drive.reference_field_t", "is required for a power input"));
            }
        }
        if d.reference_power_w.is_some() != d.reference_field_t.is_some() {
            c.errors.push(Error::param(
                "drive",
                "reference_power_w and reference_field_t must be given together",
            ));
        }
    }

    fn validate_mode(&self, c: &mut Checker) {
        if let Some(s) = &self.sweep {
            s.grid.validate("sweep.grid", &mut c.errors);
            if let Some(t) = &s.theta {
                t.validate("sweep.theta", &mut c.errors);
                if s.variable == SweepVariable::Theta {
                    c.errors.push(Error::param("sweep.theta", "cannot cross a θ sweep with a θ grid"));
                }
            }
            if self.system.mechanics.len() != 2 {
                c.errors.push(Error::param(
                    "system.mechanics",
                    "sweeps tabulate exactly two mechanical modes",
                ));
            }
            let tuned = self.system.theta.is_some()
                || s.variable == SweepVariable::Theta
                || s.theta.is_some();
            if !tuned && self.system.coupling_hz.is_none() {
                c.errors.push(Error::param("sweep", "needs either a θ schedule or explicit frequencies"));
            }
        }
        if let Some(t) = &self.tune {
            for (i, th) in t.theta.iter().enumerate() {
                if !(*th > 0.0 && *th < FRAC_PI_2) {
                    c.errors.push(Error::param(
                        format!("tune.theta[{i}]"),
                        "must lie strictly inside (0, π/2)",
                    ));
                }
            }
            c.opt_positive("tune.drive_freq_hz", t.drive_freq_hz);
            c.opt_positive("tune.matter_linewidth_hz", t.matter_linewidth_hz);
            c.opt_positive("tune.max_coupling_hz", t.max_coupling_hz);
            if t.drive_freq_hz.is_some() && !t.fractions.is_empty() {
                c.errors.push(Error::param("tune", "give either drive_freq_hz or fractions"));
            }
            let m = self.system.mechanics.len().saturating_sub(1);
            if !t.fractions.is_empty() && t.fractions.len() != m {
                c.errors.push(Error::param("tune.fractions", format!("expected {m} entries")));
            }
            if !t.participation.is_empty() && t.participation.len() != m {
                c.errors.push(Error::param("tune.participation", format!("expected {m} entries")));
            }
        }
        if let Some(o) = &self.optimize {
            if o.free.is_empty() {
                c.errors.push(Error::param("optimize.free", "at least one free variable is required"));
            }
            for (i, b) in o.free.iter().enumerate() {
                if !(b.lower.is_finite() && b.upper.is_finite() && b.lower < b.upper) {
                    c.errors.push(Error::param(
                        format!("optimize.free[{i}]"),
                        "bounds must be finite with lower < upper",
                    ));
                }
            }
        }
        let missing = match self.mode {
            RunMode::Sweep if self.sweep.is_none() => Some("sweep"),
            RunMode::Optimize if self.optimize.is_none() => Some("optimize"),
            _ => None,
        };
        if let Some(section) = missing {
            c.errors.push(Error::param(section, "section is required for this mode"));
        }
    }

    /// Whether the configured system is an N-polariton network.
    pub fn uses_n_mode(&self) -> bool {
        match self.tune.as_ref().and_then(|t| t.kind) {
            Some(kind) => kind == TuneKind::NMode,
            None => self.tune.is_some() && self.system.mechanics.len() > 2,
        }
    }

    pub fn mechanics(&self) -> Vec<MechanicalMode> {
        self.system
            .mechanics
            .iter()
            .map(|m| MechanicalMode::new(hz(m.freq_hz), hz(m.damping_hz), hz(m.coupling_hz)))
            .collect()
    }

    pub fn calibration(&self) -> Option<DriveCalibration> {
        let d = &self.drive;
        let diameter = d.sphere_diameter_m?;
        Some(DriveCalibration {
            sphere_diameter: diameter,
            spin_density: d.spin_density_m3.unwrap_or(YIG_SPIN_DENSITY),
            gyromagnetic_ratio: d.gyromagnetic_ratio_hz_per_t.map_or(GYROMAGNETIC_RATIO, hz),
            reference: d
                .reference_power_w
                .zip(d.reference_field_t)
                .map(|(power, field)| PowerReference { power, field }),
            convention: d.convention,
        })
    }

    /// Drive Rabi frequency in rad/s; zero when only a sweep sets it.
    pub fn rabi_freq(&self) -> Result<f64> {
        let d = &self.drive;
        if let Some(r) = d.rabi_hz {
            return Ok(hz(r));
        }
        let input = match (d.field_t, d.power_w) {
            (Some(b), _) => DriveInput::Field(b),
            (None, Some(p)) => DriveInput::Power(p),
            (None, None) => return Ok(0.0),
        };
        let cal = self
            .calibration()
            .ok_or_else(|| Error::param("drive.sphere_diameter_m", "is required"))?;
        calibrate_drive(&cal, input)
    }

    /// The two-polariton scenario described by `[system]` and `[drive]`.
    pub fn scenario(&self) -> Result<Scenario> {
        let s = &self.system;
        let to_rad = |v: Option<f64>| v.map_or(0.0, hz);
        let params = SystemParams {
            cavity_freq: hz(s.cavity_freq_hz),
            magnon_freq: to_rad(s.magnon_freq_hz),
            coupling: to_rad(s.coupling_hz),
            cavity_linewidth: hz(s.cavity_linewidth_hz),
            magnon_linewidth: hz(s.magnon_linewidth_hz),
            mechanics: self.mechanics(),
            drive_freq: to_rad(s.drive_freq_hz),
            rabi_freq: self.rabi_freq()?,
            temperature: s.temperature_k,
        };
        Ok(Scenario { params, theta: s.theta, drive_offset: hz(s.drive_offset_hz) })
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::param("sweep", "section is required"))?;
        let mut spec = SweepSpec::new(s.variable, s.grid.values());
        if let Some(t) = &s.theta {
            spec = spec.with_theta(t.values());
        }
        if let Some(cal) = self.calibration() {
            spec = spec.with_calibration(cal);
        }
        Ok(spec)
    }

    pub fn optimize_spec(&self) -> Result<OptimizeSpec> {
        let o = self
            .optimize
            .as_ref()
            .ok_or_else(|| Error::param("optimize", "section is required"))?;
        let bounds = o
            .free
            .iter()
            .map(|b| {
                let scale = match b.variable {
                    FreeVariable::Theta => 1.0,
                    FreeVariable::DriveOffset | FreeVariable::Rabi => hz(1.0),
                };
                Bound { variable: b.variable, lower: b.lower * scale, upper: b.upper * scale }
            })
            .collect();
        let defaults = OptimizeSpec::new(bounds);
        Ok(OptimizeSpec {
            grid_points: o.grid_points.unwrap_or(defaults.grid_points),
            budget: o.budget.unwrap_or(defaults.budget),
            restarts: o.restarts.unwrap_or(defaults.restarts),
            seed: o.seed.unwrap_or(defaults.seed),
            tolerance: o.tolerance.unwrap_or(defaults.tolerance),
            ..defaults
        })
    }

    pub fn n_mode_request(&self) -> Result<NModeRequest> {
        let t = self.tune.clone().unwrap_or(TuneConfig {
            kind: Some(TuneKind::NMode),
            theta: Vec::new(),
            drive_freq_hz: None,
            fractions: Vec::new(),
            matter_linewidth_hz: None,
            max_coupling_hz: None,
            participation: Vec::new(),
        });
        let placement = match (t.drive_freq_hz, t.fractions.is_empty()) {
            (Some(w0), _) => Placement::DriveFrequency(hz(w0)),
            (None, false) => Placement::Fractions(t.fractions.clone()),
            (None, true) => Placement::Centered,
        };
        Ok(NModeRequest {
            cavity_freq: hz(self.system.cavity_freq_hz),
            cavity_linewidth: hz(self.system.cavity_linewidth_hz),
            matter_linewidth: hz(t.matter_linewidth_hz.unwrap_or(self.system.magnon_linewidth_hz)),
            mech_freqs: self.mechanics().iter().map(|m| m.freq).collect(),
            placement,
            max_coupling: t.max_coupling_hz.map(hz),
        })
    }

    /// Tunes the N-polariton network and returns it with the tuning.
    pub fn n_mode_network(&self) -> Result<(NModeTuning, Network)> {
        let tuning = tune_n_mode(&self.n_mode_request()?)?;
        let m = tuning.matter.len();
        let participation = match self.tune.as_ref().map(|t| t.participation.clone()) {
            Some(p) if !p.is_empty() => p,
            _ => {
                let mut p = vec![0.0; m];
                p[0] = 1.0;
                p
            }
        };
        let network = tuning.network(
            hz(self.system.cavity_linewidth_hz),
            &participation,
            self.mechanics(),
            self.rabi_freq()?,
            self.system.temperature_k,
        )?;
        Ok((tuning, network))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const PRESET: &str = r#"
mode = "sweep"

[system]
cavity_freq_hz = 10e9
cavity_linewidth_hz = 1e6
magnon_linewidth_hz = 1e6
temperature_k = 0.01
theta = 0.785

[[system.mechanics]]
freq_hz = 10e6
damping_hz = 100
coupling_hz = 0.2

[[system.mechanics]]
freq_hz = 30e6
damping_hz = 100
coupling_hz = 0.2

[drive]
field_t = 2.7e-5
sphere_diameter_m = 250e-6

[sweep]
variable = "theta"
grid = { start = 0.0, stop = 1.5707963267948966, points = 101, open = true }
"#;

    #[test]
    fn parses_and_converts_to_angular_units() {
        let c = RunConfig::from_toml_str(PRESET).unwrap();
        let s = c.scenario().unwrap();
        assert_eq!(s.params.cavity_freq, hz(10e9));
        assert_eq!(s.params.mechanics[0].damping, hz(100.0));
        assert!((s.params.rabi_freq - 7.852_579_754_374_496e13).abs() / 7.85e13 < 1e-14);
        assert_eq!(c.sweep_spec().unwrap().values.len(), 101);
    }

    #[test]
    fn reports_every_bad_field_with_its_path() {
        let text = PRESET
            .replace("cavity_linewidth_hz = 1e6", "cavity_linewidth_hz = -1")
            .replace("damping_hz = 100\ncoupling_hz = 0.2\n\n[drive]", "damping_hz = 0\ncoupling_hz = 0.2\n\n[drive]")
            .replace("theta = 0.785", "theta = 2.0");
        let err = RunConfig::from_toml_str(&text).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Validation(ref v) if v.len() == 3), "{msg}");
        assert!(msg.contains("system.cavity_linewidth_hz"));
        assert!(msg.contains("system.mechanics[1].damping_hz"));
        assert!(msg.contains("system.theta"));
    }

    #[test]
    fn explicit_frequencies_required_without_theta() {
        let text = PRESET.replace("theta = 0.785\n", "").replace("mode = \"sweep\"", "mode = \"simulate\"");
        let text = text.split("[sweep]").next().unwrap();
        let msg = RunConfig::from_toml_str(text).unwrap_err().to_string();
        assert!(msg.contains("system.magnon_freq_hz"));
        assert!(msg.contains("system.coupling_hz"));
        assert!(msg.contains("system.drive_freq_hz"));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let text = PRESET.replace(
            "grid = { start = 0.0, stop = 1.5707963267948966, points = 101, open = true }",
            "grid = { values = [] }",
        );
        let msg = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(msg.contains("sweep.grid"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = PRESET.replace("temperature_k = 0.01", "temperature_k = 0.01\ntemprature = 1");
        assert!(matches!(RunConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn power_requires_reference() {
        let text = PRESET.replace("field_t = 2.7e-5", "power_w = 0.069");
        let msg = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(msg.contains("drive.reference_power_w"));
    }

    #[test]
    fn power_scales_field_through_reference() {
        let text = PRESET.replace(
            "field_t = 2.7e-5",
            "power_w = 0.069\nreference_power_w = 4.3e-3\nreference_field_t = 2.7e-5",
        );
        let c = RunConfig::from_toml_str(&text).unwrap();
        let want = 7.852_579_754_374_496e13 * (0.069f64 / 4.3e-3).sqrt();
        assert!((c.rabi_freq().unwrap() - want).abs() / want < 1e-14);
    }

    #[test]
    fn three_mechanics_default_to_n_mode() {
        let text = r#"
mode = "simulate"
[system]
cavity_freq_hz = 10e9
cavity_linewidth_hz = 1e6
magnon_linewidth_hz = 1e6
temperature_k = 0.01
mechanics = [
  { freq_hz = 10e6, damping_hz = 100, coupling_hz = 0.2 },
  { freq_hz = 20e6, damping_hz = 100, coupling_hz = 0.2 },
  { freq_hz = 35e6, damping_hz = 100, coupling_hz = 0.2 },
]
[drive]
rabi_hz = 1.25e13
[tune]
"#;
        let c = RunConfig::from_toml_str(text).unwrap();
        assert!(c.uses_n_mode());
        let (t, net) = c.n_mode_network().unwrap();
        assert_eq!(t.matter.len(), 2);
        assert_eq!(net.polaritons.len(), 3);
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            1e9..2e10f64,
            1e5..5e6f64,
            0.0..1.0f64,
            proptest::option::of(0.01..1.5f64),
            proptest::collection::vec((1e6..1e8f64, 1.0..1e3f64, 0.0..10.0f64), 1..4),
            0.0..1e13f64,
            any::<bool>(),
        )
            .prop_map(|(wa, k, t, theta, mech, rabi, with_sweep)| RunConfig {
                mode: if with_sweep { RunMode::Sweep } else { RunMode::Simulate },
                averages: AveragesMode::SelfConsistent,
                system: SystemConfig {
                    cavity_freq_hz: wa,
                    cavity_linewidth_hz: k,
                    magnon_linewidth_hz: 2.0 * k,
                    temperature_k: t,
                    theta,
                    magnon_freq_hz: theta.map_or(Some(wa * 1.001), |_| None),
                    coupling_hz: theta.map_or(Some(1e7), |_| None),
                    drive_freq_hz: theta.map_or(Some(wa * 0.99), |_| None),
                    drive_offset_hz: 0.0,
                    mechanics: mech
                        .into_iter()
                        .map(|(f, d, g)| MechanicsConfig { freq_hz: f, damping_hz: d, coupling_hz: g })
                        .collect(),
                },
                drive: DriveConfig { rabi_hz: Some(rabi), ..Default::default() },
                sweep: with_sweep.then(|| SweepConfig {
                    variable: SweepVariable::Temperature,
                    grid: GridConfig { values: vec![0.01, 0.1, 0.2], ..Default::default() },
                    theta: None,
                }),
                tune: None,
                optimize: None,
                output: OutputConfig { path: Some("out.csv".into()), plot: None },
            })
    }

    proptest! {
        #[test]
        fn toml_round_trip(config in arb_config()) {
            let text = config.to_toml_string().unwrap();
            let back: RunConfig = toml::from_str(&text).unwrap();
            prop_assert_eq!(back, config);
        }
    }
}
