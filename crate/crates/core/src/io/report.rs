//! TOML reports for the single-point commands. Key names carry units;
//! frequencies and rates are cyclic (Hz).

use std::f64::consts::TAU;

use serde::Serialize;

use crate::analytics::{Flag, RESOLVED_SIDEBAND_THRESHOLD};
use crate::dynamics::{AveragesMode, Network};
use crate::error::{Error, Result};
use crate::optimize::{FreeVariable, OptimizeResult, OptimizeSpec};
use crate::pipeline::{Evaluation, PointReport};
use crate::tuning::{NModeTuning, TwoModeTuning};

fn hz(w: f64) -> f64 {
    w / TAU
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolaritonEntry {
    pub label: String,
    pub freq_hz: f64,
    pub detuning_hz: f64,
    pub linewidth_hz: f64,
    pub drive_weight: f64,
    pub coupling_weights: Vec<f64>,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEntry {
    pub polariton: String,
    pub stokes_hz: f64,
    pub anti_stokes_hz: f64,
    pub net_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeEntry {
    pub name: String,
    pub freq_hz: f64,
    pub damping_hz: f64,
    /// |G_jM| seen by the fluctuations.
    pub effective_coupling_hz: f64,
    pub thermal_occupation: f64,
    pub analytic_occupation: f64,
    pub all_polariton_occupation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric_occupation: Option<f64>,
    pub effective_damping_hz: f64,
    pub dominant_polariton: String,
    pub backaction_limit: f64,
    pub ground_state: bool,
    pub rates: Vec<RateEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub averages: AveragesMode,
    pub stable: bool,
    pub spectral_abscissa_per_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_rad: Option<f64>,
    pub drive_freq_hz: f64,
    pub rabi_hz: f64,
    pub temperature_k: f64,
    pub magnon_amplitude_re: f64,
    pub magnon_amplitude_im: f64,
    pub mean_field_iterations: usize,
    pub flags: Vec<String>,
    pub warnings: Vec<String>,
    pub polaritons: Vec<PolaritonEntry>,
    pub modes: Vec<ModeEntry>,
}

fn warning(flag: &Flag, summary: &[ModeEntry], narrowest_hz: f64) -> String {
    match flag {
        Flag::StrongCoupling { mode } => format!(
            "{}: effective coupling {:.3e} Hz exceeds half the narrowest polariton linewidth \
             ({:.3e} Hz); the analytic rates are outside their weak-coupling regime",
            summary[*mode].name, summary[*mode].effective_coupling_hz, 0.5 * narrowest_hz
        ),
        Flag::UnresolvedSideband { mode } => format!(
            "{}: quantum backaction limit {:.3e} exceeds {RESOLVED_SIDEBAND_THRESHOLD}; \
             the sideband through {} is not resolved",
            summary[*mode].name, summary[*mode].backaction_limit, summary[*mode].dominant_polariton
        ),
        Flag::Unstable => "the linearized dynamics are unstable; no steady state exists".into(),
        Flag::Error(msg) => msg.clone(),
    }
}

impl PointSummary {
    pub fn new(net: &Network, evaluation: &Evaluation, theta: Option<f64>) -> Self {
        let e = evaluation;
        let avg = &e.averages;
        let numeric = e.numeric_occupations();
        let polaritons = net
            .polaritons
            .iter()
            .enumerate()
            .map(|(i, p)| PolaritonEntry {
                label: p.label.clone(),
                freq_hz: hz(p.freq),
                detuning_hz: hz(p.detuning),
                linewidth_hz: hz(p.linewidth),
                drive_weight: p.drive_weight,
                coupling_weights: p.coupling_weights.clone(),
                amplitude_re: avg.polaritons[i].re,
                amplitude_im: avg.polaritons[i].im,
            })
            .collect();
        let modes: Vec<ModeEntry> = e
            .analytics
            .modes
            .iter()
            .zip(&net.mechanics)
            .enumerate()
            .map(|(j, (m, mech))| ModeEntry {
                name: format!("b{}", j + 1),
                freq_hz: hz(mech.freq),
                damping_hz: hz(mech.damping),
                effective_coupling_hz: hz(m.coupling.abs()),
                thermal_occupation: m.thermal_occupation,
                analytic_occupation: m.cooling.effective_occupation,
                all_polariton_occupation: m.cooling.all_polariton_occupation,
                numeric_occupation: numeric.as_ref().map(|n| n[j]),
                effective_damping_hz: hz(m.cooling.effective_damping),
                dominant_polariton: m.dominant_label.clone(),
                backaction_limit: m.backaction_limit,
                ground_state: numeric.as_ref().is_some_and(|n| n[j] < 1.0),
                rates: m
                    .rates
                    .iter()
                    .zip(&net.polaritons)
                    .map(|(r, p)| RateEntry {
                        polariton: p.label.clone(),
                        stokes_hz: hz(r.stokes),
                        anti_stokes_hz: hz(r.anti_stokes),
                        net_hz: hz(r.net()),
                    })
                    .collect(),
            })
            .collect();
        let narrowest = net.polaritons.iter().map(|p| hz(p.linewidth)).fold(f64::INFINITY, f64::min);
        let warnings = e.flags.iter().map(|f| warning(f, &modes, narrowest)).collect();
        PointSummary {
            averages: avg.mode,
            stable: e.stable(),
            spectral_abscissa_per_s: e.stability.spectral_abscissa,
            lyapunov_residual: e.steady.as_ref().map(|s| s.lyapunov_residual),
            theta_rad: theta,
            drive_freq_hz: hz(net.drive_freq),
            rabi_hz: hz(net.rabi_freq),
            temperature_k: net.temperature,
            magnon_amplitude_re: avg.driven.re,
            magnon_amplitude_im: avg.driven.im,
            mean_field_iterations: avg.iterations,
            flags: e.flags.iter().map(ToString::to_string).collect(),
            warnings,
            polaritons,
            modes,
        }
    }

    pub fn from_point(report: &PointReport) -> Self {
        let net = Network::from_two_mode(&report.params, &report.basis);
        Self::new(&net, &report.evaluation, Some(report.basis.theta))
    }

    /// Drops the numeric steady state, leaving the analytic rates.
    pub fn analytic_only(mut self) -> Self {
        self.lyapunov_residual = None;
        for m in &mut self.modes {
            m.numeric_occupation = None;
            m.ground_state = m.analytic_occupation < 1.0;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoModeEntry {
    pub theta_rad: f64,
    pub coupling_hz: f64,
    pub magnon_freq_hz: f64,
    pub drive_freq_hz: f64,
    /// Drive frequency relative to the cavity.
    pub drive_detuning_hz: f64,
}

impl From<&TwoModeTuning> for TwoModeEntry {
    fn from(t: &TwoModeTuning) -> Self {
        TwoModeEntry {
            theta_rad: t.theta,
            coupling_hz: hz(t.coupling),
            magnon_freq_hz: hz(t.magnon_freq),
            drive_freq_hz: hz(t.drive_freq),
            drive_detuning_hz: hz(t.drive_freq - t.cavity_freq),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatterEntry {
    pub freq_hz: f64,
    pub coupling_hz: f64,
    pub linewidth_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NModeEntry {
    pub cavity_freq_hz: f64,
    pub drive_freq_hz: f64,
    pub fractions: Vec<f64>,
    pub residual_hz: f64,
    pub matter: Vec<MatterEntry>,
}

impl From<&NModeTuning> for NModeEntry {
    fn from(t: &NModeTuning) -> Self {
        NModeEntry {
            cavity_freq_hz: hz(t.cavity_freq),
            drive_freq_hz: hz(t.drive_freq),
            fractions: t.fractions.clone(),
            residual_hz: hz(t.residual),
            matter: t
                .matter
                .iter()
                .map(|m| MatterEntry {
                    freq_hz: hz(m.freq),
                    coupling_hz: hz(m.coupling),
                    linewidth_hz: hz(m.linewidth),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneReport {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub two_mode: Vec<TwoModeEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_mode: Option<NModeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeValue {
    pub variable: FreeVariable,
    /// rad for θ, Hz otherwise.
    pub value: f64,
    pub unit: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub point: Vec<f64>,
    pub worst_occupation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub worst_occupation: f64,
    pub evaluations: usize,
    pub seed: u64,
    pub best: Vec<FreeValue>,
    pub point: PointSummary,
    pub trace: Vec<TraceRow>,
}

fn free_value(variable: FreeVariable, x: f64) -> (f64, &'static str) {
    match variable {
        FreeVariable::Theta => (x, "rad"),
        FreeVariable::DriveOffset | FreeVariable::Rabi => (hz(x), "Hz"),
    }
}

impl OptimizeReport {
    pub fn new(spec: &OptimizeSpec, result: &OptimizeResult) -> Self {
        let best = spec
            .bounds
            .iter()
            .zip(&result.best)
            .map(|(b, &x)| {
                let (value, unit) = free_value(b.variable, x);
                FreeValue { variable: b.variable, value, unit }
            })
            .collect();
        let trace = result
            .trace
            .iter()
            .map(|t| TraceRow {
                point: spec
                    .bounds
                    .iter()
                    .zip(&t.point)
                    .map(|(b, &x)| free_value(b.variable, x).0)
                    .collect(),
                worst_occupation: t.objective,
            })
            .collect();
        OptimizeReport {
            worst_occupation: result.objective,
            evaluations: result.trace.len(),
            seed: spec.seed,
            best,
            point: PointSummary::from_point(&result.report),
            trace,
        }
    }
}

/// Serializes any report as TOML.
pub fn to_toml<T: Serialize>(report: &T) -> Result<String> {
    toml::to_string(report).map_err(|e| Error::Io(format!("cannot serialize report: {e}")))
}
