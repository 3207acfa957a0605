//! Physical description of a cavity–magnon–mechanics system.
//!
//! Every frequency and rate is an angular frequency in rad/s. Linewidths are
//! half-widths, i.e. amplitude decay rates entering the equations of motion
//! as `−κ a`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalMode {
    /// Resonance frequency ω_j.
    pub freq: f64,
    /// Amplitude damping rate κ_j.
    pub damping: f64,
    /// Bare single-magnon magnomechanical coupling G_0j.
    pub bare_coupling: f64,
}

impl MechanicalMode {
    pub fn new(freq: f64, damping: f64, bare_coupling: f64) -> Self {
        Self {
            freq,
            damping,
            bare_coupling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub cavity_freq: f64,
    pub magnon_freq: f64,
    /// Photon–magnon coupling g.
    pub coupling: f64,
    pub cavity_linewidth: f64,
    pub magnon_linewidth: f64,
    pub mechanics: Vec<MechanicalMode>,
    pub drive_freq: f64,
    /// Drive Rabi frequency Ω on the magnon mode.
    pub rabi_freq: f64,
    /// Bath temperature in kelvin.
    pub temperature: f64,
}

fn check_positive(errors: &mut Vec<Error>, field: &str, value: f64) {
    if !(value > 0.0 && value.is_finite()) {
        errors.push(Error::param(field, format!("must be positive and finite, got {value}")));
    }
}

impl SystemParams {
    /// Checks every invariant and reports all offending fields at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        check_positive(&mut errors, "cavity_freq", self.cavity_freq);
        check_positive(&mut errors, "magnon_freq", self.magnon_freq);
        check_positive(&mut errors, "coupling", self.coupling);
        check_positive(&mut errors, "cavity_linewidth", self.cavity_linewidth);
        check_positive(&mut errors, "magnon_linewidth", self.magnon_linewidth);
        check_positive(&mut errors, "drive_freq", self.drive_freq);
        if !(self.rabi_freq >= 0.0 && self.rabi_freq.is_finite()) {
            errors.push(Error::param(
                "rabi_freq",
                format!("must be non-negative and finite, got {}", self.rabi_freq),
            ));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            errors.push(Error::param(
                "temperature",
                format!("must be non-negative and finite, got {}", self.temperature),
            ));
        }
        errors.extend(validate_mechanics(&self.mechanics, "mechanics"));
        match errors.len() {
            0 => Ok(()),
            1 => Err(errors.pop().unwrap()),
            _ => Err(Error::Validation(errors)),
        }
    }

    /// Cavity–magnon detuning Δ_am = ω_a − ω_m.
    pub fn cavity_magnon_detuning(&self) -> f64 {
        self.cavity_freq - self.magnon_freq
    }
}

pub(crate) fn validate_mechanics(mechanics: &[MechanicalMode], path: &str) -> Vec<Error> {
    let mut errors = Vec::new();
    if mechanics.is_empty() {
        errors.push(Error::param(path, "at least one mechanical mode is required"));
    }
    for (i, m) in mechanics.iter().enumerate() {
        check_positive(&mut errors, &format!("{path}[{i}].freq"), m.freq);
        check_positive(&mut errors, &format!("{path}[{i}].damping"), m.damping);
        if !(m.bare_coupling >= 0.0 && m.bare_coupling.is_finite()) {
            errors.push(Error::param(
                format!("{path}[{i}].bare_coupling"),
                format!("must be non-negative and finite, got {}", m.bare_coupling),
            ));
        }
    }
    for i in 0..mechanics.len() {
        for j in (i + 1)..mechanics.len() {
            if mechanics[i].freq == mechanics[j].freq {
                errors.push(Error::param(
                    format!("{path}[{j}].freq"),
                    format!("duplicates the frequency of {path}[{i}]"),
                ));
            }
        }
    }
    errors
}
