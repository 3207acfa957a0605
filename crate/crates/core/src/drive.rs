//! Drive-strength calibration: field amplitude or power to Rabi frequency.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::{GYROMAGNETIC_RATIO, YIG_SPIN_DENSITY};
use crate::error::{Error, Result};

/// How the Rabi-frequency formula `(√5/4)·γ₀·√N·B₀` is turned into an
/// angular frequency.
///
/// `Angular` inserts γ₀ in rad/s per tesla. `Cyclic` inserts γ₀/2π (the
/// 28 GHz/T figure) and uses the result directly as Ω in rad/s. Under this
/// convention a 4.3 mW drive on a 250 μm sphere stays in the weak
/// polaromechanical coupling regime; it is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RabiConvention {
    #[default]
    Cyclic,
    Angular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerReference {
    /// Drive power in watts.
    pub power: f64,
    /// Field amplitude produced by `power`, in tesla.
    pub field: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveCalibration {
    /// Diameter of the YIG sphere in meters.
    pub sphere_diameter: f64,
    /// Spin density in m⁻³.
    pub spin_density: f64,
    /// Gyromagnetic ratio γ₀ in rad/s per tesla.
    pub gyromagnetic_ratio: f64,
    pub reference: Option<PowerReference>,
    pub convention: RabiConvention,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveInput {
    /// Field amplitude B₀ in tesla.
    Field(f64),
    /// Drive power in watts; requires a reference point.
    Power(f64),
}

impl DriveCalibration {
    /// YIG sphere of the given diameter with default material constants.
    pub fn yig_sphere(diameter: f64) -> Self {
        Self {
            sphere_diameter: diameter,
            spin_density: YIG_SPIN_DENSITY,
            gyromagnetic_ratio: GYROMAGNETIC_RATIO,
            reference: None,
            convention: RabiConvention::default(),
        }
    }

    pub fn with_reference(mut self, power: f64, field: f64) -> Self {
        self.reference = Some(PowerReference { power, field });
        self
    }

    pub fn with_convention(mut self, convention: RabiConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Number of spins N = ρ·(4/3)π(d/2)³.
    pub fn spin_number(&self) -> f64 {
        let r = 0.5 * self.sphere_diameter;
        self.spin_density * 4.0 / 3.0 * PI * r * r * r
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        for (field, v) in [
            ("sphere_diameter", self.sphere_diameter),
            ("spin_density", self.spin_density),
            ("gyromagnetic_ratio", self.gyromagnetic_ratio),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(Error::param(field, format!("must be positive, got {v}")));
            }
        }
        if let Some(r) = self.reference {
            if !(r.power > 0.0 && r.power.is_finite()) {
                errors.push(Error::param("reference.power", "must be positive"));
            }
            if !(r.field > 0.0 && r.field.is_finite()) {
                errors.push(Error::param("reference.field", "must be positive"));
            }
        }
        match errors.len() {
            0 => Ok(()),
            1 => Err(errors.pop().unwrap()),
            _ => Err(Error::Validation(errors)),
        }
    }

    /// Field amplitude for a drive power, using P ∝ B₀² through the reference.
    pub fn field_for_power(&self, power: f64) -> Result<f64> {
        let r = self
            .reference
            .ok_or_else(|| Error::param("reference", "power input requires a reference point"))?;
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::param("power", format!("must be non-negative, got {power}")));
        }
        Ok(r.field * (power / r.power).sqrt())
    }

    /// Rabi frequency Ω (rad/s) for a field amplitude in tesla.
    pub fn rabi_for_field(&self, field: f64) -> Result<f64> {
        if !(field >= 0.0 && field.is_finite()) {
            return Err(Error::param("field", format!("must be non-negative, got {field}")));
        }
        let gamma = match self.convention {
            RabiConvention::Angular => self.gyromagnetic_ratio,
            RabiConvention::Cyclic => self.gyromagnetic_ratio / TAU,
        };
        Ok(5f64.sqrt() / 4.0 * gamma * self.spin_number().sqrt() * field)
    }
}

pub fn calibrate_drive(cal: &DriveCalibration, input: DriveInput) -> Result<f64> {
    cal.validate()?;
    let field = match input {
        DriveInput::Field(b) => b,
        DriveInput::Power(p) => cal.field_for_power(p)?,
    };
    cal.rabi_for_field(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Direct 40-digit evaluation for d = 250 μm, B₀ = 2.7e-5 T:
    // N = 3.4524794266e16, Ω(angular) = 4.933921373614172e14 rad/s.
    const OMEGA_ANGULAR: f64 = 4.933_921_373_614_172e14;
    const OMEGA_CYCLIC: f64 = 7.852_579_754_374_496e13;

    #[test]
    fn spin_number_of_reference_sphere() {
        let cal = DriveCalibration::yig_sphere(250e-6);
        assert!((cal.spin_number() - 3.452_479_426_601_283e16).abs() / 3.45e16 < 1e-13);
    }

    #[test]
    fn field_input_both_conventions() {
        let cal = DriveCalibration::yig_sphere(250e-6);
        let cyc = calibrate_drive(&cal, DriveInput::Field(2.7e-5)).unwrap();
        assert!((cyc - OMEGA_CYCLIC).abs() / OMEGA_CYCLIC < 1e-13);
        let cal = cal.with_convention(RabiConvention::Angular);
        let ang = calibrate_drive(&cal, DriveInput::Field(2.7e-5)).unwrap();
        assert!((ang - OMEGA_ANGULAR).abs() / OMEGA_ANGULAR < 1e-13);
    }

    #[test]
    fn zero_field_gives_zero_rabi() {
        let cal = DriveCalibration::yig_sphere(250e-6);
        assert_eq!(calibrate_drive(&cal, DriveInput::Field(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn power_scales_as_square_of_field() {
        let cal = DriveCalibration::yig_sphere(250e-6).with_reference(4.3e-3, 2.7e-5);
        let b = cal.field_for_power(69e-3).unwrap();
        assert!((b - 1.081_568_628_277_66e-4).abs() / 1.08e-4 < 1e-13);
        let from_power = calibrate_drive(&cal, DriveInput::Power(69e-3)).unwrap();
        let from_field = calibrate_drive(&cal, DriveInput::Field(b)).unwrap();
        assert_eq!(from_power, from_field);
        let at_ref = calibrate_drive(&cal, DriveInput::Power(4.3e-3)).unwrap();
        assert!((at_ref - OMEGA_CYCLIC).abs() / OMEGA_CYCLIC < 1e-13);
    }

    #[test]
    fn power_without_reference_is_rejected() {
        let cal = DriveCalibration::yig_sphere(250e-6);
        assert!(calibrate_drive(&cal, DriveInput::Power(1e-3)).is_err());
    }

    #[test]
    fn power_map_is_monotone() {
        let cal = DriveCalibration::yig_sphere(250e-6).with_reference(4.3e-3, 2.7e-5);
        let mut last = -1.0;
        for p in [0.0, 1e-4, 1e-3, 4.3e-3, 1e-2, 0.069, 1.0] {
            let b = cal.field_for_power(p).unwrap();
            assert!(b > last);
            last = b;
        }
    }
}
