//! Bose–Einstein occupation of bath modes.

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};

/// Mean thermal occupation `1/(exp(ħω/k_BT) − 1)` of a bosonic mode with
/// angular frequency `freq` (rad/s) at temperature `temperature` (K).
///
/// `expm1` keeps full relative precision in the classical limit ħω ≪ k_BT,
/// and the deep quantum limit underflows cleanly to 0.
pub fn thermal_occupation(freq: f64, temperature: f64) -> Result<f64> {
    if !(freq > 0.0) || !freq.is_finite() {
        return Err(Error::param("freq", format!("must be positive, got {freq}")));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::param(
            "temperature",
            format!("must be non-negative, got {temperature}"),
        ));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * freq / (K_B * temperature);
    Ok(1.0 / x.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz;

    #[test]
    fn zero_temperature_is_exactly_zero() {
        assert_eq!(thermal_occupation(hz(1e6), 0.0).unwrap(), 0.0);
        assert_eq!(thermal_occupation(hz(10e9), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn megahertz_mode_at_ten_millikelvin() {
        // 40-digit evaluation of the closed form: 20.34061835180099681...
        let n = thermal_occupation(hz(10e6), 0.01).unwrap();
        assert!((n - 20.340_618_351_800_997).abs() / 20.34 < 1e-13, "{n}");
    }

    #[test]
    fn gigahertz_mode_is_frozen_out() {
        // ħω/k_BT ≈ 47.99, so n ≈ e^{-x} ≈ 1.436e-21.
        let n = thermal_occupation(hz(10e9), 0.01).unwrap();
        assert!(n < 1e-20);
        assert!((n - 1.435_992_501_216_95e-21).abs() / 1.436e-21 < 1e-10);
    }

    #[test]
    fn classical_limit_matches_expansion() {
        // k_BT/ħω − 1/2 + ħω/(12 k_BT)
        let (w, t) = (hz(1e3), 1.0);
        let x = HBAR * w / (K_B * t);
        let series = 1.0 / x - 0.5 + x / 12.0;
        let n = thermal_occupation(w, t).unwrap();
        assert!((n - series).abs() / series < 1e-12);
    }

    #[test]
    fn rejects_non_positive_frequency() {
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(-1.0, 1.0).is_err());
        assert!(thermal_occupation(1.0, -1e-3).is_err());
    }
}
