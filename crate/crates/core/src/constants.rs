//! Physical constants (SI) and unit helpers.

use std::f64::consts::TAU;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Spin density of yttrium iron garnet, m⁻³.
pub const YIG_SPIN_DENSITY: f64 = 4.22e27;

/// Electron gyromagnetic ratio γ₀ in rad/s per tesla (γ₀/2π = 28 GHz/T).
pub const GYROMAGNETIC_RATIO: f64 = TAU * 28.0e9;

/// Converts a cyclic frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn hz(f: f64) -> f64 {
    TAU * f
}

/// Converts an angular frequency in rad/s to Hz.
#[inline]
pub fn to_hz(w: f64) -> f64 {
    w / TAU
}
