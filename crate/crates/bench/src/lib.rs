//! Shared fixtures for the benchmarks.

use polaromech::constants::hz;
use polaromech::{MechanicalMode, Scenario, SystemParams};

/// The two-mode device at the 4.3 mW operating point, tuned to θ = π/4.
pub fn two_mode_scenario() -> Scenario {
    let params = SystemParams {
        cavity_freq: hz(10e9),
        magnon_freq: hz(10e9),
        coupling: hz(10e6),
        cavity_linewidth: hz(1e6),
        magnon_linewidth: hz(1e6),
        mechanics: vec![
            MechanicalMode::new(hz(10e6), hz(100.0), hz(0.2)),
            MechanicalMode::new(hz(30e6), hz(100.0), hz(0.2)),
        ],
        drive_freq: hz(10e9),
        rabi_freq: 7.852_579_754_374_496e13,
        temperature: 0.01,
    };
    Scenario::tuned(params, std::f64::consts::FRAC_PI_4)
}

/// `n` uncoupled mechanical modes spaced by 5 MHz, for scaling the
/// Lyapunov solve with system size.
pub fn many_mode_scenario(n: usize) -> Scenario {
    let mut s = two_mode_scenario();
    s.params.mechanics = (0..n)
        .map(|i| MechanicalMode::new(hz(10e6 + 5e6 * i as f64), hz(100.0), hz(0.2)))
        .collect();
    s
}
