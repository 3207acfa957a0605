//! Closed-form sideband-cooling rates in the weak-coupling,
//! resolved-sideband regime.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Network, SteadyStateAverages};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::polariton::PolaritonBasis;
use crate::thermal::thermal_occupation;

/// Backaction limits above this mark the sideband as unresolved.
pub const RESOLVED_SIDEBAND_THRESHOLD: f64 = 0.01;

/// Stokes (heating) and anti-Stokes (cooling) scattering rates of one
/// mechanical mode through one polariton, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandRates {
    pub stokes: f64,
    pub anti_stokes: f64,
}

impl SidebandRates {
    /// Lorentzian sideband weights
    /// `A± = κ (G w)² / (4[κ² + (Δ ± ω)²])`.
    pub fn new(linewidth: f64, coupling: f64, weight: f64, detuning: f64, mech_freq: f64) -> Self {
        let strength = linewidth * (coupling * weight).powi(2) / 4.0;
        let k2 = linewidth * linewidth;
        Self {
            stokes: strength / (k2 + (detuning + mech_freq).powi(2)),
            anti_stokes: strength / (k2 + (detuning - mech_freq).powi(2)),
        }
    }

    /// Net cooling rate `A− − A+`.
    pub fn net(&self) -> f64 {
        self.anti_stokes - self.stokes
    }
}

/// Rates of mechanical mode `j` through (U, L) for a fixed coupling `G_jM`.
pub fn polariton_rates(basis: &PolaritonBasis, coupling: f64, mech_freq: f64) -> [SidebandRates; 2] {
    [
        SidebandRates::new(
            basis.upper_linewidth,
            coupling,
            basis.upper_weight(),
            basis.upper_detuning,
            mech_freq,
        ),
        SidebandRates::new(
            basis.lower_linewidth,
            coupling,
            basis.lower_weight(),
            basis.lower_detuning,
            mech_freq,
        ),
    ]
}

/// Rates of mechanical mode `j` through (U, L) at the given mean fields.
pub fn scattering_rates(
    params: &SystemParams,
    basis: &PolaritonBasis,
    averages: &SteadyStateAverages,
    j: usize,
) -> Result<[SidebandRates; 2]> {
    let mech = params
        .mechanics
        .get(j)
        .ok_or_else(|| Error::Shape(format!("no mechanical mode {j}")))?;
    let coupling = averages
        .drift_couplings()
        .get(j)
        .copied()
        .ok_or_else(|| Error::Shape(format!("averages have no coupling for mode {j}")))?;
    Ok(polariton_rates(basis, coupling, mech.freq))
}

/// Minimal occupation reachable through one polariton resonant with the
/// sideband (`Δ = ω`): `A+/(A− − A+) = κ²/(4ω²)`.
pub fn quantum_backaction_limit(linewidth: f64, mech_freq: f64) -> f64 {
    (linewidth / (2.0 * mech_freq)).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCooling {
    /// κ_j plus the net rates through every polariton.
    pub effective_damping: f64,
    /// Occupation counting only the dominant polariton.
    pub effective_occupation: f64,
    /// Occupation counting every polariton, `(κ n̄ + ΣA+)/(κ + ΣΔκ)`.
    pub all_polariton_occupation: f64,
    /// Index of the polariton with the largest anti-Stokes rate.
    pub dominant: usize,
}

pub fn effective_cooling(rates: &[SidebandRates], damping: f64, thermal: f64) -> EffectiveCooling {
    let dominant = rates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.anti_stokes.total_cmp(&b.1.anti_stokes))
        .map_or(0, |(k, _)| k);
    let net_total: f64 = rates.iter().map(SidebandRates::net).sum();
    let stokes_total: f64 = rates.iter().map(|r| r.stokes).sum();
    let effective_occupation = match rates.get(dominant) {
        Some(r) => (damping * thermal + r.stokes) / (damping + r.net()),
        None => thermal,
    };
    EffectiveCooling {
        effective_damping: damping + net_total,
        effective_occupation,
        all_polariton_occupation: (damping * thermal + stokes_total) / (damping + net_total),
        dominant,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    /// `|G_jM|` exceeds half the narrowest polariton linewidth.
    StrongCoupling { mode: usize },
    /// The dominant polariton's backaction limit exceeds
    /// [`RESOLVED_SIDEBAND_THRESHOLD`].
    UnresolvedSideband { mode: usize },
    Unstable,
    Error(String),
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::StrongCoupling { mode } => write!(f, "strong_coupling_b{}", mode + 1),
            Flag::UnresolvedSideband { mode } => write!(f, "unresolved_sideband_b{}", mode + 1),
            Flag::Unstable => f.write_str("unstable"),
            Flag::Error(msg) => write!(f, "error: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeCooling {
    /// Rates through each polariton, in network order.
    pub rates: Vec<SidebandRates>,
    pub coupling: f64,
    pub thermal_occupation: f64,
    pub cooling: EffectiveCooling,
    pub dominant_label: String,
    pub backaction_limit: f64,
}

impl ModeCooling {
    pub fn net_rates(&self) -> Vec<f64> {
        self.rates.iter().map(SidebandRates::net).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingAnalysis {
    pub modes: Vec<ModeCooling>,
    pub flags: Vec<Flag>,
}

impl CoolingAnalysis {
    pub fn effective_occupations(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.cooling.effective_occupation).collect()
    }

    pub fn effective_dampings(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.cooling.effective_damping).collect()
    }
}

/// Analytic cooling of every mechanical mode of the two-polariton system.
pub fn cooling_analysis(
    params: &SystemParams,
    basis: &PolaritonBasis,
    averages: &SteadyStateAverages,
) -> Result<CoolingAnalysis> {
    network_cooling(&Network::from_two_mode(params, basis), averages)
}

/// Analytic cooling through an arbitrary polariton network, with each
/// polariton's weight `w_jp` in place of sinθ/cosθ.
pub fn network_cooling(net: &Network, averages: &SteadyStateAverages) -> Result<CoolingAnalysis> {
    let couplings = averages.drift_couplings();
    if couplings.len() != net.mechanics.len() {
        return Err(Error::Shape("averages do not match the network".into()));
    }
    let narrowest = net
        .polaritons
        .iter()
        .map(|p| p.linewidth)
        .fold(f64::INFINITY, f64::min);
    let mut flags = Vec::new();
    let mut modes = Vec::with_capacity(net.mechanics.len());
    for (j, mech) in net.mechanics.iter().enumerate() {
        let g = couplings[j];
        let rates: Vec<SidebandRates> = net
            .polaritons
            .iter()
            .map(|p| {
                SidebandRates::new(
                    p.linewidth,
                    g,
                    p.coupling_weights[j],
                    p.detuning,
                    mech.freq,
                )
            })
            .collect();
        let thermal = thermal_occupation(mech.freq, net.temperature)?;
        let cooling = effective_cooling(&rates, mech.damping, thermal);
        let dominant = &net.polaritons[cooling.dominant];
        let backaction_limit = quantum_backaction_limit(dominant.linewidth, mech.freq);
        if g.abs() > narrowest / 2.0 {
            flags.push(Flag::StrongCoupling { mode: j });
        }
        if backaction_limit > RESOLVED_SIDEBAND_THRESHOLD {
            flags.push(Flag::UnresolvedSideband { mode: j });
        }
        modes.push(ModeCooling {
            rates,
            coupling: g,
            thermal_occupation: thermal,
            cooling,
            dominant_label: dominant.label.clone(),
            backaction_limit,
        });
    }
    Ok(CoolingAnalysis { modes, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz;
    use crate::dynamics::{solve_averages, AveragesMode};
    use crate::params::MechanicalMode;
    use crate::polariton::diagonalize_polaritons;
    use proptest::prelude::*;

    fn resonant_basis(theta: f64, kappa: f64) -> PolaritonBasis {
        let (w1, w2) = (hz(10e6), hz(30e6));
        PolaritonBasis {
            theta,
            upper_freq: hz(10e9) + w2,
            lower_freq: hz(10e9) + w1,
            upper_linewidth: kappa,
            lower_linewidth: kappa,
            dissipative_coupling: 0.0,
            upper_detuning: w2,
            lower_detuning: w1,
        }
    }

    #[test]
    fn zero_coupling_gives_zero_rates() {
        let r = SidebandRates::new(hz(1e6), 0.0, 0.7, hz(10e6), hz(10e6));
        assert_eq!(r.stokes, 0.0);
        assert_eq!(r.anti_stokes, 0.0);
        let c = effective_cooling(&[r, r], hz(100.0), 20.3);
        assert_eq!(c.effective_damping, hz(100.0));
        assert_eq!(c.effective_occupation, 20.3);
        assert_eq!(c.all_polariton_occupation, 20.3);
    }

    #[test]
    fn resonant_anti_stokes_rate() {
        let (k, g, theta) = (hz(1e6), hz(0.3e6), 0.4f64);
        let b = resonant_basis(theta, k);
        let [_, lower] = polariton_rates(&b, g, hz(10e6));
        let want = g * g * theta.cos().powi(2) / (4.0 * k);
        assert!((lower.anti_stokes - want).abs() / want < 1e-14);
    }

    #[test]
    fn resolved_hierarchy_at_quarter_pi() {
        let b = resonant_basis(std::f64::consts::FRAC_PI_4, hz(1e6));
        let [u, l] = polariton_rates(&b, hz(0.3e6), hz(10e6));
        assert!(l.anti_stokes > 50.0 * u.anti_stokes);
        assert!(l.anti_stokes > 50.0 * l.stokes);
        assert!(l.anti_stokes > 50.0 * u.stokes);
    }

    #[test]
    fn backaction_limit_values() {
        let q = quantum_backaction_limit(hz(1e6), hz(10e6));
        assert!((q - 2.5e-3).abs() < 1e-15);
        assert_eq!(quantum_backaction_limit(0.0, 1.0), 0.0);
        assert!(quantum_backaction_limit(hz(10e6), hz(10e6)) >= 0.25);
    }

    #[test]
    fn backaction_limit_equals_rate_ratio_on_resonance() {
        let (k, w) = (hz(2e6), hz(7e6));
        let r = SidebandRates::new(k, 1.0, 1.0, w, w);
        let ratio = r.stokes / r.net();
        assert!((ratio - quantum_backaction_limit(k, w)).abs() < 1e-15);
    }

    #[test]
    fn dominant_polariton_follows_anti_stokes_rate() {
        let b = resonant_basis(0.5, hz(1e6));
        let [u, l] = polariton_rates(&b, hz(0.2e6), hz(10e6));
        assert_eq!(effective_cooling(&[u, l], hz(100.0), 20.0).dominant, 1);
        let [u, l] = polariton_rates(&b, hz(0.2e6), hz(30e6));
        assert_eq!(effective_cooling(&[u, l], hz(100.0), 20.0).dominant, 0);
    }

    #[test]
    fn zero_drive_analysis_is_thermal() {
        let wa = hz(10e9);
        let p = SystemParams {
            cavity_freq: wa,
            magnon_freq: wa,
            coupling: hz(10e6),
            cavity_linewidth: hz(1e6),
            magnon_linewidth: hz(1e6),
            mechanics: vec![
                MechanicalMode::new(hz(10e6), hz(100.0), hz(0.2)),
                MechanicalMode::new(hz(30e6), hz(100.0), hz(0.2)),
            ],
            drive_freq: wa - hz(20e6),
            rabi_freq: 0.0,
            temperature: 0.01,
        };
        let b = diagonalize_polaritons(&p).unwrap();
        let a = solve_averages(&p, &b, AveragesMode::Approx).unwrap();
        let c = cooling_analysis(&p, &b, &a).unwrap();
        assert!((c.modes[0].cooling.effective_occupation - 20.340_618_351_800_997).abs() < 1e-12);
        assert_eq!(c.modes[1].cooling.effective_damping, hz(100.0));
        assert!(c.flags.is_empty());
    }

    #[test]
    fn unresolved_linewidth_is_flagged() {
        let wa = hz(10e9);
        let p = SystemParams {
            cavity_freq: wa,
            magnon_freq: wa,
            coupling: hz(10e6),
            cavity_linewidth: hz(10e6),
            magnon_linewidth: hz(10e6),
            mechanics: vec![MechanicalMode::new(hz(10e6), hz(100.0), hz(0.2))],
            drive_freq: wa - hz(20e6),
            rabi_freq: 1e12,
            temperature: 0.01,
        };
        let b = diagonalize_polaritons(&p).unwrap();
        let a = solve_averages(&p, &b, AveragesMode::Approx).unwrap();
        let c = cooling_analysis(&p, &b, &a).unwrap();
        assert!(c.flags.contains(&Flag::UnresolvedSideband { mode: 0 }));
    }

    #[test]
    fn flags_render_as_tokens() {
        assert_eq!(Flag::StrongCoupling { mode: 0 }.to_string(), "strong_coupling_b1");
        assert_eq!(Flag::UnresolvedSideband { mode: 1 }.to_string(), "unresolved_sideband_b2");
    }

    proptest! {
        #[test]
        fn red_detuned_polariton_always_cools(
            k in 1e3..1e8f64, g in 1e2..1e7f64, w in 0.01..1.0f64,
            det in 1e5..1e9f64, freq in 1e5..1e9f64,
        ) {
            let r = SidebandRates::new(k, g, w, det, freq);
            prop_assert!(r.stokes >= 0.0 && r.anti_stokes >= 0.0);
            prop_assert!(r.net() > 0.0);
        }

        #[test]
        fn effective_damping_bookkeeping_is_exact(
            k in 1e4..1e7f64, g in 1e3..1e6f64, theta in 0.05..1.5f64, n in 0.0..100.0f64,
        ) {
            let b = resonant_basis(theta, k);
            let rates = polariton_rates(&b, g, hz(10e6));
            let c = effective_cooling(&rates, hz(100.0), n);
            prop_assert_eq!(c.effective_damping, hz(100.0) + (rates[0].net() + rates[1].net()));
        }
    }
}
