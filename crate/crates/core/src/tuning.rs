//! Resonance matching: choose photon–matter parameters so that each
//! polariton sits exactly one mechanical frequency above the drive.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::dynamics::Network;
use crate::error::{Error, Result};
use crate::params::{MechanicalMode, SystemParams};
use crate::polariton::{photon_matter_diagonalize, MatterMode};

/// Two-mode schedule for one value of the mixing angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeTuning {
    pub theta: f64,
    pub cavity_freq: f64,
    pub coupling: f64,
    pub magnon_freq: f64,
    pub drive_freq: f64,
}

impl TwoModeTuning {
    /// Writes the tuned cavity, magnon, coupling and drive frequencies.
    pub fn apply(&self, params: &mut SystemParams) {
        params.cavity_freq = self.cavity_freq;
        params.magnon_freq = self.magnon_freq;
        params.coupling = self.coupling;
        params.drive_freq = self.drive_freq;
    }
}

/// Places the lower polariton on the red sideband of `lower_mech` and the
/// upper polariton on that of `upper_mech` at mixing angle θ.
///
/// With `S = ω_2 − ω_1`, the splitting `√(Δ_am² + 4g²)` must equal S, so
/// `g = (S/2) sin2θ` and `Δ_am = S cos2θ`; the drive then sits at the
/// polariton centre minus the mean mechanical frequency.
pub fn tune_two_mode(
    cavity_freq: f64,
    lower_mech: f64,
    upper_mech: f64,
    theta: f64,
) -> Result<TwoModeTuning> {
    if !(cavity_freq > 0.0 && cavity_freq.is_finite()) {
        return Err(Error::param("cavity_freq", "must be positive"));
    }
    if !(lower_mech > 0.0) {
        return Err(Error::param("mechanics[0].freq", "must be positive"));
    }
    if !(upper_mech > lower_mech) || !upper_mech.is_finite() {
        return Err(Error::param(
            "mechanics[1].freq",
            "must exceed the first mechanical frequency",
        ));
    }
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::param("theta", "must lie strictly inside (0, π/2)"));
    }
    let spread = upper_mech - lower_mech;
    let (sin2, cos2) = (2.0 * theta).sin_cos();
    let coupling = 0.5 * spread * sin2;
    if !(coupling > 0.0) {
        return Err(Error::param("theta", "too close to 0 or π/2 for a finite coupling"));
    }
    let magnon_freq = cavity_freq - spread * cos2;
    if !(magnon_freq > 0.0) {
        return Err(Error::param("theta", "requires a negative magnon frequency"));
    }
    let center = 0.5 * (cavity_freq + magnon_freq);
    let drive_freq = center - 0.5 * (lower_mech + upper_mech);
    Ok(TwoModeTuning { theta, cavity_freq, coupling, magnon_freq, drive_freq })
}

/// Where the matter modes sit between consecutive target polaritons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Placement {
    /// Drive at `ω_a − mean(ω_k)` with equal fractions; for two modes this
    /// is the θ = π/4 point.
    Centered,
    /// Given drive frequency, equal fractions fixed by the trace condition.
    DriveFrequency(f64),
    /// Matter mode i at `λ_i + f_i (λ_{i+1} − λ_i)`; the drive frequency
    /// follows from the trace condition.
    Fractions(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NModeTuning {
    pub cavity_freq: f64,
    pub drive_freq: f64,
    /// Matter modes, ascending in frequency.
    pub matter: Vec<MatterMode>,
    pub fractions: Vec<f64>,
    /// Largest `|ω_p − ω_0 − ω_k|` after re-diagonalizing (rad/s).
    pub residual: f64,
}

impl NModeTuning {
    /// Polariton network realized by this tuning. `participation[i]` is the
    /// amplitude of matter mode `i` in the driven magnon mode.
    pub fn network(
        &self,
        cavity_linewidth: f64,
        participation: &[f64],
        mechanics: Vec<MechanicalMode>,
        rabi_freq: f64,
        temperature: f64,
    ) -> Result<Network> {
        let spectrum = photon_matter_diagonalize(self.cavity_freq, cavity_linewidth, &self.matter)?;
        Network::from_spectrum(
            &spectrum,
            participation,
            mechanics,
            self.drive_freq,
            rabi_freq,
            temperature,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NModeRequest {
    pub cavity_freq: f64,
    pub cavity_linewidth: f64,
    pub matter_linewidth: f64,
    /// One mechanical frequency per polariton; need not be sorted.
    pub mech_freqs: Vec<f64>,
    pub placement: Placement,
    /// Upper bound on every photon–matter coupling, if the hardware has one.
    pub max_coupling: Option<f64>,
}

/// Solves the inverse eigenproblem for one cavity and `N − 1` matter modes
/// whose polaritons land on `ω_0 + ω_k` for the N mechanical frequencies.
///
/// The Hamiltonian is an arrowhead matrix: its eigenvalues λ_k interlace the
/// matter frequencies d_i, the trace fixes `Σd = Σλ − ω_a`, and the
/// couplings follow from `g_i² = −∏_k (d_i − λ_k) / ∏_{j≠i} (d_i − d_j)`.
/// The result is checked by re-diagonalizing.
pub fn tune_n_mode(request: &NModeRequest) -> Result<NModeTuning> {
    let wa = request.cavity_freq;
    if !(wa > 0.0 && wa.is_finite()) {
        return Err(Error::param("cavity_freq", "must be positive"));
    }
    let mut freqs = request.mech_freqs.clone();
    if freqs.len() < 2 {
        return Err(Error::param("mechanics", "at least two mechanical modes are required"));
    }
    if let Some(i) = freqs.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::param(format!("mechanics[{i}].freq"), "must be positive"));
    }
    freqs.sort_by(f64::total_cmp);
    if freqs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::param("mechanics", "mechanical frequencies must be distinct"));
    }
    let n = freqs.len();
    let m = n - 1;
    let spread = freqs[m] - freqs[0];
    let mean = freqs.iter().sum::<f64>() / n as f64;

    // Work relative to the cavity: offset = ω_0 − ω_a, targets x_k = offset + ω_k.
    let (offset, fractions) = match &request.placement {
        Placement::Centered => {
            let f = (freqs[m] - mean) / spread;
            (-mean, vec![f; m])
        }
        Placement::DriveFrequency(w0) => {
            let offset = w0 - wa;
            let f = (offset + freqs[m]) / spread;
            (offset, vec![f; m])
        }
        Placement::Fractions(f) => {
            if f.len() != m {
                return Err(Error::Shape(format!("expected {m} fractions, got {}", f.len())));
            }
            let weighted: f64 = (0..m).map(|i| f[i] * (freqs[i + 1] - freqs[i])).sum();
            (weighted - freqs[m], f.clone())
        }
    };
    if let Some(i) = fractions.iter().position(|f| !(*f > 0.0 && *f < 1.0)) {
        return Err(Error::Infeasible(format!(
            "matter mode {i} would sit at fraction {:.6} between its polaritons; \
             the drive frequency must keep every fraction inside (0, 1)",
            fractions[i]
        )));
    }

    let targets: Vec<f64> = freqs.iter().map(|w| offset + w).collect();
    let matter_shift: Vec<f64> = (0..m)
        .map(|i| targets[i] + fractions[i] * (targets[i + 1] - targets[i]))
        .collect();
    let mut matter = Vec::with_capacity(m);
    for i in 0..m {
        let d = matter_shift[i];
        let num: f64 = targets.iter().map(|x| d - x).product();
        let den: f64 = (0..m).filter(|&j| j != i).map(|j| d - matter_shift[j]).product();
        let g2 = -num / den;
        if !(g2 > 0.0) {
            return Err(Error::Infeasible(format!("matter mode {i} needs g² = {g2:.6e}")));
        }
        let coupling = g2.sqrt();
        if let Some(bound) = request.max_coupling {
            if coupling > bound {
                return Err(Error::Infeasible(format!(
                    "matter mode {i} needs coupling {coupling:.6e} rad/s above the bound {bound:.6e}"
                )));
            }
        }
        matter.push(MatterMode {
            freq: wa + d,
            coupling,
            linewidth: request.matter_linewidth,
        });
    }

    let drive_freq = wa + offset;
    let spectrum = photon_matter_diagonalize(wa, request.cavity_linewidth, &matter)?;
    let residual = spectrum
        .polaritons
        .iter()
        .zip(&freqs)
        .map(|(p, w)| ((p.freq - wa) - (offset + w)).abs())
        .fold(0.0, f64::max);
    let tolerance = 1e-6 * spread;
    if !(residual <= tolerance) {
        return Err(Error::Infeasible(format!(
            "round-trip residual {residual:.3e} rad/s exceeds {tolerance:.3e} rad/s"
        )));
    }
    Ok(NModeTuning { cavity_freq: wa, drive_freq, matter, fractions, residual })
}
