//! Mean-field steady state and linearized fluctuation dynamics.
//!
//! Fluctuations are collected in the quadrature vector
//! `(X_1, Y_1, X_2, Y_2, …)` with `X = (δO + δO†)/√2`, `Y = i(δO† − δO)/√2`,
//! polaritons first, then mechanical modes. The dynamics is `u̇ = R u + n`
//! with `⟨n(t) nᵀ(t')⟩_sym = D δ(t − t')`.

use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{validate_mechanics, MechanicalMode, SystemParams};
use crate::polariton::{PolaritonBasis, PolaritonSpectrum};
use crate::thermal::thermal_occupation;

pub type C64 = Complex<f64>;

const MIXING: f64 = 0.5;
const MAX_ITERATIONS: usize = 10_000;
const CONVERGENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AveragesMode {
    /// Resolved-sideband closed form: `⟨P⟩ = −iΩw/Δ`, `⟨b_j⟩ = −G_0j|⟨M⟩|²/ω_j`.
    #[default]
    Approx,
    /// Fixed point of the full classical equations, including linewidths,
    /// dissipative coupling and the displacement-induced detuning shift.
    #[serde(rename = "selfconsistent")]
    SelfConsistent,
}

impl std::str::FromStr for AveragesMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "approx" => Ok(Self::Approx),
            "selfconsistent" | "self-consistent" => Ok(Self::SelfConsistent),
            other => Err(format!("unknown averages mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateAverages {
    pub mode: AveragesMode,
    /// `⟨P_p⟩` per polariton; in the two-mode case index 0 is U and 1 is L.
    pub polaritons: Vec<C64>,
    /// `⟨b_j⟩` per mechanical mode.
    pub mechanics: Vec<C64>,
    /// `⟨M⟩`, the driven magnon amplitude.
    pub driven: C64,
    /// `G_jM = 2i·G_0j·⟨M⟩` per mechanical mode.
    pub effective_couplings: Vec<C64>,
    /// β = Σ_j 2 G_0j Re⟨b_j⟩, the magnon frequency shift from the static
    /// mechanical displacement.
    pub detuning_shift: f64,
    pub iterations: usize,
}

impl SteadyStateAverages {
    pub fn upper(&self) -> C64 {
        self.polaritons[0]
    }

    pub fn lower(&self) -> C64 {
        self.polaritons[1]
    }

    /// Common phase φ applied to all polariton quadratures,
    /// `δP → e^{−iφ} δP`, so that every G_jM is real and non-negative.
    /// The closed-form averages are already in that gauge up to sign, and
    /// keep φ = 0.
    pub fn frame_phase(&self) -> f64 {
        match self.mode {
            AveragesMode::Approx => 0.0,
            AveragesMode::SelfConsistent => {
                if self.driven.norm() == 0.0 {
                    0.0
                } else {
                    (C64::i() * self.driven).arg()
                }
            }
        }
    }

    /// Real couplings entering the drift matrix.
    pub fn drift_couplings(&self) -> Vec<f64> {
        self.effective_couplings
            .iter()
            .map(|g| match self.mode {
                AveragesMode::Approx => g.re,
                AveragesMode::SelfConsistent => g.norm(),
            })
            .collect()
    }

    fn shift_in_drift(&self) -> f64 {
        match self.mode {
            AveragesMode::Approx => 0.0,
            AveragesMode::SelfConsistent => self.detuning_shift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeKind {
    Polariton,
    Mechanical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeLabel {
    pub name: String,
    pub kind: ModeKind,
}

impl ModeLabel {
    pub fn polariton(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: ModeKind::Polariton }
    }

    pub fn mechanical(index: usize) -> Self {
        Self { name: format!("b{}", index + 1), kind: ModeKind::Mechanical }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    /// Quadrature pair `i` (rows `2i`, `2i+1`) belongs to `layout[i]`.
    pub layout: Vec<ModeLabel>,
    pub averages: SteadyStateAverages,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    pub fn mechanical_indices(&self) -> Vec<usize> {
        self.layout
            .iter()
            .enumerate()
            .filter(|(_, l)| l.kind == ModeKind::Mechanical)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One polariton of a general network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkPolariton {
    pub label: String,
    pub freq: f64,
    /// `freq − ω_0`, stored separately so it can be computed without
    /// cancelling two large frequencies.
    pub detuning: f64,
    pub linewidth: f64,
    /// Amplitude of the driven magnon mode in this polariton; the drive
    /// enters as `Ω·w` and `⟨M⟩ = Σ_p w_p ⟨P_p⟩`.
    pub drive_weight: f64,
    /// Weight w_jp scaling the coupling G_jM to each mechanical mode.
    pub coupling_weights: Vec<f64>,
}

/// Polaritons coupled to mechanical modes through one driven magnon mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub polaritons: Vec<NetworkPolariton>,
    /// Off-diagonal polariton damping (dissipative couplings); the diagonal
    /// is ignored in favour of the polariton linewidths.
    pub dissipative: DMatrix<f64>,
    pub mechanics: Vec<MechanicalMode>,
    pub drive_freq: f64,
    pub rabi_freq: f64,
    pub temperature: f64,
}

impl Network {
    pub fn new(
        polaritons: Vec<NetworkPolariton>,
        mechanics: Vec<MechanicalMode>,
        drive_freq: f64,
        rabi_freq: f64,
        temperature: f64,
    ) -> Self {
        let n = polaritons.len();
        Self {
            polaritons,
            dissipative: DMatrix::zeros(n, n),
            mechanics,
            drive_freq,
            rabi_freq,
            temperature,
        }
    }

    pub fn with_dissipative(mut self, dissipative: DMatrix<f64>) -> Self {
        self.dissipative = dissipative;
        self
    }

    /// The two-polariton system with weights (sinθ, cosθ), ordered (U, L).
    pub fn from_two_mode(params: &SystemParams, basis: &PolaritonBasis) -> Self {
        let (s, c) = basis.theta.sin_cos();
        let nm = params.mechanics.len();
        let polaritons = vec![
            NetworkPolariton {
                label: "U".into(),
                freq: basis.upper_freq,
                detuning: basis.upper_detuning,
                linewidth: basis.upper_linewidth,
                drive_weight: s,
                coupling_weights: vec![s; nm],
            },
            NetworkPolariton {
                label: "L".into(),
                freq: basis.lower_freq,
                detuning: basis.lower_detuning,
                linewidth: basis.lower_linewidth,
                drive_weight: c,
                coupling_weights: vec![c; nm],
            },
        ];
        let dk = basis.dissipative_coupling;
        Self::new(
            polaritons,
            params.mechanics.clone(),
            params.drive_freq,
            params.rabi_freq,
            params.temperature,
        )
        .with_dissipative(DMatrix::from_row_slice(2, 2, &[0.0, dk, dk, 0.0]))
    }

    /// Builds a network from a diagonalized photon–matter spectrum.
    ///
    /// `participation[i]` is the amplitude of matter mode `i` in the driven,
    /// magnetostrictively coupled magnon mode (typically the Kittel mode:
    /// `[1, 0, …]`). Every mechanical mode couples through that same mode.
    pub fn from_spectrum(
        spectrum: &PolaritonSpectrum,
        participation: &[f64],
        mechanics: Vec<MechanicalMode>,
        drive_freq: f64,
        rabi_freq: f64,
        temperature: f64,
    ) -> Result<Self> {
        let n_matter = spectrum.polaritons.first().map_or(0, |p| p.weights.len() - 1);
        if participation.len() != n_matter {
            return Err(Error::Shape(format!(
                "participation has {} entries, spectrum has {n_matter} matter modes",
                participation.len()
            )));
        }
        let nm = mechanics.len();
        let polaritons = spectrum
            .polaritons
            .iter()
            .enumerate()
            .map(|(p, pol)| {
                let w: f64 = participation
                    .iter()
                    .zip(&pol.weights[1..])
                    .map(|(c, v)| c * v)
                    .sum();
                NetworkPolariton {
                    label: format!("P{}", p + 1),
                    freq: pol.freq,
                    detuning: pol.freq - drive_freq,
                    linewidth: pol.linewidth,
                    drive_weight: w,
                    coupling_weights: vec![w; nm],
                }
            })
            .collect();
        let mut dissipative = spectrum.damping.clone();
        dissipative.fill_diagonal(0.0);
        Ok(Self::new(polaritons, mechanics, drive_freq, rabi_freq, temperature)
            .with_dissipative(dissipative))
    }

    pub fn detunings(&self) -> Vec<f64> {
        self.polaritons.iter().map(|p| p.detuning).collect()
    }

    fn drive_weights(&self) -> Vec<f64> {
        self.polaritons.iter().map(|p| p.drive_weight).collect()
    }

    /// Full polariton damping matrix K (linewidths on the diagonal).
    pub fn damping_matrix(&self) -> DMatrix<f64> {
        let mut k = self.dissipative.clone();
        for (p, pol) in self.polaritons.iter().enumerate() {
            k[(p, p)] = pol.linewidth;
        }
        k
    }

    pub fn validate(&self) -> Result<()> {
        let np = self.polaritons.len();
        let nm = self.mechanics.len();
        let mut errors = Vec::new();
        if np == 0 {
            errors.push(Error::param("polaritons", "at least one polariton is required"));
        }
        errors.extend(validate_mechanics(&self.mechanics, "mechanics"));
        for (p, pol) in self.polaritons.iter().enumerate() {
            if !(pol.freq > 0.0 && pol.freq.is_finite()) {
                errors.push(Error::param(format!("polaritons[{p}].freq"), "must be positive"));
            }
            if !(pol.linewidth > 0.0 && pol.linewidth.is_finite()) {
                errors.push(Error::param(format!("polaritons[{p}].linewidth"), "must be positive"));
            }
            if pol.coupling_weights.len() != nm {
                errors.push(Error::Shape(format!(
                    "polaritons[{p}].coupling_weights has {} entries, expected {nm}",
                    pol.coupling_weights.len()
                )));
            }
        }
        if self.dissipative.shape() != (np, np) {
            errors.push(Error::Shape(format!(
                "dissipative matrix is {:?}, expected ({np}, {np})",
                self.dissipative.shape()
            )));
        }
        if !(self.rabi_freq >= 0.0 && self.rabi_freq.is_finite()) {
            errors.push(Error::param("rabi_freq", "must be non-negative"));
        }
        if !(self.temperature >= 0.0) {
            errors.push(Error::param("temperature", "must be non-negative"));
        }
        match errors.len() {
            0 => Ok(()),
            1 => Err(errors.pop().unwrap()),
            _ => Err(Error::Validation(errors)),
        }
    }
}

/// Steady-state mean fields of the two-polariton system.
pub fn solve_averages(
    params: &SystemParams,
    basis: &PolaritonBasis,
    mode: AveragesMode,
) -> Result<SteadyStateAverages> {
    network_averages(&Network::from_two_mode(params, basis), mode)
}

/// Steady-state mean fields of a polariton network.
pub fn network_averages(net: &Network, mode: AveragesMode) -> Result<SteadyStateAverages> {
    let detunings = net.detunings();
    let weights = net.drive_weights();
    let omega = net.rabi_freq;
    match mode {
        AveragesMode::Approx => {
            if let Some(p) = detunings.iter().position(|&d| d == 0.0) {
                return Err(Error::param(
                    format!("polaritons[{p}]"),
                    "closed-form averages need a non-zero drive detuning",
                ));
            }
            let polaritons: Vec<C64> = weights
                .iter()
                .zip(&detunings)
                .map(|(w, d)| C64::new(0.0, -omega * w / d))
                .collect();
            let driven = driven_amplitude(&weights, &polaritons);
            let mechanics: Vec<C64> = net
                .mechanics
                .iter()
                .map(|m| C64::new(-m.bare_coupling * driven.norm_sqr() / m.freq, 0.0))
                .collect();
            Ok(finish_averages(net, mode, polaritons, mechanics, driven, 0))
        }
        AveragesMode::SelfConsistent => self_consistent_averages(net, &detunings, &weights),
    }
}

fn driven_amplitude(weights: &[f64], polaritons: &[C64]) -> C64 {
    weights.iter().zip(polaritons).map(|(w, p)| p * *w).sum()
}

fn finish_averages(
    net: &Network,
    mode: AveragesMode,
    polaritons: Vec<C64>,
    mechanics: Vec<C64>,
    driven: C64,
    iterations: usize,
) -> SteadyStateAverages {
    let effective_couplings = net
        .mechanics
        .iter()
        .map(|m| C64::i() * driven * (2.0 * m.bare_coupling))
        .collect();
    let detuning_shift = net
        .mechanics
        .iter()
        .zip(&mechanics)
        .map(|(m, b)| 2.0 * m.bare_coupling * b.re)
        .sum();
    SteadyStateAverages {
        mode,
        polaritons,
        mechanics,
        driven,
        effective_couplings,
        detuning_shift,
        iterations,
    }
}

fn self_consistent_averages(
    net: &Network,
    detunings: &[f64],
    weights: &[f64],
) -> Result<SteadyStateAverages> {
    let np = weights.len();
    let damping = net.damping_matrix();
    let drive = DVector::from_iterator(np, weights.iter().map(|w| C64::new(net.rabi_freq * w, 0.0)));

    // Classical equations: 0 = −(K + i(Δ + β w wᵀ)) P + Ω w,
    // 0 = −(κ_j + iω_j) b_j − i G_0j |M|², β = Σ_j 2 G_0j Re b_j.
    let solve = |beta: f64| -> Result<DVector<C64>> {
        let mut a = DMatrix::<C64>::zeros(np, np);
        for p in 0..np {
            for q in 0..np {
                let h = if p == q { detunings[p] } else { 0.0 } + beta * weights[p] * weights[q];
                a[(p, q)] = C64::new(damping[(p, q)], h);
            }
        }
        a.lu()
            .solve(&drive)
            .ok_or_else(|| Error::param("polaritons", "singular mean-field system"))
    };
    let mechanics_for = |driven: C64| -> Vec<C64> {
        net.mechanics
            .iter()
            .map(|m| {
                C64::new(0.0, -m.bare_coupling * driven.norm_sqr()) / C64::new(m.damping, m.freq)
            })
            .collect()
    };

    let mut beta = 0.0;
    let mut previous = solve(beta)?;
    let mut change = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let driven = driven_amplitude(weights, previous.as_slice());
        let target: f64 = net
            .mechanics
            .iter()
            .zip(mechanics_for(driven))
            .map(|(m, b)| 2.0 * m.bare_coupling * b.re)
            .sum();
        beta = (1.0 - MIXING) * beta + MIXING * target;
        let next = solve(beta)?;
        let scale = next.norm();
        change = if scale == 0.0 { 0.0 } else { (&next - &previous).norm() / scale };
        previous = next;
        if change < CONVERGENCE_TOL {
            // Report mechanics consistent with the final polariton fields.
            let polaritons: Vec<C64> = previous.iter().copied().collect();
            let driven = driven_amplitude(weights, &polaritons);
            let mechanics = mechanics_for(driven);
            return Ok(finish_averages(
                net,
                AveragesMode::SelfConsistent,
                polaritons,
                mechanics,
                driven,
                iteration,
            ));
        }
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, change })
}

fn damped_rotation(r: &mut DMatrix<f64>, at: usize, damping: f64, freq: f64) {
    r[(at, at)] = -damping;
    r[(at, at + 1)] = freq;
    r[(at + 1, at)] = -freq;
    r[(at + 1, at + 1)] = -damping;
}

/// Drift matrix of the two-polariton system, ordered
/// `(X_U, Y_U, X_L, Y_L, X_b1, Y_b1, …)`.
///
/// Polariton blocks are damped rotations at the drive detunings, mechanical
/// blocks damped rotations at the lab frequencies ω_j; each mechanical mode
/// drives the X quadrature of U (L) with `−G_jM sinθ` (`−G_jM cosθ`) and is
/// driven in its Y quadrature by `+G_jM sinθ·Y_U` (`+G_jM cosθ·Y_L`). Unequal
/// cavity and magnon linewidths add `−δκ·I₂` between the polariton pairs.
/// Self-consistent averages additionally carry the displacement-induced
/// detuning shift, which appears as `s²β`, `c²β` on the polariton detunings
/// and a coherent U–L coupling `scβ`.
pub fn build_drift(
    params: &SystemParams,
    basis: &PolaritonBasis,
    averages: &SteadyStateAverages,
) -> Result<DMatrix<f64>> {
    let nm = params.mechanics.len();
    if averages.effective_couplings.len() != nm || averages.polaritons.len() != 2 {
        return Err(Error::Shape(
            "averages do not match the two-polariton system".into(),
        ));
    }
    let n = 2 * (2 + nm);
    let (s, c) = basis.theta.sin_cos();
    let beta = averages.shift_in_drift();
    let mut r = DMatrix::<f64>::zeros(n, n);
    damped_rotation(&mut r, 0, basis.upper_linewidth, basis.upper_detuning + beta * s * s);
    damped_rotation(&mut r, 2, basis.lower_linewidth, basis.lower_detuning + beta * c * c);
    let dk = basis.dissipative_coupling;
    let coherent = beta * s * c;
    for (row, col) in [(0, 2), (2, 0)] {
        r[(row, col)] = -dk;
        r[(row + 1, col + 1)] = -dk;
        r[(row, col + 1)] = coherent;
        r[(row + 1, col)] = -coherent;
    }
    let couplings = averages.drift_couplings();
    for (j, mech) in params.mechanics.iter().enumerate() {
        let at = 4 + 2 * j;
        damped_rotation(&mut r, at, mech.damping, mech.freq);
        let g = couplings[j];
        r[(0, at)] = -(g * s);
        r[(2, at)] = -(g * c);
        r[(at + 1, 1)] = g * s;
        r[(at + 1, 3)] = g * c;
    }
    Ok(r)
}

fn noise_block(d: &mut DMatrix<f64>, row: usize, col: usize, value: f64) {
    d[(row, col)] = value;
    d[(row + 1, col + 1)] = value;
}

/// Diffusion matrix of the two-polariton system.
///
/// Polariton occupations are evaluated at ω_u and ω_l, the U–L cross block
/// at (ω_u + ω_l)/2; each block is `2κ(n̄ + ½)·I₂`.
pub fn build_diffusion(params: &SystemParams, basis: &PolaritonBasis) -> Result<DMatrix<f64>> {
    let t = params.temperature;
    let nm = params.mechanics.len();
    let n = 2 * (2 + nm);
    let nu = thermal_occupation(basis.upper_freq, t)?;
    let nl = thermal_occupation(basis.lower_freq, t)?;
    let nc = thermal_occupation(0.5 * (basis.upper_freq + basis.lower_freq), t)?;
    let mut d = DMatrix::<f64>::zeros(n, n);
    noise_block(&mut d, 0, 0, 2.0 * basis.upper_linewidth * (nu + 0.5));
    noise_block(&mut d, 2, 2, 2.0 * basis.lower_linewidth * (nl + 0.5));
    let cross = 2.0 * basis.dissipative_coupling * (nc + 0.5);
    noise_block(&mut d, 0, 2, cross);
    noise_block(&mut d, 2, 0, cross);
    for (j, mech) in params.mechanics.iter().enumerate() {
        let nb = thermal_occupation(mech.freq, t)?;
        let at = 4 + 2 * j;
        noise_block(&mut d, at, at, 2.0 * mech.damping * (nb + 0.5));
    }
    Ok(d)
}

fn two_mode_layout(nm: usize) -> Vec<ModeLabel> {
    let mut layout = vec![ModeLabel::polariton("U"), ModeLabel::polariton("L")];
    layout.extend((0..nm).map(ModeLabel::mechanical));
    layout
}

/// Complete linearized model of the two-polariton system.
pub fn linear_model(
    params: &SystemParams,
    basis: &PolaritonBasis,
    mode: AveragesMode,
) -> Result<LinearModel> {
    params.validate()?;
    let averages = solve_averages(params, basis, mode)?;
    let drift = build_drift(params, basis, &averages)?;
    let diffusion = build_diffusion(params, basis)?;
    Ok(LinearModel {
        drift,
        diffusion,
        layout: two_mode_layout(params.mechanics.len()),
        averages,
    })
}

/// Linearized model of a general polariton network.
///
/// Each polariton p gets a damped rotation at its detuning; each pair
/// (p, j) gets `−G_jM w_jp` on `(X_p, X_bj)` and `+G_jM w_jp` on
/// `(Y_bj, Y_p)`, generalizing the sinθ/cosθ weights of the two-mode case.
pub fn build_network(net: &Network, mode: AveragesMode) -> Result<LinearModel> {
    net.validate()?;
    let averages = network_averages(net, mode)?;
    let np = net.polaritons.len();
    let nm = net.mechanics.len();
    let n = 2 * (np + nm);
    let detunings = net.detunings();
    let weights = net.drive_weights();
    let damping = net.damping_matrix();
    let beta = averages.shift_in_drift();

    let mut r = DMatrix::<f64>::zeros(n, n);
    for p in 0..np {
        for q in 0..np {
            let h = if p == q { detunings[p] } else { 0.0 } + beta * weights[p] * weights[q];
            // −(K + iH) acting on δP_q, written on (X, Y).
            let (re, im) = (-damping[(p, q)], -h);
            r[(2 * p, 2 * q)] = re;
            r[(2 * p, 2 * q + 1)] = -im;
            r[(2 * p + 1, 2 * q)] = im;
            r[(2 * p + 1, 2 * q + 1)] = re;
        }
    }
    let couplings = averages.drift_couplings();
    for (j, mech) in net.mechanics.iter().enumerate() {
        let at = 2 * (np + j);
        damped_rotation(&mut r, at, mech.damping, mech.freq);
        let g = couplings[j];
        for (p, pol) in net.polaritons.iter().enumerate() {
            let w = pol.coupling_weights[j];
            r[(2 * p, at)] = -(g * w);
            r[(at + 1, 2 * p + 1)] = g * w;
        }
    }

    let t = net.temperature;
    let mut d = DMatrix::<f64>::zeros(n, n);
    for p in 0..np {
        for q in 0..np {
            let k = damping[(p, q)];
            if k == 0.0 {
                continue;
            }
            let freq = 0.5 * (net.polaritons[p].freq + net.polaritons[q].freq);
            let nbar = thermal_occupation(freq, t)?;
            noise_block(&mut d, 2 * p, 2 * q, 2.0 * k * (nbar + 0.5));
        }
    }
    for (j, mech) in net.mechanics.iter().enumerate() {
        let nb = thermal_occupation(mech.freq, t)?;
        let at = 2 * (np + j);
        noise_block(&mut d, at, at, 2.0 * mech.damping * (nb + 0.5));
    }

    let mut layout: Vec<ModeLabel> = net
        .polaritons
        .iter()
        .map(|p| ModeLabel::polariton(p.label.clone()))
        .collect();
    layout.extend((0..nm).map(ModeLabel::mechanical));
    Ok(LinearModel { drift: r, diffusion: d, layout, averages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::hz;
    use crate::polariton::diagonalize_polaritons;
    use std::f64::consts::FRAC_PI_4;

    /// Two-mode system tuned so that Δ_l = ω_1, Δ_u = ω_2 at θ = π/4.
    fn resonant(rabi: f64, ka: f64, km: f64) -> SystemParams {
        let (w1, w2) = (hz(10e6), hz(30e6));
        let wa = hz(10e9);
        SystemParams {
            cavity_freq: wa,
            magnon_freq: wa,
            coupling: 0.5 * (w2 - w1),
            cavity_linewidth: ka,
            magnon_linewidth: km,
            mechanics: vec![
                MechanicalMode::new(w1, hz(100.0), hz(0.2)),
                MechanicalMode::new(w2, hz(100.0), hz(0.2)),
            ],
            drive_freq: wa - 0.5 * (w1 + w2),
            rabi_freq: rabi,
            temperature: 0.01,
        }
    }

    #[test]
    fn zero_drive_gives_zero_averages() {
        let p = resonant(0.0, hz(1e6), hz(1e6));
        let b = diagonalize_polaritons(&p).unwrap();
        for mode in [AveragesMode::Approx, AveragesMode::SelfConsistent] {
            let a = solve_averages(&p, &b, mode).unwrap();
            assert!(a.polaritons.iter().all(|z| z.norm() == 0.0));
            assert!(a.mechanics.iter().all(|z| z.norm() == 0.0));
            assert!(a.effective_couplings.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn approx_averages_match_closed_form() {
        let rabi = 7.852_579_754_374_496e13;
        let p = resonant(rabi, hz(1e6), hz(1e6));
        let b = diagonalize_polaritons(&p).unwrap();
        assert_eq!(b.theta, FRAC_PI_4);
        let a = solve_averages(&p, &b, AveragesMode::Approx).unwrap();
        let w1 = p.mechanics[0].freq;
        // ⟨L⟩ = −iΩ cos(π/4)/ω_1
        let expected = -rabi * FRAC_PI_4.cos() / w1;
        assert_eq!(a.lower().re, 0.0);
        assert!((a.lower().im - expected).abs() / expected.abs() < 1e-6);
        let m2 = a.driven.norm_sqr();
        for (mech, b) in p.mechanics.iter().zip(&a.mechanics) {
            assert_eq!(b.re, -mech.bare_coupling * m2 / mech.freq);
        }
        // ⟨M⟩ is purely imaginary, so G_jM is real.
        for g in &a.effective_couplings {
            assert_eq!(g.im, 0.0);
            assert!(g.re > 0.0);
        }
    }

    #[test]
    fn selfconsistent_close_to_approx_in_resolved_regime() {
        let p = resonant(7.852_579_754_374_496e13, hz(1e6), hz(1e6));
        let b = diagonalize_polaritons(&p).unwrap();
        let approx = solve_averages(&p, &b, AveragesMode::Approx).unwrap();
        let full = solve_averages(&p, &b, AveragesMode::SelfConsistent).unwrap();
        // Finite linewidths rotate the phase by ~κ/Δ but barely change magnitudes.
        for (x, y) in approx.polaritons.iter().zip(&full.polaritons) {
            assert!((x.norm() - y.norm()).abs() / x.norm() < 1e-2);
            assert!((x - y).norm() / x.norm() < 0.15);
        }
        let rel = (approx.driven.norm() - full.driven.norm()).abs() / approx.driven.norm();
        assert!(rel < 1e-2, "{rel}");
        assert!(full.iterations > 1);
    }

    #[test]
    fn approx_requires_nonzero_detuning() {
        let mut p = resonant(1e12, hz(1e6), hz(1e6));
        // Integer frequencies make the lower polariton land exactly on the drive.
        (p.cavity_freq, p.magnon_freq, p.coupling) = (1e10, 1e10, 1e7);
        p.drive_freq = 1e10 - 1e7;
        let b = diagonalize_polaritons(&p).unwrap();
        assert_eq!(b.lower_detuning, 0.0);
        assert!(solve_averages(&p, &b, AveragesMode::Approx).is_err());
        assert!(solve_averages(&p, &b, AveragesMode::SelfConsistent).is_ok());
    }

    #[test]
    fn uncoupled_drift_is_block_diagonal() {
        let mut p = resonant(1e13, hz(1e6), hz(1e6));
        for m in &mut p.mechanics {
            m.bare_coupling = 1e-300;
        }
        let b = diagonalize_polaritons(&p).unwrap();
        let a = solve_averages(&p, &b, AveragesMode::Approx).unwrap();
        let r = build_drift(&p, &b, &a).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i / 2 != j / 2 {
                    assert!(r[(i, j)].abs() < 1e-200, "({i},{j}) = {}", r[(i, j)]);
                }
            }
        }
        assert_eq!(r[(0, 1)], b.upper_detuning);
        assert_eq!(r[(5, 4)], -p.mechanics[0].freq);
    }

    #[test]
    fn drift_matches_hand_built_matrix_at_quarter_pi() {
        let p = resonant(7.852_579_754_374_496e13, hz(1e6), hz(1e6));
        let b = diagonalize_polaritons(&p).unwrap();
        let a = solve_averages(&p, &b, AveragesMode::Approx).unwrap();
        let r = build_drift(&p, &b, &a).unwrap();
        let k = hz(1e6);
        let km = hz(100.0);
        let (w1, w2) = (hz(10e6), hz(30e6));
        let (du, dl) = (b.upper_detuning, b.lower_detuning);
        let g1 = a.effective_couplings[0].re;
        let g2 = a.effective_couplings[1].re;
        let h = FRAC_PI_4.sin();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(8, 8, &[
            -k,   du,   0.0,  0.0,  -g1 * h, 0.0,  -g2 * h, 0.0,
            -du,  -k,   0.0,  0.0,  0.0,     0.0,  0.0,     0.0,
            0.0,  0.0,  -k,   dl,   -g1 * h, 0.0,  -g2 * h, 0.0,
            0.0,  0.0,  -dl,  -k,   0.0,     0.0,  0.0,     0.0,
            0.0,  0.0,  0.0,  0.0,  -km,     w1,   0.0,     0.0,
            0.0,  g1 * h, 0.0, g1 * h, -w1,  -km,  0.0,     0.0,
            0.0,  0.0,  0.0,  0.0,  0.0,     0.0,  -km,     w2,
            0.0,  g2 * h, 0.0, g2 * h, 0.0,  0.0,  -w2,     -km,
        ]);
        for i in 0..8 {
            for j in 0..8 {
                let (x, y) = (r[(i, j)], expected[(i, j)]);
                assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0), "({i},{j}): {x} vs {y}");
            }
        }
        // Equal weights at π/4: all four A and B blocks carry the same magnitude
        // per mechanical mode.
        assert!((r[(0, 4)] - r[(2, 4)]).abs() <= 1e-9 * r[(0, 4)].abs());
        assert!((r[(5, 1)] - r[(5, 3)]).abs() <= 1e-9 * r[(5, 1)].abs());
    }

    #[test]
    fn dissipative_coupling_enters_between_polariton_pairs() {
        let p = resonant(1e13, hz(1e6), hz(3e6));
        let b = diagonalize_polaritons(&p).unwrap();
        let a = solve_averages(&p, &b, AveragesMode::Approx).unwrap();
        let r = build_drift(&p, &b, &a).unwrap();
        let dk = b.dissipative_coupling;
        assert!(dk > 0.0);
        assert_eq!(r[(0, 2)], -dk);
        assert_eq!(r[(1, 3)], -dk);
        assert_eq!(r[(2, 0)], -dk);
        assert_eq!(r[(3, 1)], -dk);
    }

    #[test]
    fn vacuum_diffusion_is_diagonal_linewidths() {
        let mut p = resonant(1e13, hz(1e6), hz(1e6));
        p.temperature = 0.0;
        let b = diagonalize_polaritons(&p).unwrap();
        let d = build_diffusion(&p, &b).unwrap();
        let ku = b.upper_linewidth;
        let kl = b.lower_linewidth;
        let km = hz(100.0);
        let expected = [ku, ku, kl, kl, km, km, km, km];
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { expected[i] } else { 0.0 };
                assert!((d[(i, j)] - want).abs() <= 1e-12 * ku, "({i},{j})");
            }
        }
    }

    #[test]
    fn thermal_mechanical_noise_uses_bose_occupation() {
        let p = resonant(1e13, hz(1e6), hz(1e6));
        let b = diagonalize_polaritons(&p).unwrap();
        let d = build_diffusion(&p, &b).unwrap();
        let nbar = 20.340_618_351_800_997;
        let want = 2.0 * hz(100.0) * (nbar + 0.5);
        assert!((d[(4, 4)] - want).abs() / want < 1e-12);
    }

    #[test]
    fn unequal_linewidths_give_psd_cross_block() {
        let (ka, km) = (hz(1e6), hz(4e6));
        let p = resonant(1e13, ka, km);
        let b = diagonalize_polaritons(&p).unwrap();
        assert_eq!(b.theta, FRAC_PI_4);
        let d = build_diffusion(&p, &b).unwrap();
        let nc = thermal_occupation(0.5 * (b.upper_freq + b.lower_freq), p.temperature).unwrap();
        assert!((d[(0, 2)] - (km - ka) * (nc + 0.5)).abs() / (km - ka) < 1e-12);
        let eig = d.clone().symmetric_eigen().eigenvalues;
        let tol = -1e-12 * d.norm();
        assert!(eig.iter().all(|&e| e >= tol), "{eig}");
    }

    #[test]
    fn trace_counts_all_damping() {
        let p = resonant(7.85e13, hz(1e6), hz(2e6));
        let b = diagonalize_polaritons(&p).unwrap();
        let m = linear_model(&p, &b, AveragesMode::Approx).unwrap();
        let total = b.upper_linewidth + b.lower_linewidth + 2.0 * hz(100.0);
        assert!((m.drift.trace() + 2.0 * total).abs() / total < 1e-12);
    }

    #[test]
    fn network_with_sin_cos_weights_reproduces_drift_exactly() {
        for (ka, km) in [(hz(1e6), hz(1e6)), (hz(1e6), hz(2.5e6))] {
            let p = resonant(7.85e13, ka, km);
            let b = diagonalize_polaritons(&p).unwrap();
            for mode in [AveragesMode::Approx, AveragesMode::SelfConsistent] {
                let two = linear_model(&p, &b, mode).unwrap();
                let net = build_network(&Network::from_two_mode(&p, &b), mode).unwrap();
                assert_eq!(two.drift.shape(), net.drift.shape());
                assert!(two.drift.iter().zip(net.drift.iter()).all(|(x, y)| x == y));
                assert_eq!(two.layout, net.layout);
            }
        }
    }

    #[test]
    fn network_diffusion_matches_two_mode() {
        let p = resonant(7.85e13, hz(1e6), hz(2.5e6));
        let b = diagonalize_polaritons(&p).unwrap();
        let two = linear_model(&p, &b, AveragesMode::Approx).unwrap();
        let net = build_network(&Network::from_two_mode(&p, &b), AveragesMode::Approx).unwrap();
        for (x, y) in two.diffusion.iter().zip(net.diffusion.iter()) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn single_polariton_single_mechanics_is_standard_sideband_drift() {
        let (w, kappa, gamma) = (hz(10e6), hz(1e6), hz(100.0));
        let wc = hz(5e9);
        let net = Network::new(
            vec![NetworkPolariton {
                label: "a".into(),
                freq: wc,
                detuning: w,
                linewidth: kappa,
                drive_weight: 1.0,
                coupling_weights: vec![1.0],
            }],
            vec![MechanicalMode::new(w, gamma, hz(1.0))],
            wc - w,
            1e12,
            0.0,
        );
        let m = build_network(&net, AveragesMode::Approx).unwrap();
        let g = m.averages.effective_couplings[0].re;
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            -kappa, w,      -g,     0.0,
            -w,     -kappa, 0.0,    0.0,
            0.0,    0.0,    -gamma, w,
            0.0,    g,      -w,     -gamma,
        ]);
        assert_eq!(m.drift, expected);
    }

    #[test]
    fn network_shape_mismatch_is_rejected() {
        let net = Network::new(
            vec![NetworkPolariton {
                label: "a".into(),
                freq: 1e10,
                detuning: 1e7,
                linewidth: 1e6,
                drive_weight: 1.0,
                coupling_weights: vec![1.0, 1.0],
            }],
            vec![MechanicalMode::new(1e7, 1e2, 1.0)],
            1e10 - 1e7,
            1e12,
            0.0,
        );
        assert!(matches!(build_network(&net, AveragesMode::Approx), Err(Error::Shape(_))));
    }
}
