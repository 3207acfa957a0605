//! Photon–matter hybridization into polaritons.
//!
//! The two-mode case has a closed form in terms of the mixing angle θ with
//! `U = a cosθ + m sinθ`, `L = −a sinθ + m cosθ`. The general case of one
//! cavity coupled to several matter modes is diagonalized numerically.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolaritonBasis {
    /// Mixing angle θ ∈ (0, π/2).
    pub theta: f64,
    pub upper_freq: f64,
    pub lower_freq: f64,
    /// κ_u = κ_a cos²θ + κ_m sin²θ.
    pub upper_linewidth: f64,
    /// κ_l = κ_a sin²θ + κ_m cos²θ.
    pub lower_linewidth: f64,
    /// δκ = (κ_m − κ_a) sinθ cosθ.
    pub dissipative_coupling: f64,
    /// Δ_u = ω_u − ω_0.
    pub upper_detuning: f64,
    /// Δ_l = ω_l − ω_0.
    pub lower_detuning: f64,
}

impl PolaritonBasis {
    /// Magnon amplitude in the upper polariton (sinθ).
    pub fn upper_weight(&self) -> f64 {
        self.theta.sin()
    }

    /// Magnon amplitude in the lower polariton (cosθ).
    pub fn lower_weight(&self) -> f64 {
        self.theta.cos()
    }

    pub fn splitting(&self) -> f64 {
        self.upper_freq - self.lower_freq
    }
}

/// Two-mode polariton basis for `params`.
///
/// θ is taken as `½·atan2(2g, Δ_am)`, which coincides with `½·arctan(2g/Δ_am)`
/// for Δ_am > 0 and continues through π/4 into (π/4, π/2) for Δ_am < 0, so
/// sinθ and cosθ stay non-negative.
pub fn diagonalize_polaritons(params: &SystemParams) -> Result<PolaritonBasis> {
    let g = params.coupling;
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::param("coupling", format!("must be positive, got {g}")));
    }
    let detuning = params.cavity_magnon_detuning();
    let theta = 0.5 * (2.0 * g).atan2(detuning);
    let (s, c) = theta.sin_cos();
    let center = 0.5 * (params.cavity_freq + params.magnon_freq);
    let half_split = 0.5 * detuning.hypot(2.0 * g);
    let upper_freq = center + half_split;
    let lower_freq = center - half_split;
    let (ka, km) = (params.cavity_linewidth, params.magnon_linewidth);
    Ok(PolaritonBasis {
        theta,
        upper_freq,
        lower_freq,
        upper_linewidth: ka * c * c + km * s * s,
        lower_linewidth: ka * s * s + km * c * c,
        dissipative_coupling: (km - ka) * s * c,
        // Subtract the nearly equal center and drive first to keep the
        // detunings accurate to their own scale.
        upper_detuning: (center - params.drive_freq) + half_split,
        lower_detuning: (center - params.drive_freq) - half_split,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatterMode {
    pub freq: f64,
    /// Coupling g_i to the cavity.
    pub coupling: f64,
    pub linewidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridPolariton {
    pub freq: f64,
    pub linewidth: f64,
    /// Amplitudes on the bare modes: index 0 is the cavity, index i ≥ 1 is
    /// matter mode i − 1.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonSpectrum {
    /// Polaritons in ascending frequency.
    pub polaritons: Vec<HybridPolariton>,
    /// Polariton damping matrix K_pq = Σ_k v_pk v_qk κ_k. The diagonal holds
    /// the linewidths, the off-diagonal the dissipative couplings.
    pub damping: DMatrix<f64>,
}

/// Numerically diagonalizes one cavity coupled to `matter` modes.
///
/// Eigenvector signs are fixed so that the first matter amplitude is
/// non-negative (the cavity amplitude when that vanishes), which for a single
/// matter mode reproduces `(cosθ, sinθ)` and `(−sinθ, cosθ)`.
pub fn photon_matter_diagonalize(
    cavity_freq: f64,
    cavity_linewidth: f64,
    matter: &[MatterMode],
) -> Result<PolaritonSpectrum> {
    if matter.is_empty() {
        return Err(Error::param("matter", "at least one matter mode is required"));
    }
    if !(cavity_freq > 0.0) {
        return Err(Error::param("cavity_freq", "must be positive"));
    }
    for (i, m) in matter.iter().enumerate() {
        if !(m.coupling > 0.0) || !m.coupling.is_finite() {
            return Err(Error::param(
                format!("matter[{i}].coupling"),
                format!("must be positive, got {}", m.coupling),
            ));
        }
        if !(m.freq > 0.0) {
            return Err(Error::param(format!("matter[{i}].freq"), "must be positive"));
        }
    }
    let n = matter.len() + 1;
    // Shift by the cavity frequency so the eigensolver works on O(g) numbers.
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (i, m) in matter.iter().enumerate() {
        h[(i + 1, i + 1)] = m.freq - cavity_freq;
        h[(0, i + 1)] = m.coupling;
        h[(i + 1, 0)] = m.coupling;
    }
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let scale = matter
        .iter()
        .map(|m| m.freq.abs())
        .fold(cavity_freq, f64::max);
    for w in order.windows(2) {
        let gap = eig.eigenvalues[w[1]] - eig.eigenvalues[w[0]];
        if gap <= 1e-12 * scale {
            return Err(Error::Degenerate {
                freq: cavity_freq + eig.eigenvalues[w[0]],
            });
        }
    }

    let kappas: Vec<f64> = std::iter::once(cavity_linewidth)
        .chain(matter.iter().map(|m| m.linewidth))
        .collect();
    let mut vectors: Vec<DVector<f64>> = Vec::with_capacity(n);
    for &k in &order {
        let mut v = eig.eigenvectors.column(k).into_owned();
        let pivot = if v[1].abs() > 1e-300 { v[1] } else { v[0] };
        if pivot < 0.0 {
            v.neg_mut();
        }
        vectors.push(v);
    }
    let mut damping = DMatrix::<f64>::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            damping[(p, q)] = (0..n).map(|k| vectors[p][k] * vectors[q][k] * kappas[k]).sum();
        }
    }
    let polaritons = order
        .iter()
        .zip(&vectors)
        .enumerate()
        .map(|(p, (&k, v))| HybridPolariton {
            freq: cavity_freq + eig.eigenvalues[k],
            linewidth: damping[(p, p)],
            weights: v.iter().copied().collect(),
        })
        .collect();
    Ok(PolaritonSpectrum { polaritons, damping })
}
