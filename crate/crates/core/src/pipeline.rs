//! End-to-end evaluation: mean fields, linearized dynamics, Lyapunov
//! steady state and analytic rates for one parameter point.

use serde::{Deserialize, Serialize};

use crate::analytics::{cooling_analysis, network_cooling, CoolingAnalysis, Flag};
use crate::dynamics::{build_network, linear_model, AveragesMode, LinearModel, Network, SteadyStateAverages};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::polariton::{diagonalize_polaritons, PolaritonBasis};
use crate::steady::{check_stability, solve_steady_state, Stability, SteadyState};
use crate::tuning::{tune_two_mode, TwoModeTuning};

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub averages: SteadyStateAverages,
    pub stability: Stability,
    /// Present only for stable points.
    pub steady: Option<SteadyState>,
    pub analytics: CoolingAnalysis,
    pub flags: Vec<Flag>,
}

impl Evaluation {
    pub fn stable(&self) -> bool {
        self.stability.stable
    }

    /// Lyapunov occupations of the mechanical modes, if the point is stable.
    pub fn numeric_occupations(&self) -> Option<Vec<f64>> {
        self.steady.as_ref().map(SteadyState::mechanical_occupations)
    }

    pub fn analytic_occupations(&self) -> Vec<f64> {
        self.analytics.effective_occupations()
    }

    pub fn effective_dampings(&self) -> Vec<f64> {
        self.analytics.effective_dampings()
    }

    /// Largest numeric mechanical occupation; `+∞` when unstable.
    pub fn worst_occupation(&self) -> f64 {
        self.numeric_occupations()
            .map_or(f64::INFINITY, |n| n.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }
}

fn evaluate_model(model: LinearModel, analytics: CoolingAnalysis) -> Result<Evaluation> {
    let stability = check_stability(&model.drift)?;
    let mut flags = analytics.flags.clone();
    let steady = if stability.stable {
        Some(solve_steady_state(&model)?)
    } else {
        flags.push(Flag::Unstable);
        None
    };
    Ok(Evaluation { averages: model.averages, stability, steady, analytics, flags })
}

/// Evaluates the two-polariton system as given.
pub fn evaluate(params: &SystemParams, mode: AveragesMode) -> Result<(PolaritonBasis, Evaluation)> {
    params.validate()?;
    let basis = diagonalize_polaritons(params)?;
    let model = linear_model(params, &basis, mode)?;
    let analytics = cooling_analysis(params, &basis, &model.averages)?;
    Ok((basis, evaluate_model(model, analytics)?))
}

/// Evaluates a general polariton network.
pub fn evaluate_network(net: &Network, mode: AveragesMode) -> Result<Evaluation> {
    let model = build_network(net, mode)?;
    let analytics = network_cooling(net, &model.averages)?;
    evaluate_model(model, analytics)
}

/// A two-polariton operating point. When `theta` is set, the coupling,
/// magnon frequency and drive are retuned so that the lower (upper)
/// polariton is resonant with the red sideband of the first (second)
/// mechanical mode; `drive_offset` then shifts the drive away from that
/// resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: SystemParams,
    pub theta: Option<f64>,
    #[serde(default)]
    pub drive_offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    /// The parameters actually evaluated, after tuning.
    pub params: SystemParams,
    pub tuning: Option<TwoModeTuning>,
    pub basis: PolaritonBasis,
    pub evaluation: Evaluation,
}

impl Scenario {
    pub fn tuned(params: SystemParams, theta: f64) -> Self {
        Self { params, theta: Some(theta), drive_offset: 0.0 }
    }

    pub fn explicit(params: SystemParams) -> Self {
        Self { params, theta: None, drive_offset: 0.0 }
    }

    /// Parameters after applying the θ schedule and drive offset.
    pub fn resolve(&self) -> Result<(SystemParams, Option<TwoModeTuning>)> {
        let mut params = self.params.clone();
        let tuning = match self.theta {
            Some(theta) => {
                let mech = &params.mechanics;
                if mech.len() < 2 {
                    return Err(Error::param(
                        "mechanics",
                        "θ tuning needs at least two mechanical modes",
                    ));
                }
                let t = tune_two_mode(params.cavity_freq, mech[0].freq, mech[1].freq, theta)?;
                t.apply(&mut params);
                Some(t)
            }
            None => None,
        };
        params.drive_freq += self.drive_offset;
        Ok((params, tuning))
    }

    pub fn evaluate(&self, mode: AveragesMode) -> Result<PointReport> {
        let (params, tuning) = self.resolve()?;
        let (basis, evaluation) = evaluate(&params, mode)?;
        Ok(PointReport { params, tuning, basis, evaluation })
    }
}
