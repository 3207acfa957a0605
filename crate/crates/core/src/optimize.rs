//! Derivative-free minimization of the worst mechanical occupation.
//!
//! A coarse grid over the bounded box seeds a compass (pattern) search;
//! extra seeded random starts guard against a poor grid winner. Unstable
//! or failing points score `+∞`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::AveragesMode;
use crate::error::{Error, Result};
use crate::pipeline::{PointReport, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeVariable {
    /// Mixing angle (rad); the scenario is retuned at every point.
    Theta,
    /// Drive frequency offset from the resonance-matched value (rad/s).
    DriveOffset,
    /// Drive Rabi frequency (rad/s).
    Rabi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub variable: FreeVariable,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSpec {
    pub bounds: Vec<Bound>,
    /// Grid points per free variable in the initial scan.
    pub grid_points: usize,
    /// Total evaluation budget, grid included.
    pub budget: usize,
    /// Random starts for additional pattern searches.
    pub restarts: usize,
    pub seed: u64,
    /// Search stops once every step is below this fraction of its range.
    pub tolerance: f64,
}

impl OptimizeSpec {
    pub fn new(bounds: Vec<Bound>) -> Self {
        Self { bounds, grid_points: 11, budget: 400, restarts: 2, seed: 0, tolerance: 1e-4 }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.bounds.is_empty() {
            errors.push(Error::param("optimize.free", "at least one free variable is required"));
        }
        for (i, b) in self.bounds.iter().enumerate() {
            if !(b.lower.is_finite() && b.upper.is_finite() && b.lower < b.upper) {
                errors.push(Error::param(
                    format!("optimize.free[{i}]"),
                    "bounds must be finite with lower < upper",
                ));
            }
            if self.bounds[..i].iter().any(|o| o.variable == b.variable) {
                errors.push(Error::param(format!("optimize.free[{i}]"), "duplicate free variable"));
            }
        }
        if self.grid_points == 0 {
            errors.push(Error::param("optimize.grid_points", "must be positive"));
        }
        let grid = self.grid_points.checked_pow(self.bounds.len() as u32);
        if grid.is_none_or(|g| g > self.budget) {
            errors.push(Error::param(
                "optimize.budget",
                "must cover at least the initial grid scan",
            ));
        }
        if !(self.tolerance > 0.0) {
            errors.push(Error::param("optimize.tolerance", "must be positive"));
        }
        match errors.len() {
            0 => Ok(()),
            1 => Err(errors.pop().unwrap()),
            _ => Err(Error::Validation(errors)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub point: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best: Vec<f64>,
    pub objective: f64,
    pub report: PointReport,
    pub trace: Vec<TraceEntry>,
}

fn scenario_at(base: &Scenario, bounds: &[Bound], point: &[f64]) -> Scenario {
    let mut s = base.clone();
    for (b, &x) in bounds.iter().zip(point) {
        match b.variable {
            FreeVariable::Theta => s.theta = Some(x),
            FreeVariable::DriveOffset => s.drive_offset = x,
            FreeVariable::Rabi => s.params.rabi_freq = x,
        }
    }
    s
}

/// Worst numeric mechanical occupation at `point`; `+∞` if the point is
/// unstable or cannot be evaluated.
pub fn objective(base: &Scenario, bounds: &[Bound], point: &[f64], mode: AveragesMode) -> f64 {
    scenario_at(base, bounds, point)
        .evaluate(mode)
        .map_or(f64::INFINITY, |r| r.evaluation.worst_occupation())
}

struct Search<'a> {
    base: &'a Scenario,
    spec: &'a OptimizeSpec,
    mode: AveragesMode,
    trace: Vec<TraceEntry>,
}

impl Search<'_> {
    fn remaining(&self) -> usize {
        self.spec.budget.saturating_sub(self.trace.len())
    }

    /// Evaluates a batch in parallel, appending to the trace in order.
    fn evaluate(&mut self, points: Vec<Vec<f64>>) -> Vec<f64> {
        let values: Vec<f64> = points
            .par_iter()
            .map(|p| objective(self.base, &self.spec.bounds, p, self.mode))
            .collect();
        for (point, &objective) in points.into_iter().zip(&values) {
            self.trace.push(TraceEntry { point, objective });
        }
        values
    }

    /// Compass search from `start`; only strict improvements move the
    /// incumbent, so a local optimum is returned unchanged.
    fn pattern_search(&mut self, start: Vec<f64>, value: f64) -> (Vec<f64>, f64) {
        let bounds = &self.spec.bounds;
        let mut steps: Vec<f64> = bounds
            .iter()
            .map(|b| (b.upper - b.lower) / (2 * self.spec.grid_points) as f64)
            .collect();
        let (mut best, mut best_value) = (start, value);
        loop {
            let converged = steps
                .iter()
                .zip(bounds)
                .all(|(s, b)| *s < self.spec.tolerance * (b.upper - b.lower));
            if converged || self.remaining() == 0 {
                break;
            }
            let mut poll = Vec::with_capacity(2 * bounds.len());
            for (d, b) in bounds.iter().enumerate() {
                for sign in [1.0, -1.0] {
                    let x = (best[d] + sign * steps[d]).clamp(b.lower, b.upper);
                    if x != best[d] {
                        let mut p = best.clone();
                        p[d] = x;
                        poll.push(p);
                    }
                }
            }
            poll.truncate(self.remaining());
            let values = self.evaluate(poll.clone());
            let winner = values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v < best_value)
                .min_by(|a, b| a.1.total_cmp(b.1));
            match winner {
                Some((i, &v)) => {
                    best = poll.swap_remove(i);
                    best_value = v;
                }
                None => steps.iter_mut().for_each(|s| *s *= 0.5),
            }
        }
        (best, best_value)
    }
}

fn grid_points(bounds: &[Bound], per_axis: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .map(|b| {
            if per_axis == 1 {
                vec![0.5 * (b.lower + b.upper)]
            } else {
                let step = (b.upper - b.lower) / (per_axis - 1) as f64;
                (0..per_axis).map(|i| b.lower + step * i as f64).collect()
            }
        })
        .collect();
    let mut points = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

/// Minimizes the worst mechanical occupation over the free variables.
///
/// Deterministic for a given spec: parallel evaluations are reassembled in
/// submission order and ties go to the earliest point.
pub fn optimize(base: &Scenario, spec: &OptimizeSpec, mode: AveragesMode) -> Result<OptimizeResult> {
    spec.validate()?;
    let mut search = Search { base, spec, mode, trace: Vec::new() };

    let grid = grid_points(&spec.bounds, spec.grid_points);
    let values = search.evaluate(grid.clone());
    let (start, start_value) = grid
        .into_iter()
        .zip(values)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is non-empty");

    let mut starts = Vec::new();
    if start_value.is_finite() {
        starts.push((start, start_value));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.restarts {
        if search.remaining() == 0 {
            break;
        }
        let p: Vec<f64> = spec
            .bounds
            .iter()
            .map(|b| rng.random_range(b.lower..b.upper))
            .collect();
        let v = search.evaluate(vec![p.clone()])[0];
        if v.is_finite() {
            starts.push((p, v));
        }
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for (p, v) in starts {
        let (q, w) = search.pattern_search(p, v);
        if best.as_ref().is_none_or(|(_, b)| w < *b) {
            best = Some((q, w));
        }
    }
    let evaluations = search.trace.len();
    let (point, value) = best.ok_or(Error::NoFeasiblePoint { evaluations })?;
    let report = scenario_at(base, &spec.bounds, &point).evaluate(mode)?;
    Ok(OptimizeResult { best: point, objective: value, report, trace: search.trace })
}
