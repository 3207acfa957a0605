//! Steady-state covariance of the linearized dynamics.
//!
//! Quadrature covariances use the symmetrized convention with vacuum
//! `V = ½·I`, so a mode's occupation is `(V_xx + V_yy − 1)/2`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::dynamics::{LinearModel, ModeLabel};
use crate::error::{Error, Result};

const STABILITY_MARGIN: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-9;
const OCCUPATION_CLAMP: f64 = 1e-9;
const MAX_CONDITION: f64 = 1e12;
const STEP_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    pub stable: bool,
    /// Largest real part of the drift eigenvalues (rad/s).
    pub spectral_abscissa: f64,
    pub eigenvalues: Vec<Complex<f64>>,
}

impl Stability {
    /// Largest eigenvalue modulus, the fastest rate in the dynamics.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Ratio of the largest to the smallest `|λ_i + λ_j|`, which are the
    /// eigenvalues of the vectorized Lyapunov operator.
    pub fn lyapunov_condition(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for a in &self.eigenvalues {
            for b in &self.eigenvalues {
                let s = (a + b).norm();
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

fn require_square(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.is_square() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::Shape(format!("{what} must be square and non-empty, got {:?}", m.shape())))
    }
}

/// Eigenvalue stability test: every real part must lie below `−10⁻⁹‖R‖`.
pub fn check_stability(drift: &DMatrix<f64>) -> Result<Stability> {
    require_square(drift, "drift matrix")?;
    let eigenvalues: Vec<Complex<f64>> = drift.complex_eigenvalues().iter().copied().collect();
    let spectral_abscissa = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let margin = STABILITY_MARGIN * drift.norm();
    Ok(Stability {
        stable: spectral_abscissa < -margin,
        spectral_abscissa,
        eigenvalues,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSolution {
    pub covariance: DMatrix<f64>,
    /// `‖RV + VRᵀ + D‖ / ‖D‖` (Frobenius).
    pub residual: f64,
    pub condition: f64,
    pub stability: Stability,
}

fn lyapunov_residual(drift: &DMatrix<f64>, diffusion: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    let r = drift * v + v * drift.transpose() + diffusion;
    let scale = diffusion.norm();
    if scale == 0.0 {
        r.norm()
    } else {
        r.norm() / scale
    }
}

/// Solves `RV + VRᵀ + D = 0` for the unique symmetric V.
///
/// The equation is vectorized as `(I⊗R + R⊗I) vec V = −vec D`, factorized
/// once by LU and polished with one step of iterative refinement.
pub fn solve_lyapunov(drift: &DMatrix<f64>, diffusion: &DMatrix<f64>) -> Result<LyapunovSolution> {
    require_square(drift, "drift matrix")?;
    if diffusion.shape() != drift.shape() {
        return Err(Error::Shape(format!(
            "diffusion is {:?}, drift is {:?}",
            diffusion.shape(),
            drift.shape()
        )));
    }
    let stability = check_stability(drift)?;
    if !stability.stable {
        return Err(Error::Unstable { abscissa: stability.spectral_abscissa });
    }
    let condition = stability.lyapunov_condition();
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }

    let n = drift.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let operator = eye.kronecker(drift) + drift.kronecker(&eye);
    let rhs = -DVector::from_column_slice(diffusion.as_slice());
    let lu = operator.clone().lu();
    let mut x = lu
        .solve(&rhs)
        .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let correction = rhs - &operator * &x;
    if let Some(dx) = lu.solve(&correction) {
        x += dx;
    }

    let v = DMatrix::from_column_slice(n, n, x.as_slice());
    let covariance = (&v + v.transpose()) * 0.5;
    let residual = lyapunov_residual(drift, diffusion, &covariance);
    if !(residual < RESIDUAL_TOL) {
        return Err(Error::Residual { residual });
    }
    Ok(LyapunovSolution { covariance, residual, condition, stability })
}

/// Occupation of each mode, `(V[2i,2i] + V[2i+1,2i+1] − 1)/2`.
///
/// Values down to `−10⁻⁹` are rounding noise and clamp to zero.
pub fn extract_occupations(covariance: &DMatrix<f64>, layout: &[ModeLabel]) -> Result<Vec<f64>> {
    if covariance.shape() != (2 * layout.len(), 2 * layout.len()) {
        return Err(Error::Shape(format!(
            "covariance is {:?} but layout has {} modes",
            covariance.shape(),
            layout.len()
        )));
    }
    layout
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let n = 0.5 * (covariance[(2 * i, 2 * i)] + covariance[(2 * i + 1, 2 * i + 1)] - 1.0);
            if n >= 0.0 {
                Ok(n)
            } else if n >= -OCCUPATION_CLAMP {
                Ok(0.0)
            } else {
                Err(Error::Unphysical { mode: label.name.clone(), occupation: n })
            }
        })
        .collect()
}

/// Smallest eigenvalue of `V + (i/2)J`, with J the block-diagonal symplectic
/// form `[[0, 1], [−1, 0]]` per mode. A physical state has this ≥ 0.
pub fn uncertainty_margin(covariance: &DMatrix<f64>) -> Result<f64> {
    require_square(covariance, "covariance")?;
    let n = covariance.nrows();
    if !n.is_multiple_of(2) {
        return Err(Error::Shape("covariance dimension must be even".into()));
    }
    // Real embedding of the Hermitian matrix A + iB is [[A, −B], [B, A]].
    let mut big = DMatrix::<f64>::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(covariance);
    big.view_mut((n, n), (n, n)).copy_from(covariance);
    for k in (0..n).step_by(2) {
        // B = J/2
        big[(n + k, k + 1)] = 0.5;
        big[(n + k + 1, k)] = -0.5;
        big[(k, n + k + 1)] = -0.5;
        big[(k + 1, n + k)] = 0.5;
    }
    Ok(big.symmetric_eigenvalues().min())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub covariance: DMatrix<f64>,
    pub occupations: Vec<f64>,
    pub layout: Vec<ModeLabel>,
    pub stability: Stability,
    pub lyapunov_residual: f64,
    pub condition: f64,
}

impl SteadyState {
    pub fn spectral_abscissa(&self) -> f64 {
        self.stability.spectral_abscissa
    }

    pub fn occupation(&self, name: &str) -> Option<f64> {
        self.layout
            .iter()
            .position(|l| l.name == name)
            .map(|i| self.occupations[i])
    }

    /// Occupations of the mechanical modes in layout order.
    pub fn mechanical_occupations(&self) -> Vec<f64> {
        self.layout
            .iter()
            .zip(&self.occupations)
            .filter(|(l, _)| l.kind == crate::dynamics::ModeKind::Mechanical)
            .map(|(_, n)| *n)
            .collect()
    }
}

/// Lyapunov steady state of a linear model, with occupations and a
/// physicality check on the covariance.
pub fn solve_steady_state(model: &LinearModel) -> Result<SteadyState> {
    let solution = solve_lyapunov(&model.drift, &model.diffusion)?;
    let occupations = extract_occupations(&solution.covariance, &model.layout)?;
    let margin = uncertainty_margin(&solution.covariance)?;
    let tol = OCCUPATION_CLAMP * solution.covariance.norm().max(1.0);
    if margin < -tol {
        let worst = model
            .layout
            .iter()
            .zip(&occupations)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(l, n)| (l.name.clone(), *n))
            .unwrap_or_default();
        return Err(Error::Unphysical { mode: worst.0, occupation: worst.1 });
    }
    Ok(SteadyState {
        covariance: solution.covariance,
        occupations,
        layout: model.layout.clone(),
        stability: solution.stability,
        lyapunov_residual: solution.residual,
        condition: solution.condition,
    })
}

/// Largest step `integrate_covariance` accepts for this drift.
pub fn max_integration_step(drift: &DMatrix<f64>) -> Result<f64> {
    let radius = check_stability(drift)?.spectral_radius();
    Ok(if radius == 0.0 { f64::INFINITY } else { STEP_FRACTION / radius })
}

/// Integrates `V̇ = RV + VRᵀ + D` from `initial` to `t_final` with classical
/// fourth-order Runge–Kutta. The step is `dt`, shortened uniformly so that
/// a whole number of steps lands on `t_final`.
pub fn integrate_covariance(
    drift: &DMatrix<f64>,
    diffusion: &DMatrix<f64>,
    initial: &DMatrix<f64>,
    t_final: f64,
    dt: f64,
) -> Result<DMatrix<f64>> {
    require_square(drift, "drift matrix")?;
    if diffusion.shape() != drift.shape() || initial.shape() != drift.shape() {
        return Err(Error::Shape("drift, diffusion and initial covariance differ in shape".into()));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::param("t_final", "must be finite and non-negative"));
    }
    let bound = max_integration_step(drift)?;
    if !(dt > 0.0 && dt <= bound) {
        return Err(Error::StepTooLarge { dt, bound });
    }
    let steps = (t_final / dt).ceil() as usize;
    if steps == 0 {
        return Ok(initial.clone());
    }
    let h = t_final / steps as f64;
    let rt = drift.transpose();
    let rate = |v: &DMatrix<f64>| drift * v + v * &rt + diffusion;
    let mut v = initial.clone();
    for _ in 0..steps {
        let k1 = rate(&v);
        let k2 = rate(&(&v + &k1 * (0.5 * h)));
        let k3 = rate(&(&v + &k2 * (0.5 * h)));
        let k4 = rate(&(&v + &k3 * h));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok((&v + v.transpose()) * 0.5)
}
