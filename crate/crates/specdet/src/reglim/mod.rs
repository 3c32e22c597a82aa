//! Regularized limits along spectral rays.
//!
//! Given samples of a nonvanishing function λ ↦ f(λ) on a ray
//! λ = r e^{iθ'}, this module maintains a single continuous branch of
//! log f (the branch is fixed at the first sample, so the overall ambiguity
//! is one global constant), fits the asymptotic model
//!
//! ```text
//! log f(λ) ≈ Σ_k c_k (−λ)^{e_k} + c_log · log(−λ) + c_const
//! ```
//!
//! by linear least squares, and extracts the `log(−λ)` coefficient (the
//! relative zeta value at zero) and the constant term (the regularized
//! limit, LIM).

mod fit;
mod track;

pub use fit::{fit_expansion, ExpansionBasis, ExpansionModel};
pub use track::{sample_ray, track_log, track_log_scaled, RaySampler, RaySamples};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::numerics::SpectralCut;

#[derive(Debug, Error, Clone)]
pub enum ReglimError {
    #[error("sample value is exactly zero at radius {radius}: eigenvalue on the ray")]
    ZeroValue { radius: f64 },
    #[error("sample value is not finite at radius {radius}")]
    NonFiniteValue { radius: f64 },
    #[error("phase jump of {jump:.3} rad between radii {r_lo} and {r_hi} unresolved after {rounds} refinement rounds")]
    PhaseJumpUnresolved {
        r_lo: f64,
        r_hi: f64,
        jump: f64,
        rounds: usize,
    },
    #[error("design matrix ill-conditioned (condition {condition:.3e}): change window or basis")]
    IllConditioned { condition: f64 },
    #[error("too few samples: {got} for basis of size {need} (+4 required)")]
    TooFewSamples { got: usize, need: usize },
    #[error("regularized limit unconverged: constant drift {} exceeds tolerance {}", .0.stability, .0.tolerance)]
    Unconverged(Box<LimResult>),
    #[error("sampler failed at λ = {lambda}: {message}")]
    SampleFailed { lambda: Complex64, message: String },
}

/// Geometric sampling plan along one ray of a spectral cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayPlan {
    pub cut: SpectralCut,
    /// Ray direction θ'. Equals the cut angle for determinant limits;
    /// ±π/2 for the eta-invariant rays.
    pub direction: f64,
    /// Starting radius r₀ > 0.
    pub r0: f64,
    /// Geometric factor > 1 between consecutive radii.
    pub ratio: f64,
    /// Number of samples (≥ 8).
    pub count: usize,
    /// Maximum adaptive subdivision rounds when phase steps are too large.
    pub refinement_cap: usize,
}

impl RayPlan {
    /// Plan along the cut ray itself.
    pub fn along_cut(cut: SpectralCut) -> Self {
        Self {
            cut,
            direction: cut.theta(),
            r0: 10.0,
            ratio: 1.3,
            count: 48,
            refinement_cap: 8,
        }
    }

    pub fn with_direction(mut self, direction: f64) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.r0 * self.ratio.powi(k as i32)).collect()
    }

    pub fn lambda(&self, radius: f64) -> Complex64 {
        Complex64::from_polar(radius, self.direction)
    }

    /// The same window shifted up by one doubling; used for the stability
    /// refit.
    pub fn shifted(&self) -> Self {
        let mut p = *self;
        p.r0 *= 2.0;
        p
    }
}

/// Outcome of the regularized-limit extraction.
#[derive(Debug, Clone, Serialize)]
pub struct LimResult {
    /// Coefficient of log(−λ): the relative zeta function at s = 0.
    pub zeta_zero: Complex64,
    /// The constant term: LIM of the tracked logarithm.
    pub lim_constant: Complex64,
    pub model: ExpansionModel,
    /// |c_const − c_const(refit window)|.
    pub stability: f64,
    pub tolerance: f64,
    pub converged: bool,
}

/// Default stability tolerance for the two-window drift check.
pub const DEFAULT_STABILITY_TOL: f64 = 1e-6;

/// Combine a fit and its shifted-window refit into a [`LimResult`].
/// Errors with [`ReglimError::Unconverged`] (carrying the data) when the
/// constant term drifts more than `tolerance` between the windows.
///
/// The drift is measured modulo 2πi: each window fixes its own log branch
/// at its first sample, so the constants may differ by an exact multiple of
/// 2πi that cancels in every exponentiated result.
pub fn regularized_limit(
    model: ExpansionModel,
    window_shift_refit: &ExpansionModel,
    tolerance: f64,
) -> Result<LimResult, ReglimError> {
    let delta = model.c_const - window_shift_refit.c_const;
    let stability = delta.re.hypot(crate::numerics::normalize_angle(delta.im));
    let converged = stability <= tolerance;
    let result = LimResult {
        zeta_zero: model.c_log,
        lim_constant: model.c_const,
        model,
        stability,
        tolerance,
        converged,
    };
    if converged {
        Ok(result)
    } else {
        Err(ReglimError::Unconverged(Box::new(result)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;
    use std::f64::consts::PI;

    fn plan() -> RayPlan {
        RayPlan::along_cut(SpectralCut::new(PI))
    }

    #[test]
    fn constant_model_recovery() {
        // f(λ) = 5 on the ray: c_const = 5, everything else 0
        let p = plan();
        let radii = p.radii();
        let logs: Vec<Complex64> = radii.iter().map(|_| c64(5.0f64.ln(), 0.0)).collect();
        let basis = ExpansionBasis::default_for_order(1);
        let model = fit_expansion(&logs, &radii, p.direction, &basis).unwrap();
        assert!((model.c_const - c64(5.0f64.ln(), 0.0)).norm() < 1e-12);
        assert!(model.c_log.norm() < 1e-12);
        for c in &model.coefficients {
            assert!(c.norm() < 1e-9);
        }
        let refit = model.clone();
        let lim = regularized_limit(model, &refit, DEFAULT_STABILITY_TOL).unwrap();
        assert!((lim.lim_constant.exp() - c64(5.0, 0.0)).norm() < 1e-11);
        assert!(lim.zeta_zero.norm() < 1e-12);
    }

    #[test]
    fn exact_model_in_span() {
        // f with log f = 2 log(−λ) + 3 + 7 (−λ)^{-1}
        let p = plan();
        let radii = p.radii();
        let logs: Vec<Complex64> = radii
            .iter()
            .map(|&r| {
                let neg = c64(r, 0.0); // direction π ⇒ −λ = r
                c64(2.0, 0.0) * neg.ln() + c64(3.0, 0.0) + c64(7.0, 0.0) / neg
            })
            .collect();
        let basis = ExpansionBasis::new(vec![-1.0], true);
        let model = fit_expansion(&logs, &radii, p.direction, &basis).unwrap();
        assert!((model.c_log - c64(2.0, 0.0)).norm() < 1e-9);
        assert!((model.c_const - c64(3.0, 0.0)).norm() < 1e-9);
        assert!((model.coefficients[0] - c64(7.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn pure_decay_has_zero_limit() {
        let p = plan();
        let radii = p.radii();
        let logs: Vec<Complex64> = radii
            .iter()
            .map(|&r| {
                let neg = c64(r, 0.0);
                c64(2.0, 1.0) / neg + c64(-0.3, 0.4) / (neg * neg)
            })
            .collect();
        let basis = ExpansionBasis::new(vec![-1.0, -2.0, -3.0], true);
        let model = fit_expansion(&logs, &radii, p.direction, &basis).unwrap();
        assert!(model.c_const.norm() < 1e-11);
        assert!(model.c_log.norm() < 1e-11);
    }

    #[test]
    fn unconverged_flagged() {
        let p = plan();
        let radii = p.radii();
        let logs: Vec<Complex64> = radii.iter().map(|_| c64(1.0, 0.0)).collect();
        let basis = ExpansionBasis::new(vec![-1.0], true);
        let model = fit_expansion(&logs, &radii, p.direction, &basis).unwrap();
        let mut other = model.clone();
        other.c_const += c64(1e-3, 0.0);
        match regularized_limit(model, &other, 1e-6) {
            Err(ReglimError::Unconverged(r)) => assert!(!r.converged),
            other => panic!("expected Unconverged, got {other:?}"),
        }
    }
}
