use num_complex::Complex64;
use serde::Serialize;

use super::problem::{BoundaryProblem, RatioSampler};
use super::zeta::map_unconverged;
use super::BvpError;
use crate::numerics::LogComplex;
use crate::reglim::{
    fit_expansion, regularized_limit, sample_ray, ExpansionBasis, LimResult, RayPlan, RaySampler,
};

/// Relative eta invariant data for a pair of self-adjoint problems.
///
/// The underlying identity is
/// `η̃(A₁,A₂) ≡ (1/2πi)·LIM_α[log det S₋ᵢα − log det Sᵢα] + ζ(A₁²,A₂²,0)/2
/// (mod Z)`, with the scattering determinants realized as ratios of
/// boundary determinants along the two vertical rays.
#[derive(Debug, Clone, Serialize)]
pub struct EtaResult {
    /// Representative of η = 2η̃ modulo 2Z in [−1, 1).
    pub eta_rel_mod2: f64,
    /// Representative of η̃ modulo Z in [−1/2, 1/2).
    pub eta_tilde_mod1: f64,
    /// ζ(A₁², A₂², 0) from the squared-variable fit.
    pub zeta_sq_zero: Complex64,
    /// Fitted constants along the +i and −i rays.
    pub ray_limits: (Complex64, Complex64),
    /// Imaginary defect of the eta representative before taking the real
    /// part; large values flag an inconsistent pair.
    pub imag_defect: f64,
    pub squared_diagnostics: LimResult,
}

/// Result of the squared-operator pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct SquaredFit {
    /// ζ(A₁², A₂², 0): the log(−λ) coefficient of the Φ fit.
    pub zeta_sq_zero: Complex64,
    /// LIM of Φ(λ) = log det S_{λ^{1/2}} + log det S_{−λ^{1/2}}.
    pub lim_phi: Complex64,
    pub diagnostics: LimResult,
}

/// Sampler of Φ(λ) along R_π in the squared spectral variable: with
/// λ = −t, the θ = π branch gives λ^{1/2} = −i√t and −λ^{1/2} = +i√t, so
/// Φ(−t) is the sum of the two vertical-ray ratio logs at radius √t.
struct PhiSampler<'a> {
    ratio: RatioSampler<'a>,
}

impl PhiSampler<'_> {
    fn mu_points(lambda: Complex64) -> (Complex64, Complex64) {
        let t = lambda.norm();
        let mu = t.sqrt();
        (Complex64::new(0.0, -mu), Complex64::new(0.0, mu))
    }
}

impl RaySampler for PhiSampler<'_> {
    fn value(&self, lambda: Complex64) -> Result<LogComplex, String> {
        let (m_dn, m_up) = Self::mu_points(lambda);
        let v1 = self.ratio.value(m_dn)?;
        let v2 = self.ratio.value(m_up)?;
        Ok(v1.mul(&v2))
    }

    fn log_derivative(&self, lambda: Complex64) -> Option<Result<Complex64, String>> {
        // dΦ/dλ = [g'(λ^{1/2}) − g'(−λ^{1/2})] / (2 λ^{1/2}),
        // g = log det ratio
        let (m_dn, m_up) = Self::mu_points(lambda);
        let v = (|| {
            let g_dn = self.ratio.log_derivative(m_dn).unwrap()?;
            let g_up = self.ratio.log_derivative(m_up).unwrap()?;
            Ok((g_dn - g_up) / (m_dn * 2.0))
        })();
        Some(v)
    }
}

fn vertical_plan(problem: &BoundaryProblem, direction: f64) -> RayPlan {
    problem.plan().with_direction(direction)
}

/// Basis for the squared operator (order 2r) in the variable t = |λ|:
/// exponents {k/(2r)} plus the log term.
fn squared_basis(problem: &BoundaryProblem) -> ExpansionBasis {
    ExpansionBasis::default_for_order(2 * problem.operator.order())
}

/// Fit Φ(λ) = log det S_{λ^{1/2}} + log det S_{−λ^{1/2}} along R_π.
/// The log(−λ) coefficient is ζ(A₁², A₂², 0).
pub fn squared_fit(p1: &BoundaryProblem, p2: &BoundaryProblem) -> Result<SquaredFit, BvpError> {
    p1.check_compatible(p2)?;
    let mu_plan = vertical_plan(p1, std::f64::consts::FRAC_PI_2);
    // t-grid aligned with the μ-grid: t = μ², still geometric
    let plan = RayPlan {
        cut: p1.cut,
        direction: std::f64::consts::PI,
        r0: mu_plan.r0 * mu_plan.r0,
        ratio: mu_plan.ratio * mu_plan.ratio,
        count: mu_plan.count,
        refinement_cap: mu_plan.refinement_cap,
    };
    let sampler = PhiSampler {
        ratio: RatioSampler::new(p1, p2, &mu_plan),
    };
    let basis = squared_basis(p1);
    let samples = sample_ray(&plan, &sampler)?;
    let model = fit_expansion(&samples.logs, &samples.radii, samples.direction, &basis)?;
    let shifted = sample_ray(&plan.shifted(), &sampler)?;
    let refit = fit_expansion(&shifted.logs, &shifted.radii, shifted.direction, &basis)?;
    let lim = regularized_limit(model, &refit, p1.stability_tol).map_err(map_unconverged)?;
    Ok(SquaredFit {
        zeta_sq_zero: lim.zeta_zero,
        lim_phi: lim.lim_constant,
        diagnostics: lim,
    })
}

/// det_ζ(A₁², A₂²) = |det ratio at 0|² · exp(−LIM log|det ratio along
/// ±iα|²): a positive real number.
pub fn relative_det_squared(
    p1: &BoundaryProblem,
    p2: &BoundaryProblem,
) -> Result<(f64, SquaredFit), BvpError> {
    let sq = squared_fit(p1, p2)?;
    let d1 = p1.boundary_log_det(Complex64::new(0.0, 0.0))?;
    let d2 = p2.boundary_log_det(Complex64::new(0.0, 0.0))?;
    if d1.is_zero() || d2.is_zero() {
        return Err(BvpError::NonInvertibleProblem);
    }
    let log_ratio0 = d1.log_abs - d2.log_abs;
    let value = (2.0 * log_ratio0 - sq.lim_phi.re).exp();
    Ok((value, sq))
}

/// Relative eta invariant of two self-adjoint problems sharing the
/// operator: fits the ratio of boundary determinants along λ = ±iα, takes
/// the regularized-limit difference of constants, and adds ζ_sq(0)/2.
/// λ = 0 may be an eigenvalue; the rays start at positive radius.
pub fn relative_eta(p1: &BoundaryProblem, p2: &BoundaryProblem) -> Result<EtaResult, BvpError> {
    p1.check_compatible(p2)?;
    let basis = p1.basis();
    let mut limits = Vec::with_capacity(2);
    for direction in [std::f64::consts::FRAC_PI_2, 1.5 * std::f64::consts::PI] {
        let plan = vertical_plan(p1, direction);
        let sampler = RatioSampler::new(p1, p2, &plan);
        let samples = sample_ray(&plan, &sampler)?;
        let model = fit_expansion(&samples.logs, &samples.radii, samples.direction, &basis)?;
        let shifted = sample_ray(&plan.shifted(), &sampler)?;
        let refit = fit_expansion(&shifted.logs, &shifted.radii, shifted.direction, &basis)?;
        let lim = regularized_limit(model, &refit, p1.stability_tol).map_err(map_unconverged)?;
        limits.push(lim);
    }
    let lim_up = limits[0].lim_constant;
    let lim_dn = limits[1].lim_constant;
    let sq = squared_fit(p1, p2)?;
    // η̃ = (LIM₋ − LIM₊)/(2πi) + ζ_sq(0)/2 mod Z
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let eta_tilde = (lim_dn - lim_up) / two_pi_i + sq.zeta_sq_zero * 0.5;
    let imag_defect = eta_tilde.im.abs();
    if imag_defect > 1e-6 {
        return Err(BvpError::EtaNotReal {
            imag: eta_tilde.im,
        });
    }
    Ok(EtaResult {
        eta_rel_mod2: wrap_mod(2.0 * eta_tilde.re, 2.0),
        eta_tilde_mod1: wrap_mod(eta_tilde.re, 1.0),
        zeta_sq_zero: sq.zeta_sq_zero,
        ray_limits: (lim_up, lim_dn),
        imag_defect,
        squared_diagnostics: sq.diagnostics,
    })
}

/// Representative of `x` modulo `period` in [−period/2, period/2).
pub fn wrap_mod(x: f64, period: f64) -> f64 {
    let half = period / 2.0;
    let mut y = (x + half).rem_euclid(period) - half;
    if y >= half {
        y -= period;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp::builtins;
    use crate::bvp::zeta::relative_zeta_det;
    use crate::numerics::c64;
    use std::f64::consts::PI;

    fn twisted_pair(a1: f64, a2: f64) -> (BoundaryProblem, BoundaryProblem) {
        let b = builtins::twisted_dirac(a1, 1.0);
        let p1 = b.problem("twisted").unwrap();
        let p2 = p1.with_frame(builtins::twisted_frame(a2)).unwrap();
        (p1, p2)
    }

    #[test]
    fn eta_vanishes_for_equal_problems() {
        let (p1, _) = twisted_pair(PI / 2.0, PI / 3.0);
        let r = relative_eta(&p1, &p1).unwrap();
        assert!(r.eta_rel_mod2.abs() < 1e-10);
        assert!(r.zeta_sq_zero.norm() < 1e-10);
    }

    #[test]
    fn eta_of_twisted_family() {
        // η(a) = 1 − a/π, so the relative value is (a₂−a₁)/π mod 2
        for (a1, a2) in [(PI / 3.0, PI / 4.0), (PI / 2.0, PI / 4.0), (2.0 * PI / 3.0, PI / 4.0)] {
            let (p1, p2) = twisted_pair(a1, a2);
            let r = relative_eta(&p1, &p2).unwrap();
            let want = wrap_mod((a2 - a1) / PI, 2.0);
            assert!(
                (r.eta_rel_mod2 - want).abs() < 1e-6,
                "a1={a1}, a2={a2}: η = {} vs {want}",
                r.eta_rel_mod2
            );
            assert!(
                r.zeta_sq_zero.norm() < 1e-4,
                "ζ_sq(0) = {}",
                r.zeta_sq_zero
            );
        }
    }

    #[test]
    fn squared_fit_trivial_pair() {
        let (p1, _) = twisted_pair(PI / 2.0, PI / 3.0);
        let sq = squared_fit(&p1, &p1).unwrap();
        assert!(sq.zeta_sq_zero.norm() < 1e-10);
        let (det, _) = relative_det_squared(&p1, &p1).unwrap();
        assert!((det - 1.0).abs() < 1e-10);
    }

    #[test]
    fn squared_det_of_twisted_pair() {
        let (a1, a2) = (PI / 3.0, 3.0 * PI / 4.0);
        let (p1, p2) = twisted_pair(a1, a2);
        let (det, sq) = relative_det_squared(&p1, &p2).unwrap();
        let want = ((c64(1.0, 0.0) - c64(0.0, -a1).exp()).norm()
            / (c64(1.0, 0.0) - c64(0.0, -a2).exp()).norm())
        .powi(2);
        assert!(
            (det - want).abs() < 1e-7 * want,
            "det² = {det} vs {want}"
        );
        assert!(sq.zeta_sq_zero.norm() < 1e-4);
    }

    #[test]
    fn squared_det_consistent_with_relative_det() {
        // relative_det_squared = |relative_zeta_det(θ = π/2)|²
        let (a1, a2) = (PI / 2.0, 5.0 * PI / 6.0);
        let (p1, p2) = twisted_pair(a1, a2);
        let (det_sq, _) = relative_det_squared(&p1, &p2).unwrap();
        let rel = relative_zeta_det(&p1, &p2).unwrap().value;
        assert!(
            (det_sq - rel.norm_sqr()).abs() < 1e-7 * det_sq,
            "|rel|² = {} vs {det_sq}",
            rel.norm_sqr()
        );
    }
}
