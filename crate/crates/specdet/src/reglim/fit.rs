use num_complex::Complex64;
use serde::Serialize;

use super::ReglimError;
use crate::numerics::{normalize_angle, ComplexMatrix};

/// Exponent set for the asymptotic model. Exponent 0 is excluded (the
/// constant term has its own slot), and a single `log(−λ)` term is optional;
/// differential operators produce no `log²` terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionBasis {
    pub exponents: Vec<f64>,
    pub include_log: bool,
}

impl ExpansionBasis {
    pub fn new(mut exponents: Vec<f64>, include_log: bool) -> Self {
        exponents.retain(|&e| e != 0.0);
        exponents.sort_by(|a, b| a.partial_cmp(b).unwrap());
        exponents.dedup();
        Self {
            exponents,
            include_log,
        }
    }

    /// Default basis for an operator of order `r`: exponents
    /// `{k/r : k = −4 … r, k ≠ 0}` plus the log term. The resolvent trace
    /// expands in powers `(−λ)^{−j/r−1}`; one integration produces this
    /// grid, and the positive powers up to `(−λ)^1` absorb boundary-layer
    /// growth of sinh type.
    pub fn default_for_order(r: usize) -> Self {
        let r = r.max(1);
        let exps = (-4..=(r as i32))
            .filter(|&k| k != 0)
            .map(|k| k as f64 / r as f64)
            .collect();
        Self::new(exps, true)
    }

    /// Pure-decay basis `{−1, …, −depth}` plus log, for scattering
    /// determinants that tend to 1 at infinity.
    pub fn decay(depth: usize) -> Self {
        Self::new((1..=depth).map(|k| -(k as f64)).collect(), true)
    }

    pub fn size(&self) -> usize {
        self.exponents.len() + 1 + usize::from(self.include_log)
    }
}

/// Fitted asymptotic expansion of a tracked logarithm along one ray.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionModel {
    pub exponents: Vec<f64>,
    pub include_log: bool,
    /// Coefficients aligned with `exponents`.
    pub coefficients: Vec<Complex64>,
    pub c_log: Complex64,
    pub c_const: Complex64,
    /// Root-mean-square misfit over the sample window.
    pub residual_norm: f64,
    /// Condition estimate of the column-equilibrated design matrix.
    pub condition: f64,
    /// Ray direction θ' the fit was taken along.
    pub direction: f64,
    pub sample_count: usize,
}

impl ExpansionModel {
    /// Evaluate the fitted model at radius `r` on its ray.
    pub fn evaluate(&self, r: f64) -> Complex64 {
        let log_neg = log_neg_lambda(r, self.direction);
        let mut v = self.c_const;
        if self.include_log {
            v += self.c_log * log_neg;
        }
        for (&e, &c) in self.exponents.iter().zip(&self.coefficients) {
            v += c * (log_neg * e).exp();
        }
        v
    }
}

/// log(−λ) for λ = r e^{iθ'}: the branch with Im ∈ (−π, π], i.e.
/// −λ = r e^{i(θ'−π)} reduced to the principal sector. Along θ' = π this is
/// the real logarithm.
pub fn log_neg_lambda(r: f64, direction: f64) -> Complex64 {
    Complex64::new(r.ln(), normalize_angle(direction - std::f64::consts::PI))
}

/// Linear least squares of tracked logs against
/// `{(−λ)^{e_k}} ∪ {log(−λ), 1}`.
pub fn fit_expansion(
    logs: &[Complex64],
    radii: &[f64],
    direction: f64,
    basis: &ExpansionBasis,
) -> Result<ExpansionModel, ReglimError> {
    assert_eq!(logs.len(), radii.len());
    let m = logs.len();
    let ncols = basis.size();
    if m < basis.exponents.len() + usize::from(basis.include_log) + 1 + 4 {
        return Err(ReglimError::TooFewSamples {
            got: m,
            need: basis.exponents.len() + usize::from(basis.include_log) + 1,
        });
    }
    let mut data = Vec::with_capacity(m * ncols);
    for &r in radii {
        let log_neg = log_neg_lambda(r, direction);
        for &e in &basis.exponents {
            data.push((log_neg * e).exp());
        }
        if basis.include_log {
            data.push(log_neg);
        }
        data.push(Complex64::new(1.0, 0.0));
    }
    let design = ComplexMatrix::new(m, ncols, data).expect("finite design matrix");
    let fit = design.least_squares(logs).map_err(|_| ReglimError::IllConditioned {
        condition: f64::INFINITY,
    })?;
    if fit.condition > 1e10 {
        return Err(ReglimError::IllConditioned {
            condition: fit.condition,
        });
    }
    let nexp = basis.exponents.len();
    let c_log = if basis.include_log {
        fit.solution[nexp]
    } else {
        Complex64::new(0.0, 0.0)
    };
    let c_const = *fit.solution.last().unwrap();
    Ok(ExpansionModel {
        exponents: basis.exponents.clone(),
        include_log: basis.include_log,
        coefficients: fit.solution[..nexp].to_vec(),
        c_log,
        c_const,
        residual_norm: fit.residual_rms,
        condition: fit.condition,
        direction,
        sample_count: m,
    })
}
