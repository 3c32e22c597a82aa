use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A spectral cut: the ray `{r e^{iθ} | r ≥ 0}` assumed free of spectrum.
///
/// It fixes the branch of logarithm and powers by
/// `arg_θ(λ) ∈ [θ − 2π, θ)`, so `log_θ λ = log|λ| + i arg_θ(λ)` and
/// `λ^{-s} = exp(-s log_θ λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralCut {
    theta: f64,
}

impl SpectralCut {
    /// `theta` is reduced into `[0, 2π)`.
    pub fn new(theta: f64) -> Self {
        use std::f64::consts::PI;
        let two_pi = 2.0 * PI;
        let mut t = theta % two_pi;
        if t < 0.0 {
            t += two_pi;
        }
        Self { theta: t }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Branch argument in `[θ − 2π, θ)`.
    pub fn arg(&self, z: Complex64) -> f64 {
        use std::f64::consts::PI;
        let two_pi = 2.0 * PI;
        let mut a = z.arg(); // (-π, π]
        // shift into [θ - 2π, θ)
        while a >= self.theta {
            a -= two_pi;
        }
        while a < self.theta - two_pi {
            a += two_pi;
        }
        a
    }

    /// `log_θ z`.
    pub fn log(&self, z: Complex64) -> Complex64 {
        Complex64::new(z.norm().ln(), self.arg(z))
    }

    /// `z^p = exp(p log_θ z)` with the cut branch.
    pub fn pow(&self, z: Complex64, p: Complex64) -> Complex64 {
        (p * self.log(z)).exp()
    }

    /// Distance from `z` to the cut ray.
    pub fn distance_to_ray(&self, z: Complex64) -> f64 {
        let dir = Complex64::from_polar(1.0, self.theta);
        let proj = (z * dir.conj()).re; // component along the ray direction
        if proj <= 0.0 {
            z.norm()
        } else {
            (z - dir * proj).norm()
        }
    }
}
