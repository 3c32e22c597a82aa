use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A nonzero complex number stored as `exp(log_abs + i phase)`.
///
/// Boundary determinants grow like `exp(β |λ|^{1/r})` along spectral rays and
/// overflow `f64` long before the fit window ends, so every determinant on
/// the ray pipeline is carried in this form. The phase is whatever the
/// producing computation returned (typically in `(-π, π]`); continuity along
/// a ray is restored by the tracker in `reglim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_abs: f64,
    pub phase: f64,
}

impl LogComplex {
    pub fn new(log_abs: f64, phase: f64) -> Self {
        Self { log_abs, phase }
    }

    pub fn one() -> Self {
        Self {
            log_abs: 0.0,
            phase: 0.0,
        }
    }

    /// Exact zero, encoded with `log_abs = -inf`.
    pub fn zero() -> Self {
        Self {
            log_abs: f64::NEG_INFINITY,
            phase: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self {
            log_abs: z.norm().ln(),
            phase: z.arg(),
        }
    }

    /// May overflow to infinity when `log_abs` exceeds ~709.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_abs.exp(), self.phase)
    }

    /// Principal logarithm: `log_abs + i phase` with the phase reduced to
    /// `(-π, π]`.
    pub fn principal_log(&self) -> Complex64 {
        Complex64::new(self.log_abs, normalize_angle(self.phase))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            log_abs: self.log_abs + other.log_abs,
            phase: self.phase + other.phase,
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        Self {
            log_abs: self.log_abs - other.log_abs,
            phase: self.phase - other.phase,
        }
    }
}

/// Reduce an angle to the interval `(-π, π]`.
pub fn normalize_angle(phi: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = phi % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}
