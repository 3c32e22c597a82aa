//! Dense complex linear algebra and special functions used by every other
//! module: pivoted-LU determinants and solves, Householder least squares,
//! Hessenberg-QR eigenvalues, the scaled matrix exponential, Hurwitz zeta
//! with its s-derivative, and the spectral-cut branch conventions.

mod cut;
mod eig;
mod expm;
mod hurwitz;
mod logcomplex;
mod matrix;
mod special;

pub use cut::SpectralCut;
pub use eig::eigenvalues;
pub use expm::{balanced_norm_one, matrix_exp, matrix_exp_scaled};
pub use hurwitz::{hurwitz_zeta, hurwitz_zeta_with_ds, riemann_zeta_with_ds, HurwitzError};
pub use logcomplex::{normalize_angle, LogComplex};
pub use matrix::{ComplexMatrix, LeastSquaresFit, MatrixError};
pub use special::{euler_gamma, exp_integral_e1, gamma_prime_one, log_gamma_real};

use num_complex::Complex64;

/// Convenience constructor for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
