//! Independent ground truth for the determinant pipeline: eigenvalue
//! location by argument-principle scans of the boundary determinant, and
//! spectral zeta/eta evaluation by Hurwitz closed forms or eigenvalue sums
//! completed with fitted Weyl tails.

mod scan;
mod spectral;

pub use scan::{spectrum_scan, CellCount, Eigenvalue, Rectangle, Spectrum};
pub use spectral::{
    closed_form_det, closed_form_zeta_zero, eta_from_spectrum, twisted_eta_oracle,
    twisted_laplacian_det_oracle, zeta_from_spectrum, SpectralZeta,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("region boundary touches a zero of the determinant after {0} jitter retries")]
    BoundaryZero(usize),
    #[error("scan budget exceeded ({0} determinant evaluations)")]
    BudgetExceeded(usize),
    #[error("winding count {count:.3} did not stabilize to an integer")]
    WindingUnstable { count: f64 },
    #[error("eigenvalue tail fit too poor to complete the spectral sum (residual {0:.3e})")]
    TailFitPoor(f64),
    #[error("need at least {need} eigenvalues, found {got}")]
    TooFewEigenvalues { need: usize, got: usize },
    #[error(transparent)]
    Bvp(#[from] crate::bvp::BvpError),
    #[error(transparent)]
    Hurwitz(#[from] crate::numerics::HurwitzError),
}
