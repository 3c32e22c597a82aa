//! Boundary problems via Stiefel frames: ζ-determinants, relative
//! ζ-determinants, relative eta invariants, squared-operator determinants,
//! and the one-dimensional Theorem A identity between Laplacian
//! determinant ratios and boundary Gram determinants.

pub mod builtins;
mod eta;
mod frame;
mod problem;
mod thma;
mod zeta;

pub use eta::{relative_det_squared, relative_eta, squared_fit, wrap_mod, EtaResult, SquaredFit};
pub use frame::{
    graph_coordinate, graph_frame, index, project_from_stiefel, range_basis, StiefelFrame,
};
pub use problem::{
    frame_log_det, frame_log_derivative, BoundaryDet, BoundaryDetSampler, BoundaryProblem,
    RatioSampler,
};
pub use thma::{theorem_a_check, TheoremACheck};
pub use zeta::{relative_zeta_det, zeta_det, ZetaDetResult};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BvpError {
    #[error("boundary problem is not invertible: det(M + N K₀) = 0")]
    NonInvertibleProblem,
    #[error("frame is rank deficient")]
    RankDeficient,
    #[error("boundary subspace is not a graph over the chosen factor")]
    GraphCoordinateUnavailable,
    #[error("eta representative has imaginary part {imag:.3e}")]
    EtaNotReal { imag: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Transport(#[from] crate::transport::TransportError),
    #[error(transparent)]
    Reglim(#[from] crate::reglim::ReglimError),
    #[error("matrix error: {0}")]
    Matrix(#[from] crate::numerics::MatrixError),
}
