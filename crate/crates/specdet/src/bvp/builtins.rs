use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::frame::StiefelFrame;
use super::problem::BoundaryProblem;
use super::BvpError;
use crate::numerics::{c64, ComplexMatrix, SpectralCut};
use crate::transport::{Coefficient, OdeOperator};

/// Identifies which closed-form spectral oracle applies to a builtin
/// problem; consumed by the `oracle` module and echoed into CLI reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OracleTag {
    /// ζ(s) = (β/π)^{2s} ζ_R(2s); det_ζ = 2β.
    DirichletLaplacian { beta: f64 },
    /// spectrum a + 2πZ; det_ζ,π/2 = 1 − e^{−ia}.
    TwistedDirac { a: f64 },
    /// spectrum ((2k+1)π/β)² doubled; det_ζ = 4.
    AntiperiodicLaplacian { beta: f64 },
    /// transcendental Robin spectrum; det_ζ = 2(h₀ + h_β + h₀h_ββ).
    RobinLaplacian { beta: f64, h0: f64, hbeta: f64 },
}

/// A named problem family: operator, canonical frames, default cut and the
/// closed-form oracle tag.
#[derive(Debug, Clone)]
pub struct BuiltinProblem {
    pub name: &'static str,
    pub operator: OdeOperator,
    pub frames: BTreeMap<String, StiefelFrame>,
    pub default_frame: &'static str,
    pub cut: SpectralCut,
    pub oracle: OracleTag,
}

impl BuiltinProblem {
    pub fn problem(&self, frame: &str) -> Result<BoundaryProblem, BvpError> {
        let frame = self
            .frames
            .get(frame)
            .ok_or_else(|| BvpError::InvalidInput(format!("unknown frame {frame:?}")))?;
        BoundaryProblem::new(self.operator.clone(), frame.clone(), self.cut)
    }
}

fn scalar(z: Complex64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[z])
}

/// −d²/dx² as an operator (B₂ = −1, B₁ = B₀ = 0).
pub fn laplace_operator(beta: f64) -> OdeOperator {
    OdeOperator::new(
        2,
        1,
        beta,
        vec![
            Coefficient::constant(scalar(c64(0.0, 0.0))),
            Coefficient::constant(scalar(c64(0.0, 0.0))),
            Coefficient::constant(scalar(c64(-1.0, 0.0))),
        ],
    )
    .expect("laplace operator is well-formed")
}

/// −i d/dx as a first-order operator.
pub fn dirac_operator(beta: f64) -> OdeOperator {
    OdeOperator::first_order(
        Coefficient::constant(scalar(c64(0.0, -1.0))),
        Coefficient::constant(scalar(c64(0.0, 0.0))),
        beta,
    )
    .expect("dirac operator is well-formed")
}

/// Dirichlet frame on Cauchy data (ψ, ψ'): ψ(0) = 0, ψ(β) = 0.
pub fn dirichlet_frame() -> StiefelFrame {
    let m = ComplexMatrix::from_rows(&[
        vec![c64(1.0, 0.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(0.0, 0.0)],
    ])
    .unwrap();
    let n = ComplexMatrix::from_rows(&[
        vec![c64(0.0, 0.0), c64(0.0, 0.0)],
        vec![c64(1.0, 0.0), c64(0.0, 0.0)],
    ])
    .unwrap();
    StiefelFrame::new(m, n).expect("dirichlet frame has full rank")
}

/// Twisted boundary condition ψ(0) − e^{−ia} ψ(β) = 0 for the Dirac
/// operator: frame (1, −e^{−ia}).
pub fn twisted_frame(a: f64) -> StiefelFrame {
    let m = scalar(c64(1.0, 0.0));
    let n = scalar(-(c64(0.0, -a).exp()));
    StiefelFrame::new(m, n).expect("twisted frame has full rank")
}

/// Robin conditions ψ'(0) = h₀ψ(0) and ψ'(β) + h_βψ(β) = 0.
pub fn robin_frame(h0: f64, hbeta: f64) -> StiefelFrame {
    let m = ComplexMatrix::from_rows(&[
        vec![c64(-h0, 0.0), c64(1.0, 0.0)],
        vec![c64(0.0, 0.0), c64(0.0, 0.0)],
    ])
    .unwrap();
    let n = ComplexMatrix::from_rows(&[
        vec![c64(0.0, 0.0), c64(0.0, 0.0)],
        vec![c64(hbeta, 0.0), c64(1.0, 0.0)],
    ])
    .unwrap();
    StiefelFrame::new(m, n).expect("robin frame has full rank")
}

/// Anti-periodic conditions ψ̂(0) + ψ̂(β) = 0: frame (I, I).
pub fn antiperiodic_frame() -> StiefelFrame {
    StiefelFrame::new(ComplexMatrix::identity(2), ComplexMatrix::identity(2))
        .expect("antiperiodic frame has full rank")
}

pub fn dirichlet_laplacian(beta: f64) -> BuiltinProblem {
    let mut frames = BTreeMap::new();
    frames.insert("dirichlet".to_string(), dirichlet_frame());
    BuiltinProblem {
        name: "dirichlet_laplacian",
        operator: laplace_operator(beta),
        frames,
        default_frame: "dirichlet",
        cut: SpectralCut::new(std::f64::consts::PI),
        oracle: OracleTag::DirichletLaplacian { beta },
    }
}

pub fn twisted_dirac(a: f64, beta: f64) -> BuiltinProblem {
    let mut frames = BTreeMap::new();
    frames.insert("twisted".to_string(), twisted_frame(a));
    BuiltinProblem {
        name: "twisted_dirac",
        operator: dirac_operator(beta),
        frames,
        default_frame: "twisted",
        cut: SpectralCut::new(std::f64::consts::FRAC_PI_2),
        oracle: OracleTag::TwistedDirac { a },
    }
}

pub fn robin_laplacian(beta: f64, h0: f64, hbeta: f64) -> BuiltinProblem {
    let mut frames = BTreeMap::new();
    frames.insert("robin".to_string(), robin_frame(h0, hbeta));
    BuiltinProblem {
        name: "robin_laplacian",
        operator: laplace_operator(beta),
        frames,
        default_frame: "robin",
        cut: SpectralCut::new(std::f64::consts::PI),
        oracle: OracleTag::RobinLaplacian { beta, h0, hbeta },
    }
}

pub fn antiperiodic_laplacian(beta: f64) -> BuiltinProblem {
    let mut frames = BTreeMap::new();
    frames.insert("antiperiodic".to_string(), antiperiodic_frame());
    BuiltinProblem {
        name: "antiperiodic_laplacian",
        operator: laplace_operator(beta),
        frames,
        default_frame: "antiperiodic",
        cut: SpectralCut::new(std::f64::consts::PI),
        oracle: OracleTag::AntiperiodicLaplacian { beta },
    }
}
