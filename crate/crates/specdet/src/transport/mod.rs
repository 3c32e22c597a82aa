//! Companion-system reduction and parallel transport.
//!
//! An order-r operator `D = Σ B_k(x) d^k/dx^k` on `[0, β]` acts on Cauchy
//! data `ψ̂ = (ψ, ψ', …, ψ^{(r-1)})` through an equivalent first-order
//! system `K' = Ω_λ(x) K`. The transport matrix `K_λ(x)` with `K_λ(0) = I`
//! is integrated by an embedded Dormand–Prince 5(4) pair, with a norm-cap
//! rescaling ledger so that the exponential growth met along spectral rays
//! never overflows; constant-coefficient systems take the scaled
//! matrix-exponential fast path instead.

mod integrate;
mod kernel;
mod march;
mod operator;
mod polynomial;

pub use integrate::Tolerances;
pub use kernel::{relative_kernel, resolvent_kernel};
pub use march::{growth_rate, marched_frame_log_det};
pub use operator::{Coefficient, NamedCoefficient, OdeOperator};
pub use polynomial::MatrixPolynomial;

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{matrix_exp_scaled, ComplexMatrix, LogComplex, MatrixError};

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("leading coefficient is singular at x = {x}")]
    LeadingCoefficientSingular { x: f64 },
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("step size underflow at λ = {lambda}, x = {x} (stiff or blow-up region)")]
    StepSizeUnderflow { lambda: Complex64, x: f64 },
    #[error("transport result too large to densify (log scale {log_scale:.3e})")]
    Overflow { log_scale: f64 },
    #[error("x_end = {x_end} outside (0, {beta}]")]
    OutOfInterval { x_end: f64, beta: f64 },
    #[error("matrix error: {0}")]
    Matrix(#[from] MatrixError),
}

/// The first-order system `K' = Ω_λ(x) K` equivalent to an operator.
///
/// For r = 1, `Ω_λ(x) = A(x)^{-1}(λ − B(x))`; for r ≥ 2 the block companion
/// form with rows `[0 I 0 …]` and bottom row
/// `[−B_r^{-1}(B_0 − λ), −B_r^{-1}B_1, …, −B_r^{-1}B_{r-1}]`.
#[derive(Debug, Clone)]
pub struct CompanionSystem {
    op: OdeOperator,
}

/// Build the companion system of an operator.
pub fn companion(op: &OdeOperator) -> CompanionSystem {
    CompanionSystem { op: op.clone() }
}

impl CompanionSystem {
    pub fn dim(&self) -> usize {
        self.op.companion_dim()
    }

    pub fn operator(&self) -> &OdeOperator {
        &self.op
    }

    pub fn omega(&self, x: f64, lambda: Complex64) -> Result<ComplexMatrix, TransportError> {
        self.op.omega(x, lambda)
    }

    pub(crate) fn dlambda_block(&self, x: f64) -> Result<ComplexMatrix, TransportError> {
        self.op.dlambda_block(x)
    }

    pub fn is_constant(&self) -> bool {
        self.op.is_constant_coefficient()
    }
}

/// Immutable transport request: a companion system, a spectral parameter
/// and integrator tolerances. Distinct λ evaluations are independent and
/// safe to run concurrently.
#[derive(Debug, Clone)]
pub struct TransportEvaluator {
    pub system: CompanionSystem,
    pub lambda: Complex64,
    pub tolerance: Tolerances,
}

impl TransportEvaluator {
    pub fn new(system: CompanionSystem, lambda: Complex64) -> Self {
        Self {
            system,
            lambda,
            tolerance: Tolerances::default(),
        }
    }
}

/// Transport output in ledger form: the true matrix is `e^{log_scale} ·
/// matrix`. `trace_integral` carries `∫₀^x tr Ω du` when the integrator
/// path produced it (the fast path fills it exactly).
#[derive(Debug, Clone)]
pub struct TransportResult {
    pub matrix: ComplexMatrix,
    pub log_scale: f64,
    pub trace_integral: Complex64,
}

impl TransportResult {
    /// Fold the ledger back into a dense matrix when representable.
    pub fn dense(&self) -> Result<ComplexMatrix, TransportError> {
        if self.log_scale == 0.0 {
            return Ok(self.matrix.clone());
        }
        let bound = self.log_scale + self.matrix.norm_max().ln().max(0.0);
        if bound.abs() > 600.0 {
            return Err(TransportError::Overflow {
                log_scale: self.log_scale,
            });
        }
        Ok(self
            .matrix
            .scale(Complex64::new(self.log_scale.exp(), 0.0)))
    }

    /// det K in log form (ledger folded in).
    pub fn log_det(&self) -> Result<LogComplex, TransportError> {
        let ld = self.matrix.log_det()?;
        Ok(LogComplex::new(
            ld.log_abs + self.log_scale * self.matrix.rows() as f64,
            ld.phase,
        ))
    }
}

/// `K_λ(x_end)`, the parallel transport solving `(D−λ)K = 0`, `K(0) = I`.
pub fn transport(ev: &TransportEvaluator, x_end: f64) -> Result<TransportResult, TransportError> {
    transport_impl(ev, x_end, false).map(|(k, _)| k)
}

/// Transport together with ∂K/∂λ, sharing one rescale ledger. Feeds exact
/// Newton steps in the spectrum scan and the derivative-assisted phase
/// tracking.
pub fn transport_with_dlambda(
    ev: &TransportEvaluator,
    x_end: f64,
) -> Result<(TransportResult, ComplexMatrix), TransportError> {
    let (k, kd) = transport_impl(ev, x_end, true)?;
    Ok((k, kd.expect("dlambda requested")))
}

fn transport_impl(
    ev: &TransportEvaluator,
    x_end: f64,
    with_dlambda: bool,
) -> Result<(TransportResult, Option<ComplexMatrix>), TransportError> {
    let beta = ev.system.operator().beta();
    if !(x_end > 0.0) || x_end > beta * (1.0 + 1e-12) {
        return Err(TransportError::OutOfInterval { x_end, beta });
    }
    let dim = ev.system.dim();
    if ev.system.is_constant() {
        // fast path: K = exp(x Ω); ∂λK via the Fréchet block identity
        // exp([[Ω, E],[0, Ω]]) = [[e^Ω, Dexp(E)],[0, e^Ω]].
        let om = ev.system.omega(0.0, ev.lambda)?;
        let scaled = om.scale(Complex64::new(x_end, 0.0));
        if !with_dlambda {
            let (m, s) = matrix_exp_scaled(&scaled)?;
            return Ok((
                TransportResult {
                    matrix: m,
                    log_scale: s,
                    trace_integral: om.trace() * x_end,
                },
                None,
            ));
        }
        let dom = ev.system.dlambda_block(0.0)?;
        let mut blk = ComplexMatrix::zeros(2 * dim, 2 * dim);
        blk.set_block(0, 0, &scaled);
        blk.set_block(dim, dim, &scaled);
        blk.set_block(0, dim, &dom.scale(Complex64::new(x_end, 0.0)));
        let (m, s) = matrix_exp_scaled(&blk)?;
        let k = m.block(0, 0, dim, dim);
        let kd = m.block(0, dim, dim, dim);
        return Ok((
            TransportResult {
                matrix: k,
                log_scale: s,
                trace_integral: om.trace() * x_end,
            },
            Some(kd),
        ));
    }
    let out = integrate::integrate(&ev.system, ev.lambda, x_end, ev.tolerance, with_dlambda)?;
    let k = ComplexMatrix::new(dim, dim, out.state.k.clone())?;
    let kd = match &out.state.kdot {
        Some(v) => Some(ComplexMatrix::new(dim, dim, v.clone())?),
        None => None,
    };
    Ok((
        TransportResult {
            matrix: k,
            log_scale: out.log_scale,
            trace_integral: out.state.trace,
        },
        kd,
    ))
}
