use num_complex::Complex64;

use super::BvpError;
use crate::numerics::ComplexMatrix;

/// Stiefel coordinates `[M N]` for a boundary condition on Cauchy data:
/// `dom(D_P) = {ψ | M ψ̂(0) + N ψ̂(β) = 0}`. Both blocks are rn×rn and the
/// combined block has full row rank.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelFrame {
    pub m: ComplexMatrix,
    pub n_mat: ComplexMatrix,
}

impl StiefelFrame {
    pub fn new(m: ComplexMatrix, n_mat: ComplexMatrix) -> Result<Self, BvpError> {
        if !m.is_square() || m.rows() != n_mat.rows() || !n_mat.is_square() {
            return Err(BvpError::InvalidInput(format!(
                "frame blocks must be square of equal size, got {}x{} and {}x{}",
                m.rows(),
                m.cols(),
                n_mat.rows(),
                n_mat.cols()
            )));
        }
        let combined = m.hcat(&n_mat);
        if combined.rank(1e-12) < m.rows() {
            return Err(BvpError::RankDeficient);
        }
        Ok(Self { m, n_mat })
    }

    pub fn size(&self) -> usize {
        self.m.rows()
    }

    /// The combined block `[M N]`.
    pub fn combined(&self) -> ComplexMatrix {
        self.m.hcat(&self.n_mat)
    }

    /// Row-space-preserving gauge change `[M N] → [gM gN]`.
    pub fn gauge(&self, g: &ComplexMatrix) -> Result<Self, BvpError> {
        Self::new(g.matmul(&self.m), g.matmul(&self.n_mat))
    }
}

/// Orthogonal projection defined by a frame: with `B = [M N]`,
/// `P = B*(B B*)^{-1} B`, the Hermitian idempotent whose kernel is the
/// boundary condition `B γψ = 0`. In graph form `[I T*]` this is the block
/// matrix with `Q_T = I + T*T`:
///
/// ```text
/// P = [ Q_T^{-1}      Q_T^{-1} T*     ]
///     [ T Q_T^{-1}    T Q_T^{-1} T*   ] .
/// ```
pub fn project_from_stiefel(frame: &StiefelFrame) -> Result<ComplexMatrix, BvpError> {
    let b = frame.combined();
    let bstar = b.adjoint();
    let gram = b.matmul(&bstar);
    let x = gram.solve(&b).map_err(|_| BvpError::RankDeficient)?;
    Ok(bstar.matmul(&x))
}

/// Fredholm index of the boundary problem attached to a rectangular frame
/// of `k` independent rows on rn ⊕ rn boundary data: `ind D_P = rn − k`.
pub fn index(m: &ComplexMatrix, n_mat: &ComplexMatrix) -> Result<i64, BvpError> {
    if m.rows() != n_mat.rows() || m.cols() != n_mat.cols() {
        return Err(BvpError::InvalidInput(
            "index: frame blocks must have equal shapes".into(),
        ));
    }
    let k = m.rows();
    let rn = m.cols();
    let combined = m.hcat(n_mat);
    if combined.rank(1e-12) < k {
        return Err(BvpError::RankDeficient);
    }
    Ok(rn as i64 - k as i64)
}

/// Orthonormal basis (columns) of the range of a Hermitian projection of
/// rank `k`, by column-pivoted QR.
pub fn range_basis(p: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let (q, _, _) = p.pivoted_qr();
    q.block(0, 0, p.rows(), k)
}

/// Graph coordinate of an n-dimensional subspace of C^{2n} over the first
/// factor: ran = {(w, Tw)}. Errors when the subspace is not transverse to
/// the second factor.
pub fn graph_coordinate(p: &ComplexMatrix) -> Result<ComplexMatrix, BvpError> {
    let two_n = p.rows();
    let n = two_n / 2;
    let basis = range_basis(p, n);
    let top = basis.block(0, 0, n, n);
    let bot = basis.block(n, 0, n, n);
    let top_inv = top
        .inverse()
        .map_err(|_| BvpError::GraphCoordinateUnavailable)?;
    // guard against near-singular top blocks
    let cond_proxy = top_inv.norm_one() * top.norm_one();
    if cond_proxy > 1e8 {
        return Err(BvpError::GraphCoordinateUnavailable);
    }
    Ok(bot.matmul(&top_inv))
}

/// Graph frame `[I T*]`.
pub fn graph_frame(t: &ComplexMatrix) -> Result<StiefelFrame, BvpError> {
    let n = t.rows();
    StiefelFrame::new(ComplexMatrix::identity(n), t.adjoint())
}

pub(super) fn is_projection(p: &ComplexMatrix, tol: f64) -> bool {
    p.is_hermitian(tol) && p.matmul(p).sub(p).norm_max() <= tol * p.norm_max().max(1.0)
}
