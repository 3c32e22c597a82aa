use num_complex::Complex64;

use super::{companion, CompanionSystem, Tolerances, TransportError};
use crate::numerics::{balanced_norm_one, matrix_exp, ComplexMatrix, LogComplex};

/// Target log-growth per shooting segment. Small segments keep the
/// block elimination free of the e^{2μ} intermediates that destroy a
/// single-shot determinant when a frame couples growing and decaying
/// transport directions.
const SEGMENT_LOG_GROWTH: f64 = 3.0;

const MAX_SEGMENTS: usize = 2_000_000;

/// Balanced-norm growth-rate estimate for Ω_λ over the interval.
pub fn growth_rate(sys: &CompanionSystem, lambda: Complex64) -> Result<f64, TransportError> {
    let beta = sys.operator().beta();
    let mut rho = 0.0f64;
    let samples = if sys.is_constant() { 1 } else { 5 };
    for i in 0..samples {
        let x = beta * i as f64 / samples.max(2) as f64;
        rho = rho.max(balanced_norm_one(&sys.omega(x, lambda)?));
    }
    Ok(rho)
}

/// det(M + N K_λ(β)) by multiple shooting: the transport is split into
/// segments of moderate growth, K(β) = P_m ⋯ P_1, and the determinant is
/// read off a partially pivoted elimination of the block-bidiagonal system
///
/// ```text
/// | P_1  -I          |
/// |      P_2  -I     |
/// |           ⋱   ⋱  |
/// | M          ⋯   N |
/// ```
///
/// whose determinant equals det(M + N P_m⋯P_1) exactly. Stable for frames
/// that mix growing and decaying directions, where a determinant taken
/// from the assembled K(β) loses everything to cancellation.
pub fn marched_frame_log_det(
    op: &super::OdeOperator,
    m: &ComplexMatrix,
    n_mat: &ComplexMatrix,
    lambda: Complex64,
    tol: Tolerances,
) -> Result<LogComplex, TransportError> {
    let sys = companion(op);
    let beta = op.beta();
    let rho = growth_rate(&sys, lambda)?;
    let m_segments =
        ((beta * rho / SEGMENT_LOG_GROWTH).ceil() as usize).clamp(1, MAX_SEGMENTS);
    let segments = segment_transports(&sys, lambda, m_segments, tol)?;
    Ok(bidiagonal_log_det(m, n_mat, &segments))
}

/// Per-segment transports P_k = K_λ(x_k ← x_{k−1}) on a uniform grid.
/// Constant-coefficient systems share a single exponential.
fn segment_transports(
    sys: &CompanionSystem,
    lambda: Complex64,
    m_segments: usize,
    tol: Tolerances,
) -> Result<Vec<ComplexMatrix>, TransportError> {
    let beta = sys.operator().beta();
    let h = beta / m_segments as f64;
    if sys.is_constant() {
        let om = sys.omega(0.0, lambda)?;
        let p = matrix_exp(&om.scale(Complex64::new(h, 0.0)))?;
        return Ok(vec![p; m_segments]);
    }
    let mut out = Vec::with_capacity(m_segments);
    for k in 0..m_segments {
        let x0 = h * k as f64;
        let x1 = (h * (k + 1) as f64).min(beta);
        let res = super::integrate::integrate_from(sys, lambda, x0, x1, tol, false)?;
        if res.log_scale != 0.0 {
            // segments are sized so growth stays far below the cap
            return Err(TransportError::StepSizeUnderflow { lambda, x: x1 });
        }
        out.push(ComplexMatrix::new(sys.dim(), sys.dim(), res.state.k.clone())?);
    }
    Ok(out)
}

/// One window of the sweep: rows with entries in up to three column
/// blocks, each row tagged with its global index for the permutation sign.
struct WindowRow {
    id: usize,
    c1: Vec<Complex64>,
    c2: Vec<Complex64>,
    c3: Vec<Complex64>,
}

/// Structured partially pivoted elimination of the block-bidiagonal
/// system. Row pivoting is global (every column only ever has 2d active
/// rows); the sign comes from the inversion parity of the pivot sequence.
fn bidiagonal_log_det(
    m: &ComplexMatrix,
    n_mat: &ComplexMatrix,
    segments: &[ComplexMatrix],
) -> LogComplex {
    let d = m.rows();
    let count = segments.len();
    let mut log_abs = 0.0f64;
    let mut phase = 0.0f64;
    let mut pivot_ids: Vec<usize> = Vec::with_capacity((count + 1) * d);
    let bc_base = count * d;
    // condition rows carried through the sweep
    let mut carried: Vec<WindowRow> = (0..d)
        .map(|i| WindowRow {
            id: bc_base + i,
            c1: m.row(i).to_vec(),
            c2: vec![Complex64::new(0.0, 0.0); d],
            c3: n_mat.row(i).to_vec(),
        })
        .collect();
    for (k, p) in segments.iter().enumerate() {
        let last = k + 1 == count;
        let mut rows: Vec<WindowRow> = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut c2 = vec![Complex64::new(0.0, 0.0); d];
            c2[i] = Complex64::new(-1.0, 0.0);
            rows.push(WindowRow {
                id: k * d + i,
                c1: p.row(i).to_vec(),
                c2,
                c3: vec![Complex64::new(0.0, 0.0); d],
            });
        }
        for mut row in carried.drain(..) {
            if last {
                // the "next" column block is the final one: fold c3 into c2
                for j in 0..d {
                    row.c2[j] = row.c2[j] + row.c3[j];
                    row.c3[j] = Complex64::new(0.0, 0.0);
                }
            }
            rows.push(row);
        }
        if last {
            for row in rows.iter_mut().take(d) {
                // seg rows have no c3 block; nothing to fold
                debug_assert!(row.c3.iter().all(|z| z.norm() == 0.0));
            }
        }
        // eliminate the d columns of c1
        for col in 0..d {
            let (pos, best) = rows
                .iter()
                .enumerate()
                .map(|(pos, r)| (pos, r.c1[col].norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                return LogComplex::zero();
            }
            let prow = rows.swap_remove(pos);
            let pivot = prow.c1[col];
            log_abs += pivot.norm().ln();
            phase += pivot.arg();
            pivot_ids.push(prow.id);
            for r in rows.iter_mut() {
                let f = r.c1[col] / pivot;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in col + 1..d {
                    let v = prow.c1[j];
                    r.c1[j] -= f * v;
                }
                for j in 0..d {
                    let v = prow.c2[j];
                    r.c2[j] -= f * v;
                    let v = prow.c3[j];
                    r.c3[j] -= f * v;
                }
            }
        }
        if last {
            // eliminate the final column block among the remaining d rows
            for col in 0..d {
                let (pos, best) = rows
                    .iter()
                    .enumerate()
                    .map(|(pos, r)| (pos, r.c2[col].norm()))
                    .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                if best == 0.0 {
                    return LogComplex::zero();
                }
                let prow = rows.swap_remove(pos);
                let pivot = prow.c2[col];
                log_abs += pivot.norm().ln();
                phase += pivot.arg();
                pivot_ids.push(prow.id);
                for r in rows.iter_mut() {
                    let f = r.c2[col] / pivot;
                    if f == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for j in col + 1..d {
                        let v = prow.c2[j];
                        r.c2[j] -= f * v;
                    }
                }
            }
        } else {
            // surviving rows carry their transformed (c2 | c3) forward
            carried = rows
                .into_iter()
                .map(|r| WindowRow {
                    id: r.id,
                    c1: r.c2,
                    c2: vec![Complex64::new(0.0, 0.0); d],
                    c3: r.c3,
                })
                .collect();
        }
    }
    if inversion_parity_odd(&pivot_ids) {
        phase += std::f64::consts::PI;
    }
    LogComplex::new(log_abs, phase)
}

/// Parity of the permutation given as the pivot id sequence, by merge-sort
/// inversion counting.
fn inversion_parity_odd(ids: &[usize]) -> bool {
    fn count(v: &mut Vec<usize>) -> u64 {
        let n = v.len();
        if n < 2 {
            return 0;
        }
        let mid = n / 2;
        let mut right = v.split_off(mid);
        let mut inv = count(v) + count(&mut right);
        let mut merged = Vec::with_capacity(n);
        let (mut i, mut j) = (0usize, 0usize);
        while i < v.len() && j < right.len() {
            if v[i] <= right[j] {
                merged.push(v[i]);
                i += 1;
            } else {
                inv += (v.len() - i) as u64;
                merged.push(right[j]);
                j += 1;
            }
        }
        merged.extend_from_slice(&v[i..]);
        merged.extend_from_slice(&right[j..]);
        *v = merged;
        inv
    }
    let mut work = ids.to_vec();
    count(&mut work) % 2 == 1
}
