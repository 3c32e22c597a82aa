use num_complex::Complex64;

use super::{CompanionSystem, TransportError};
use crate::numerics::ComplexMatrix;

/// Norm cap during integration; exceeding it moves magnitude into the
/// ledger. Sinh-type growth along rays overflows f64 otherwise, and the
/// ledger re-enters the boundary determinant as a log offset.
const NORM_CAP: f64 = 1e120;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

/// Integration state: the transport matrix, optionally its λ-derivative
/// (sharing the rescale ledger) and the running ∫ tr Ω for the Liouville
/// identity (unaffected by rescaling).
#[derive(Clone)]
pub(super) struct RkState {
    pub k: Vec<Complex64>,
    pub kdot: Option<Vec<Complex64>>,
    pub trace: Complex64,
}

pub(super) struct RkOutput {
    pub state: RkState,
    pub log_scale: f64,
    pub steps: usize,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const ERR: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrate K' = Ω_λ(x) K from 0 to `x_end` with K(0) = I, by the embedded
/// Dormand-Prince 5(4) pair on the flattened complex system.
pub(super) fn integrate(
    sys: &CompanionSystem,
    lambda: Complex64,
    x_end: f64,
    tol: Tolerances,
    with_dlambda: bool,
) -> Result<RkOutput, TransportError> {
    integrate_from(sys, lambda, 0.0, x_end, tol, with_dlambda)
}

/// Same, over an interior segment [x0, x1] with K(x0) = I.
pub(super) fn integrate_from(
    sys: &CompanionSystem,
    lambda: Complex64,
    x0: f64,
    x1: f64,
    tol: Tolerances,
    with_dlambda: bool,
) -> Result<RkOutput, TransportError> {
    let dim = sys.dim();
    let m = dim * dim;
    let mut state = RkState {
        k: identity_flat(dim),
        kdot: if with_dlambda {
            Some(vec![Complex64::new(0.0, 0.0); m])
        } else {
            None
        },
        trace: Complex64::new(0.0, 0.0),
    };
    let x_end = x1;
    let mut log_scale = 0.0f64;
    let mut x = x0;
    let omega_scale = sys.omega(x0, lambda)?.norm_one().max(1.0);
    let mut h = (0.1 / omega_scale).min(x_end - x0);
    let h_min = 1e-14 * (x_end - x0).max(1.0);
    let mut steps = 0usize;
    let deriv = |x: f64, s: &RkState| -> Result<RkState, TransportError> {
        let om = sys.omega(x, lambda)?;
        let k_new = matvec_flat(&om, &s.k, dim);
        let kdot_new = match &s.kdot {
            Some(kd) => {
                let dom = sys.dlambda_block(x)?;
                let mut v = matvec_flat(&om, kd, dim);
                let w = matvec_flat(&dom, &s.k, dim);
                for (a, b) in v.iter_mut().zip(w) {
                    *a += b;
                }
                Some(v)
            }
            None => None,
        };
        Ok(RkState {
            k: k_new,
            kdot: kdot_new,
            trace: om.trace(),
        })
    };
    while x < x_end {
        if h < h_min {
            return Err(TransportError::StepSizeUnderflow { lambda, x });
        }
        if x + h > x_end {
            h = x_end - x;
        }
        let mut stages: Vec<RkState> = Vec::with_capacity(7);
        let mut failed = false;
        for i in 0..7 {
            let mut y = state.clone();
            for (j, st) in stages.iter().enumerate() {
                axpy_state(&mut y, A[i][j] * h, st);
            }
            match deriv(x + C[i] * h, &y) {
                Ok(d) => stages.push(d),
                Err(TransportError::LeadingCoefficientSingular { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            h *= 0.5;
            continue;
        }
        let mut y5 = state.clone();
        for (j, st) in stages.iter().enumerate() {
            axpy_state(&mut y5, B5[j] * h, st);
        }
        // embedded error estimate
        let mut err_norm = 0.0f64;
        let mut count = 0usize;
        {
            let mut acc = |old: &[Complex64], new: &[Complex64], errs: Vec<Complex64>| {
                for (idx, e) in errs.iter().enumerate() {
                    let scale = tol.atol + tol.rtol * old[idx].norm().max(new[idx].norm());
                    let r = e.norm() / scale;
                    err_norm += r * r;
                    count += 1;
                }
            };
            let mut err_k = vec![Complex64::new(0.0, 0.0); m];
            for (j, st) in stages.iter().enumerate() {
                if ERR[j] == 0.0 {
                    continue;
                }
                for (idx, v) in st.k.iter().enumerate() {
                    err_k[idx] += *v * (ERR[j] * h);
                }
            }
            acc(&state.k, &y5.k, err_k);
            if let (Some(old), Some(new)) = (&state.kdot, &y5.kdot) {
                let mut err_kd = vec![Complex64::new(0.0, 0.0); m];
                for (j, st) in stages.iter().enumerate() {
                    if ERR[j] == 0.0 {
                        continue;
                    }
                    let kd = st.kdot.as_ref().unwrap();
                    for (idx, v) in kd.iter().enumerate() {
                        err_kd[idx] += *v * (ERR[j] * h);
                    }
                }
                acc(old, new, err_kd);
            }
        }
        let err = (err_norm / count.max(1) as f64).sqrt();
        if err <= 1.0 {
            x += h;
            state = y5;
            steps += 1;
            // rescale against overflow; the ODE is linear so scaling
            // commutes with the flow
            let nmax = state.k.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if nmax > NORM_CAP {
                let s = nmax.ln();
                let f = Complex64::new((-s).exp(), 0.0);
                for z in state.k.iter_mut() {
                    *z *= f;
                }
                if let Some(kd) = &mut state.kdot {
                    for z in kd.iter_mut() {
                        *z *= f;
                    }
                }
                log_scale += s;
            }
            if steps > 40_000_000 {
                return Err(TransportError::StepSizeUnderflow { lambda, x });
            }
        }
        let fac = if err > 0.0 {
            0.9 * err.powf(-0.2)
        } else {
            5.0
        };
        h *= fac.clamp(0.2, 5.0);
    }
    Ok(RkOutput {
        state,
        log_scale,
        steps,
    })
}

fn identity_flat(dim: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        v[i * dim + i] = Complex64::new(1.0, 0.0);
    }
    v
}

/// Flattened product Ω · K for row-major K.
fn matvec_flat(om: &ComplexMatrix, k: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for l in 0..dim {
            let a = om[(i, l)];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &k[l * dim..(l + 1) * dim];
            let dst = &mut out[i * dim..(i + 1) * dim];
            for (d, &s) in dst.iter_mut().zip(row) {
                *d += a * s;
            }
        }
    }
    out
}

fn axpy_state(y: &mut RkState, a: f64, d: &RkState) {
    let f = Complex64::new(a, 0.0);
    for (t, s) in y.k.iter_mut().zip(&d.k) {
        *t += f * s;
    }
    if let (Some(t), Some(s)) = (&mut y.kdot, &d.kdot) {
        for (ti, si) in t.iter_mut().zip(s) {
            *ti += f * si;
        }
    }
    y.trace += f * d.trace;
}
