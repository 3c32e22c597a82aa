use num_complex::Complex64;

use super::{ComplexMatrix, MatrixError};

/// All eigenvalues of a general complex square matrix, by Householder
/// reduction to Hessenberg form followed by shifted QR with deflation.
/// Robustness over speed; intended for dense matrices up to a few hundred
/// rows.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>, MatrixError> {
    if !m.is_square() {
        return Err(MatrixError::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let mut h = hessenberg(m);
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;
    let mut total_iters = 0usize;
    let max_total = 120 * n;
    loop {
        // deflate trailing 1x1 / 2x2 blocks as subdiagonals vanish
        loop {
            if hi == 0 {
                eigs.push(h[(0, 0)]);
                eigs.reverse();
                return Ok(eigs);
            }
            if subdiag_negligible(&h, hi) {
                eigs.push(h[(hi, hi)]);
                hi -= 1;
                iter_since_deflation = 0;
            } else {
                break;
            }
        }
        // active block [lo, hi]
        let mut lo = hi;
        while lo > 0 && !subdiag_negligible(&h, lo) {
            lo -= 1;
        }
        if hi - lo == 1 {
            let (l1, l2) = eig2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs.push(l2);
            eigs.push(l1);
            if lo == 0 {
                eigs.reverse();
                return Ok(eigs);
            }
            hi = lo - 1;
            iter_since_deflation = 0;
            continue;
        }
        total_iters += 1;
        iter_since_deflation += 1;
        if total_iters > max_total {
            return Err(MatrixError::EigNoConvergence);
        }
        let shift = if iter_since_deflation % 24 == 0 {
            // exceptional shift to break symmetric stalls
            let scale = h[(hi, hi - 1)].norm() + h[(hi - 1, hi - 2.min(hi - 1))].norm();
            h[(hi, hi)] + Complex64::new(0.75 * scale, 0.4375 * scale)
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, lo, hi, shift);
    }
}

fn hessenberg(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let alpha = if v[0].norm() == 0.0 {
            Complex64::new(-norm_x, 0.0)
        } else {
            -(v[0] / v[0].norm()) * norm_x
        };
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- H A with H = I - 2vv*/v*v acting on rows k+1..n
        for j in k..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += vi.conj() * a[(k + 1 + idx, j)];
            }
            let f = dot * 2.0 / vnorm2;
            for (idx, vi) in v.iter().enumerate() {
                a[(k + 1 + idx, j)] -= f * vi;
            }
        }
        // A <- A H on columns k+1..n
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += a[(i, k + 1 + idx)] * vi;
            }
            let f = dot * 2.0 / vnorm2;
            for (idx, vi) in v.iter().enumerate() {
                a[(i, k + 1 + idx)] -= f * vi.conj();
            }
        }
        for i in k + 2..n {
            a[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    a
}

fn subdiag_negligible(h: &ComplexMatrix, i: usize) -> bool {
    let s = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
    let s = if s == 0.0 { h.norm_max() } else { s };
    h[(i, i - 1)].norm() <= f64::EPSILON * s + f64::MIN_POSITIVE
}

fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    (l1, l2)
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> Complex64 {
    let (l1, l2) = eig2(
        h[(hi - 1, hi - 1)],
        h[(hi - 1, hi)],
        h[(hi, hi - 1)],
        h[(hi, hi)],
    );
    let d = h[(hi, hi)];
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR sweep on the Hessenberg block `[lo, hi]` using
/// complex Givens rotations.
fn qr_step(h: &mut ComplexMatrix, lo: usize, hi: usize, shift: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let (c, s) = givens(a, b);
        rots.push((c, s));
        // apply G from the left to rows k, k+1
        for j in k..=hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = x * c + y * s;
            h[(k + 1, j)] = -x * s.conj() + y * c;
        }
    }
    for (k, (c, s)) in rots.iter().enumerate() {
        let k = lo + k;
        // apply G* from the right to columns k, k+1
        let top = if k + 1 < hi { k + 2 } else { hi };
        for i in lo..=top.min(hi) {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = x * *c + y * s.conj();
            h[(i, k + 1)] = -x * *s + y * *c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Complex Givens rotation `[c, s; -conj(s), c]` with real `c` annihilating
/// `b` against `a`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = (an * an + bn * bn).sqrt();
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}
