use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::LogComplex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("QR iteration failed to converge")]
    EigNoConvergence,
}

/// Dense complex matrix in row-major order. All entries are finite; the
/// constructors reject NaN and infinity so no operation ever sees them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatrixError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self, MatrixError> {
        let r = rows.len();
        let c = rows.first().map(|row| row.len()).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(MatrixError::DimensionMismatch(
                "rows have unequal lengths".into(),
            ));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let data = self.data.iter().map(|&z| z * s).collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul dimension mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Max-modulus entry norm.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.cols {
            let mut s = 0.0;
            for i in 0..self.rows {
                s += self[(i, j)].norm();
            }
            best = best.max(s);
        }
        best
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let scale = self.norm_max().max(1.0);
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Horizontal block concatenation `[self | other]`.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)];
            }
        }
        out
    }

    /// Place `block` with its (0,0) entry at position (`r`, `c`).
    pub fn set_block(&mut self, r: usize, c: usize, block: &Self) {
        assert!(r + block.rows <= self.rows && c + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r + i, c + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r: usize, c: usize, rows: usize, cols: usize) -> Self {
        assert!(r + rows <= self.rows && c + cols <= self.cols);
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r + i, c + j)];
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &x)| a * x)
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// Determinant via partially pivoted LU. Stable for the moderate sizes
    /// (≤ a few hundred rows) this crate works with.
    pub fn det(&self) -> Result<Complex64, MatrixError> {
        let log = self.log_det()?;
        Ok(log.to_complex())
    }

    /// Determinant in log form `(log|det|, arg det)`; `log|det| = -inf`
    /// encodes an exactly singular matrix. Rows are equilibrated to unit
    /// max-modulus first, so the factorization never divides by values
    /// outside f64's comfortable range even when the determinant itself is
    /// astronomically large or small.
    pub fn log_det(&self) -> Result<LogComplex, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        if n == 0 {
            return Ok(LogComplex::one());
        }
        let mut a = self.clone();
        let mut log_abs = 0.0f64;
        let mut phase = 0.0f64;
        // row equilibration: det(D^{-1} A) Π d_i with d_i the row maxima
        for i in 0..n {
            let d = a.row(i).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if d == 0.0 {
                return Ok(LogComplex::zero());
            }
            let f = Complex64::new(1.0 / d, 0.0);
            for j in 0..n {
                a[(i, j)] *= f;
            }
            log_abs += d.ln();
        }
        let mut sign_flips = 0usize;
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Ok(LogComplex::zero());
            }
            if p != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(p, j)];
                    a[(p, j)] = tmp;
                }
                sign_flips += 1;
            }
            let pivot = a[(k, k)];
            log_abs += pivot.norm().ln();
            phase += pivot.arg();
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                a[(i, k)] = f;
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        if sign_flips % 2 == 1 {
            phase += std::f64::consts::PI;
        }
        Ok(LogComplex::new(log_abs, phase))
    }

    /// Solve `self * X = rhs` by pivoted LU.
    pub fn solve(&self, rhs: &Self) -> Result<Self, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows != rhs.rows {
            return Err(MatrixError::DimensionMismatch(format!(
                "solve: {} rows vs rhs {} rows",
                self.rows, rhs.rows
            )));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut aug = self.hcat(rhs);
        // row equilibration (by the coefficient block) leaves the solution
        // unchanged and keeps pivots in range
        for i in 0..n {
            let d = (0..n).map(|j| aug[(i, j)].norm()).fold(0.0, f64::max);
            if d > 0.0 {
                let f = Complex64::new(1.0 / d, 0.0);
                for j in 0..n + m {
                    aug[(i, j)] *= f;
                }
            }
        }
        for k in 0..n {
            let mut p = k;
            let mut best = aug[(k, k)].norm();
            for i in k + 1..n {
                let v = aug[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(MatrixError::Singular);
            }
            if p != k {
                for j in 0..n + m {
                    let tmp = aug[(k, j)];
                    aug[(k, j)] = aug[(p, j)];
                    aug[(p, j)] = tmp;
                }
            }
            let pivot = aug[(k, k)];
            for i in k + 1..n {
                let f = aug[(i, k)] / pivot;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k..n + m {
                    let v = aug[(k, j)];
                    aug[(i, j)] -= f * v;
                }
            }
        }
        let mut x = Self::zeros(n, m);
        for j in 0..m {
            for i in (0..n).rev() {
                let mut s = aug[(i, n + j)];
                for k in i + 1..n {
                    s -= aug[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / aug[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Self, MatrixError> {
        self.solve(&Self::identity(self.rows))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Rank by column-pivoted Householder QR with relative threshold `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        let (_, r, _) = self.pivoted_qr();
        let scale = (0..r.rows.min(r.cols))
            .map(|i| r[(i, i)].norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0;
        }
        (0..r.rows.min(r.cols))
            .filter(|&i| r[(i, i)].norm() > tol * scale)
            .count()
    }

    /// Column-pivoted Householder QR: returns (Q, R, perm) with
    /// `self[:, perm] = Q R`, Q of size rows×min(rows,cols).
    pub fn pivoted_qr(&self) -> (Self, Self, Vec<usize>) {
        let m = self.rows;
        let n = self.cols;
        let k = m.min(n);
        let mut a = self.clone();
        let mut q = Self::identity(m);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut col_norms: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| a[(i, j)].norm_sqr()).sum::<f64>())
            .collect();
        for step in 0..k {
            // column pivot
            let (jmax, _) = col_norms
                .iter()
                .enumerate()
                .skip(step)
                .fold((step, -1.0), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
            if jmax != step {
                for i in 0..m {
                    let tmp = a[(i, step)];
                    a[(i, step)] = a[(i, jmax)];
                    a[(i, jmax)] = tmp;
                }
                perm.swap(step, jmax);
                col_norms.swap(step, jmax);
            }
            // Householder vector for column `step`
            let mut v: Vec<Complex64> = (step..m).map(|i| a[(i, step)]).collect();
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
            // apply reflector to A
            for j in step..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for (idx, vi) in v.iter().enumerate() {
                    dot += vi.conj() * a[(step + idx, j)];
                }
                let f = dot * 2.0 / vnorm2;
                for (idx, vi) in v.iter().enumerate() {
                    a[(step + idx, j)] -= f * vi;
                }
            }
            // accumulate Q <- Q H with H = I - 2 v v* / (v* v)
            for j in 0..m {
                let mut dot = Complex64::new(0.0, 0.0);
                for (idx, vi) in v.iter().enumerate() {
                    dot += q[(j, step + idx)] * vi;
                }
                let f = dot * 2.0 / vnorm2;
                for (idx, vi) in v.iter().enumerate() {
                    q[(j, step + idx)] -= f * vi.conj();
                }
            }
            for j in step..n {
                col_norms[j] = (step + 1..m).map(|i| a[(i, j)].norm_sqr()).sum::<f64>();
            }
        }
        let qk = q.block(0, 0, m, k);
        let mut r = Self::zeros(k, n);
        for i in 0..k {
            for j in i..n {
                r[(i, j)] = a[(i, j)];
            }
        }
        (qk, r, perm)
    }

    /// Least-squares solution of `self * x ≈ rhs` (rows ≥ cols) by
    /// Householder QR with column equilibration. Also reports a condition
    /// estimate of the equilibrated triangular factor and the residual.
    pub fn least_squares(&self, rhs: &[Complex64]) -> Result<LeastSquaresFit, MatrixError> {
        let m = self.rows;
        let n = self.cols;
        if rhs.len() != m {
            return Err(MatrixError::DimensionMismatch(format!(
                "least_squares: rhs has {} entries for {} rows",
                rhs.len(),
                m
            )));
        }
        if m < n {
            return Err(MatrixError::DimensionMismatch(format!(
                "least_squares: underdetermined system {}x{}",
                m, n
            )));
        }
        // column scaling
        let scales: Vec<f64> = (0..n)
            .map(|j| {
                let s = (0..m).map(|i| self[(i, j)].norm_sqr()).sum::<f64>().sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        let mut a = self.clone();
        for j in 0..n {
            for i in 0..m {
                a[(i, j)] /= scales[j];
            }
        }
        let mut b = rhs.to_vec();
        // Householder QR, transforming b in place
        for step in 0..n {
            let mut v: Vec<Complex64> = (step..m).map(|i| a[(i, step)]).collect();
            let norm_x = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm_x == 0.0 {
                return Err(MatrixError::Singular);
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
            for j in step..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for (idx, vi) in v.iter().enumerate() {
                    dot += vi.conj() * a[(step + idx, j)];
                }
                let f = dot * 2.0 / vnorm2;
                for (idx, vi) in v.iter().enumerate() {
                    a[(step + idx, j)] -= f * vi;
                }
            }
            let mut dot = Complex64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                dot += vi.conj() * b[step + idx];
            }
            let f = dot * 2.0 / vnorm2;
            for (idx, vi) in v.iter().enumerate() {
                b[step + idx] -= f * vi;
            }
        }
        let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].norm()).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max);
        let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if dmin > 0.0 { dmax / dmin } else { f64::INFINITY };
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= a[(i, k)] * x[k];
            }
            if a[(i, i)].norm() == 0.0 {
                return Err(MatrixError::Singular);
            }
            x[i] = s / a[(i, i)];
        }
        for j in 0..n {
            x[j] /= scales[j];
        }
        let residual_sq: f64 = (n..m).map(|i| b[i].norm_sqr()).sum();
        Ok(LeastSquaresFit {
            solution: x,
            residual_rms: (residual_sq / m as f64).sqrt(),
            condition,
        })
    }
}

/// Result of a QR least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquaresFit {
    pub solution: Vec<Complex64>,
    pub residual_rms: f64,
    /// Condition estimate (diagonal ratio of R) of the column-equilibrated
    /// design matrix.
    pub condition: f64,
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}
