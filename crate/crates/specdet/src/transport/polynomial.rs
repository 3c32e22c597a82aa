use num_complex::Complex64;

use crate::numerics::ComplexMatrix;

/// Matrix-valued polynomial in the interval coordinate x, stored by degree.
/// Coefficients of differential operators are restricted to this form: the
/// file format is unambiguous and derivatives are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    /// coeffs[d] multiplies x^d; all matrices share one square size.
    coeffs: Vec<ComplexMatrix>,
}

impl MatrixPolynomial {
    pub fn new(coeffs: Vec<ComplexMatrix>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        let n = coeffs[0].rows();
        for c in &coeffs {
            assert!(c.rows() == n && c.cols() == n, "coefficient size mismatch");
        }
        let mut p = Self { coeffs };
        p.trim();
        p
    }

    pub fn constant(m: ComplexMatrix) -> Self {
        assert!(m.is_square());
        Self { coeffs: vec![m] }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coeffs: vec![ComplexMatrix::zeros(n, n)],
        }
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1
            && self.coeffs.last().map(|c| c.norm_max() == 0.0).unwrap_or(false)
        {
            self.coeffs.pop();
        }
    }

    pub fn size(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn coefficients(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn eval(&self, x: f64) -> ComplexMatrix {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.scale(Complex64::new(x, 0.0)).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(self.size());
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(d, c)| c.scale(Complex64::new(d as f64, 0.0)))
            .collect();
        Self::new(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.size();
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(len);
        for d in 0..len {
            let mut m = ComplexMatrix::zeros(n, n);
            if d < self.coeffs.len() {
                m = m.add(&self.coeffs[d]);
            }
            if d < other.coeffs.len() {
                m = m.add(&other.coeffs[d]);
            }
            out.push(m);
        }
        Self::new(out)
    }

    pub fn neg(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|c| c.scale(Complex64::new(-1.0, 0.0)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.size();
        let mut out = vec![ComplexMatrix::zeros(n, n); self.degree() + other.degree() + 1];
        for (d1, c1) in self.coeffs.iter().enumerate() {
            for (d2, c2) in other.coeffs.iter().enumerate() {
                out[d1 + d2] = out[d1 + d2].add(&c1.matmul(c2));
            }
        }
        Self::new(out)
    }

    /// Coefficient-wise conjugate transpose; equals x ↦ P(x)* for real x.
    pub fn adjoint(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.adjoint()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![c64(a, 0.0), c64(b, 0.0)],
            vec![c64(c, 0.0), c64(d, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn eval_and_derivative() {
        // P(x) = A + B x²
        let p = MatrixPolynomial::new(vec![
            m2(1.0, 0.0, 0.0, 1.0),
            m2(0.0, 0.0, 0.0, 0.0),
            m2(2.0, 0.0, 0.0, 3.0),
        ]);
        let v = p.eval(2.0);
        assert!((v[(0, 0)] - c64(9.0, 0.0)).norm() < 1e-14);
        assert!((v[(1, 1)] - c64(13.0, 0.0)).norm() < 1e-14);
        let d = p.derivative();
        let dv = d.eval(2.0);
        assert!((dv[(0, 0)] - c64(8.0, 0.0)).norm() < 1e-14);
        assert!((dv[(1, 1)] - c64(12.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn product_matches_pointwise() {
        let p = MatrixPolynomial::new(vec![m2(1.0, 2.0, 0.0, 1.0), m2(0.5, 0.0, 1.0, 0.0)]);
        let q = MatrixPolynomial::new(vec![m2(0.0, 1.0, 1.0, 0.0), m2(2.0, 0.0, 0.0, 2.0)]);
        let prod = p.mul(&q);
        for &x in &[0.0, 0.7, 1.9] {
            let direct = p.eval(x).matmul(&q.eval(x));
            let via = prod.eval(x);
            assert!(direct.sub(&via).norm_max() < 1e-13);
        }
    }

    #[test]
    fn adjoint_is_pointwise_adjoint() {
        let p = MatrixPolynomial::new(vec![
            ComplexMatrix::from_rows(&[
                vec![c64(1.0, 2.0), c64(0.0, -1.0)],
                vec![c64(3.0, 0.0), c64(0.0, 0.5)],
            ])
            .unwrap(),
        ]);
        let a = p.adjoint().eval(0.3);
        let b = p.eval(0.3).adjoint();
        assert!(a.sub(&b).norm_max() < 1e-15);
    }
}
