use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::polynomial::MatrixPolynomial;
use super::TransportError;
use crate::numerics::ComplexMatrix;

/// One coefficient B_k(x) of a differential operator: a matrix polynomial,
/// or a named callable for non-polynomial demonstration problems (the
/// callable carries its own derivative when constructions downstream need
/// one).
#[derive(Clone)]
pub enum Coefficient {
    Poly(MatrixPolynomial),
    Named(NamedCoefficient),
}

#[derive(Clone)]
pub struct NamedCoefficient {
    pub name: String,
    pub size: usize,
    pub eval: Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>,
    pub derivative: Option<Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>>,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Poly(p) => write!(f, "Poly(degree {})", p.degree()),
            Coefficient::Named(n) => write!(f, "Named({:?})", n.name),
        }
    }
}

impl Coefficient {
    pub fn constant(m: ComplexMatrix) -> Self {
        Coefficient::Poly(MatrixPolynomial::constant(m))
    }

    pub fn size(&self) -> usize {
        match self {
            Coefficient::Poly(p) => p.size(),
            Coefficient::Named(n) => n.size,
        }
    }

    pub fn eval(&self, x: f64) -> ComplexMatrix {
        match self {
            Coefficient::Poly(p) => p.eval(x),
            Coefficient::Named(n) => (n.eval)(x),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Coefficient::Poly(p) => p.is_constant(),
            Coefficient::Named(_) => false,
        }
    }

    pub fn as_poly(&self) -> Option<&MatrixPolynomial> {
        match self {
            Coefficient::Poly(p) => Some(p),
            Coefficient::Named(_) => None,
        }
    }
}

/// An order-r linear differential operator `D = Σ_k B_k(x) d^k/dx^k` on
/// `[0, β]` acting on C^n-valued functions, with invertible leading
/// coefficient. For r = 1 the aliases `A(x) := B_1(x)`, `B(x) := B_0(x)`
/// apply.
#[derive(Debug, Clone)]
pub struct OdeOperator {
    order: usize,
    rank: usize,
    beta: f64,
    /// coeffs[k] = B_k; length order + 1.
    coeffs: Vec<Coefficient>,
}

impl OdeOperator {
    pub fn new(
        order: usize,
        rank: usize,
        beta: f64,
        coeffs: Vec<Coefficient>,
    ) -> Result<Self, TransportError> {
        if order < 1 || rank < 1 {
            return Err(TransportError::InvalidOperator(format!(
                "order {order} and rank {rank} must be at least 1"
            )));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(TransportError::InvalidOperator(format!(
                "interval length must be positive, got {beta}"
            )));
        }
        if coeffs.len() != order + 1 {
            return Err(TransportError::InvalidOperator(format!(
                "order {order} operator needs {} coefficients, got {}",
                order + 1,
                coeffs.len()
            )));
        }
        for (k, c) in coeffs.iter().enumerate() {
            if c.size() != rank {
                return Err(TransportError::InvalidOperator(format!(
                    "coefficient B_{k} has size {} but rank is {rank}",
                    c.size()
                )));
            }
        }
        let op = Self {
            order,
            rank,
            beta,
            coeffs,
        };
        op.check_leading_coefficient()?;
        Ok(op)
    }

    /// First-order constructor: `D = A(x) d/dx + B(x)`.
    pub fn first_order(
        a: Coefficient,
        b: Coefficient,
        beta: f64,
    ) -> Result<Self, TransportError> {
        let rank = a.size();
        Self::new(1, rank, beta, vec![b, a])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn coefficient(&self, k: usize) -> &Coefficient {
        &self.coeffs[k]
    }

    pub fn leading(&self) -> &Coefficient {
        &self.coeffs[self.order]
    }

    /// Companion-system dimension r·n.
    pub fn companion_dim(&self) -> usize {
        self.order * self.rank
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_constant())
    }

    /// det B_r(x) must not vanish on [0, β]: sampled on a dense grid with
    /// golden-section refinement of every local minimum of |det|.
    fn check_leading_coefficient(&self) -> Result<(), TransportError> {
        let f = |x: f64| -> f64 {
            self.leading()
                .eval(x)
                .log_det()
                .map(|l| l.log_abs.exp())
                .unwrap_or(0.0)
        };
        // a constant matrix needs a single test
        if self.leading().is_constant() {
            let d = self.leading().eval(0.0).log_det().map_err(|_| {
                TransportError::InvalidOperator("leading coefficient not square".into())
            })?;
            if d.is_zero() || d.log_abs < -200.0 {
                return Err(TransportError::LeadingCoefficientSingular { x: 0.0 });
            }
            return Ok(());
        }
        let grid = 257usize;
        let xs: Vec<f64> = (0..grid)
            .map(|i| self.beta * i as f64 / (grid - 1) as f64)
            .collect();
        let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let scale = vals.iter().cloned().fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(TransportError::LeadingCoefficientSingular { x: 0.0 });
        }
        let tol = 1e-9 * scale;
        for i in 0..grid {
            let is_min = (i == 0 || vals[i] <= vals[i - 1]) && (i + 1 == grid || vals[i] <= vals[i + 1]);
            if !is_min {
                continue;
            }
            let lo = if i == 0 { xs[0] } else { xs[i - 1] };
            let hi = if i + 1 == grid { xs[grid - 1] } else { xs[i + 1] };
            let (xmin, vmin) = golden_min(&f, lo, hi);
            if vmin < tol {
                return Err(TransportError::LeadingCoefficientSingular { x: xmin });
            }
        }
        Ok(())
    }

    /// (D ψ)(x) evaluated on boundary data: for order-1 operators,
    /// Dψ = A(x)ψ' + B(x)ψ. Returns (B(x), A(x)) for assembling conditions
    /// on Dψ in Cauchy data.
    pub fn first_order_parts(&self) -> Option<(&Coefficient, &Coefficient)> {
        if self.order == 1 {
            Some((&self.coeffs[0], &self.coeffs[1]))
        } else {
            None
        }
    }

    /// Formal adjoint composed with the operator: Δ = D*D as an order-2
    /// operator with polynomial coefficients. Only available when both
    /// coefficients are polynomial (exact derivatives are required).
    ///
    /// For D = A d/dx + B:
    ///   D*D = −A*A d²/dx² + (−A*A' − A*B − A'*A + B*A) d/dx
    ///         + (−A*B' − A'*B + B*B).
    pub fn dirac_laplacian(&self) -> Result<OdeOperator, TransportError> {
        if self.order != 1 {
            return Err(TransportError::InvalidOperator(
                "dirac_laplacian requires a first-order operator".into(),
            ));
        }
        let a = self.coeffs[1].as_poly().ok_or_else(|| {
            TransportError::InvalidOperator(
                "dirac_laplacian requires polynomial coefficients".into(),
            )
        })?;
        let b = self.coeffs[0].as_poly().ok_or_else(|| {
            TransportError::InvalidOperator(
                "dirac_laplacian requires polynomial coefficients".into(),
            )
        })?;
        let a_adj = a.adjoint();
        let b_adj = b.adjoint();
        let a_deriv = a.derivative();
        let a_deriv_adj = a_deriv.adjoint();
        let b_deriv = b.derivative();

        let c2 = a_adj.mul(a).neg();
        let c1 = a_adj
            .mul(&a_deriv)
            .neg()
            .add(&a_adj.mul(b).neg())
            .add(&a_deriv_adj.mul(a).neg())
            .add(&b_adj.mul(a));
        let c0 = a_adj
            .mul(&b_deriv)
            .neg()
            .add(&a_deriv_adj.mul(b).neg())
            .add(&b_adj.mul(b));
        OdeOperator::new(
            2,
            self.rank,
            self.beta,
            vec![
                Coefficient::Poly(c0),
                Coefficient::Poly(c1),
                Coefficient::Poly(c2),
            ],
        )
    }

    /// ∂Ω/∂λ of the companion system; see [`super::CompanionSystem`].
    pub(super) fn dlambda_block(&self, x: f64) -> Result<ComplexMatrix, TransportError> {
        let n = self.rank;
        let r = self.order;
        let dim = self.companion_dim();
        let mut out = ComplexMatrix::zeros(dim, dim);
        if r == 1 {
            // Ω = A^{-1}(λ − B): ∂λΩ = A^{-1}
            let a = self.coeffs[1].eval(x);
            let ainv = a
                .inverse()
                .map_err(|_| TransportError::LeadingCoefficientSingular { x })?;
            out.set_block(0, 0, &ainv);
        } else {
            // bottom-left block −B_r^{-1}(B_0 − λ): ∂λ gives +B_r^{-1}
            let br = self.leading().eval(x);
            let brinv = br
                .inverse()
                .map_err(|_| TransportError::LeadingCoefficientSingular { x })?;
            out.set_block((r - 1) * n, 0, &brinv);
        }
        Ok(out)
    }

    /// Companion matrix Ω_λ(x) with K' = Ω_λ(x) K.
    pub(super) fn omega(&self, x: f64, lambda: Complex64) -> Result<ComplexMatrix, TransportError> {
        let n = self.rank;
        let r = self.order;
        let dim = self.companion_dim();
        if r == 1 {
            // ψ' = A^{-1}(λ − B)ψ
            let a = self.coeffs[1].eval(x);
            let b = self.coeffs[0].eval(x);
            let mut lam_minus_b = b.scale(Complex64::new(-1.0, 0.0));
            for i in 0..n {
                lam_minus_b[(i, i)] += lambda;
            }
            return a
                .solve(&lam_minus_b)
                .map_err(|_| TransportError::LeadingCoefficientSingular { x });
        }
        let mut out = ComplexMatrix::zeros(dim, dim);
        let eye = ComplexMatrix::identity(n);
        for blk in 0..r - 1 {
            out.set_block(blk * n, (blk + 1) * n, &eye);
        }
        let br = self.leading().eval(x);
        for k in 0..r {
            let mut bk = self.coeffs[k].eval(x);
            if k == 0 {
                for i in 0..n {
                    bk[(i, i)] -= lambda;
                }
            }
            let block = br
                .solve(&bk)
                .map_err(|_| TransportError::LeadingCoefficientSingular { x })?
                .scale(Complex64::new(-1.0, 0.0));
            out.set_block((r - 1) * n, k * n, &block);
        }
        Ok(out)
    }
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-14 * (1.0 + a.abs() + b.abs()) {
            break;
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;

    fn scalar(z: Complex64) -> ComplexMatrix {
        ComplexMatrix::diagonal(&[z])
    }

    #[test]
    fn first_order_omega_scalar() {
        // D = -i d/dx: Ω_λ = iλ
        let op = OdeOperator::first_order(
            Coefficient::constant(scalar(c64(0.0, -1.0))),
            Coefficient::constant(scalar(c64(0.0, 0.0))),
            1.0,
        )
        .unwrap();
        let lambda = c64(2.0, 0.5);
        let om = op.omega(0.3, lambda).unwrap();
        assert!((om[(0, 0)] - c64(0.0, 1.0) * lambda).norm() < 1e-14);
    }

    #[test]
    fn second_order_companion_sign() {
        // D = -d²/dx²: Ω_λ = [[0, 1], [-λ, 0]]
        let op = OdeOperator::new(
            2,
            1,
            1.0,
            vec![
                Coefficient::constant(scalar(c64(0.0, 0.0))),
                Coefficient::constant(scalar(c64(0.0, 0.0))),
                Coefficient::constant(scalar(c64(-1.0, 0.0))),
            ],
        )
        .unwrap();
        let lambda = c64(3.0, -1.0);
        let om = op.omega(0.0, lambda).unwrap();
        assert!((om[(0, 1)] - c64(1.0, 0.0)).norm() < 1e-14);
        assert!((om[(1, 0)] + lambda).norm() < 1e-14);
        assert!(om[(0, 0)].norm() < 1e-14 && om[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn schroedinger_companion_with_potential() {
        // D = -d²/dx² + V(x), V = x: Ω_λ = [[0,1],[V(x)-λ, 0]]
        let v = MatrixPolynomial::new(vec![
            ComplexMatrix::zeros(1, 1),
            ComplexMatrix::identity(1),
        ]);
        let op = OdeOperator::new(
            2,
            1,
            1.0,
            vec![
                Coefficient::Poly(v),
                Coefficient::constant(scalar(c64(0.0, 0.0))),
                Coefficient::constant(scalar(c64(-1.0, 0.0))),
            ],
        )
        .unwrap();
        let lambda = c64(0.7, 0.0);
        let om = op.omega(0.5, lambda).unwrap();
        assert!((om[(1, 0)] - (c64(0.5, 0.0) - lambda)).norm() < 1e-14);
    }

    #[test]
    fn singular_leading_coefficient_rejected() {
        // B_1(x) = x - 1/2 vanishes inside [0, 1]
        let a = MatrixPolynomial::new(vec![
            scalar(c64(-0.5, 0.0)),
            ComplexMatrix::identity(1),
        ]);
        let err = OdeOperator::first_order(
            Coefficient::Poly(a),
            Coefficient::constant(scalar(c64(0.0, 0.0))),
            1.0,
        )
        .unwrap_err();
        match err {
            TransportError::LeadingCoefficientSingular { x } => {
                assert!((x - 0.5).abs() < 1e-6, "located zero at {x}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn dirac_laplacian_of_twisted_operator() {
        // D = -i d/dx: D*D = -d²/dx²
        let op = OdeOperator::first_order(
            Coefficient::constant(scalar(c64(0.0, -1.0))),
            Coefficient::constant(scalar(c64(0.0, 0.0))),
            1.0,
        )
        .unwrap();
        let lap = op.dirac_laplacian().unwrap();
        assert_eq!(lap.order(), 2);
        let b2 = lap.coefficient(2).eval(0.0);
        assert!((b2[(0, 0)] - c64(-1.0, 0.0)).norm() < 1e-14);
        assert!(lap.coefficient(1).eval(0.3).norm_max() < 1e-14);
        assert!(lap.coefficient(0).eval(0.3).norm_max() < 1e-14);
    }
}
