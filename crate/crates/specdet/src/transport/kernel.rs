use num_complex::Complex64;

use super::{companion, transport, OdeOperator, TransportError, TransportEvaluator};
use crate::numerics::ComplexMatrix;

fn transport_dense(
    op: &OdeOperator,
    lambda: Complex64,
    x: f64,
) -> Result<ComplexMatrix, TransportError> {
    if x <= 0.0 {
        return Ok(ComplexMatrix::identity(op.companion_dim()));
    }
    transport(&TransportEvaluator::new(companion(op), lambda), x)?.dense()
}

/// Resolvent kernel of the boundary problem `(D_P − λ)^{-1}` in Stiefel
/// coordinates `[m | n_mat]` on Cauchy data, evaluated at `(x, y)`.
///
/// For r = 1 this is the two-sided formula
///
/// ```text
/// k(x,y) = K(x) [θ(x−y) I − (M + N K)^{-1} N K] K(y)^{-1} A(y)^{-1} ,
/// ```
///
/// with `K := K_λ(β)`; for r ≥ 2 the same expression for the companion
/// system (whose leading coefficient is the identity), taking the
/// `(1, r)` block and composing with `B_r(y)^{-1}`. On the diagonal
/// `x == y` the `x < y` branch is used.
pub fn resolvent_kernel(
    op: &OdeOperator,
    m: &ComplexMatrix,
    n_mat: &ComplexMatrix,
    lambda: Complex64,
    x: f64,
    y: f64,
) -> Result<ComplexMatrix, TransportError> {
    let whole = kernel_core(op, m, n_mat, lambda, x, y)?;
    Ok(project_block(op, &whole, y)?)
}

/// Kernel of the relative inverse `(D_{P1} − λ)^{-1} − (D_{P2} − λ)^{-1}`:
/// the Heaviside parts cancel and the difference is smooth,
///
/// ```text
/// −K(x) [(M₁+N₁K)^{-1} N₁ − (M₂+N₂K)^{-1} N₂] K · K(y)^{-1} A(y)^{-1} .
/// ```
pub fn relative_kernel(
    op: &OdeOperator,
    m1: &ComplexMatrix,
    n1: &ComplexMatrix,
    m2: &ComplexMatrix,
    n2: &ComplexMatrix,
    lambda: Complex64,
    x: f64,
    y: f64,
) -> Result<ComplexMatrix, TransportError> {
    let beta = op.beta();
    let k_beta = transport_dense(op, lambda, beta)?;
    let j1 = boundary_coefficient(m1, n1, &k_beta)?;
    let j2 = boundary_coefficient(m2, n2, &k_beta)?;
    let kx = transport_dense(op, lambda, x)?;
    let ky_inv = transport_dense(op, lambda, y)?.inverse()?;
    let middle = j1.sub(&j2).matmul(&k_beta);
    let whole = kx
        .matmul(&middle)
        .matmul(&ky_inv)
        .scale(Complex64::new(-1.0, 0.0));
    Ok(project_block(op, &whole, y)?)
}

/// (M + N K)^{-1} N.
fn boundary_coefficient(
    m: &ComplexMatrix,
    n_mat: &ComplexMatrix,
    k_beta: &ComplexMatrix,
) -> Result<ComplexMatrix, TransportError> {
    let m_lambda = m.add(&n_mat.matmul(k_beta));
    Ok(m_lambda.solve(n_mat)?)
}

fn kernel_core(
    op: &OdeOperator,
    m: &ComplexMatrix,
    n_mat: &ComplexMatrix,
    lambda: Complex64,
    x: f64,
    y: f64,
) -> Result<ComplexMatrix, TransportError> {
    let beta = op.beta();
    let k_beta = transport_dense(op, lambda, beta)?;
    let j = boundary_coefficient(m, n_mat, &k_beta)?.matmul(&k_beta);
    let dim = op.companion_dim();
    let mut middle = j.scale(Complex64::new(-1.0, 0.0));
    if x > y {
        for i in 0..dim {
            middle[(i, i)] += Complex64::new(1.0, 0.0);
        }
    }
    let kx = transport_dense(op, lambda, x)?;
    let ky_inv = transport_dense(op, lambda, y)?.inverse()?;
    Ok(kx.matmul(&middle).matmul(&ky_inv))
}

/// Post-compose with the leading-coefficient inverse and, for r ≥ 2,
/// extract the (1, r) block of the companion kernel.
fn project_block(
    op: &OdeOperator,
    whole: &ComplexMatrix,
    y: f64,
) -> Result<ComplexMatrix, TransportError> {
    let n = op.rank();
    let r = op.order();
    if r == 1 {
        let a_inv = op
            .coefficient(1)
            .eval(y)
            .inverse()
            .map_err(|_| TransportError::LeadingCoefficientSingular { x: y })?;
        return Ok(whole.matmul(&a_inv));
    }
    let block = whole.block(0, (r - 1) * n, n, n);
    let br_inv = op
        .leading()
        .eval(y)
        .inverse()
        .map_err(|_| TransportError::LeadingCoefficientSingular { x: y })?;
    Ok(block.matmul(&br_inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::c64;
    use crate::transport::Coefficient;

    fn scalar(z: Complex64) -> ComplexMatrix {
        ComplexMatrix::diagonal(&[z])
    }

    fn twisted(beta: f64) -> OdeOperator {
        OdeOperator::first_order(
            Coefficient::constant(scalar(c64(0.0, -1.0))),
            Coefficient::constant(scalar(c64(0.0, 0.0))),
            beta,
        )
        .unwrap()
    }

    #[test]
    fn projection_frame_kills_lower_triangle() {
        // frame [I 0]: x > y gives K(x)K(y)^{-1}A(y)^{-1}, x < y gives 0
        let op = twisted(1.0);
        let m = ComplexMatrix::identity(1);
        let n = ComplexMatrix::zeros(1, 1);
        let lambda = c64(0.4, 0.2);
        let below = resolvent_kernel(&op, &m, &n, lambda, 0.2, 0.7).unwrap();
        assert!(below.norm_max() < 1e-13);
        let above = resolvent_kernel(&op, &m, &n, lambda, 0.7, 0.2).unwrap();
        // K(x)K(y)^{-1} = e^{iλ(x-y)}, A^{-1} = (−i)^{-1} = i
        let want = (c64(0.0, 0.5) * lambda).exp() * c64(0.0, 1.0);
        assert!((above[(0, 0)] - want).norm() < 1e-12);
    }

    #[test]
    fn diagonal_jump_is_minus_a_inverse() {
        // lim ε→0 (k(x, x+ε) − k(x+ε, x)) = −A(x)^{-1}
        let op = twisted(1.0);
        let a = std::f64::consts::PI / 3.0;
        let m = ComplexMatrix::identity(1);
        let n = scalar(-(c64(0.0, -a).exp()));
        let lambda = c64(0.3, 0.1);
        let x = 0.4;
        let eps = 1e-6;
        let k_up = resolvent_kernel(&op, &m, &n, lambda, x, x + eps).unwrap();
        let k_dn = resolvent_kernel(&op, &m, &n, lambda, x + eps, x).unwrap();
        let jump = k_up.sub(&k_dn);
        // −A^{-1} = −(−i)^{-1} = −i
        assert!(
            (jump[(0, 0)] - c64(0.0, -1.0)).norm() < 1e-5,
            "jump {}",
            jump[(0, 0)]
        );
    }

    #[test]
    fn relative_kernel_matches_difference() {
        let op = twisted(1.0);
        let m1 = ComplexMatrix::identity(1);
        let n1 = scalar(-(c64(0.0, -1.0).exp()));
        let m2 = ComplexMatrix::identity(1);
        let n2 = scalar(-(c64(0.0, -2.2).exp()));
        let lambda = c64(0.25, 0.45);
        for (x, y) in [(0.2, 0.6), (0.8, 0.3), (0.5, 0.5)] {
            let rel = relative_kernel(&op, &m1, &n1, &m2, &n2, lambda, x, y).unwrap();
            let k1 = resolvent_kernel(&op, &m1, &n1, lambda, x, y).unwrap();
            let k2 = resolvent_kernel(&op, &m2, &n2, lambda, x, y).unwrap();
            let diff = k1.sub(&k2);
            assert!(
                rel.sub(&diff).norm_max() < 1e-10,
                "smooth kernel mismatch at ({x},{y})"
            );
        }
    }

    #[test]
    fn second_order_kernel_solves_resolvent_equation() {
        // Dirichlet Laplacian: u(x) = ∫ k(x,y) f(y) dy satisfies
        // (−u'' − λ u) = f with u(0) = u(β) = 0
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
        let lambda = c64(2.0, 0.0); // off the Dirichlet spectrum {π², …}
        // f ≡ 1: closed-form solution of −u'' − λu = 1, u(0)=u(1)=0:
        // u = (cos(μ(x−1/2))/cos(μ/2) − 1)/λ with μ = √λ
        let mu = 2f64.sqrt();
        let u_exact = |x: f64| ((mu * (x - 0.5)).cos() / (mu * 0.5).cos() - 1.0) / 2.0;
        // quadrature of the kernel against f ≡ 1
        let ns = 400;
        for &x in &[0.3, 0.7] {
            let mut u = c64(0.0, 0.0);
            for j in 0..ns {
                let y = (j as f64 + 0.5) / ns as f64;
                let k = resolvent_kernel(&op, &m, &n, lambda, x, y).unwrap();
                u += k[(0, 0)] / ns as f64;
            }
            assert!(
                (u - c64(u_exact(x), 0.0)).norm() < 1e-4,
                "u({x}) = {u} vs {}",
                u_exact(x)
            );
        }
    }
}
