use num_complex::Complex64;
use serde::Serialize;

use super::OracleError;
use crate::bvp::BoundaryProblem;
use crate::numerics::normalize_angle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        assert!(re_min < re_max && im_min < im_max, "degenerate rectangle");
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }

    fn split(&self) -> (Rectangle, Rectangle) {
        // asymmetric ratio so repeated splits never land on symmetric
        // spectral lines (the real axis of a centered region, say)
        const FRACTION: f64 = 0.53;
        if self.re_max - self.re_min >= self.im_max - self.im_min {
            let mid = self.re_min + FRACTION * (self.re_max - self.re_min);
            (
                Rectangle::new(self.re_min, mid, self.im_min, self.im_max),
                Rectangle::new(mid, self.re_max, self.im_min, self.im_max),
            )
        } else {
            let mid = self.im_min + FRACTION * (self.im_max - self.im_min);
            (
                Rectangle::new(self.re_min, self.re_max, self.im_min, mid),
                Rectangle::new(self.re_min, self.re_max, mid, self.im_max),
            )
        }
    }

    fn expand(&self, factor: f64) -> Rectangle {
        let cw = 0.5 * (self.re_max - self.re_min) * factor;
        let ch = 0.5 * (self.im_max - self.im_min) * factor;
        let c = self.center();
        Rectangle::new(c.re - cw, c.re + cw, c.im - ch, c.im + ch)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Eigenvalue {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// A cell of the completeness certificate: the argument-principle winding
/// count of det M_λ over the cell boundary.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CellCount {
    pub rect: Rectangle,
    pub winding: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part, with multiplicities.
    pub eigenvalues: Vec<Eigenvalue>,
    pub search_region: Rectangle,
    pub completeness_certificate: Vec<CellCount>,
    pub determinant_evaluations: usize,
}

struct Scanner<'a> {
    problem: &'a BoundaryProblem,
    evals: std::cell::Cell<usize>,
    budget: usize,
}

impl Scanner<'_> {
    fn phase(&self, lambda: Complex64) -> Result<f64, OracleError> {
        self.evals.set(self.evals.get() + 1);
        if self.evals.get() > self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        let d = self.problem.boundary_log_det(lambda)?;
        if d.is_zero() || d.log_abs < -280.0 {
            // a zero on (or numerically on) the contour
            Err(OracleError::BoundaryZero(0))
        } else {
            Ok(d.phase)
        }
    }

    /// Winding number of det M_λ along the rectangle boundary by adaptive
    /// trapezoid phase summation: edges are bisected until every raw phase
    /// step is below π/2, then the steps telescope to 2π × winding.
    fn winding(&self, rect: &Rectangle) -> Result<i64, OracleError> {
        let corners = rect.corners();
        let mut total = 0.0f64;
        for e in 0..4 {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            total += self.edge_phase_change(a, b, self.phase(a)?, self.phase(b)?, 0)?;
        }
        let w = total / (2.0 * std::f64::consts::PI);
        let rounded = w.round();
        if (w - rounded).abs() > 0.2 {
            return Err(OracleError::WindingUnstable { count: w });
        }
        Ok(rounded as i64)
    }

    fn edge_phase_change(
        &self,
        a: Complex64,
        b: Complex64,
        pa: f64,
        pb: f64,
        depth: usize,
    ) -> Result<f64, OracleError> {
        if depth >= 52 {
            return Err(OracleError::WindingUnstable { count: f64::NAN });
        }
        // every segment is probed once: a raw step is accepted only when a
        // midpoint confirms it, which catches steps aliased past ±π
        let step = normalize_angle(pb - pa);
        let mid = (a + b) * 0.5;
        let pm = self.phase(mid)?;
        let s1 = normalize_angle(pm - pa);
        let s2 = normalize_angle(pb - pm);
        let third = std::f64::consts::FRAC_PI_3;
        if step.abs() < third
            && s1.abs() < third
            && s2.abs() < third
            && (s1 + s2 - step).abs() < 1e-9
        {
            return Ok(s1 + s2);
        }
        Ok(self.edge_phase_change(a, mid, pa, pm, depth + 1)?
            + self.edge_phase_change(mid, b, pm, pb, depth + 1)?)
    }

    /// Newton polish of a root from `start`, using the exact logarithmic
    /// derivative: δ = −m / (d/dλ log det).
    fn polish(
        &self,
        start: Complex64,
        multiplicity: usize,
        scale: f64,
    ) -> Result<Complex64, OracleError> {
        let mut z = start;
        for _ in 0..80 {
            let dlog = self.problem.boundary_log_derivative(z)?;
            if dlog.norm() == 0.0 {
                break;
            }
            let step = -Complex64::new(multiplicity as f64, 0.0) / dlog;
            z += step;
            if step.norm() < 1e-14 * (scale + z.norm()) {
                break;
            }
        }
        Ok(z)
    }
}

/// Locate all zeros of λ ↦ det(M + N K_λ) in `region` by recursive
/// argument-principle subdivision with Newton polish, attaching per-cell
/// winding counts as a completeness certificate.
pub fn spectrum_scan(
    problem: &BoundaryProblem,
    region: Rectangle,
    max_count: usize,
) -> Result<Spectrum, OracleError> {
    let mut jitter = 0usize;
    let mut current = region;
    loop {
        match scan_once(problem, current, region, max_count) {
            Err(OracleError::BoundaryZero(_)) if jitter < 5 => {
                jitter += 1;
                // expand by an irrational-ish factor so a zero cannot stay
                // on the contour
                current = current.expand(1.0 + 0.00137 * jitter as f64);
            }
            other => return other,
        }
    }
}

fn scan_once(
    problem: &BoundaryProblem,
    region: Rectangle,
    reported_region: Rectangle,
    max_count: usize,
) -> Result<Spectrum, OracleError> {
    let scanner = Scanner {
        problem,
        evals: std::cell::Cell::new(0),
        budget: 600_000,
    };
    let mut certificate = Vec::new();
    let mut roots: Vec<Eigenvalue> = Vec::new();
    let mut stack = vec![region];
    let loc_tol = 1e-9 * region.diameter().max(1.0);
    while let Some(rect) = stack.pop() {
        let w = scanner.winding(&rect)?;
        certificate.push(CellCount {
            rect,
            winding: w,
        });
        if w == 0 {
            continue;
        }
        let total: usize = roots.iter().map(|r| r.multiplicity).sum();
        if total + w as usize > max_count {
            return Err(OracleError::BudgetExceeded(scanner.evals.get()));
        }
        if rect.diameter() < loc_tol.max(1e-7) {
            let z = scanner.polish(rect.center(), w as usize, region.diameter())?;
            let z = if rect.contains(z, rect.diameter()) {
                z
            } else {
                rect.center()
            };
            roots.push(Eigenvalue {
                value: z,
                multiplicity: w as usize,
            });
            continue;
        }
        let (l, r) = rect.split();
        stack.push(l);
        stack.push(r);
    }
    // merge duplicates straddling cell borders
    roots.sort_by(|x, y| {
        (x.value.re, x.value.im)
            .partial_cmp(&(y.value.re, y.value.im))
            .unwrap()
    });
    let mut merged: Vec<Eigenvalue> = Vec::new();
    for r in roots {
        if let Some(last) = merged.last_mut() {
            if (last.value - r.value).norm() < 1e-6 * (1.0 + r.value.norm()) {
                last.multiplicity += r.multiplicity;
                continue;
            }
        }
        merged.push(r);
    }
    Ok(Spectrum {
        eigenvalues: merged,
        search_region: reported_region,
        completeness_certificate: certificate,
        determinant_evaluations: scanner.evals.get(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvp::builtins;
    use crate::numerics::ComplexMatrix;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_eigenvalues_located() {
        let b = builtins::dirichlet_laplacian(1.0);
        let p = b.problem("dirichlet").unwrap();
        let region = Rectangle::new(0.5, 120.0, -1.0, 1.0);
        let spec = spectrum_scan(&p, region, 16).unwrap();
        let want = [PI * PI, 4.0 * PI * PI, 9.0 * PI * PI];
        assert_eq!(spec.eigenvalues.len(), want.len());
        for (e, w) in spec.eigenvalues.iter().zip(want) {
            assert_eq!(e.multiplicity, 1);
            assert!(
                (e.value - Complex64::new(w, 0.0)).norm() < 1e-8,
                "found {} vs {w}",
                e.value
            );
        }
    }

    #[test]
    fn twisted_eigenvalues_located() {
        let a = PI / 2.0;
        let b = builtins::twisted_dirac(a, 1.0);
        let p = b.problem("twisted").unwrap();
        let region = Rectangle::new(-10.0, 10.0, -1.0, 1.0);
        let spec = spectrum_scan(&p, region, 8).unwrap();
        // a + 2πn in [-10, 10]: π/2 − 2π, π/2, π/2 + 2π
        let want = [a - 2.0 * PI, a, a + 2.0 * PI];
        assert_eq!(spec.eigenvalues.len(), want.len());
        for (e, w) in spec.eigenvalues.iter().zip(want) {
            assert!(
                (e.value - Complex64::new(w, 0.0)).norm() < 1e-9,
                "found {} vs {w}",
                e.value
            );
        }
    }

    #[test]
    fn projection_frame_spectrum_empty() {
        // frame [I 0]: det M_λ ≡ 1, no zeros anywhere
        let b = builtins::dirichlet_laplacian(1.0);
        let frame = crate::bvp::StiefelFrame::new(
            ComplexMatrix::identity(2),
            ComplexMatrix::zeros(2, 2),
        )
        .unwrap();
        let p = b.problem("dirichlet").unwrap().with_frame(frame).unwrap();
        let region = Rectangle::new(-50.0, 50.0, -5.0, 5.0);
        let spec = spectrum_scan(&p, region, 8).unwrap();
        assert!(spec.eigenvalues.is_empty());
    }

    #[test]
    fn antiperiodic_double_eigenvalues() {
        let b = builtins::antiperiodic_laplacian(1.0);
        let p = b.problem("antiperiodic").unwrap();
        // ((2k+1)π)²: 9.87, 88.8 with multiplicity 2
        let region = Rectangle::new(0.5, 100.0, -1.0, 1.0);
        let spec = spectrum_scan(&p, region, 8).unwrap();
        assert_eq!(spec.eigenvalues.len(), 2);
        for (e, w) in spec
            .eigenvalues
            .iter()
            .zip([PI * PI, 9.0 * PI * PI])
        {
            assert_eq!(e.multiplicity, 2, "eigenvalue {} multiplicity", e.value);
            assert!((e.value - Complex64::new(w, 0.0)).norm() < 1e-6);
        }
    }
}
