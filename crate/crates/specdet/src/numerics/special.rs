/// Euler–Mascheroni constant by Euler–Maclaurin applied to harmonic sums:
/// γ = H_N − ln N − 1/(2N) + Σ B_{2k}/(2k N^{2k}).
pub fn euler_gamma() -> f64 {
    let n = 25usize;
    let nf = n as f64;
    let h: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
    let n2 = nf * nf;
    h - nf.ln() - 0.5 / nf + 1.0 / (12.0 * n2) - 1.0 / (120.0 * n2 * n2)
        + 1.0 / (252.0 * n2 * n2 * n2)
        - 1.0 / (240.0 * n2 * n2 * n2 * n2)
}

/// Γ'(1) = −γ; the correction-factor constant in the heat-trace
/// determinant relation.
pub fn gamma_prime_one() -> f64 {
    -euler_gamma()
}

/// Exponential integral E₁(x) for x > 0. Power series below 1, modified
/// Lentz continued fraction above.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires x > 0");
    if x <= 1.0 {
        // E1(x) = -γ - ln x + Σ_{k≥1} (-1)^{k+1} x^k / (k k!)
        let mut sum = 0.0f64;
        let mut term = 1.0f64; // x^k / k!
        for k in 1..=40 {
            term *= x / k as f64;
            let contrib = term / k as f64;
            if k % 2 == 1 {
                sum += contrib;
            } else {
                sum -= contrib;
            }
            if contrib.abs() < 1e-18 * sum.abs().max(1.0) {
                break;
            }
        }
        -euler_gamma() - x.ln() + sum
    } else {
        // E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(...))))
        let tiny = 1e-290;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for k in 1..=200 {
            let a = -(k as f64) * (k as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// log Γ(x) for real x > 0 via the Lanczos approximation (g = 7, n = 9).
pub fn log_gamma_real(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    assert!(x > 0.0, "log_gamma_real requires x > 0");
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - log_gamma_real(1.0 - x);
    }
    let xx = x - 1.0;
    let mut a = COEF[0];
    let t = xx + G + 0.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (xx + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (xx + 0.5) * t.ln() - t + a.ln()
}
