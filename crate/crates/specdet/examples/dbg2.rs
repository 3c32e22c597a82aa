use specdet::bvp::builtins;
use specdet::numerics::{c64, normalize_angle};
use num_complex::Complex64;

fn brute(p: &specdet::bvp::BoundaryProblem, a: Complex64, b: Complex64) -> f64 {
    let n = 40000;
    let mut total = 0.0;
    let mut prev = p.boundary_log_det(a).unwrap().phase;
    for k in 1..=n {
        let z = a + (b - a) * (k as f64 / n as f64);
        let ph = p.boundary_log_det(z).unwrap().phase;
        total += normalize_angle(ph - prev);
        prev = ph;
    }
    total
}

fn main() {
    let b = builtins::antiperiodic_laplacian(1.0);
    let p = b.problem("antiperiodic").unwrap();
    let corners = [c64(0.5, -1.0), c64(100.0, -1.0), c64(100.0, 1.0), c64(0.5, 1.0)];
    for e in 0..4 {
        let a = corners[e];
        let bb = corners[(e + 1) % 4];
        println!("edge {e}: brute {}", brute(&p, a, bb));
    }
}
