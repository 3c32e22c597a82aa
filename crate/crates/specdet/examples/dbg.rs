use specdet::bvp::builtins;
use specdet::oracle::{spectrum_scan, Rectangle};

fn main() {
    let b = builtins::dirichlet_laplacian(1.0);
    let p = b.problem("dirichlet").unwrap();
    let region = Rectangle::new(0.5, 10_000.0, -1.0, 1.0);
    let spec = spectrum_scan(&p, region, 64).unwrap();
    println!("found {} eigenvalues, {} evals", spec.eigenvalues.len(), spec.determinant_evaluations);
    for e in &spec.eigenvalues {
        println!("  {} (m={})", e.value, e.multiplicity);
    }
    let top: Vec<_> = spec.completeness_certificate.iter().take(8).collect();
    for c in top {
        println!("cell [{:.1},{:.1}]x[{:.2},{:.2}]: w={}", c.rect.re_min, c.rect.re_max, c.rect.im_min, c.rect.im_max, c.winding);
    }
}
