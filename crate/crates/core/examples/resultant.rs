//! Resultant magnitudes for a few hand-picked polynomial pairs.
//!
//! Run with `cargo run --example resultant`.

use geomatch::polynomials::{
    normalized_resultant, sylvester, Polynomial, ResultantBackend, ZERO_RESULTANT_TOL,
};

fn main() {
    // coefficients, highest degree first
    let pairs: [(&str, Vec<f64>, Vec<f64>); 4] = [
        ("(x-1)(x-2) vs (x-1)(x+1)", vec![1.0, -3.0, 2.0], vec![1.0, 0.0, -1.0]),
        ("x^2+1 vs itself", vec![1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]),
        ("x^2+1 vs x^2-1", vec![1.0, 0.0, 1.0], vec![1.0, 0.0, -1.0]),
        ("(x-0.5)^2 (x+1)(x-3) vs (x-0.5)(x-2)(x+2)(x-4)", vec![1.0, -3.0, -0.75, 2.5, -0.75], vec![1.0, -4.5, -2.0, 18.0, -8.0]),
    ];
    for (label, p, q) in pairs {
        let p = Polynomial::new(p).unwrap();
        let q = Polynomial::new(q).unwrap();
        let qr = normalized_resultant(&p, &q, ResultantBackend::Qr).unwrap();
        let svd = normalized_resultant(&p, &q, ResultantBackend::Svd).unwrap();
        let verdict = if qr <= ZERO_RESULTANT_TOL { "common root" } else { "coprime" };
        println!("{label}");
        println!("  qr {qr:.3e}  svd {svd:.3e}  -> {verdict}");
    }

    let p = Polynomial::new(vec![1.0, -3.0, 2.0]).unwrap();
    let q = Polynomial::new(vec![1.0, 0.0, -1.0]).unwrap();
    let m = sylvester(&p, &q).unwrap();
    println!("\nSylvester matrix of the first pair:");
    for r in 0..m.dim() {
        let row: Vec<String> = (0..m.dim()).map(|c| format!("{:5.1}", m.get(r, c))).collect();
        println!("  [{}]", row.join(" "));
    }
}
