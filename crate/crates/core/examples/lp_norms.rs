//! Exponent arithmetic for localized L^p bounds, plus a concrete norm
//! measurement: global and window-local L^p norms of an eigenfunction,
//! compared with the (ln(2+lambda))^eps (1+lambda)^{sigma0-delta} envelope.

use radonlab::geom::{CapSpec, SpherePoint};
use radonlab::norms::{exponents, lp_norm_global, lp_norm_local, theorem_bound};
use radonlab::potential::PotentialSpec;
use radonlab::spectral::{assemble_hamiltonian, eigensolve};

fn main() {
    println!("{:>6} {:>9} {:>9} {:>9}", "p", "sigma0", "delta", "eps");
    for p in [2.0, 4.0, 6.0, 8.0, f64::INFINITY] {
        let e = exponents(p).expect("valid exponent");
        println!("{:>6} {:>9.5} {:>9.5} {:>9.5}", p, e.sigma0, e.delta, e.eps);
    }

    let v = PotentialSpec::preset("quadratic").expect("preset exists");
    let l_max = 12;
    let h = assemble_hamiltonian(&v, l_max).expect("assembles");
    let pairs = eigensolve(&h).expect("solves");
    // a mid-spectrum eigenfunction, away from the truncation edge
    let pair = &pairs[60];
    let x0 = SpherePoint::new(1.0, 1.0, 1.0).unwrap();
    let window = CapSpec::new(x0, 0.4).unwrap();

    println!("\neigenfunction with lambda = {:.4}:", pair.lambda);
    println!(
        "{:>6} {:>12} {:>12} {:>12}",
        "p", "local L^p", "global L^p", "envelope"
    );
    for p in [2.0, 4.0, 6.0, f64::INFINITY] {
        let local = lp_norm_local(&pair.coeffs, l_max, p, &window).expect("local norm");
        let global = lp_norm_global(&pair.coeffs, l_max, p).expect("global norm");
        let bound = theorem_bound(p, pair.lambda, 1.0).expect("bound");
        println!("{:>6} {:>12.6} {:>12.6} {:>12.6}", p, local, global, bound);
    }
}
