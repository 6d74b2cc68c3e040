//! Assembles -Laplacian + V in the real spherical-harmonic basis, solves
//! the spectrum, and shows how the eigenvalues organize into clusters of
//! size 2l+1 around the free values l(l+1).

use radonlab::potential::PotentialSpec;
use radonlab::spectral::{assemble_hamiltonian, cluster_table, eigensolve, l_trust};

fn main() {
    let v = PotentialSpec::preset("quadratic").expect("preset exists");
    let l_max = 16;
    let h = assemble_hamiltonian(&v, l_max).expect("assembles");
    let pairs = eigensolve(&h).expect("solves");
    println!("dimension {} spectrum solved", pairs.len());

    let table = cluster_table(&pairs, &v, l_max).expect("cluster table");
    let horizon = l_trust(l_max, v.effective_degree());
    println!("trust horizon: l <= {horizon}\n");
    println!(
        "{:>3} {:>5} {:>10} {:>10} {:>10}",
        "l", "size", "min shift", "max shift", "width"
    );
    for row in &table.rows {
        let lo = row.shifts.first().copied().unwrap_or(0.0);
        let hi = row.shifts.last().copied().unwrap_or(0.0);
        println!(
            "{:>3} {:>5} {:>10.5} {:>10.5} {:>10.5}{}",
            row.l,
            row.shifts.len(),
            lo,
            hi,
            hi - lo,
            if row.overlap { "  (overlaps neighbor)" } else { "" }
        );
    }
}
