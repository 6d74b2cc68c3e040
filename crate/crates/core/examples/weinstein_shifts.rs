//! Cluster shifts converge in distribution to values of the Radon
//! transform of the potential: the Kolmogorov-Smirnov distance between the
//! shifts in cluster l and samples of the transform shrinks as l grows.

use radonlab::potential::PotentialSpec;
use radonlab::quad::sphere_grid;
use radonlab::radon::RadonField;
use radonlab::spectral::{assemble_hamiltonian, cluster_shifts, eigensolve, ks_distance};

fn main() {
    let v = PotentialSpec::preset("quadratic").expect("preset exists");
    let field = RadonField::from_potential(&v);

    println!("{:>4} {:>12}", "l", "KS distance");
    for l in [10usize, 15, 20, 25] {
        let l_max = l + 4;
        let h = assemble_hamiltonian(&v, l_max).expect("assembles");
        let pairs = eigensolve(&h).expect("solves");
        let cs = cluster_shifts(&pairs, &v, l_max, l).expect("cluster");
        let samples: Vec<f64> = sphere_grid(2 * l + 1)
            .nodes
            .iter()
            .map(|n| field.eval(n))
            .collect();
        println!("{:>4} {:>12.5}", l, ks_distance(&cs.shifts, &samples));
    }
}
