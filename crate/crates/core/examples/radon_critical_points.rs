//! Computes the Radon transform of the quadratic preset potential
//! V = x1^2 + 2 x2^2 + 3 x3^2 on geodesic space and locates its critical
//! points. For this potential the transform is 3 - (n1^2 + 2 n2^2 + 3 n3^2)/2,
//! so the six critical points sit on the coordinate axes.

use radonlab::potential::PotentialSpec;
use radonlab::quad::sphere_grid;
use radonlab::radon::{find_critical_points, RadonField};

fn main() {
    let v = PotentialSpec::preset("quadratic").expect("preset exists");
    let field = RadonField::from_potential(&v);

    println!("transform values on the axes:");
    for (name, p) in [
        ("+e1", radonlab::geom::SpherePoint::x_axis()),
        ("+e2", radonlab::geom::SpherePoint::y_axis()),
        ("+e3", radonlab::geom::SpherePoint::z_axis()),
    ] {
        println!("  R(V)({name}) = {:.6}", field.eval(&p));
    }

    let search = find_critical_points(&field, &sphere_grid(500));
    println!("\nfound {} critical points:", search.points.len());
    println!("{:>8} {:>8} {:>8} {:>9} {:>10}", "x", "y", "z", "value", "kind");
    for c in &search.points {
        let p = c.location.vec();
        println!(
            "{:8.4} {:8.4} {:8.4} {:9.5} {:>10?}",
            p.x, p.y, p.z, c.value, c.kind
        );
    }
    assert_eq!(search.points.len(), 6, "quadratic preset has 6 critical points");
}
