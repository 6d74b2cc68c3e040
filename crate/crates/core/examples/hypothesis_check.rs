//! Checks the two geometric hypotheses behind the localized-norm
//! improvement at two base points:
//!   h1 - no critical point of the transform lies on the circle of
//!        geodesics through x0;
//!   h2 - the restriction of the transform to that circle is Morse.
//! The diagonal point passes both; x0 = e1 fails h1 because the critical
//! points on the axes meet its geodesic circle.

use radonlab::geom::SpherePoint;
use radonlab::potential::PotentialSpec;
use radonlab::radon::check_hypotheses;

fn main() {
    let v = PotentialSpec::preset("quadratic").expect("preset exists");

    for (name, x0) in [
        ("diag = (1,1,1)/sqrt(3)", SpherePoint::new(1.0, 1.0, 1.0).unwrap()),
        ("e1", SpherePoint::x_axis()),
    ] {
        let report = check_hypotheses(&v, &x0);
        println!("x0 = {name}");
        println!("  critical margin : {:.6}", report.crit_margin);
        println!("  tangencies      : {}", report.tangencies.len());
        println!("  h1 (no critical point on the circle) : {}", report.h1_pass);
        println!("  h2 (Morse restriction)                : {}", report.h2_pass);
        if let Some(reason) = &report.reason {
            println!("  reason          : {reason}");
        }
        println!();
    }
}
