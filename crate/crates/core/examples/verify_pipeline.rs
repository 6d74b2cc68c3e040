//! End-to-end verification: hypothesis check, cached spectrum, localized
//! mass functional per eigenvalue cluster, fitted trends, and the free
//! highest-weight control sequence that shows no improvement without a
//! potential.

use radonlab::geom::SpherePoint;
use radonlab::norms::{verify_report, VerifyOptions};
use radonlab::potential::PotentialSpec;

fn main() {
    let v = PotentialSpec::preset("quadratic").expect("preset exists");
    let x0 = SpherePoint::new(1.0, 1.0, 1.0).unwrap();
    let dir = std::env::temp_dir().join("radonlab-example-cache");
    let opts = VerifyOptions {
        cache_dir: dir,
        ..VerifyOptions::default()
    };

    // a modest frequency window keeps this example quick; the acceptance
    // sweep uses [10, 40]
    let report = verify_report(&v, &x0, (4.0, 12.0), &[2.0, 6.0], &opts)
        .expect("pipeline runs");

    println!("h1 = {}, h2 = {}", report.hypotheses.h1_pass, report.hypotheses.h2_pass);
    println!("improvement claimed: {}", report.improvement_claimed);
    println!("spectrum cache warm: {}", report.warm_cache);
    println!("empirical C0 = {:.5}", report.c0_empirical);
    println!("m-functional log-slope vs lambda = {:+.4}", report.m_slope);
    for s in &report.lp_slopes {
        println!(
            "p = {:>4}: fitted local-norm slope {:+.4} (envelope {:+.4})",
            s.p, s.fitted, s.envelope
        );
    }
    println!(
        "control (V = 0 highest-weight) slope = {:+.4} (growth expected)",
        report.control_slope
    );
}
