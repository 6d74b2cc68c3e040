//! Quadrature grids over the sphere: Gauss-Legendre product rules for the
//! full sphere and for geodesic caps, plus a Fibonacci lattice for cheap
//! suprema scans.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{rotation_z_to, CapSpec, SpherePoint};

/// Nodes and positive steradian weights over some region of the sphere.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<SpherePoint>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(&SpherePoint) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and derivative via the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n, p0 = P_{n-1}
            pp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // enforce exact symmetry for the central node
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Product rule exact for all spherical harmonics of degree <= 2L:
/// (L+1) Gauss-Legendre colatitude nodes times (2L+2) uniform azimuths.
pub fn gauss_sphere_rule(l: usize) -> QuadratureGrid {
    let n_theta = l + 1;
    let n_phi = 2 * l + 2;
    let (xs, ws) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (x, w) in xs.iter().zip(&ws) {
        let sin_t = (1.0 - x * x).sqrt();
        for k in 0..n_phi {
            let phi = k as f64 * dphi;
            nodes.push(
                SpherePoint::new(sin_t * phi.cos(), sin_t * phi.sin(), *x)
                    .expect("unit node"),
            );
            weights.push(w * dphi);
        }
    }
    QuadratureGrid { nodes, weights }
}

/// Gauss-Legendre (colatitude) x uniform (azimuth) rule over a geodesic cap,
/// rotated so the pole maps onto the cap center. Exact for polynomials in
/// the colatitude cosine up to degree 2*order - 1.
pub fn cap_quadrature(cap: &CapSpec, order: usize) -> Result<QuadratureGrid> {
    if order < 4 {
        return Err(Error::invalid("cap quadrature order must be >= 4"));
    }
    if cap.radius >= PI {
        return Err(Error::invalid("cap radius must be below pi"));
    }
    let (xs, ws) = gauss_legendre(order);
    let n_phi = 2 * order;
    let dphi = 2.0 * PI / n_phi as f64;
    let rot = rotation_z_to(&cap.center);
    let lo = cap.radius.cos();
    // map [-1,1] to [cos r, 1] in the colatitude cosine
    let half = (1.0 - lo) / 2.0;
    let mid = (1.0 + lo) / 2.0;
    let mut nodes = Vec::with_capacity(order * n_phi);
    let mut weights = Vec::with_capacity(order * n_phi);
    for (x, w) in xs.iter().zip(&ws) {
        let u = mid + half * x;
        let sin_t = (1.0 - u * u).max(0.0).sqrt();
        for k in 0..n_phi {
            let phi = k as f64 * dphi;
            let p = SpherePoint::new(sin_t * phi.cos(), sin_t * phi.sin(), u)
                .expect("unit node");
            nodes.push(p.rotate(&rot));
            weights.push(w * half * dphi);
        }
    }
    Ok(QuadratureGrid { nodes, weights })
}

/// Fibonacci lattice with equal weights 4pi/count. Quasi-uniform and
/// deterministic; meant for suprema scans, not accurate integration.
pub fn sphere_grid(count: usize) -> QuadratureGrid {
    assert!(count >= 12, "fibonacci grid needs at least 12 nodes");
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let w = 4.0 * PI / count as f64;
    let mut nodes = Vec::with_capacity(count);
    for k in 0..count {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
        let phi = 2.0 * PI * (k as f64 / golden).fract();
        let s = (1.0 - z * z).sqrt();
        nodes.push(SpherePoint::new(s * phi.cos(), s * phi.sin(), z).expect("unit node"));
    }
    QuadratureGrid {
        weights: vec![w; count],
        nodes,
    }
}

/// Fibonacci-style lattice confined to a cap, used for scans over balls.
pub fn cap_grid(cap: &CapSpec, count: usize) -> Vec<SpherePoint> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let rot = rotation_z_to(&cap.center);
    let lo = cap.radius.cos();
    let mut nodes = Vec::with_capacity(count);
    for k in 0..count {
        let z = 1.0 - (1.0 - lo) * (k as f64 + 0.5) / count as f64;
        let phi = 2.0 * PI * (k as f64 / golden).fract();
        let s = (1.0 - z * z).max(0.0).sqrt();
        let p = SpherePoint::new(s * phi.cos(), s * phi.sin(), z).expect("unit node");
        nodes.push(p.rotate(&rot));
    }
    nodes
}
