//! The great-circle Radon transform of a potential, viewed as a function on
//! the space of oriented geodesics (itself a sphere of plane normals), its
//! critical points, and the geometric hypothesis checker.

use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::geom::{Geodesic, SpherePoint};
use crate::harmonics::{legendre_p0, synthesize, tangent_gradient, HarmonicBasis};
use crate::potential::PotentialSpec;
use crate::quad::QuadratureGrid;

/// Gradient norm below which a point counts as critical.
pub const GRAD_TOL: f64 = 1e-8;
/// |g''| above which a zero of g' counts as nondegenerate.
pub const MORSE_TOL: f64 = 1e-6;
/// Angular margin (radians) required between critical points and the circle
/// of geodesics through the base point.
pub const CRIT_TOL: f64 = 1e-3;
/// Hessian eigenvalues below this magnitude are reported as degenerate.
pub const HESS_TOL: f64 = 1e-6;

/// Average of the potential over a great circle, by the trapezoid rule on a
/// uniform arclength grid (spectrally accurate for smooth periodic
/// integrands).
pub fn radon_quadrature(v: &PotentialSpec, geodesic: &Geodesic, n_s: usize) -> f64 {
    assert!(n_s >= 16, "radon quadrature needs at least 16 samples");
    let mut acc = 0.0;
    for k in 0..n_s {
        let s = 2.0 * PI * k as f64 / n_s as f64;
        acc += v.eval(&geodesic.at(s));
    }
    acc / n_s as f64
}

/// The Radon transform as a harmonic expansion in the normal variable:
/// degree-l coefficients scaled by the Legendre value at the origin, which
/// annihilates all odd degrees.
#[derive(Debug, Clone)]
pub struct RadonField {
    pub coeffs: Vec<f64>,
    pub l_max: usize,
}

impl RadonField {
    pub fn from_potential(v: &PotentialSpec) -> Self {
        let basis = v.basis();
        let coeffs = v
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * legendre_p0(basis.degree(i)))
            .collect();
        RadonField {
            coeffs,
            l_max: v.l_max,
        }
    }

    /// A constant field (used by controls).
    pub fn constant(c: f64) -> Self {
        RadonField {
            coeffs: vec![c * (4.0 * PI).sqrt()],
            l_max: 0,
        }
    }

    pub fn basis(&self) -> HarmonicBasis {
        HarmonicBasis::new(self.l_max)
    }

    pub fn eval(&self, n: &SpherePoint) -> f64 {
        synthesize(&self.coeffs, self.l_max, n)
    }

    /// Ambient tangent gradient at a normal point.
    pub fn gradient(&self, n: &SpherePoint) -> Vector3<f64> {
        tangent_gradient(&self.coeffs, self.l_max, n)
    }

    /// Gradient expressed in the deterministic frame of the point.
    pub fn gradient_in_frame(&self, n: &SpherePoint) -> Vector2<f64> {
        let g = self.gradient(n);
        let (e1, e2) = Geodesic::from_normal(n).frame();
        Vector2::new(g.dot(&e1), g.dot(&e2))
    }

    /// Crude sup bound of the field's oscillation from its coefficients.
    pub fn oscillation_bound(&self) -> f64 {
        let basis = self.basis();
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| {
                let l = basis.degree(i);
                2.0 * c.abs() * ((2 * l + 1) as f64 / (4.0 * PI)).sqrt()
            })
            .sum()
    }
}

/// Classification of a nondegenerate (or not) critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Min,
    Max,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub location: SpherePoint,
    pub value: f64,
    pub hessian_eigs: [f64; 2],
    pub kind: CriticalKind,
}

/// Outcome of the seeded Newton search. `degenerate_field` is raised when
/// the gradient is below tolerance at every seed (constant fields), in which
/// case no points are fabricated.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalSearch {
    pub points: Vec<CriticalPoint>,
    pub degenerate_field: bool,
}

fn frame_of(n: &SpherePoint) -> (Vector3<f64>, Vector3<f64>) {
    Geodesic::from_normal(n).frame()
}

/// Gradient components along a fixed frame, evaluated at a displaced point.
fn gradient_components(
    field: &RadonField,
    n: &SpherePoint,
    e1: &Vector3<f64>,
    e2: &Vector3<f64>,
) -> Vector2<f64> {
    let g = field.gradient(n);
    Vector2::new(g.dot(e1), g.dot(e2))
}

/// 2x2 Jacobian of the frame gradient by central differences of the
/// analytic gradient; symmetrized, this is the tangent Hessian at critical
/// points (the curvature correction is proportional to the vanishing
/// gradient there).
fn tangent_hessian(field: &RadonField, n: &SpherePoint) -> [[f64; 2]; 2] {
    let (e1, e2) = frame_of(n);
    let h = 1e-5;
    let mut j = [[0.0; 2]; 2];
    for (col, dir) in [e1, e2].iter().enumerate() {
        let plus = SpherePoint::from_vec(n.vec() + dir * h).unwrap();
        let minus = SpherePoint::from_vec(n.vec() - dir * h).unwrap();
        let gp = gradient_components(field, &plus, &e1, &e2);
        let gm = gradient_components(field, &minus, &e1, &e2);
        j[0][col] = (gp.x - gm.x) / (2.0 * h);
        j[1][col] = (gp.y - gm.y) / (2.0 * h);
    }
    // symmetrize
    let off = 0.5 * (j[0][1] + j[1][0]);
    [[j[0][0], off], [off, j[1][1]]]
}

fn symmetric_2x2_eigs(h: &[[f64; 2]; 2]) -> [f64; 2] {
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    [tr / 2.0 - disc, tr / 2.0 + disc]
}

fn newton_from_seed(field: &RadonField, seed: &SpherePoint) -> Option<SpherePoint> {
    let mut n = *seed;
    for _ in 0..50 {
        let (e1, e2) = frame_of(&n);
        let g = gradient_components(field, &n, &e1, &e2);
        if g.norm() <= GRAD_TOL {
            return Some(n);
        }
        let j = tangent_hessian(field, &n);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let du = (-g.x * j[1][1] + g.y * j[0][1]) / det;
        let dv = (-g.y * j[0][0] + g.x * j[1][0]) / det;
        let mut step = Vector2::new(du, dv);
        // trust-region style clamp keeps Newton on the sphere's scale
        if step.norm() > 0.5 {
            step *= 0.5 / step.norm();
        }
        n = SpherePoint::from_vec(n.vec() + e1 * step.x + e2 * step.y).unwrap();
    }
    let g = field.gradient(&n);
    if g.norm() <= GRAD_TOL {
        Some(n)
    } else {
        None
    }
}

/// Newton search for critical points from every seed node, deduplicated and
/// classified by the tangent Hessian. Output order is deterministic.
pub fn find_critical_points(field: &RadonField, seeds: &QuadratureGrid) -> CriticalSearch {
    assert!(seeds.nodes.len() >= 200, "need at least 200 seed nodes");
    let max_grad = seeds
        .nodes
        .iter()
        .map(|n| field.gradient(n).norm())
        .fold(0.0, f64::max);
    if max_grad <= GRAD_TOL {
        return CriticalSearch {
            points: Vec::new(),
            degenerate_field: true,
        };
    }
    let mut found: Vec<SpherePoint> = seeds
        .nodes
        .par_iter()
        .filter_map(|s| newton_from_seed(field, s))
        .collect();
    // deterministic post-merge: sort, then sweep-deduplicate
    found.sort_by(|a, b| {
        let (va, vb) = (a.vec(), b.vec());
        (va.x, va.y, va.z)
            .partial_cmp(&(vb.x, vb.y, vb.z))
            .unwrap()
    });
    let mut unique: Vec<SpherePoint> = Vec::new();
    for p in found {
        if !unique
            .iter()
            .any(|q| crate::geom::geodesic_distance(q, &p) < 1e-4)
        {
            unique.push(p);
        }
    }
    let points = unique
        .into_iter()
        .map(|location| {
            let h = tangent_hessian(field, &location);
            let eigs = symmetric_2x2_eigs(&h);
            let kind = if eigs[0].abs() <= HESS_TOL || eigs[1].abs() <= HESS_TOL {
                CriticalKind::Degenerate
            } else if eigs[0] > 0.0 {
                CriticalKind::Min
            } else if eigs[1] < 0.0 {
                CriticalKind::Max
            } else {
                CriticalKind::Saddle
            };
            CriticalPoint {
                location,
                value: field.eval(&location),
                hessian_eigs: eigs,
                kind,
            }
        })
        .collect();
    CriticalSearch {
        points,
        degenerate_field: false,
    }
}

/// The Radon field restricted to the circle of geodesics through a base
/// point, as a trigonometric polynomial: samples plus analytic first and
/// second derivatives via exact Fourier coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct RestrictionProfile {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// cosine/sine coefficients (a_k, b_k) for k = 0..=degree
    pub cos_coeffs: Vec<f64>,
    pub sin_coeffs: Vec<f64>,
}

impl RestrictionProfile {
    pub fn eval(&self, theta: f64) -> f64 {
        self.series(theta, 0)
    }

    pub fn eval_d1(&self, theta: f64) -> f64 {
        self.series(theta, 1)
    }

    pub fn eval_d2(&self, theta: f64) -> f64 {
        self.series(theta, 2)
    }

    fn series(&self, theta: f64, order: usize) -> f64 {
        let mut acc = if order == 0 { self.cos_coeffs[0] } else { 0.0 };
        for k in 1..self.cos_coeffs.len() {
            let kf = k as f64;
            let (c, s) = ((kf * theta).cos(), (kf * theta).sin());
            let (a, b) = (self.cos_coeffs[k], self.sin_coeffs[k]);
            acc += match order {
                0 => a * c + b * s,
                1 => kf * (-a * s + b * c),
                _ => kf * kf * (-a * c - b * s),
            };
        }
        acc
    }
}

/// Samples g(theta) = F(n(theta)) on the circle n . x0 = 0, with n(theta)
/// built from the deterministic frame of the base point.
pub fn restriction_profile(
    field: &RadonField,
    x0: &SpherePoint,
    n_theta: usize,
) -> RestrictionProfile {
    assert!(n_theta >= 64, "restriction profile needs at least 64 samples");
    let (u1, u2) = Geodesic::from_normal(x0).frame();
    let circle = |theta: f64| {
        SpherePoint::from_vec(u1 * theta.cos() + u2 * theta.sin()).unwrap()
    };
    // exact Fourier analysis: g is a trig polynomial of degree <= l_max
    let deg = field.l_max;
    let m = (2 * deg + 4).max(n_theta);
    let samples_m: Vec<f64> = (0..m)
        .map(|k| field.eval(&circle(2.0 * PI * k as f64 / m as f64)))
        .collect();
    let mut cos_coeffs = vec![0.0; deg + 1];
    let mut sin_coeffs = vec![0.0; deg + 1];
    for k in 0..=deg {
        let mut a = 0.0;
        let mut b = 0.0;
        for (j, g) in samples_m.iter().enumerate() {
            let t = 2.0 * PI * (k * j) as f64 / m as f64;
            a += g * t.cos();
            b += g * t.sin();
        }
        let norm = if k == 0 { 1.0 / m as f64 } else { 2.0 / m as f64 };
        cos_coeffs[k] = a * norm;
        sin_coeffs[k] = b * norm;
    }
    let profile = RestrictionProfile {
        thetas: Vec::new(),
        values: Vec::new(),
        d1: Vec::new(),
        d2: Vec::new(),
        cos_coeffs,
        sin_coeffs,
    };
    let thetas: Vec<f64> = (0..n_theta)
        .map(|k| 2.0 * PI * k as f64 / n_theta as f64)
        .collect();
    let values = thetas.iter().map(|&t| profile.eval(t)).collect();
    let d1 = thetas.iter().map(|&t| profile.eval_d1(t)).collect();
    let d2 = thetas.iter().map(|&t| profile.eval_d2(t)).collect();
    RestrictionProfile {
        thetas,
        values,
        d1,
        d2,
        ..profile
    }
}

/// A tangency of the restriction: a zero of g' and the second derivative
/// there.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tangency {
    pub theta: f64,
    pub second_derivative: f64,
}

/// Quantitative verdict on the two geometric hypotheses at a base point.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub point: SpherePoint,
    pub crit_margin: f64,
    pub restriction: RestrictionProfile,
    pub tangencies: Vec<Tangency>,
    pub h1_pass: bool,
    pub h2_pass: bool,
    pub degenerate_field: bool,
    pub reason: Option<String>,
}

/// Zeros of g' on [0, 2pi), bracketed on a dense grid and refined by
/// bisection. Bisection is preferred over Newton here: a wrong root count
/// would silently corrupt the Morse verdict.
fn roots_of_derivative(profile: &RestrictionProfile, grid_size: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let vals: Vec<f64> = (0..grid_size)
        .map(|k| profile.eval_d1(2.0 * PI * k as f64 / grid_size as f64))
        .collect();
    for k in 0..grid_size {
        let a = 2.0 * PI * k as f64 / grid_size as f64;
        let b = 2.0 * PI * (k + 1) as f64 / grid_size as f64;
        let (fa, fb) = (vals[k], vals[(k + 1) % grid_size]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                let fm = profile.eval_d1(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    roots
}

/// Runs the critical-point search and the restriction profile, and renders
/// the verdict on both hypotheses.
pub fn check_hypotheses(v: &PotentialSpec, x0: &SpherePoint) -> HypothesisReport {
    let field = RadonField::from_potential(v);
    check_hypotheses_field(&field, x0)
}

pub fn check_hypotheses_field(field: &RadonField, x0: &SpherePoint) -> HypothesisReport {
    let seeds = crate::quad::sphere_grid(500);
    let search = find_critical_points(field, &seeds);
    let restriction = restriction_profile(field, x0, 1024);

    if search.degenerate_field {
        return HypothesisReport {
            point: *x0,
            crit_margin: 0.0,
            restriction,
            tangencies: Vec::new(),
            h1_pass: false,
            h2_pass: false,
            degenerate_field: true,
            reason: Some("gradient below tolerance everywhere (degenerate field)".into()),
        };
    }

    // distance from a normal q to the circle {n . x0 = 0} is |asin(q . x0)|
    let crit_margin = search
        .points
        .iter()
        .map(|p| p.location.dot(x0).clamp(-1.0, 1.0).asin().abs())
        .fold(f64::INFINITY, f64::min);
    let h1_pass = crit_margin > CRIT_TOL;

    let tangencies: Vec<Tangency> = roots_of_derivative(&restriction, 1024)
        .into_iter()
        .map(|theta| Tangency {
            theta,
            second_derivative: restriction.eval_d2(theta),
        })
        .collect();
    let h2_pass = !tangencies.is_empty()
        && tangencies
            .iter()
            .all(|t| t.second_derivative.abs() > MORSE_TOL);

    HypothesisReport {
        point: *x0,
        crit_margin,
        restriction,
        tangencies,
        h1_pass,
        h2_pass,
        degenerate_field: false,
        reason: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::sphere_grid;
    use rand::{Rng, SeedableRng};

    fn random_point(rng: &mut impl Rng) -> SpherePoint {
        SpherePoint::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
        .unwrap()
    }

    #[test]
    fn constant_potential_averages_to_itself() {
        let v = PotentialSpec::constant(1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let g = Geodesic::from_normal(&random_point(&mut rng));
            assert!((radon_quadrature(&v, &g, 32) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_potential_annihilated() {
        let v = PotentialSpec::preset("odd").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let g = Geodesic::from_normal(&random_point(&mut rng));
            assert!(radon_quadrature(&v, &g, 64).abs() < 1e-12);
        }
        let field = RadonField::from_potential(&v);
        for n in sphere_grid(1000).nodes {
            assert!(field.eval(&n).abs() < 1e-10);
        }
    }

    #[test]
    fn zonal_quadratic_closed_form() {
        let v = PotentialSpec::preset("zonal").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = random_point(&mut rng);
            let g = Geodesic::from_normal(&n);
            let expected = (1.0 - n.vec().z * n.vec().z) / 2.0;
            assert!((radon_quadrature(&v, &g, 64) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_scalings() {
        // degree-0 unchanged, degree-2 scaled by -1/2
        let v = PotentialSpec::from_harmonics(&[(0, 0, 2.0), (2, 1, 3.0)]).unwrap();
        let field = RadonField::from_potential(&v);
        let basis = v.basis();
        assert_eq!(field.coeffs[basis.index(0, 0).unwrap()], 2.0);
        assert!((field.coeffs[basis.index(2, 1).unwrap()] + 1.5).abs() < 1e-15);
    }

    #[test]
    fn multiplier_matches_quadrature() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let entries: Vec<(usize, i64, f64)> = (0..=8usize)
            .flat_map(|l| (-(l as i64)..=(l as i64)).map(move |m| (l, m)))
            .map(|(l, m)| (l, m, rng.gen_range(-1.0..1.0)))
            .collect();
        let v = PotentialSpec::from_harmonics(&entries).unwrap();
        let field = RadonField::from_potential(&v);
        for _ in 0..200 {
            let n = random_point(&mut rng);
            let g = Geodesic::from_normal(&n);
            let a = field.eval(&n);
            let b = radon_quadrature(&v, &g, 256);
            assert!((a - b).abs() < 1e-10, "a={a} b={b}");
        }
    }

    #[test]
    fn radon_is_linear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let v = PotentialSpec::preset("quadratic").unwrap();
        let w = PotentialSpec::preset("zonal").unwrap();
        let fv = RadonField::from_potential(&v);
        let fw = RadonField::from_potential(&w);
        let (a, b) = (1.7, -0.4);
        // combine at the harmonic level
        let l_max = v.l_max.max(w.l_max);
        let dim = (l_max + 1) * (l_max + 1);
        let mut combined = vec![0.0; dim];
        for (i, c) in v.coeffs.iter().enumerate() {
            combined[i] += a * c;
        }
        for (i, c) in w.coeffs.iter().enumerate() {
            combined[i] += b * c;
        }
        let vc = PotentialSpec {
            coeffs: combined,
            l_max,
            closed_form: None,
        };
        let fc = RadonField::from_potential(&vc);
        for _ in 0..50 {
            let n = random_point(&mut rng);
            assert!((fc.eval(&n) - (a * fv.eval(&n) + b * fw.eval(&n))).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_constant_field_vanishes() {
        let field = RadonField::from_potential(&PotentialSpec::constant(3.0));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            assert!(field.gradient(&random_point(&mut rng)).norm() < 1e-14);
        }
    }

    #[test]
    fn zonal_gradient_zeros() {
        let field = RadonField::from_potential(&PotentialSpec::preset("zonal").unwrap());
        // F(n) = (1 - n3^2)/2: gradient vanishes at the poles and the equator
        for p in [
            SpherePoint::z_axis(),
            SpherePoint::z_axis().antipode(),
            SpherePoint::x_axis(),
            SpherePoint::new(0.6, 0.8, 0.0).unwrap(),
        ] {
            assert!(field.gradient(&p).norm() < 1e-10, "at {:?}", p);
        }
        // and is nonzero in between
        assert!(field.gradient(&SpherePoint::new(1.0, 0.0, 1.0).unwrap()).norm() > 0.1);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let entries: Vec<(usize, i64, f64)> = (0..=6usize)
            .flat_map(|l| (-(l as i64)..=(l as i64)).map(move |m| (l, m)))
            .map(|(l, m)| (l, m, rng.gen_range(-1.0..1.0)))
            .collect();
        let v = PotentialSpec::from_harmonics(&entries).unwrap();
        let field = RadonField::from_potential(&v);
        let h = 1e-5;
        for _ in 0..100 {
            let n = random_point(&mut rng);
            let g = field.gradient(&n);
            let (e1, e2) = Geodesic::from_normal(&n).frame();
            for t in [e1, e2] {
                let fp = field.eval(&SpherePoint::from_vec(n.vec() + t * h).unwrap());
                let fm = field.eval(&SpherePoint::from_vec(n.vec() - t * h).unwrap());
                assert!((g.dot(&t) - (fp - fm) / (2.0 * h)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn quadratic_critical_points() {
        let field = RadonField::from_potential(&PotentialSpec::preset("quadratic").unwrap());
        let search = find_critical_points(&field, &sphere_grid(500));
        assert!(!search.degenerate_field);
        assert_eq!(search.points.len(), 6);
        let axes = [
            (SpherePoint::x_axis(), CriticalKind::Max, 2.5),
            (SpherePoint::y_axis(), CriticalKind::Saddle, 2.0),
            (SpherePoint::z_axis(), CriticalKind::Min, 1.5),
        ];
        for (axis, kind, value) in axes {
            for target in [axis, axis.antipode()] {
                let hit = search
                    .points
                    .iter()
                    .find(|p| crate::geom::geodesic_distance(&p.location, &target) < 1e-6)
                    .unwrap_or_else(|| panic!("missing critical point near {:?}", target));
                assert_eq!(hit.kind, kind);
                assert!((hit.value - value).abs() < 1e-8);
            }
        }
        // every reported point re-evaluates to a tiny gradient, and its
        // antipode is present too
        for p in &search.points {
            assert!(field.gradient(&p.location).norm() <= GRAD_TOL);
            assert!(search.points.iter().any(|q| {
                crate::geom::geodesic_distance(&q.location, &p.location.antipode()) < 1e-6
            }));
        }
    }

    #[test]
    fn constant_field_flagged_degenerate() {
        let field = RadonField::from_potential(&PotentialSpec::constant(2.0));
        let search = find_critical_points(&field, &sphere_grid(500));
        assert!(search.degenerate_field);
        assert!(search.points.is_empty());
    }

    #[test]
    fn restriction_profile_constant() {
        let field = RadonField::from_potential(&PotentialSpec::constant(1.0));
        let prof = restriction_profile(&field, &SpherePoint::z_axis(), 64);
        for (v, d) in prof.values.iter().zip(&prof.d1) {
            assert!((v - 1.0).abs() < 1e-12);
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_profile_even() {
        let field = RadonField::from_potential(&PotentialSpec::preset("quadratic").unwrap());
        let x0 = SpherePoint::new(1.0, 1.0, 1.0).unwrap();
        let prof = restriction_profile(&field, &x0, 256);
        for k in 0..128 {
            let t = prof.thetas[k];
            assert!((prof.eval(t + PI) - prof.eval(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn restriction_profile_quadratic_extrema() {
        // restriction of the explicit quadratic Radon field to the circle
        // n . x0 = 0; compare series argmax against dense sampling
        let field = RadonField::from_potential(&PotentialSpec::preset("quadratic").unwrap());
        let x0 = SpherePoint::new(1.0, 1.0, 1.0).unwrap();
        let prof = restriction_profile(&field, &x0, 4096);
        let (u1, u2) = Geodesic::from_normal(&x0).frame();
        let dense_argmax = (0..100_000)
            .map(|k| 2.0 * PI * k as f64 / 100_000.0)
            .max_by(|a, b| {
                let fa = field
                    .eval(&SpherePoint::from_vec(u1 * a.cos() + u2 * a.sin()).unwrap());
                let fb = field
                    .eval(&SpherePoint::from_vec(u1 * b.cos() + u2 * b.sin()).unwrap());
                fa.partial_cmp(&fb).unwrap()
            })
            .unwrap();
        let series_argmax = prof
            .thetas
            .iter()
            .copied()
            .max_by(|a, b| prof.eval(*a).partial_cmp(&prof.eval(*b)).unwrap())
            .unwrap();
        let diff = (dense_argmax - series_argmax).abs();
        let wrapped = diff.min((diff - PI).abs()).min((diff - 2.0 * PI).abs());
        assert!(wrapped < 2.0 * PI / 4096.0 * 2.0 + 1e-4, "diff={diff}");
    }

    #[test]
    fn hypotheses_quadratic_good_point() {
        let v = PotentialSpec::preset("quadratic").unwrap();
        let x0 = SpherePoint::new(1.0, 1.0, 1.0).unwrap();
        let report = check_hypotheses(&v, &x0);
        assert!(report.h1_pass);
        assert!(report.h2_pass);
        // each axis is arcsin(1/sqrt(3)) away from the circle n . x0 = 0
        let expected = (1.0f64 / 3.0f64.sqrt()).asin();
        assert!((report.crit_margin - expected).abs() < 1e-6);
    }

    #[test]
    fn hypotheses_quadratic_bad_point() {
        let v = PotentialSpec::preset("quadratic").unwrap();
        let report = check_hypotheses(&v, &SpherePoint::x_axis());
        assert!(!report.h1_pass); // +-e2, +-e3 lie on the circle
        assert!(report.crit_margin < 1e-6);
    }

    #[test]
    fn hypotheses_constant_fails_both() {
        let v = PotentialSpec::constant(4.0);
        let report = check_hypotheses(&v, &SpherePoint::x_axis());
        assert!(!report.h1_pass);
        assert!(!report.h2_pass);
        assert!(report.degenerate_field);
        assert!(report.reason.is_some());
    }

    #[test]
    fn morse_count_floor_on_random_potentials() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let seeds = sphere_grid(500);
        for _ in 0..20 {
            let entries: Vec<(usize, i64, f64)> = (0..=6usize)
                .flat_map(|l| (-(l as i64)..=(l as i64)).map(move |m| (l, m)))
                .map(|(l, m)| (l, m, rng.gen_range(-1.0..1.0)))
                .collect();
            let v = PotentialSpec::from_harmonics(&entries).unwrap();
            let field = RadonField::from_potential(&v);
            let search = find_critical_points(&field, &seeds);
            assert!(
                search.points.len() >= 6,
                "found only {} critical points",
                search.points.len()
            );
        }
    }
}
