//! Geometry of the round sphere and of its space of oriented great circles.
//!
//! An oriented great circle is identified with the unit normal of its
//! oriented plane, so the space of geodesics is itself a copy of the sphere.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point on the unit sphere, kept normalized by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint(Vector3<f64>);

impl SpherePoint {
    /// Builds a point from an arbitrary nonzero vector, renormalizing it.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::from_vec(Vector3::new(x, y, z))
    }

    pub fn from_vec(v: Vector3<f64>) -> Result<Self> {
        let n = v.norm();
        if n < 1e-14 {
            return Err(Error::invalid("zero vector cannot define a sphere point"));
        }
        Ok(SpherePoint(v / n))
    }

    pub fn x_axis() -> Self {
        SpherePoint(Vector3::x())
    }

    pub fn y_axis() -> Self {
        SpherePoint(Vector3::y())
    }

    pub fn z_axis() -> Self {
        SpherePoint(Vector3::z())
    }

    pub fn vec(&self) -> Vector3<f64> {
        self.0
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn antipode(&self) -> Self {
        SpherePoint(-self.0)
    }

    /// Colatitude measured from the +z axis, in [0, pi].
    pub fn colatitude(&self) -> f64 {
        self.0.z.clamp(-1.0, 1.0).acos()
    }

    /// Longitude in (-pi, pi].
    pub fn longitude(&self) -> f64 {
        self.0.y.atan2(self.0.x)
    }

    pub fn rotate(&self, rot: &Matrix3<f64>) -> Self {
        // renormalize to wash out roundoff from the matrix product
        SpherePoint((rot * self.0).normalize())
    }
}

/// Geodesic distance between two points, clamped against roundoff at
/// coincident or antipodal configurations.
pub fn geodesic_distance(a: &SpherePoint, b: &SpherePoint) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// An oriented great circle, represented by its unit normal together with a
/// deterministic right-handed frame (e1, e2, n). The arclength
/// parametrization is gamma(s) = cos(s) e1 + sin(s) e2.
#[derive(Debug, Clone, Copy)]
pub struct Geodesic {
    normal: SpherePoint,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
}

impl Geodesic {
    /// Deterministic frame: e1 = normalize(z x n) when that cross product is
    /// well conditioned, otherwise e1 = normalize(x_hat x n); e2 = n x e1.
    pub fn from_normal(n: &SpherePoint) -> Self {
        let nv = n.vec();
        let zc = Vector3::z().cross(&nv);
        let e1 = if zc.norm() > 1e-6 {
            zc.normalize()
        } else {
            Vector3::x().cross(&nv).normalize()
        };
        let e2 = nv.cross(&e1);
        Geodesic {
            normal: *n,
            e1,
            e2,
        }
    }

    pub fn from_vec(v: Vector3<f64>) -> Result<Self> {
        Ok(Self::from_normal(&SpherePoint::from_vec(v)?))
    }

    pub fn normal(&self) -> &SpherePoint {
        &self.normal
    }

    pub fn frame(&self) -> (Vector3<f64>, Vector3<f64>) {
        (self.e1, self.e2)
    }

    /// Point at arclength s along the circle.
    pub fn at(&self, s: f64) -> SpherePoint {
        SpherePoint((self.e1 * s.cos() + self.e2 * s.sin()).normalize())
    }
}

/// A closed geodesic ball: center and angular radius in (0, pi).
#[derive(Debug, Clone, Copy)]
pub struct CapSpec {
    pub center: SpherePoint,
    pub radius: f64,
}

impl CapSpec {
    pub fn new(center: SpherePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("cap radius must be strictly positive"));
        }
        if radius >= std::f64::consts::PI {
            return Err(Error::invalid("cap radius must be below pi"));
        }
        Ok(CapSpec { center, radius })
    }

    pub fn area(&self) -> f64 {
        2.0 * std::f64::consts::PI * (1.0 - self.radius.cos())
    }

    pub fn contains(&self, p: &SpherePoint) -> bool {
        geodesic_distance(&self.center, p) <= self.radius
    }
}

/// Rotation taking the +z axis onto `target` (Rodrigues construction).
pub fn rotation_z_to(target: &SpherePoint) -> Matrix3<f64> {
    let t = target.vec();
    let z = Vector3::z();
    let c = z.dot(&t);
    if c > 1.0 - 1e-14 {
        return Matrix3::identity();
    }
    if c < -1.0 + 1e-14 {
        // half-turn about the x axis
        return Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
    }
    let axis = z.cross(&t);
    let s = axis.norm();
    let k = axis / s;
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Matrix3::identity() + kx * s + kx * kx * (1.0 - c)
}

/// Rotation by `angle` about the given unit axis.
pub fn rotation_about(axis: &SpherePoint, angle: f64) -> Matrix3<f64> {
    let k = axis.vec();
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

/// Uniformly distributed random rotation from three Euler-style draws.
pub fn random_rotation(rng: &mut impl rand::Rng) -> Matrix3<f64> {
    use std::f64::consts::PI;
    let a = rng.gen_range(0.0..2.0 * PI);
    let z: f64 = rng.gen_range(-1.0..1.0);
    let b = rng.gen_range(0.0..2.0 * PI);
    let axis = SpherePoint::new(
        (1.0 - z * z).sqrt() * a.cos(),
        (1.0 - z * z).sqrt() * a.sin(),
        z,
    )
    .expect("nonzero axis");
    rotation_about(&axis, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn equator_from_z_normal() {
        let g = Geodesic::from_normal(&SpherePoint::z_axis());
        for k in 0..16 {
            let s = k as f64 * 0.4;
            let p = g.at(s);
            assert!(p.vec().z.abs() < 1e-12);
            assert!((p.vec().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn opposite_normals_trace_same_circle() {
        let n = SpherePoint::new(0.3, -0.5, 0.8).unwrap();
        let g = Geodesic::from_normal(&n);
        let gm = Geodesic::from_normal(&n.antipode());
        // same point set: every point of g lies on the plane of gm
        for k in 0..32 {
            let p = g.at(k as f64 * 0.2);
            assert!(p.dot(gm.normal()).abs() < 1e-12);
        }
        // opposite orientation: tangents at a shared point are opposite
        let p0 = g.at(0.0);
        // find arclength of p0 on gm
        let (f1, f2) = gm.frame();
        let s = p0.vec().dot(&f2).atan2(p0.vec().dot(&f1));
        let tangent_g = g.at(1e-6).vec() - g.at(-1e-6).vec();
        let tangent_gm = gm.at(s + 1e-6).vec() - gm.at(s - 1e-6).vec();
        assert!(tangent_g.dot(&tangent_gm) < 0.0);
    }

    #[test]
    fn oblique_normal_stays_on_circle() {
        let n = SpherePoint::new(1.0, 1.0, 1.0).unwrap();
        let g = Geodesic::from_normal(&n);
        for k in 0..100 {
            let s = k as f64 * (2.0 * std::f64::consts::PI / 100.0);
            let p = g.at(s);
            assert!((p.vec().norm() - 1.0).abs() < 1e-12);
            assert!(p.dot(&n).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_is_right_handed_orthonormal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = SpherePoint::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .unwrap();
            let g = Geodesic::from_normal(&n);
            let (e1, e2) = g.frame();
            assert!(e1.dot(&e2).abs() < 1e-12);
            assert!(e1.dot(&n.vec()).abs() < 1e-12);
            assert!(e2.dot(&n.vec()).abs() < 1e-12);
            assert!((e1.cross(&e2) - n.vec()).norm() < 1e-12);
        }
    }

    #[test]
    fn distances() {
        let e1 = SpherePoint::x_axis();
        let e2 = SpherePoint::y_axis();
        let e3 = SpherePoint::z_axis();
        assert_eq!(geodesic_distance(&e3, &e3), 0.0);
        assert!((geodesic_distance(&e3, &e3.antipode()) - std::f64::consts::PI).abs() < 1e-15);
        assert!((geodesic_distance(&e1, &e2) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn distance_rotation_invariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let a = SpherePoint::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .unwrap();
            let b = SpherePoint::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .unwrap();
            let r = random_rotation(&mut rng);
            let d0 = geodesic_distance(&a, &b);
            let d1 = geodesic_distance(&a.rotate(&r), &b.rotate(&r));
            assert!((d0 - d1).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_normal_rejected() {
        assert!(SpherePoint::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn frame_roundtrip_identity() {
        let n = SpherePoint::new(-0.2, 0.9, 0.4).unwrap();
        let g = Geodesic::from_normal(&n);
        let g2 = Geodesic::from_normal(g.normal());
        assert_eq!(g.frame().0, g2.frame().0);
        assert_eq!(g.frame().1, g2.frame().1);
    }
}
