//! Real spherical harmonics: stable normalized associated-Legendre
//! recurrences, pointwise synthesis, and analytic tangent gradients.
//!
//! Conventions: fully normalized so that every basis function has unit L^2
//! norm over the sphere, positive sectoral seed (no Condon-Shortley sign at
//! the real-basis level). Flat index of (l, m) is l^2 + l + m with
//! m in [-l, l].

use nalgebra::Vector3;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::SpherePoint;

/// Index bookkeeping for real harmonics up to a degree cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmonicBasis {
    pub l_max: usize,
}

impl HarmonicBasis {
    pub fn new(l_max: usize) -> Self {
        HarmonicBasis { l_max }
    }

    pub fn dim(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    pub fn index(&self, l: usize, m: i64) -> Result<usize> {
        if l > self.l_max || m.unsigned_abs() as usize > l {
            return Err(Error::invalid(format!(
                "harmonic index (l={l}, m={m}) out of range for l_max={}",
                self.l_max
            )));
        }
        Ok(l * l + (l as i64 + m) as usize)
    }

    /// Degree and order of a flat index.
    pub fn lm(&self, idx: usize) -> (usize, i64) {
        let l = (idx as f64).sqrt() as usize;
        let l = if (l + 1) * (l + 1) <= idx { l + 1 } else { l };
        (l, idx as i64 - (l * l + l) as i64)
    }

    /// Degree of a flat index.
    pub fn degree(&self, idx: usize) -> usize {
        self.lm(idx).0
    }
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Table of fully normalized Legendre functions Q_{l,m}(cos theta) for
/// 0 <= m <= l <= l_max, positive convention, normalized so that the
/// complex harmonics Q_{l,m} e^{i m phi} have unit L^2 norm.
fn legendre_table(l_max: usize, cos_t: f64, sin_t: f64) -> Vec<f64> {
    let mut q = vec![0.0; tri(l_max, l_max) + 1];
    q[tri(0, 0)] = (1.0 / (4.0 * PI)).sqrt();
    // sectoral seeds
    for m in 1..=l_max {
        q[tri(m, m)] =
            ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t * q[tri(m - 1, m - 1)];
    }
    for m in 0..l_max {
        q[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * cos_t * q[tri(m, m)];
    }
    for m in 0..=l_max {
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let alpha = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let beta = (((lf - 1.0) * (lf - 1.0) - mf * mf)
                / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            q[tri(l, m)] = alpha * (cos_t * q[tri(l - 1, m)] - beta * q[tri(l - 2, m)]);
        }
    }
    q
}

fn angles(p: &SpherePoint) -> (f64, f64, f64, f64) {
    let v = p.vec();
    let cos_t = v.z.clamp(-1.0, 1.0);
    let sin_t = (v.x * v.x + v.y * v.y).sqrt();
    let phi = v.y.atan2(v.x);
    (cos_t, sin_t, phi.cos(), phi.sin())
}

/// Values of all real harmonics up to l_max at a point, flat-indexed.
pub fn eval_basis(l_max: usize, p: &SpherePoint) -> Vec<f64> {
    let (cos_t, sin_t, cos_p, sin_p) = angles(p);
    let q = legendre_table(l_max, cos_t, sin_t);
    let basis = HarmonicBasis::new(l_max);
    let mut out = vec![0.0; basis.dim()];
    let sqrt2 = std::f64::consts::SQRT_2;
    // iterate azimuthal order, updating cos(m phi), sin(m phi) recursively
    let mut cm = 1.0;
    let mut sm = 0.0;
    for m in 0..=l_max {
        if m > 0 {
            let c = cm * cos_p - sm * sin_p;
            let s = sm * cos_p + cm * sin_p;
            cm = c;
            sm = s;
        }
        for l in m..=l_max {
            let ql = q[tri(l, m)];
            if m == 0 {
                out[l * l + l] = ql;
            } else {
                out[l * l + l + m] = sqrt2 * ql * cm;
                out[l * l + l - m] = sqrt2 * ql * sm;
            }
        }
    }
    out
}

/// Single real harmonic value.
pub fn harmonic_eval(l: usize, m: i64, p: &SpherePoint) -> Result<f64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::invalid(format!("order |{m}| exceeds degree {l}")));
    }
    let vals = eval_basis(l, p);
    Ok(vals[l * l + (l as i64 + m) as usize])
}

/// Pointwise synthesis of a coefficient vector.
pub fn synthesize(coeffs: &[f64], l_max: usize, p: &SpherePoint) -> f64 {
    debug_assert_eq!(coeffs.len(), (l_max + 1) * (l_max + 1));
    let basis = eval_basis(l_max, p);
    coeffs.iter().zip(&basis).map(|(c, b)| c * b).sum()
}

/// Synthesis at many points.
pub fn synthesize_many(coeffs: &[f64], l_max: usize, points: &[SpherePoint]) -> Vec<f64> {
    points
        .iter()
        .map(|p| synthesize(coeffs, l_max, p))
        .collect()
}

/// Analytic tangent gradient of a harmonic expansion at a point, returned as
/// an ambient 3-vector orthogonal to the point.
///
/// Uses the same-degree recurrence for d/dtheta and the degree-lowering
/// recurrence for m Q_{l,m} / sin(theta); both are regular at the poles.
pub fn tangent_gradient(coeffs: &[f64], l_max: usize, p: &SpherePoint) -> Vector3<f64> {
    debug_assert_eq!(coeffs.len(), (l_max + 1) * (l_max + 1));
    let (cos_t, sin_t, cos_p, sin_p) = angles(p);
    let q = legendre_table(l_max, cos_t, sin_t);
    let sqrt2 = std::f64::consts::SQRT_2;

    let qv = |l: usize, m: usize| -> f64 {
        if m > l {
            0.0
        } else {
            q[tri(l, m)]
        }
    };
    // d/dtheta of Q_{l,m}
    let dq = |l: usize, m: usize| -> f64 {
        let lf = l as f64;
        let mf = m as f64;
        if m == 0 {
            -(lf * (lf + 1.0)).sqrt() * qv(l, 1)
        } else {
            0.5 * (((lf + mf) * (lf - mf + 1.0)).sqrt() * qv(l, m - 1)
                - ((lf - mf) * (lf + mf + 1.0)).sqrt() * qv(l, m + 1))
        }
    };
    // m Q_{l,m} / sin(theta), m >= 1
    let qs = |l: usize, m: usize| -> f64 {
        let lf = l as f64;
        let mf = m as f64;
        if l == 0 {
            return 0.0;
        }
        0.5 * ((2.0 * lf + 1.0) / (2.0 * lf - 1.0)).sqrt()
            * (((lf - mf) * (lf - mf - 1.0)).max(0.0).sqrt() * qv(l - 1, m + 1)
                + ((lf + mf) * (lf + mf - 1.0)).sqrt()
                    * if m >= 1 { qv(l - 1, m - 1) } else { 0.0 })
    };

    let mut f_theta = 0.0;
    let mut f_phi_over_sin = 0.0;
    let mut cm = 1.0;
    let mut sm = 0.0;
    for m in 0..=l_max {
        if m > 0 {
            let c = cm * cos_p - sm * sin_p;
            let s = sm * cos_p + cm * sin_p;
            cm = c;
            sm = s;
        }
        for l in m.max(1)..=l_max {
            let base = l * l + l;
            if m == 0 {
                f_theta += coeffs[base] * dq(l, 0);
            } else {
                let cp = coeffs[base + m];
                let cn = coeffs[base - m];
                let d = dq(l, m);
                f_theta += sqrt2 * d * (cp * cm + cn * sm);
                let r = qs(l, m);
                f_phi_over_sin += sqrt2 * r * (-cp * sm + cn * cm);
            }
        }
    }

    // local orthonormal frame; at the exact poles this is the phi = const
    // limit frame, along which both series stay regular
    let e_theta = Vector3::new(cos_t * cos_p, cos_t * sin_p, -sin_t);
    let e_phi = Vector3::new(-sin_p, cos_p, 0.0);
    e_theta * f_theta + e_phi * f_phi_over_sin
}

/// Legendre polynomial at the origin; exactly zero for odd degrees.
pub fn legendre_p0(l: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    let mut v = 1.0;
    let mut k = 2;
    while k <= l {
        v *= -((k - 1) as f64) / k as f64;
        k += 2;
    }
    v
}
