//! Hamiltonian flow of a Radon field on the space of great circles,
//! occupancy of cap-annuli along orbits, and empirical scaling exponents of
//! the flow-averaged occupancy in the cap radius.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{Geodesic, SpherePoint};
use crate::quad::QuadratureGrid;
use crate::radon::RadonField;

/// Relative energy-drift tolerance for the integrator, scaled by the
/// field's oscillation.
pub const ENERGY_TOL: f64 = 1e-6;

/// Area-form Hamiltonian vector field of the field on geodesic space,
/// ambient and pole-free: X(n) = grad F(n) x n. Orientation is fixed so
/// that the zonal field F(n) = n3 rotates e1 toward e2.
pub fn hamiltonian_field(field: &RadonField, n: &SpherePoint) -> Vector3<f64> {
    field.gradient(n).cross(&n.vec())
}

/// A flow orbit: times, unit normals, and the conserved field values.
#[derive(Debug, Clone, Serialize)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<SpherePoint>,
    pub field_values: Vec<f64>,
}

impl FlowTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest deviation of the conserved quantity from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let f0 = self.field_values[0];
        self.field_values
            .iter()
            .map(|f| (f - f0).abs())
            .fold(0.0, f64::max)
    }

    /// Point closest to a requested time.
    pub fn nearest(&self, tau: f64) -> &SpherePoint {
        let idx = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - tau).abs().partial_cmp(&(b.1 - tau).abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        &self.points[idx]
    }
}

fn rk4_step(field: &RadonField, n: &SpherePoint, h: f64) -> SpherePoint {
    let x = |v: Vector3<f64>| -> Vector3<f64> {
        let p = SpherePoint::from_vec(v).expect("flow point");
        hamiltonian_field(field, &p)
    };
    let v = n.vec();
    let k1 = x(v);
    let k2 = x(v + k1 * (h / 2.0));
    let k3 = x(v + k2 * (h / 2.0));
    let k4 = x(v + k3 * h);
    SpherePoint::from_vec(v + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)).expect("flow point")
}

fn march(field: &RadonField, n0: &SpherePoint, tau_end: f64, dt: f64) -> Vec<(f64, SpherePoint)> {
    // one leg from time 0 to tau_end; the step is shrunk to land exactly
    let steps = (tau_end.abs() / dt).ceil().max(1.0) as usize;
    let h = tau_end / steps as f64;
    let mut out = Vec::with_capacity(steps);
    let mut n = *n0;
    for k in 1..=steps {
        n = rk4_step(field, &n, h);
        out.push((k as f64 * h, n));
    }
    out
}

/// Fourth-order Runge-Kutta integration of the flow, with per-step
/// renormalization. The initial point sits at time zero; the span must
/// bracket it.
pub fn integrate_flow(
    field: &RadonField,
    n0: &SpherePoint,
    tau_span: (f64, f64),
    dt: f64,
) -> Result<FlowTrajectory> {
    let (tau_min, tau_max) = tau_span;
    if !(dt > 0.0 && dt <= 1e-2) {
        return Err(Error::invalid("flow step must lie in (0, 1e-2]"));
    }
    if !(tau_min <= 0.0 && tau_max >= 0.0) {
        return Err(Error::invalid("time span must contain 0"));
    }
    if tau_max - tau_min > 100.0 {
        return Err(Error::invalid("time span must not exceed 100"));
    }
    let mut samples: Vec<(f64, SpherePoint)> = Vec::new();
    if tau_min < 0.0 {
        let mut back = march(field, n0, tau_min, dt);
        back.reverse();
        samples.extend(back);
    }
    samples.push((0.0, *n0));
    if tau_max > 0.0 {
        samples.extend(march(field, n0, tau_max, dt));
    }
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let points: Vec<SpherePoint> = samples.iter().map(|s| s.1).collect();
    let field_values: Vec<f64> = points.iter().map(|p| field.eval(p)).collect();

    let traj = FlowTrajectory {
        times,
        points,
        field_values,
    };
    let f0 = field.eval(n0);
    let drift = traj
        .field_values
        .iter()
        .map(|f| (f - f0).abs())
        .fold(0.0, f64::max);
    let tol = ENERGY_TOL * (1.0 + field.oscillation_bound());
    if drift > tol {
        return Err(Error::EnergyDrift { drift, tol });
    }
    Ok(traj)
}

/// Fraction of a great circle's arclength inside the cap of radius
/// `rho_cap` around `x`: with c = n . x, (1/pi) arccos(cos rho / sqrt(1-c^2))
/// when that ratio is at most 1, else 0.
pub fn radon_indicator(x: &SpherePoint, rho_cap: f64, gamma: &Geodesic) -> f64 {
    assert!(
        rho_cap > 0.0 && rho_cap < PI / 2.0,
        "cap radius must lie in (0, pi/2)"
    );
    let c = gamma.normal().dot(x);
    let reach = (1.0 - c * c).max(0.0).sqrt();
    let ratio = rho_cap.cos() / reach;
    if !(ratio <= 1.0) {
        return 0.0; // also covers reach = 0
    }
    ratio.clamp(-1.0, 1.0).acos() / PI
}

/// Time average over [-tau0, tau0] of the occupancy fraction of the doubled
/// cap B(x, 2r) along the flow orbit of a geodesic; trapezoid rule on the
/// trajectory samples.
pub fn flow_average(
    field: &RadonField,
    x: &SpherePoint,
    r: f64,
    tau0: f64,
    gamma: &Geodesic,
    dt: f64,
) -> Result<f64> {
    if !(r > 0.0 && r <= PI / 8.0) {
        return Err(Error::invalid("cap radius must lie in (0, pi/8]"));
    }
    if !(tau0 > 0.0 && tau0 <= 10.0) {
        return Err(Error::invalid("time horizon must lie in (0, 10]"));
    }
    let traj = integrate_flow(field, gamma.normal(), (-tau0, tau0), dt)?;
    let vals: Vec<f64> = traj
        .points
        .iter()
        .map(|n| radon_indicator(x, 2.0 * r, &Geodesic::from_normal(n)))
        .collect();
    let mut acc = 0.0;
    for k in 0..traj.len() - 1 {
        acc += 0.5 * (vals[k] + vals[k + 1]) * (traj.times[k + 1] - traj.times[k]);
    }
    Ok(acc / (2.0 * tau0))
}

/// Supremum of the flow average over a scan grid of geodesics. Only normals
/// whose orbit can reach the annulus |n . x| <= sin 2r within the horizon
/// are integrated; the rest contribute exactly zero.
pub fn sup_flow_average(
    field: &RadonField,
    x: &SpherePoint,
    r: f64,
    tau0: f64,
    scan: &QuadratureGrid,
    dt: f64,
) -> Result<f64> {
    if scan.nodes.len() < 2000 {
        return Err(Error::invalid("sup scan needs at least 2000 nodes"));
    }
    let speed_cap = scan
        .nodes
        .iter()
        .map(|n| hamiltonian_field(field, n).norm())
        .fold(0.0, f64::max);
    let band = (2.0 * r).sin() + tau0 * speed_cap;
    let candidates: Vec<&SpherePoint> = scan
        .nodes
        .iter()
        .filter(|n| n.dot(x).abs() <= band)
        .collect();
    let values = candidates
        .par_iter()
        .map(|n| flow_average(field, x, r, tau0, &Geodesic::from_normal(n), dt))
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Log-log least-squares fit of sup flow averages against cap radii.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub radii: Vec<f64>,
    pub sup_averages: Vec<f64>,
    /// radii dropped because their sup average vanished on the scan
    pub dropped: Vec<f64>,
    pub fitted_exponent: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Measures the sup flow average at each radius and fits the scaling
/// exponent by least squares on the log-log data.
pub fn fit_scaling_exponent(
    field: &RadonField,
    x: &SpherePoint,
    radii: &[f64],
    tau0: f64,
    scan: &QuadratureGrid,
    dt: f64,
) -> Result<ScalingFit> {
    if radii.len() < 4 {
        return Err(Error::invalid("scaling fit needs at least 4 radii"));
    }
    let (lo, hi) = radii
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    if !(lo > 0.0 && hi < PI / 16.0) {
        return Err(Error::invalid("radii must lie in (0, pi/16)"));
    }
    if hi / lo < 8.0 {
        return Err(Error::invalid("radii must span at least one decade (factor 8)"));
    }
    let sups = radii
        .iter()
        .map(|&r| sup_flow_average(field, x, r, tau0, scan, dt))
        .collect::<Result<Vec<f64>>>()?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = Vec::new();
    for (&r, &s) in radii.iter().zip(&sups) {
        if s > 0.0 {
            xs.push(r.ln());
            ys.push(s.ln());
        } else {
            dropped.push(r);
        }
    }
    if xs.len() < 3 {
        return Err(Error::TooFewRadii(xs.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit {
        radii: radii.to_vec(),
        sup_averages: sups,
        dropped,
        fitted_exponent: slope,
        intercept,
        residual,
    })
}

/// Occupancy intervals of the annulus of geodesics meeting a doubled cap,
/// along one orbit, with the tangency times of the boundary crossing.
#[derive(Debug, Clone, Serialize)]
pub struct OccupancyDecomposition {
    pub intervals: Vec<(f64, f64)>,
    pub tangency_times: Vec<f64>,
}

/// Decomposes the orbit's annulus occupancy into entry/exit intervals by
/// bisection on the signed boundary defect sin^2(2r) - (n . x)^2, and finds
/// the tangency times where the defect derivative vanishes inside them.
pub fn tangency_decomposition(
    field: &RadonField,
    x: &SpherePoint,
    r: f64,
    tau0: f64,
    gamma: &Geodesic,
    dt: f64,
) -> Result<OccupancyDecomposition> {
    if !(r > 0.0 && r <= PI / 8.0) {
        return Err(Error::invalid("cap radius must lie in (0, pi/8]"));
    }
    if !(tau0 > 0.0 && tau0 <= 10.0) {
        return Err(Error::invalid("time horizon must lie in (0, 10]"));
    }
    let traj = integrate_flow(field, gamma.normal(), (-tau0, tau0), dt)?;
    let sin2r = (2.0 * r).sin();
    let defect_at = |n: &SpherePoint| sin2r * sin2r - n.dot(x) * n.dot(x);
    // evaluate the flow from a stored sample: bisection never needs to step
    // more than one grid cell, so error stays O(dt^5)
    let flow_to = |idx: usize, tau: f64| -> SpherePoint {
        let h = tau - traj.times[idx];
        if h == 0.0 {
            traj.points[idx]
        } else {
            rk4_step(field, &traj.points[idx], h)
        }
    };
    let defects: Vec<f64> = traj.points.iter().map(defect_at).collect();
    let refine = |idx: usize, target_sign: f64| -> f64 {
        // sign change between samples idx and idx+1
        let (mut lo, mut hi) = (traj.times[idx], traj.times[idx + 1]);
        let mut flo = defects[idx];
        while hi - lo > dt * 1e-3 {
            let mid = 0.5 * (lo + hi);
            let fm = defect_at(&flow_to(idx, mid));
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let _ = target_sign;
        0.5 * (lo + hi)
    };

    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<f64> = if defects[0] > 0.0 {
        Some(traj.times[0])
    } else {
        None
    };
    for k in 0..defects.len() - 1 {
        let (a, b) = (defects[k], defects[k + 1]);
        if a <= 0.0 && b > 0.0 {
            open = Some(refine(k, 1.0));
        } else if a > 0.0 && b <= 0.0 {
            let start = open.take().unwrap_or(traj.times[0]);
            intervals.push((start, refine(k, -1.0)));
        }
    }
    if let Some(start) = open {
        intervals.push((start, *traj.times.last().unwrap()));
    }

    // tangency: zero of the defect derivative -2 c c' inside an interval;
    // bracketed on the sample grid and bisected. c' = X(n) . x
    let deriv = |n: &SpherePoint| -2.0 * n.dot(x) * hamiltonian_field(field, n).dot(&x.vec());
    let mut tangency_times = Vec::new();
    for k in 0..traj.len() - 1 {
        let inside = intervals
            .iter()
            .any(|&(a, b)| traj.times[k] >= a - dt && traj.times[k + 1] <= b + dt);
        if !inside {
            continue;
        }
        // only strict sign changes: a derivative identically zero along the
        // sample (frozen orbit) is not a tangency
        let (da, db) = (deriv(&traj.points[k]), deriv(&traj.points[k + 1]));
        if da * db < 0.0 {
            let (mut lo, mut hi) = (traj.times[k], traj.times[k + 1]);
            let mut flo = da;
            while hi - lo > dt * 1e-3 {
                let mid = 0.5 * (lo + hi);
                let fm = deriv(&flow_to(k, mid));
                if (fm > 0.0) == (flo > 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            tangency_times.push(0.5 * (lo + hi));
        }
    }
    Ok(OccupancyDecomposition {
        intervals,
        tangency_times,
    })
}
