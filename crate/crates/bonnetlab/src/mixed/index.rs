//! Loop integrals of the mixed forms around isolated pseudo-umbilic points.

use nalgebra::{DMatrix, DVector, Matrix4x2, Vector2};
use serde::Serialize;

use super::omega_pm_coord;
use crate::chart::{SurfaceChart, V4};
use crate::error::{GeomError, Result};
use crate::invariants::PointGeometry;
use crate::Sign;

/// Quadrature nodes per loop.
pub const LOOP_NODES: usize = 512;

#[derive(Debug, Clone, Serialize)]
pub struct IndexResult {
    pub point: (f64, f64),
    pub sign: Sign,
    pub radii: Vec<f64>,
    pub loop_integrals: Vec<f64>,
    /// Differences between successive loop integrals.
    pub cauchy_differences: Vec<f64>,
    pub extrapolated: f64,
    pub vanishing_order_estimate: f64,
}

impl IndexResult {
    pub fn rounded(&self) -> i64 {
        self.extrapolated.round() as i64
    }
}

/// `(1/2 pi) \oint Omega` over the positively oriented parameter circle.
pub fn loop_integral(chart: &SurfaceChart, center: (f64, f64), radius: f64, sign: Sign, nodes: usize) -> Result<f64> {
    use rayon::prelude::*;
    let tau = std::f64::consts::TAU;
    let vals: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let t = tau * k as f64 / nodes as f64;
            let (c, s) = (t.cos(), t.sin());
            let w = omega_pm_coord(chart, center.0 + radius * c, center.1 + radius * s, sign).map_err(|e| match e {
                GeomError::MaskViolation { .. } => GeomError::LoopThroughSingularity { radius },
                other => other,
            })?;
            Ok(radius * (-s * w[0] + c * w[1]))
        })
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() * (tau / nodes as f64) / tau)
}

/// Least-squares fit of `I0 + c2 r^2 + c4 r^4`, returning `I0`.
pub fn richardson(radii: &[f64], values: &[f64]) -> f64 {
    let n = radii.len();
    if n == 0 {
        return f64::NAN;
    }
    let cols = n.min(3);
    if cols == 1 {
        return values[0];
    }
    let a = DMatrix::from_fn(n, cols, |i, j| radii[i].powi(2 * j as i32));
    let b = DVector::from_column_slice(values);
    match a.svd(true, true).solve(&b, 1e-14) {
        Ok(x) => x[0],
        Err(_) => values[n - 1],
    }
}

/// Log-log slope of `B` against distance, averaged over eight rays.
pub fn vanishing_order(chart: &SurfaceChart, center: (f64, f64), sign: Sign, radii: &[f64]) -> Result<f64> {
    let mut slopes = Vec::new();
    for ray in 0..8 {
        let t = std::f64::consts::TAU * (ray as f64 + 0.5) / 8.0;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &r in radii {
            let g = PointGeometry::near(chart, center.0 + r * t.cos(), center.1 + r * t.sin())?;
            let b = g.sff.b(sign);
            if b > 0.0 {
                xs.push(r.ln());
                ys.push(b.ln());
            }
        }
        if xs.len() >= 2 {
            let mx = xs.iter().sum::<f64>() / xs.len() as f64;
            let my = ys.iter().sum::<f64>() / ys.len() as f64;
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            slopes.push(sxy / sxx);
        }
    }
    if slopes.is_empty() {
        return Ok(f64::NAN);
    }
    Ok(slopes.iter().sum::<f64>() / slopes.len() as f64)
}

fn isotropic_residual(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<V4> {
    Ok(PointGeometry::near(chart, u, v)?.isotropic_axis(sign))
}

/// Gauss-Newton on the ambient vector `u + s J v`, which vanishes exactly at
/// pseudo-umbilic points of the sign.
pub fn refine_singular_point(chart: &SurfaceChart, start: (f64, f64), sign: Sign) -> Result<(f64, f64)> {
    let (mut u, mut v) = start;
    let h = 1e-6 * chart.domain.diameter().max(1.0);
    for _ in 0..30 {
        let w = isotropic_residual(chart, u, v, sign)?;
        let wu = (isotropic_residual(chart, u + h, v, sign)? - isotropic_residual(chart, u - h, v, sign)?) / (2.0 * h);
        let wv = (isotropic_residual(chart, u, v + h, sign)? - isotropic_residual(chart, u, v - h, sign)?) / (2.0 * h);
        let jac = Matrix4x2::from_columns(&[wu, wv]);
        let jtj = jac.transpose() * jac;
        let Some(inv) = jtj.try_inverse() else { break };
        let step: Vector2<f64> = inv * (jac.transpose() * w);
        u -= step[0];
        v -= step[1];
        if step.norm() < 1e-14 * chart.domain.diameter().max(1.0) {
            break;
        }
    }
    Ok((u, v))
}

/// Index of an isolated pseudo-umbilic point from loop integrals over `radii`.
pub fn index(chart: &SurfaceChart, point: (f64, f64), sign: Sign, radii: &[f64]) -> Result<IndexResult> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(GeomError::BadParameter { name: "radii".into(), reason: "need positive loop radii".into() });
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let loop_integrals: Vec<f64> =
        radii.iter().map(|&r| loop_integral(chart, point, r, sign, LOOP_NODES)).collect::<Result<_>>()?;
    let cauchy_differences = loop_integrals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let extrapolated = richardson(&radii, &loop_integrals);
    let rmin = radii[radii.len() - 1];
    let ray_radii: Vec<f64> = (0..6).map(|k| rmin * 0.5f64.powi(k)).collect();
    let vanishing_order_estimate = vanishing_order(chart, point, sign, &ray_radii)?;
    Ok(IndexResult { point, sign, radii, loop_integrals, cauchy_differences, extrapolated, vanishing_order_estimate })
}
