//! Area integrals and grid-wide identity checks.

use rayon::prelude::*;
use serde::Serialize;

use super::{exterior_of, index, isotropic_frame, laplacian, mixed_form_field, omega34_pm_coord, refine_singular_point, IndexResult, MixedPoint};
use crate::chart::SurfaceChart;
use crate::error::{GeomError, Result};
use crate::fd::{d_du, d_dv, Stencil, H_INNER, H_OUTER};
use crate::grid::Grid;
use crate::invariants::PointGeometry;
use crate::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckValue {
    pub value: f64,
    pub target: f64,
    pub abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckValue {
    pub fn new(value: f64, target: f64, tolerance: f64) -> Self {
        let abs_error = (value - target).abs();
        CheckValue { value, target, abs_error, tolerance, pass: abs_error <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GlobalReport {
    pub sign: Sign,
    pub euler_characteristic: i64,
    pub normal_euler_number: i64,
    pub gauss_bonnet: CheckValue,
    pub normal_euler: CheckValue,
    /// `int (2K +/- K_N) dM - 2 pi sum I`.
    pub index_theorem: CheckValue,
    pub indices: Vec<IndexResult>,
    pub ricci_like: CheckValue,
    /// Sup of the right-hand side `(u^2 + v^2)`.
    pub ricci_rhs_sup: f64,
    pub chern_da1: CheckValue,
    pub chern_da2: CheckValue,
}

/// Tolerance on area integrals, relative to the total curvature mass.
pub const INTEGRAL_TOL: f64 = 1e-8;
/// Tolerance on pointwise identities, relative to `scale^2`.
pub const IDENTITY_TOL: f64 = 1e-4;

/// Composite trapezoid `int F dM` from node values.
pub fn area_integral(chart: &SurfaceChart, grid: &Grid, vals: &[f64]) -> Result<f64> {
    let dens: Vec<f64> = grid.try_map(|u, v| Ok(PointGeometry::at(chart, u, v)?.basis.area()))?;
    Ok((0..grid.len())
        .map(|k| {
            let (i, j) = grid.ij(k);
            grid.quadrature_weight(i, j) * dens[k] * vals[k]
        })
        .sum())
}

/// `(Delta log B - 2K -/+ K_N, u^2 + v^2)` at one point.
pub fn ricci_like_point(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<(f64, f64)> {
    let g = PointGeometry::near(chart, u, v)?;
    let logb = |a: f64, b: f64| -> Result<f64> { Ok(PointGeometry::near(chart, a, b)?.sff.b(sign).ln()) };
    let lap = laplacian(chart, u, v, logb)?;
    let lhs = lap - 2.0 * g.sff.gauss_k(g.ambient_c) - sign.s() * g.sff.normal_k();
    let comp = |k: usize| {
        move |a: f64, b: f64| -> Result<f64> {
            let (e3, e4, gg) = isotropic_frame(chart, a, b, sign)?;
            let h = gg.h_amb();
            Ok(if k == 3 { h.dot(&e3) } else { h.dot(&e4) })
        }
    };
    let (e3, e4, _) = isotropic_frame(chart, u, v, sign)?;
    let (h3, h4) = (g.h_amb().dot(&e3), g.h_amb().dot(&e4));
    let d3 = g.basis.to_frame([d_du(comp(3), u, v, H_INNER, Stencil::Central4)?, d_dv(comp(3), u, v, H_INNER, Stencil::Central4)?]);
    let d4 = g.basis.to_frame([d_du(comp(4), u, v, H_INNER, Stencil::Central4)?, d_dv(comp(4), u, v, H_INNER, Stencil::Central4)?]);
    let w = g.basis.to_frame(omega34_pm_coord(chart, u, v, sign)?);
    let h3j = [d3[0] - h4 * w[0], d3[1] - h4 * w[1]];
    let h4j = [d4[0] + h3 * w[0], d4[1] + h3 * w[1]];
    let b = g.sff.b(sign);
    let s = sign.s();
    let up = (h3j[0] - s * h4j[1]) / b;
    let vp = (h3j[1] + s * h4j[0]) / b;
    Ok((lhs, up * up + vp * vp))
}

/// Frame components of `a1 = d log B - *Omega`.
pub fn chern_a1(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<[f64; 2]> {
    let p = MixedPoint::at(chart, u, v, sign)?;
    let logb = |a: f64, b: f64| -> Result<f64> { Ok(PointGeometry::near(chart, a, b)?.sff.b(sign).ln()) };
    let grad = p.geom.basis.to_frame([d_du(logb, u, v, H_INNER, Stencil::Central4)?, d_dv(logb, u, v, H_INNER, Stencil::Central4)?]);
    let om = p.omega_frame();
    Ok([grad[0] + om[1], grad[1] - om[0]])
}

/// `(d a1, d a2 - a1 ^ a2)` as multiples of `dM`.
pub fn chern_point(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<(f64, f64)> {
    let coord = |a: f64, b: f64, star: bool| -> Result<[f64; 2]> {
        let g = PointGeometry::near(chart, a, b)?;
        let w = chern_a1(chart, a, b, sign)?;
        let w = if star { [-w[1], w[0]] } else { w };
        Ok(g.basis.to_coord(w))
    };
    let da1 = exterior_of(chart, u, v, H_OUTER, |a, b| coord(a, b, false))?;
    let da2 = exterior_of(chart, u, v, H_OUTER, |a, b| coord(a, b, true))?;
    let a1 = chern_a1(chart, u, v, sign)?;
    Ok((da1, da2 - (a1[0] * a1[0] + a1[1] * a1[1])))
}

fn masked_sup(
    chart: &SurfaceChart,
    grid: &Grid,
    mask: &[bool],
    f: impl Fn(f64, f64) -> Result<f64> + Sync,
) -> Result<f64> {
    let pts = grid.map(|u, v| (u, v));
    let vals: Vec<f64> = pts
        .par_iter()
        .enumerate()
        .map(|(k, &(u, v))| {
            if !mask[k] {
                return Ok(0.0);
            }
            let s = PointGeometry::at(chart, u, v)?.curvature_scale();
            Ok(f(u, v)? / (s * s))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Sup of the scaled Ricci-like residual and of its right-hand side.
pub fn ricci_like_check(chart: &SurfaceChart, grid: &Grid, sign: Sign) -> Result<(CheckValue, f64)> {
    let field = mixed_form_field(chart, grid, sign)?;
    let res = masked_sup(chart, grid, &field.mask, |u, v| ricci_like_point(chart, u, v, sign).map(|(l, r)| (l - r).abs()))?;
    let rhs = masked_sup(chart, grid, &field.mask, |u, v| ricci_like_point(chart, u, v, sign).map(|(_, r)| r))?;
    Ok((CheckValue::new(res, 0.0, IDENTITY_TOL), rhs))
}

pub fn chern_forms_check(chart: &SurfaceChart, grid: &Grid, sign: Sign) -> Result<(CheckValue, CheckValue)> {
    let field = mixed_form_field(chart, grid, sign)?;
    let d1 = masked_sup(chart, grid, &field.mask, |u, v| chern_point(chart, u, v, sign).map(|x| x.0.abs()))?;
    let d2 = masked_sup(chart, grid, &field.mask, |u, v| chern_point(chart, u, v, sign).map(|x| x.1.abs()))?;
    Ok((CheckValue::new(d1, 0.0, IDENTITY_TOL), CheckValue::new(d2, 0.0, IDENTITY_TOL)))
}

/// Connected clusters of singular nodes (8-neighborhood, wrapping).
pub fn singular_clusters(grid: &Grid, nodes: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut left: Vec<(usize, usize)> = nodes.to_vec();
    let mut out = Vec::new();
    while let Some(first) = left.pop() {
        let mut cluster = vec![first];
        let mut k = 0;
        while k < cluster.len() {
            let (ci, cj) = cluster[k];
            let mut m = 0;
            while m < left.len() {
                let (i, j) = left[m];
                let near = (-1..=1).any(|di| (-1..=1).any(|dj| grid.shift_u(ci, di) == Some(i) && grid.shift_v(cj, dj) == Some(j)));
                if near {
                    cluster.push(left.swap_remove(m));
                } else {
                    m += 1;
                }
            }
            k += 1;
        }
        cluster.sort();
        out.push(cluster);
    }
    out.sort();
    out
}

/// Global integrals and identities on a doubly periodic chart.
pub fn global_checks(chart: &SurfaceChart, grid: &Grid, sign: Sign) -> Result<GlobalReport> {
    if !chart.is_compact() {
        return Err(GeomError::NotCompactChart);
    }
    // doubly periodic charts parametrize tori
    let (chi, chi_n) = (0i64, 0i64);
    let tau = std::f64::consts::TAU;
    let geoms = grid.try_map(|u, v| PointGeometry::at(chart, u, v))?;
    let k: Vec<f64> = geoms.iter().map(|g| g.sff.gauss_k(g.ambient_c)).collect();
    let kn: Vec<f64> = geoms.iter().map(|g| g.sff.normal_k()).collect();
    let mix: Vec<f64> = k.iter().zip(&kn).map(|(a, b)| 2.0 * a + sign.s() * b).collect();
    let mass: f64 = area_integral(chart, grid, &geoms.iter().map(|g| g.curvature_scale().powi(2)).collect::<Vec<_>>())?;
    let tol = INTEGRAL_TOL * mass.max(1.0);
    let int_k = area_integral(chart, grid, &k)?;
    let int_kn = area_integral(chart, grid, &kn)?;
    let int_mix = area_integral(chart, grid, &mix)?;

    let field = mixed_form_field(chart, grid, sign)?;
    let step = grid.du().min(grid.dv());
    let mut indices = Vec::new();
    for cluster in singular_clusters(grid, &field.singular_nodes) {
        let (i, j) = cluster[cluster.len() / 2];
        let p = refine_singular_point(chart, grid.node(i, j), sign)?;
        indices.push(index(chart, p, sign, &[4.0 * step, 2.0 * step, step])?);
    }
    let sum_i: f64 = indices.iter().map(|r| r.extrapolated.round()).sum();

    let (ricci_like, ricci_rhs_sup) = ricci_like_check(chart, grid, sign)?;
    let (chern_da1, chern_da2) = chern_forms_check(chart, grid, sign)?;
    Ok(GlobalReport {
        sign,
        euler_characteristic: chi,
        normal_euler_number: chi_n,
        gauss_bonnet: CheckValue::new(int_k, tau * chi as f64, tol),
        normal_euler: CheckValue::new(int_kn, tau * chi_n as f64, tol),
        index_theorem: CheckValue::new(int_mix - tau * sum_i, 0.0, tol),
        indices,
        ricci_like,
        ricci_rhs_sup,
        chern_da1,
        chern_da2,
    })
}
