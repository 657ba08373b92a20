//! Mixed connection forms `Omega = 2 omega12 +/- omega34`, their co-differential,
//! the complex data `h`, `A`, and isotropic-isothermicity classification.

pub mod global;
pub mod index;

pub use global::{global_checks, CheckValue, GlobalReport};
pub use index::{index, loop_integral, refine_singular_point, richardson, vanishing_order, IndexResult};

use num_complex::Complex64;
use serde::Serialize;

use crate::chart::{SurfaceChart, V4};
use crate::connection::omega12_coord;
use crate::error::{GeomError, Result};
use crate::fd::{d_du, d_dv, Stencil, H_INNER, H_OUTER};
use crate::grid::Grid;
use crate::invariants::PointGeometry;
use crate::Sign;

/// Relative floor below which an isotropic axis is treated as vanishing.
pub const AXIS_TINY: f64 = 1e-10;

/// Default threshold factor for `|d*Omega| < eps * scale`.
pub const DEFAULT_ISO_EPS: f64 = 1e-5;

/// `(e3, e4)` aligned with the isotropic part of the given sign, plus the
/// geometry they were computed from.
pub fn isotropic_frame(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<(V4, V4, PointGeometry)> {
    let g = PointGeometry::near(chart, u, v)?;
    let e3 = g.e3_pm(sign, AXIS_TINY * g.curvature_scale()).ok_or(GeomError::MaskViolation { u, v })?;
    let e4 = g.frame.j_normal(&e3);
    Ok((e3, e4, g))
}

/// Coordinate components of `omega34` for the frame `(e3^s, e4^s)`.
pub fn omega34_pm_coord(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<[f64; 2]> {
    let (_, e4, _) = isotropic_frame(chart, u, v, sign)?;
    let e3 = |a: f64, b: f64| isotropic_frame(chart, a, b, sign).map(|x| x.0);
    let du = d_du(e3, u, v, H_INNER, Stencil::Central4)?;
    let dv = d_dv(e3, u, v, H_INNER, Stencil::Central4)?;
    Ok([du.dot(&e4), dv.dot(&e4)])
}

/// Pointwise data of the mixed form of one sign.
#[derive(Debug, Clone, Copy)]
pub struct MixedPoint {
    pub geom: PointGeometry,
    pub e3: V4,
    pub omega12: [f64; 2],
    pub omega34: [f64; 2],
    /// Coordinate components of `Omega`.
    pub omega: [f64; 2],
}

impl MixedPoint {
    pub fn at(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<Self> {
        let (e3, _, geom) = isotropic_frame(chart, u, v, sign)?;
        let omega12 = omega12_coord(&geom);
        let omega34 = omega34_pm_coord(chart, u, v, sign)?;
        let s = sign.s();
        let omega = [2.0 * omega12[0] + s * omega34[0], 2.0 * omega12[1] + s * omega34[1]];
        Ok(MixedPoint { geom, e3, omega12, omega34, omega })
    }

    pub fn omega_frame(&self) -> [f64; 2] {
        self.geom.basis.to_frame(self.omega)
    }

    pub fn b(&self, sign: Sign) -> f64 {
        self.geom.sff.b(sign)
    }
}

pub fn omega_pm_coord(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<[f64; 2]> {
    Ok(MixedPoint::at(chart, u, v, sign)?.omega)
}

/// `d*w (e1, e2)` for a 1-form given by chart-frame components at nearby
/// points: `e1(a) + e2(b) - b omega12(e1) + a omega12(e2)`.
pub fn costar_of(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
    h: f64,
    form: impl Fn(f64, f64) -> Result<[f64; 2]>,
) -> Result<f64> {
    let g = PointGeometry::near(chart, u, v)?;
    let w = form(u, v)?;
    let comp = |k: usize| {
        let f = &form;
        move |a: f64, b: f64| f(a, b).map(|x| x[k])
    };
    let (a_u, a_v) = (d_du(comp(0), u, v, h, Stencil::Central4)?, d_dv(comp(0), u, v, h, Stencil::Central4)?);
    let (b_u, b_v) = (d_du(comp(1), u, v, h, Stencil::Central4)?, d_dv(comp(1), u, v, h, Stencil::Central4)?);
    let e1a = g.basis.to_frame([a_u, a_v])[0];
    let e2b = g.basis.to_frame([b_u, b_v])[1];
    let w12 = g.basis.to_frame(omega12_coord(&g));
    Ok(e1a + e2b - w[1] * w12[0] + w[0] * w12[1])
}

/// `dw (e1, e2)` for a 1-form given by coordinate components.
pub fn exterior_of(chart: &SurfaceChart, u: f64, v: f64, h: f64, form: impl Fn(f64, f64) -> Result<[f64; 2]>) -> Result<f64> {
    let g = PointGeometry::near(chart, u, v)?;
    let wv_u = d_du(|a, b| form(a, b).map(|x| x[1]), u, v, h, Stencil::Central4)?;
    let wu_v = d_dv(|a, b| form(a, b).map(|x| x[0]), u, v, h, Stencil::Central4)?;
    Ok((wv_u - wu_v) / g.basis.area())
}

/// Laplace-Beltrami operator as `d*d`.
pub fn laplacian(chart: &SurfaceChart, u: f64, v: f64, f: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
    let grad = |a: f64, b: f64| -> Result<[f64; 2]> {
        let g = PointGeometry::near(chart, a, b)?;
        let fu = d_du(&f, a, b, H_INNER, Stencil::Central4)?;
        let fv = d_dv(&f, a, b, H_INNER, Stencil::Central4)?;
        Ok(g.basis.to_frame([fu, fv]))
    };
    costar_of(chart, u, v, H_OUTER, grad)
}

/// Below this `B / scale` the outer step shrinks proportionally.
const STEP_SHRINK_BELOW: f64 = 0.1;

/// Outer FD step for derivatives of `Omega`. `Omega` varies on the length
/// scale of the distance to the nearest zero of `B`, for which `B / scale`
/// is a proxy.
fn outer_step(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<f64> {
    let g = PointGeometry::near(chart, u, v)?;
    let r = g.sff.b(sign) / (g.curvature_scale() * STEP_SHRINK_BELOW);
    Ok(H_OUTER * r.clamp(0.1, 1.0))
}

pub fn costar_omega(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<f64> {
    let h = outer_step(chart, u, v, sign)?;
    costar_of(chart, u, v, h, |a, b| Ok(MixedPoint::at(chart, a, b, sign)?.omega_frame()))
}

pub fn d_omega(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<f64> {
    let h = outer_step(chart, u, v, sign)?;
    exterior_of(chart, u, v, h, |a, b| omega_pm_coord(chart, a, b, sign))
}

fn require_isothermal(chart: &SurfaceChart) -> Result<()> {
    if chart.isothermal {
        Ok(())
    } else {
        Err(GeomError::NonIsothermalChart)
    }
}

/// `h = dbar log(lambda^2 B) -/+ i omega34(dbar)` on an isothermal chart.
pub fn h_pm(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<Complex64> {
    require_isothermal(chart)?;
    let logf = |a: f64, b: f64| -> Result<f64> {
        let g = PointGeometry::near(chart, a, b)?;
        let bb = g.sff.b(sign);
        if bb <= AXIS_TINY * g.curvature_scale() {
            return Err(GeomError::MaskViolation { u: a, v: b });
        }
        Ok((g.lambda().powi(2) * bb).ln())
    };
    let lx = d_du(logf, u, v, H_INNER, Stencil::Central4)?;
    let ly = d_dv(logf, u, v, H_INNER, Stencil::Central4)?;
    let w = omega34_pm_coord(chart, u, v, sign)?;
    let dbar_log = Complex64::new(0.5 * lx, 0.5 * ly);
    let w_dbar = Complex64::new(0.5 * w[0], 0.5 * w[1]);
    Ok(dbar_log - Complex64::new(0.0, sign.s()) * w_dbar)
}

/// `(h, h_z, A = i (h_z - |h|^2))` at one point.
pub fn analytic_point(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<(Complex64, Complex64, Complex64)> {
    let h = h_pm(chart, u, v, sign)?;
    let hf = |a: f64, b: f64| h_pm(chart, a, b, sign);
    let hx = d_du(hf, u, v, H_OUTER, Stencil::Central4)?;
    let hy = d_dv(hf, u, v, H_OUTER, Stencil::Central4)?;
    let hz = (hx - Complex64::i() * hy) * 0.5;
    let a = Complex64::i() * (hz - h.norm_sqr());
    Ok((h, hz, a))
}

/// Gauge-free rotation angle from `x` to `y`, both unit normals, measured in
/// the oriented normal plane at the point of `x`.
fn normal_angle(g: &PointGeometry, x: &V4, y: &V4) -> f64 {
    let jx = g.frame.j_normal(x);
    y.dot(&jx).atan2(y.dot(x))
}

#[derive(Debug, Clone, Serialize)]
pub struct MixedFormField {
    pub grid: Grid,
    pub sign: Sign,
    /// Frame components `(Omega(e1), Omega(e2))`; `None` off the mask.
    pub omega: Vec<Option<[f64; 2]>>,
    /// Angle of `e3^s` in the deterministic normal gauge, unwrapped along rows.
    pub e3_angle: Vec<f64>,
    pub b: Vec<f64>,
    pub mask: Vec<bool>,
    /// Grid nodes at or next to detected pseudo-umbilic points.
    pub singular_nodes: Vec<(usize, usize)>,
    pub threshold: f64,
}

impl MixedFormField {
    pub fn mask_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Mask radius in grid steps.
pub const MASK_RADIUS: isize = 3;

pub fn mixed_form_field(chart: &SurfaceChart, grid: &Grid, sign: Sign) -> Result<MixedFormField> {
    mixed_form_field_eps(chart, grid, sign, crate::invariants::DEFAULT_EPS_SCALE)
}

pub fn mixed_form_field_eps(chart: &SurfaceChart, grid: &Grid, sign: Sign, eps_scale: f64) -> Result<MixedFormField> {
    let geoms: Vec<PointGeometry> = grid.try_map(|u, v| PointGeometry::at(chart, u, v))?;
    let mut singular = vec![false; grid.len()];
    let mut axes: Vec<Option<V4>> = Vec::with_capacity(grid.len());
    let mut bvals = Vec::with_capacity(grid.len());
    for (k, g) in geoms.iter().enumerate() {
        let eps = eps_scale * g.curvature_scale();
        let b = g.sff.b(sign);
        bvals.push(b);
        if b < eps {
            singular[k] = true;
            axes.push(None);
        } else {
            axes.push(g.e3_pm(sign, 0.0));
        }
    }
    if singular.iter().all(|&s| s) {
        return Err(GeomError::EmptyMask { sign: sign.as_char() });
    }
    // winding of e3^s around each cell
    for j in 0..grid.nv {
        for i in 0..grid.nu {
            let (Some(i1), Some(j1)) = (grid.shift_u(i, 1), grid.shift_v(j, 1)) else { continue };
            let corners = [grid.idx(i, j), grid.idx(i1, j), grid.idx(i1, j1), grid.idx(i, j1)];
            if corners.iter().any(|&c| axes[c].is_none()) {
                continue;
            }
            let mut total = 0.0;
            for m in 0..4 {
                let (p, q) = (corners[m], corners[(m + 1) % 4]);
                total += normal_angle(&geoms[p], &axes[p].unwrap(), &axes[q].unwrap());
            }
            if (total / (2.0 * std::f64::consts::PI)).round() != 0.0 {
                for &c in &corners {
                    singular[c] = true;
                }
            }
        }
    }
    let singular_nodes: Vec<(usize, usize)> = (0..grid.len()).filter(|&k| singular[k]).map(|k| grid.ij(k)).collect();
    let mut mask = vec![true; grid.len()];
    for &(si, sj) in &singular_nodes {
        for dj in -MASK_RADIUS..=MASK_RADIUS {
            for di in -MASK_RADIUS..=MASK_RADIUS {
                if let (Some(i), Some(j)) = (grid.shift_u(si, di), grid.shift_v(sj, dj)) {
                    mask[grid.idx(i, j)] = false;
                }
            }
        }
    }
    if !mask.iter().any(|&m| m) {
        return Err(GeomError::EmptyMask { sign: sign.as_char() });
    }
    // gauge angle, unwrapped along rows and down the first column
    let mut e3_angle = vec![f64::NAN; grid.len()];
    let mut prev_row_start: Option<f64> = None;
    for j in 0..grid.nv {
        let mut prev: Option<f64> = None;
        for i in 0..grid.nu {
            let k = grid.idx(i, j);
            let Some(ax) = axes[k] else {
                prev = None;
                continue;
            };
            let g = &geoms[k];
            let raw = ax.dot(&g.frame.e4()).atan2(ax.dot(&g.frame.e3()));
            let reference = prev.or(if i == 0 { prev_row_start } else { None });
            let a = match reference {
                Some(r) => r + (raw - r + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI,
                None => raw,
            };
            if i == 0 {
                prev_row_start = Some(a);
            }
            e3_angle[k] = a;
            prev = Some(a);
        }
    }
    let pts = grid.map(|u, v| (u, v));
    let omega: Vec<Option<[f64; 2]>> = {
        use rayon::prelude::*;
        pts.par_iter()
            .enumerate()
            .map(|(k, &(u, v))| if mask[k] { MixedPoint::at(chart, u, v, sign).ok().map(|p| p.omega_frame()) } else { None })
            .collect()
    };
    Ok(MixedFormField {
        grid: *grid,
        sign,
        omega,
        e3_angle,
        b: bvals,
        mask,
        singular_nodes,
        threshold: eps_scale,
    })
}

/// `d*Omega` at every mask-true node; `None` elsewhere.
pub fn costar_derivative(chart: &SurfaceChart, field: &MixedFormField) -> Result<Vec<Option<f64>>> {
    let g = &field.grid;
    let out = g.map(|u, v| (u, v));
    let results: Vec<Result<Option<f64>>> = {
        use rayon::prelude::*;
        out.par_iter()
            .enumerate()
            .map(|(k, &(u, v))| if field.mask[k] { costar_omega(chart, u, v, field.sign).map(Some) } else { Ok(None) })
            .collect()
    };
    results.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoFlags {
    /// `Some(true)` for isotropically isothermic, `Some(false)` for not,
    /// `None` where the sign's mask excludes the point.
    pub minus: Option<bool>,
    pub plus: Option<bool>,
    pub costar_minus: Option<f64>,
    pub costar_plus: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoClassification {
    pub grid: Grid,
    pub flags: Vec<IsoFlags>,
    pub eps: f64,
    /// Every sampled point is isothermic for the sign.
    pub iso: [bool; 2],
    /// No sampled point is isothermic for the sign.
    pub totally_non: [bool; 2],
}

impl IsoClassification {
    pub fn strong(&self) -> bool {
        self.iso[0] && self.iso[1]
    }
    pub fn strongly_totally_non(&self) -> bool {
        self.totally_non[0] && self.totally_non[1]
    }
}

pub fn isothermicity_classify(chart: &SurfaceChart, grid: &Grid, eps: f64) -> Result<IsoClassification> {
    let mut per_sign: Vec<Vec<Option<(bool, f64)>>> = Vec::new();
    for sign in Sign::BOTH {
        match mixed_form_field(chart, grid, sign) {
            Ok(field) => {
                let scales: Vec<f64> = grid.try_map(|u, v| Ok(PointGeometry::at(chart, u, v)?.curvature_scale()))?;
                let cs = costar_derivative(chart, &field)?;
                per_sign.push(cs.iter().zip(scales.iter()).map(|(c, &s)| c.map(|x| (x.abs() < eps * s, x))).collect());
            }
            Err(GeomError::EmptyMask { .. }) => per_sign.push(vec![None; grid.len()]),
            Err(e) => return Err(e),
        }
    }
    let flags: Vec<IsoFlags> = (0..grid.len())
        .map(|k| IsoFlags {
            minus: per_sign[0][k].map(|x| x.0),
            plus: per_sign[1][k].map(|x| x.0),
            costar_minus: per_sign[0][k].map(|x| x.1),
            costar_plus: per_sign[1][k].map(|x| x.1),
        })
        .collect();
    let mut iso = [false; 2];
    let mut totally_non = [false; 2];
    for s in 0..2 {
        let vals: Vec<bool> = per_sign[s].iter().flatten().map(|x| x.0).collect();
        iso[s] = !vals.is_empty() && vals.iter().all(|&b| b);
        totally_non[s] = !vals.is_empty() && vals.iter().all(|&b| !b);
    }
    Ok(IsoClassification { grid: *grid, flags, eps, iso, totally_non })
}

#[derive(Debug, Clone, Serialize)]
pub struct BonnetAnalyticData {
    pub grid: Grid,
    pub sign: Sign,
    #[serde(skip)]
    pub h: Vec<Option<Complex64>>,
    #[serde(skip)]
    pub hz: Vec<Option<Complex64>>,
    #[serde(skip)]
    pub a: Vec<Option<Complex64>>,
    pub sup_h: f64,
    pub sup_a: f64,
}

pub fn analytic_data(chart: &SurfaceChart, grid: &Grid, sign: Sign) -> Result<BonnetAnalyticData> {
    require_isothermal(chart)?;
    let field = mixed_form_field(chart, grid, sign)?;
    let pts = grid.map(|u, v| (u, v));
    let vals: Vec<Result<Option<(Complex64, Complex64, Complex64)>>> = {
        use rayon::prelude::*;
        pts.par_iter()
            .enumerate()
            .map(|(k, &(u, v))| if field.mask[k] { analytic_point(chart, u, v, sign).map(Some) } else { Ok(None) })
            .collect()
    };
    let vals: Vec<Option<(Complex64, Complex64, Complex64)>> = vals.into_iter().collect::<Result<_>>()?;
    let sup = |f: fn(&(Complex64, Complex64, Complex64)) -> f64| vals.iter().flatten().map(f).fold(0.0, f64::max);
    Ok(BonnetAnalyticData {
        grid: *grid,
        sign,
        sup_h: sup(|x| x.0.norm()),
        sup_a: sup(|x| x.2.norm()),
        h: vals.iter().map(|x| x.map(|y| y.0)).collect(),
        hz: vals.iter().map(|x| x.map(|y| y.1)).collect(),
        a: vals.iter().map(|x| x.map(|y| y.2)).collect(),
    })
}

/// Ambient complex vector of `phi^s` as `(re, im)` in the chart coordinate `z`.
pub fn phi_ambient(g: &PointGeometry, sign: Sign) -> (V4, V4) {
    let p = g.sff.phi(sign, g.lambda());
    let re = g.amb(&nalgebra::Vector2::new(p[0].re, p[1].re));
    let im = g.amb(&nalgebra::Vector2::new(p[0].im, p[1].im));
    (re, im)
}

/// `|normal part of dbar phi^s|`, zero iff the isotropic part is holomorphic.
pub fn hopf_dbar_residual(chart: &SurfaceChart, u: f64, v: f64, sign: Sign) -> Result<f64> {
    require_isothermal(chart)?;
    let g = PointGeometry::near(chart, u, v)?;
    let comp = |k: usize| move |a: f64, b: f64| -> Result<V4> {
        let p = phi_ambient(&PointGeometry::near(chart, a, b)?, sign);
        Ok(if k == 0 { p.0 } else { p.1 })
    };
    let re_x = d_du(comp(0), u, v, H_INNER, Stencil::Central4)?;
    let re_y = d_dv(comp(0), u, v, H_INNER, Stencil::Central4)?;
    let im_x = d_du(comp(1), u, v, H_INNER, Stencil::Central4)?;
    let im_y = d_dv(comp(1), u, v, H_INNER, Stencil::Central4)?;
    let dre = (re_x - im_y) * 0.5;
    let dim = (im_x + re_y) * 0.5;
    let nproj = |x: V4| g.frame.normal_coords(&x).norm_squared();
    Ok((nproj(dre) + nproj(dim)).sqrt())
}

/// `|normal part of dH|` measured along both coordinate directions in the
/// chart frame.
pub fn parallel_h_residual(chart: &SurfaceChart, u: f64, v: f64) -> Result<f64> {
    let g = PointGeometry::near(chart, u, v)?;
    let hf = |a: f64, b: f64| Ok(PointGeometry::near(chart, a, b)?.h_amb());
    let hu = d_du(hf, u, v, H_INNER, Stencil::Central4)?;
    let hv = d_dv(hf, u, v, H_INNER, Stencil::Central4)?;
    let nu = g.frame.normal_coords(&hu).norm() / g.basis.a;
    let nv = g.frame.normal_coords(&hv).norm() / g.jet.fv.norm();
    Ok(nu.max(nv))
}

/// `phi = D xi` splitting with `xi = r (e3 +/- i e4)` and `d log r = +/- *omega34`.
#[derive(Debug, Clone, Serialize)]
pub struct RealParallelSplit {
    pub grid: Grid,
    pub sign: Sign,
    pub log_r: Vec<f64>,
    pub closure_residual: f64,
    /// Sup over interior nodes of `|normal part of dbar xi| / (|xi| scale)`.
    pub dbar_residual: f64,
}

pub fn real_parallel_split(chart: &SurfaceChart, grid: &Grid, sign: Sign) -> Result<RealParallelSplit> {
    use crate::lattice::{Axis, LineLattice, DEFAULT_SUBSTEPS};
    require_isothermal(chart)?;
    let grid = crate::lattice::open_grid(grid)?;
    let s = sign.s();
    let lat = LineLattice::build(&grid, DEFAULT_SUBSTEPS, |u, v| {
        let g = PointGeometry::near(chart, u, v)?;
        let w = g.basis.to_frame(omega34_pm_coord(chart, u, v, sign)?);
        let d = g.basis.to_coord([-s * w[1], s * w[0]]);
        Ok(d)
    })?;
    let rhs = |ax: Axis, c: &[f64; 2], _: &f64| if ax == Axis::U { c[0] } else { c[1] };
    let (log_r, closure_residual) = lat.integrate_checked(grid.center_index(), 0.0, &rhs, &|y| y);
    let frames: Vec<(V4, V4, PointGeometry)> = grid.try_map(|u, v| isotropic_frame(chart, u, v, sign))?;
    let re: Vec<V4> = frames.iter().zip(&log_r).map(|(f, l)| f.0 * l.exp()).collect();
    let im: Vec<V4> = frames.iter().zip(&log_r).map(|(f, l)| f.1 * (s * l.exp())).collect();
    let mut worst: f64 = 0.0;
    for k in 0..grid.len() {
        let (i, j) = grid.ij(k);
        if !grid.interior(i, j) {
            continue;
        }
        let (Some(rx), Some(ry), Some(ix), Some(iy)) =
            (grid.deriv_u(&re, i, j), grid.deriv_v(&re, i, j), grid.deriv_u(&im, i, j), grid.deriv_v(&im, i, j))
        else {
            continue;
        };
        let g = &frames[k].2;
        let a = g.frame.normal_coords(&((rx - iy) * 0.5)).norm_squared();
        let b = g.frame.normal_coords(&((ix + ry) * 0.5)).norm_squared();
        let xi = (re[k].norm_squared() + im[k].norm_squared()).sqrt();
        worst = worst.max((a + b).sqrt() / (xi * g.curvature_scale()));
    }
    Ok(RealParallelSplit { grid, sign, log_r, closure_residual, dbar_residual: worst })
}

#[cfg(test)]
mod tests;
