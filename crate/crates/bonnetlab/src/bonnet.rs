//! Bonnet mates: the angle system, the rotated Hopf data, moving-frame
//! reconstruction of the mate, distortion differentials and congruence.
//!
//! All integrations share one [`MateLattice`]: coefficients (metric, normal
//! gauge, Hopf data and `h`) are sampled once per grid and every member of a
//! family reuses them.

use nalgebra::{Matrix4, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{SurfaceChart, V4};
use crate::connection::omega12_coord;
use crate::error::{GeomError, Result};
use crate::fd::{d_du, d_dv, Stencil, H_INNER, H_OUTER};
use crate::grid::Grid;
use crate::invariants::{PointGeometry, SecondFundamentalData, C2};
use crate::lattice::{open_grid, reorthonormalize, Axis, LatticeState, LineLattice, DEFAULT_SUBSTEPS};
use crate::mixed::{analytic_data, exterior_of, h_pm, isotropic_frame, laplacian, AXIS_TINY};
use crate::Sign;

/// Involutivity threshold on `sup |A| / scale`.
pub const EPS_INVOL: f64 = 1e-4;
/// Slack allowed when checking that an angle stays in `[0, 2 pi]`.
pub const RANGE_TOL: f64 = 1e-6;
/// Relative floor for the gauge axis.
pub const GAUGE_FLOOR: f64 = 1e-3;
/// Gauss/Ricci residual of the source data above which reconstruction refuses.
pub const COMPAT_TOL: f64 = 1e-4;
pub const FRAME_TOL: f64 = 1e-6;
/// Relative factor of the noncongruence thresholds.
pub const CONGRUENCE_FACTOR: f64 = 1e-3;

const TAU: f64 = std::f64::consts::TAU;

/// Normal frame in which mate data is expressed and integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormalGauge {
    /// `e3` along the isotropic axis `u + s J v` of the sign.
    Isotropic(Sign),
    /// `e3 = H / |H|`.
    Mean,
}

pub(crate) fn gauge_e3(chart: &SurfaceChart, u: f64, v: f64, gauge: NormalGauge) -> Result<(V4, PointGeometry)> {
    match gauge {
        NormalGauge::Isotropic(sign) => {
            let (e3, _, g) = isotropic_frame(chart, u, v, sign)?;
            Ok((e3, g))
        }
        NormalGauge::Mean => {
            let g = PointGeometry::near(chart, u, v)?;
            let h = g.h_amb();
            let n = h.norm();
            if n <= AXIS_TINY * g.curvature_scale() {
                return Err(GeomError::MaskViolation { u, v });
            }
            Ok((h / n, g))
        }
    }
}

pub(crate) fn gauge_omega34(chart: &SurfaceChart, u: f64, v: f64, gauge: NormalGauge) -> Result<[f64; 2]> {
    let (e3, g) = gauge_e3(chart, u, v, gauge)?;
    let e4 = g.regauge(e3).frame.e[3];
    let f = |a: f64, b: f64| gauge_e3(chart, a, b, gauge).map(|x| x.0);
    let du = d_du(f, u, v, H_INNER, Stencil::Central4)?;
    let dv = d_dv(f, u, v, H_INNER, Stencil::Central4)?;
    Ok([du.dot(&e4), dv.dot(&e4)])
}

/// First gauge whose axis stays away from zero on every node.
pub fn choose_gauge(geoms: &[PointGeometry]) -> Result<NormalGauge> {
    for sign in Sign::BOTH {
        if geoms.iter().all(|g| g.sff.b(sign) > GAUGE_FLOOR * g.curvature_scale()) {
            return Ok(NormalGauge::Isotropic(sign));
        }
    }
    if geoms.iter().all(|g| g.sff.h.norm() > GAUGE_FLOOR * g.curvature_scale()) {
        return Ok(NormalGauge::Mean);
    }
    Err(GeomError::GaugeUnavailable)
}

/// Everything the mate equations need at one lattice sample, in the gauge.
#[derive(Debug, Clone, Copy)]
pub struct MateCoef {
    pub lambda: f64,
    pub omega12: [f64; 2],
    pub omega34: [f64; 2],
    pub sff: SecondFundamentalData,
    pub phi: [C2; 2],
    /// `h` of each sign; zero where the sign is not integrated.
    pub h: [Complex64; 2],
    pub scale: f64,
    /// Angle of the gauge `e3` in the chart's own normal frame.
    pub gauge_angle: f64,
}

fn mate_coef(chart: &SurfaceChart, u: f64, v: f64, gauge: NormalGauge, signs: [bool; 2]) -> Result<MateCoef> {
    let (e3, g) = gauge_e3(chart, u, v, gauge)?;
    let gg = g.regauge(e3);
    let lambda = gg.lambda();
    let mut h = [Complex64::new(0.0, 0.0); 2];
    for s in Sign::BOTH {
        if signs[s.index()] {
            h[s.index()] = h_pm(chart, u, v, s)?;
        }
    }
    Ok(MateCoef {
        lambda,
        omega12: omega12_coord(&gg),
        omega34: gauge_omega34(chart, u, v, gauge)?,
        sff: gg.sff,
        phi: [gg.sff.phi(Sign::Minus, lambda), gg.sff.phi(Sign::Plus, lambda)],
        h,
        scale: gg.curvature_scale(),
        gauge_angle: e3.dot(&g.frame.e[3]).atan2(e3.dot(&g.frame.e[2])),
    })
}

fn cnorm(x: &C2) -> f64 {
    (x[0].norm_sqr() + x[1].norm_sqr()).sqrt()
}

fn cis(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

/// `theta_zbar` prescribed by the angle system.
fn theta_dbar(sign: Sign, h: Complex64, theta: f64) -> Complex64 {
    let i = Complex64::i();
    match sign {
        Sign::Minus => i * h * (1.0 - cis(-theta)),
        Sign::Plus => -i * h * (1.0 - cis(theta)),
    }
}

fn theta_rhs(axis: Axis, sign: Sign, h: Complex64, theta: f64) -> f64 {
    let z = theta_dbar(sign, h, theta);
    match axis {
        Axis::U => 2.0 * z.re,
        Axis::V => 2.0 * z.im,
    }
}

/// `Psi = e^{i theta-} phi- + e^{-i theta+} phi+`.
pub fn rotated_hopf(c: &MateCoef, theta: [f64; 2]) -> C2 {
    c.phi[0] * cis(theta[0]) + c.phi[1] * cis(-theta[1])
}

/// Second fundamental form with mean curvature `H` and Hopf coefficient `psi`.
pub fn sff_from_hopf(h: &Vector2<f64>, psi: &C2, lambda: f64) -> SecondFundamentalData {
    let k = 2.0 / (lambda * lambda);
    let ut = Vector2::new(psi[0].re * k, psi[1].re * k);
    let vt = Vector2::new(-psi[0].im * k, -psi[1].im * k);
    SecondFundamentalData::from_alpha(h + ut, vt, h - ut)
}

/// Integrated state: both angles, the frame rows `eps_1..eps_4` and the point.
#[derive(Debug, Clone)]
pub struct MateState {
    pub theta: [f64; 2],
    pub frame: Matrix4<f64>,
    pub pos: V4,
}

impl LatticeState for MateState {
    fn axpy(&self, a: f64, d: &Self) -> Self {
        MateState {
            theta: [self.theta[0] + a * d.theta[0], self.theta[1] + a * d.theta[1]],
            frame: self.frame + d.frame * a,
            pos: self.pos + d.pos * a,
        }
    }
    fn dist(&self, o: &Self) -> f64 {
        let t = (self.theta[0] - o.theta[0]).abs().max((self.theta[1] - o.theta[1]).abs());
        t.max((self.frame - o.frame).amax()).max((self.pos - o.pos).norm())
    }
}

fn mate_rhs(axis: Axis, c: &MateCoef, y: &MateState, active: [bool; 2]) -> MateState {
    let mut dtheta = [0.0; 2];
    for s in Sign::BOTH {
        if active[s.index()] {
            dtheta[s.index()] = theta_rhs(axis, s, c.h[s.index()], y.theta[s.index()]);
        }
    }
    let a = sff_from_hopf(&c.sff.h, &rotated_hopf(c, y.theta), c.lambda);
    let l = c.lambda;
    let (k, a1, a2) = match axis {
        Axis::U => (0, a.alpha11, a.alpha12),
        Axis::V => (1, a.alpha12, a.alpha22),
    };
    let mut w = Matrix4::zeros();
    let mut set = |p: usize, q: usize, x: f64| {
        w[(p, q)] = x;
        w[(q, p)] = -x;
    };
    set(0, 1, c.omega12[k]);
    set(0, 2, l * a1[0]);
    set(0, 3, l * a1[1]);
    set(1, 2, l * a2[0]);
    set(1, 3, l * a2[1]);
    set(2, 3, c.omega34[k]);
    let row: V4 = y.frame.row(k).transpose();
    MateState { theta: dtheta, frame: w * y.frame, pos: row * l }
}

fn frame_defect(f: &Matrix4<f64>) -> f64 {
    (f * f.transpose() - Matrix4::identity()).amax()
}

/// Solution of the angle system for one sign.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaField {
    pub sign: Sign,
    pub grid: Grid,
    /// Node values, unwrapped; they start in `[0, 2 pi)`.
    pub theta: Vec<f64>,
    pub base_point: (f64, f64),
    pub base_value: f64,
    pub closure_residual: f64,
    /// `sup |Delta theta|` with the surface Laplacian.
    pub harmonic_residual: f64,
    /// `sup |theta_zbar - rhs|`.
    pub system_residual: f64,
    /// Residual of the quadratic relation between `A` and `e^{i theta}`.
    pub root_residual: f64,
    pub constant: bool,
}

/// Hopf data of a mate on the shared grid.
#[derive(Debug, Clone, Serialize)]
pub struct MateFundamentalData {
    pub grid: Grid,
    pub gauge: NormalGauge,
    pub theta: [Vec<f64>; 2],
    pub lambda: Vec<f64>,
    #[serde(skip)]
    pub psi: Vec<C2>,
    pub mean_curvature: Vec<[f64; 2]>,
    pub omega34: Vec<[f64; 2]>,
    pub gauss_residual: f64,
    pub ricci_residual: f64,
    /// Codazzi residual of each isotropic part of `Psi` (interior nodes).
    pub codazzi_residual: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructedSurface {
    pub grid: Grid,
    pub theta0: [f64; 2],
    pub f_tilde: Vec<V4>,
    /// Rows are `eps_1..eps_4`.
    pub frames: Vec<Matrix4<f64>>,
    pub theta: [Vec<f64>; 2],
    /// Angle of the gauge `e3` in the chart's normal frame; the mate normal
    /// frame is the image of the gauge frame.
    pub t_gauge: Vec<f64>,
    pub closure_residual: f64,
    pub frame_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistortionField {
    pub grid: Grid,
    #[serde(skip)]
    pub q: [Vec<Option<C2>>; 2],
    /// Isotropic parts of the mate's Hopf coefficient, recomputed from `f_tilde`.
    #[serde(skip)]
    pub phi_tilde: [Vec<Option<C2>>; 2],
    /// `sup |Q| / lambda^2`.
    pub sup_norm: f64,
    /// `sup |Q - (1 - e^{-/+ i theta}) phi| / (lambda^2 scale)`.
    pub closed_form_deviation: f64,
    /// `sup |nabla_zbar Q| / (lambda^2 scale^2)`.
    pub holomorphy_residual: f64,
}

/// Invariants of a reconstruction measured from its node positions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MateErrors {
    pub metric: f64,
    pub mean_curvature: f64,
    pub normal_curvature: f64,
    pub ellipse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CongruenceReport {
    /// `a ~ rotation * b + translation`.
    pub rotation: Matrix4<f64>,
    pub translation: V4,
    /// RMS misfit after alignment.
    pub residual: f64,
    pub diameter: f64,
    pub q_sup: f64,
    pub scale: f64,
    pub noncongruent: bool,
}

/// Least-squares `a ~ R b + t` over `O(4)`; returns `(R, t, rms)`.
pub fn procrustes(a: &[V4], b: &[V4]) -> (Matrix4<f64>, V4, f64) {
    let n = a.len().min(b.len()).max(1) as f64;
    let ca: V4 = a.iter().sum::<V4>() / n;
    let cb: V4 = b.iter().sum::<V4>() / n;
    let m: Matrix4<f64> = a.iter().zip(b).map(|(x, y)| (x - ca) * (y - cb).transpose()).sum();
    let svd = m.svd(true, true);
    let r = svd.u.expect("requested") * svd.v_t.expect("requested");
    let t = ca - r * cb;
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - (r * y + t)).norm_squared()).sum();
    (r, t, (ss / n).sqrt())
}

/// Bounding-box diagonal.
pub fn diameter(pts: &[V4]) -> f64 {
    let mut lo = V4::repeat(f64::INFINITY);
    let mut hi = V4::repeat(f64::NEG_INFINITY);
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    if pts.is_empty() {
        0.0
    } else {
        (hi - lo).norm()
    }
}

/// Rigid alignment of two point grids plus the noncongruence verdict.
pub fn congruence_test(a: &[V4], b: &[V4], q_sup: f64, scale: f64) -> CongruenceReport {
    let (rotation, translation, residual) = procrustes(a, b);
    let diameter = diameter(a);
    let noncongruent = residual > CONGRUENCE_FACTOR * diameter && q_sup > CONGRUENCE_FACTOR * scale;
    CongruenceReport { rotation, translation, residual, diameter, q_sup, scale, noncongruent }
}

fn pi_sign(sign: Sign, x: &Vector2<f64>) -> C2 {
    let s = sign.s();
    C2::new(Complex64::new(0.5 * x[0], -0.5 * s * x[1]), Complex64::new(0.5 * x[1], 0.5 * s * x[0]))
}

/// Seven-point central difference of grid samples (first or second
/// derivative), `None` near an open edge.
pub(crate) fn d6(grid: &Grid, vals: &[V4], (i, j): (usize, usize), axis: Axis, second: bool) -> Option<V4> {
    let at = |d: isize| -> Option<V4> {
        match axis {
            Axis::U => grid.shift_u(i, d).map(|ii| vals[grid.idx(ii, j)]),
            Axis::V => grid.shift_v(j, d).map(|jj| vals[grid.idx(i, jj)]),
        }
    };
    let f: [V4; 7] = [at(-3)?, at(-2)?, at(-1)?, at(0)?, at(1)?, at(2)?, at(3)?];
    let h = match axis {
        Axis::U => grid.du(),
        Axis::V => grid.dv(),
    };
    Some(if second {
        (f[0] * 2.0 - f[1] * 27.0 + f[2] * 270.0 - f[3] * 490.0 + f[4] * 270.0 - f[5] * 27.0 + f[6] * 2.0) / (180.0 * h * h)
    } else {
        (-f[0] + f[1] * 9.0 - f[2] * 45.0 + f[4] * 45.0 - f[5] * 9.0 + f[6]) / (60.0 * h)
    })
}

/// Both five-point stencils around `(i, j)` only touch valid nodes.
fn stencil_ok(grid: &Grid, valid: &[bool], i: usize, j: usize) -> bool {
    (-2..=2).all(|d| {
        grid.shift_u(i, d).is_some_and(|ii| valid[grid.idx(ii, j)])
            && grid.shift_v(j, d).is_some_and(|jj| valid[grid.idx(i, jj)])
    })
}

/// `nabla_zbar` (or `nabla_z`) of a normal section given by complex
/// coordinate grids, with the gauge normal connection `w`.
fn nabla_complex(grid: &Grid, x: &[Vec<Complex64>; 2], w: &[[f64; 2]], i: usize, j: usize, bar: bool) -> Option<[Complex64; 2]> {
    let k = grid.idx(i, j);
    let du = [grid.deriv_u(&x[0], i, j)? - x[1][k] * w[k][0], grid.deriv_u(&x[1], i, j)? + x[0][k] * w[k][0]];
    let dv = [grid.deriv_v(&x[0], i, j)? - x[1][k] * w[k][1], grid.deriv_v(&x[1], i, j)? + x[0][k] * w[k][1]];
    let s = if bar { Complex64::i() } else { -Complex64::i() };
    Some([(du[0] + s * dv[0]) * 0.5, (du[1] + s * dv[1]) * 0.5])
}

fn split(x: impl Iterator<Item = C2>) -> [Vec<Complex64>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for p in x {
        out[0].push(p[0]);
        out[1].push(p[1]);
    }
    out
}

/// Sampled coefficients plus per-node source data for one chart, grid and
/// set of integrated signs.
pub struct MateLattice {
    pub grid: Grid,
    pub gauge: NormalGauge,
    pub signs: [bool; 2],
    pub lattice: LineLattice<MateCoef>,
    pub base: (usize, usize),
    pub base_frame: Matrix4<f64>,
    pub base_pos: V4,
    /// Chart positions at the nodes.
    pub source: Vec<V4>,
    /// `A` of each integrated sign at the nodes.
    pub a: [Vec<Option<Complex64>>; 2],
    pub sup_a: [f64; 2],
    /// Intrinsic curvature `-Delta log lambda` at the nodes.
    pub k_intrinsic: Vec<f64>,
    /// `d omega34 (e1, e2)` of the gauge at the nodes.
    pub d_omega34: Vec<f64>,
    pub max_scale: f64,
}

impl MateLattice {
    pub fn new(chart: &SurfaceChart, grid: &Grid, signs: [bool; 2], substeps: usize) -> Result<MateLattice> {
        if !chart.isothermal {
            return Err(GeomError::NonIsothermalChart);
        }
        let grid = open_grid(grid)?;
        let geoms = grid.try_map(|u, v| PointGeometry::at(chart, u, v))?;
        let gauge = choose_gauge(&geoms)?;
        let max_scale = geoms.iter().map(|g| g.curvature_scale()).fold(1.0, f64::max);
        let mut a: [Vec<Option<Complex64>>; 2] = [vec![None; grid.len()], vec![None; grid.len()]];
        let mut sup_a = [0.0; 2];
        for s in Sign::BOTH {
            if signs[s.index()] {
                let data = analytic_data(chart, &grid, s)?;
                let limit = EPS_INVOL * max_scale;
                if data.sup_a > limit {
                    return Err(GeomError::NotInvolutive { sup_a: data.sup_a, limit });
                }
                sup_a[s.index()] = data.sup_a;
                a[s.index()] = data.a;
            }
        }
        let lattice = LineLattice::build(&grid, substeps, |u, v| mate_coef(chart, u, v, gauge, signs))?;
        let base = grid.center_index();
        let (bu, bv) = grid.node(base.0, base.1);
        let (e3, g) = gauge_e3(chart, bu, bv, gauge)?;
        let gg = g.regauge(e3);
        let base_frame = Matrix4::from_rows(&[
            gg.frame.e[0].transpose(),
            gg.frame.e[1].transpose(),
            gg.frame.e[2].transpose(),
            gg.frame.e[3].transpose(),
        ]);
        let source = grid.try_map(|u, v| chart.value(u, v))?;
        let pts = grid.map(|u, v| (u, v));
        let k_intrinsic: Vec<f64> = pts
            .par_iter()
            .map(|&(u, v)| laplacian(chart, u, v, |a, b| Ok(chart.jet_near(a, b)?.fu.norm().ln())).map(|x| -x))
            .collect::<Result<_>>()?;
        let d_omega34: Vec<f64> = pts
            .par_iter()
            .map(|&(u, v)| exterior_of(chart, u, v, H_OUTER, |a, b| gauge_omega34(chart, a, b, gauge)))
            .collect::<Result<_>>()?;
        let ml = MateLattice {
            grid,
            gauge,
            signs,
            lattice,
            base,
            base_frame,
            base_pos: gg.jet.f,
            source,
            a,
            sup_a,
            k_intrinsic,
            d_omega34,
            max_scale,
        };
        let (gauss, ricci) = ml.compatibility(&[0.0; 2].map(|_| vec![0.0; ml.grid.len()]));
        let worst = gauss.max(ricci);
        if worst > COMPAT_TOL {
            return Err(GeomError::CompatibilityViolation { residual: worst, limit: COMPAT_TOL });
        }
        Ok(ml)
    }

    pub fn coef(&self, k: usize) -> &MateCoef {
        let (i, j) = self.grid.ij(k);
        self.lattice.at_node(i, j)
    }

    fn check_sign(&self, sign: Sign, theta0: f64) -> Result<f64> {
        let t = theta0.rem_euclid(TAU);
        let t = if TAU - t < 1e-14 { 0.0 } else { t };
        if t != 0.0 && !self.signs[sign.index()] {
            return Err(GeomError::BadParameter {
                name: "theta0".into(),
                reason: format!("sign {} was not prepared for integration", sign.as_char()),
            });
        }
        Ok(t)
    }

    fn range_check(&self, theta: &[f64]) -> Result<()> {
        for (k, &t) in theta.iter().enumerate() {
            if !(-RANGE_TOL..=TAU + RANGE_TOL).contains(&t) {
                let (u, v) = self.grid.node(self.grid.ij(k).0, self.grid.ij(k).1);
                return Err(GeomError::RangeEscape { u, v, value: t });
            }
        }
        Ok(())
    }

    pub fn solve_theta(&self, sign: Sign, theta0: f64) -> Result<ThetaField> {
        let t0 = self.check_sign(sign, theta0)?;
        let g = &self.grid;
        let si = sign.index();
        let (theta, closure_residual) = if t0 == 0.0 {
            (vec![0.0; g.len()], 0.0)
        } else {
            let rhs = |ax: Axis, c: &MateCoef, y: &f64| theta_rhs(ax, sign, c.h[si], *y);
            self.lattice.integrate_checked(self.base, t0, &rhs, &|y| y)
        };
        self.range_check(&theta)?;
        let mut harmonic_residual: f64 = 0.0;
        let mut system_residual: f64 = 0.0;
        let mut root_residual: f64 = 0.0;
        let e = |x: f64| if sign == Sign::Minus { cis(-x) } else { cis(x) };
        for k in 0..g.len() {
            let (i, j) = g.ij(k);
            if !g.interior(i, j) {
                continue;
            }
            let c = self.coef(k);
            let lap = g.deriv_uu(&theta, i, j).unwrap() + g.deriv_vv(&theta, i, j).unwrap();
            harmonic_residual = harmonic_residual.max((lap / (c.lambda * c.lambda)).abs());
            let dbar = Complex64::new(0.5 * g.deriv_u(&theta, i, j).unwrap(), 0.5 * g.deriv_v(&theta, i, j).unwrap());
            system_residual = system_residual.max((dbar - theta_dbar(sign, c.h[si], theta[k])).norm());
            if let Some(a) = self.a[si][k] {
                // roots are e^{-/+ i theta}
                let x = e(theta[k]);
                let r = a * x * x - 2.0 * Complex64::i() * a.im * x - a.conj();
                root_residual = root_residual.max(r.norm());
            }
        }
        let (bi, bj) = self.base;
        let constant = theta.iter().all(|&t| (t - t0).abs() < 1e-12);
        Ok(ThetaField {
            sign,
            grid: *g,
            theta,
            base_point: g.node(bi, bj),
            base_value: t0,
            closure_residual,
            harmonic_residual,
            system_residual,
            root_residual,
            constant,
        })
    }

    /// Max scaled Gauss and Ricci residuals of the data rotated by `theta`.
    fn compatibility(&self, theta: &[Vec<f64>; 2]) -> (f64, f64) {
        let mut gauss: f64 = 0.0;
        let mut ricci: f64 = 0.0;
        for k in 0..self.grid.len() {
            let c = self.coef(k);
            let a = sff_from_hopf(&c.sff.h, &rotated_hopf(c, [theta[0][k], theta[1][k]]), c.lambda);
            let s2 = c.scale * c.scale;
            gauss = gauss.max((self.k_intrinsic[k] - a.gauss_k(0.0)).abs() / s2);
            ricci = ricci.max((self.d_omega34[k] + a.normal_k()).abs() / s2);
        }
        (gauss, ricci)
    }

    /// Hopf data of the mate with node angles `theta` (`None` means zero).
    pub fn mate_data(&self, theta: [Option<&ThetaField>; 2]) -> MateFundamentalData {
        let g = &self.grid;
        let theta: [Vec<f64>; 2] = [0, 1].map(|s| theta[s].map(|t| t.theta.clone()).unwrap_or_else(|| vec![0.0; g.len()]));
        let psi: Vec<C2> = (0..g.len()).map(|k| rotated_hopf(self.coef(k), [theta[0][k], theta[1][k]])).collect();
        let (gauss_residual, ricci_residual) = self.compatibility(&theta);
        let w: Vec<[f64; 2]> = (0..g.len()).map(|k| self.coef(k).omega34).collect();
        let mut codazzi_residual = [0.0; 2];
        for s in Sign::BOTH {
            let si = s.index();
            let part = split((0..g.len()).map(|k| {
                let ph = if s == Sign::Minus { cis(theta[0][k]) } else { cis(-theta[1][k]) };
                self.coef(k).phi[si] * ph
            }));
            let hp = split((0..g.len()).map(|k| pi_sign(s, &self.coef(k).sff.h)));
            let mut worst: f64 = 0.0;
            for k in 0..g.len() {
                let (i, j) = g.ij(k);
                if !g.interior(i, j) {
                    continue;
                }
                let c = self.coef(k);
                let l = nabla_complex(g, &part, &w, i, j, true).unwrap();
                let r = nabla_complex(g, &hp, &w, i, j, false).unwrap();
                let f = 0.5 * c.lambda * c.lambda;
                let res = ((l[0] - r[0] * f).norm_sqr() + (l[1] - r[1] * f).norm_sqr()).sqrt();
                worst = worst.max(res / (c.lambda * c.lambda * c.scale * c.scale));
            }
            codazzi_residual[si] = worst;
        }
        MateFundamentalData {
            grid: *g,
            gauge: self.gauge,
            lambda: (0..g.len()).map(|k| self.coef(k).lambda).collect(),
            mean_curvature: (0..g.len()).map(|k| [self.coef(k).sff.h[0], self.coef(k).sff.h[1]]).collect(),
            omega34: w,
            theta,
            psi,
            gauss_residual,
            ricci_residual,
            codazzi_residual,
        }
    }

    /// Integrate angles, frame and position jointly from the base node.
    pub fn reconstruct(&self, theta0: [f64; 2], seed_frame: Option<Matrix4<f64>>, seed_point: Option<V4>) -> Result<ReconstructedSurface> {
        let t0 = [self.check_sign(Sign::Minus, theta0[0])?, self.check_sign(Sign::Plus, theta0[1])?];
        let active = [t0[0] != 0.0, t0[1] != 0.0];
        let frame0 = seed_frame.unwrap_or(self.base_frame);
        if frame_defect(&frame0) > FRAME_TOL {
            return Err(GeomError::FrameBlowup { defect: frame_defect(&frame0) });
        }
        let y0 = MateState { theta: t0, frame: frame0, pos: seed_point.unwrap_or(self.base_pos) };
        let rhs = |ax: Axis, c: &MateCoef, y: &MateState| mate_rhs(ax, c, y, active);
        let project = |mut y: MateState| {
            y.frame = reorthonormalize(&y.frame);
            y
        };
        let (vals, closure_residual) = self.lattice.integrate_checked(self.base, y0, &rhs, &project);
        let defect = vals.iter().map(|y| frame_defect(&y.frame)).fold(0.0, f64::max);
        if !(defect <= FRAME_TOL) {
            return Err(GeomError::FrameBlowup { defect });
        }
        let theta = [0, 1].map(|s| vals.iter().map(|y| y.theta[s]).collect::<Vec<f64>>());
        for s in Sign::BOTH {
            self.range_check(&theta[s.index()])?;
        }
        Ok(ReconstructedSurface {
            grid: self.grid,
            theta0: t0,
            f_tilde: vals.iter().map(|y| y.pos).collect(),
            frames: vals.iter().map(|y| y.frame).collect(),
            theta,
            t_gauge: (0..self.grid.len()).map(|k| self.coef(k).gauge_angle).collect(),
            closure_residual,
            frame_defect: defect,
        })
    }

    /// Second fundamental form of the mate from sixth-order grid differences,
    /// in its integrated normal frame.
    fn mate_sff(&self, mate: &ReconstructedSurface) -> Vec<Option<(V4, V4, SecondFundamentalData)>> {
        let g = &self.grid;
        let p = &mate.f_tilde;
        let fv: Vec<V4> = (0..g.len()).map(|k| d6(g, p, g.ij(k), Axis::V, false).unwrap_or_else(V4::zeros)).collect();
        (0..g.len())
            .map(|k| {
                let ij = g.ij(k);
                let c = self.coef(k);
                let l2 = c.lambda * c.lambda;
                let fr = &mate.frames[k];
                let n3: V4 = fr.row(2).transpose();
                let n4: V4 = fr.row(3).transpose();
                let nc = |x: V4| Vector2::new(x.dot(&n3), x.dot(&n4)) / l2;
                let fuu = d6(g, p, ij, Axis::U, true)?;
                let fvv = d6(g, p, ij, Axis::V, true)?;
                let fuv = d6(g, &fv, ij, Axis::U, false)?;
                let sff = SecondFundamentalData::from_alpha(nc(fuu), nc(fuv), nc(fvv));
                Some((d6(g, p, ij, Axis::U, false)?, fv[k], sff))
            })
            .collect()
    }

    /// Metric, `|H|`, `K_N` and ellipse errors of a reconstruction.
    pub fn mate_errors(&self, mate: &ReconstructedSurface) -> MateErrors {
        let mut e = MateErrors { metric: 0.0, mean_curvature: 0.0, normal_curvature: 0.0, ellipse: 0.0 };
        for (k, m) in self.mate_sff(mate).iter().enumerate() {
            let Some((fu, fv, s)) = m else { continue };
            let c = self.coef(k);
            let l2 = c.lambda * c.lambda;
            let met = (fu.norm_squared() - l2).abs().max((fv.norm_squared() - l2).abs()).max(fu.dot(fv).abs()) / l2;
            e.metric = e.metric.max(met);
            let h = c.sff.h.norm();
            e.mean_curvature = e.mean_curvature.max((s.h.norm() - h).abs() / h.max(GAUGE_FLOOR * c.scale));
            let kn = c.sff.normal_k();
            e.normal_curvature = e.normal_curvature.max((s.normal_k() - kn).abs() / kn.abs().max(c.scale * c.scale));
            let (a1, b1, _) = c.sff.ellipse();
            let (a2, b2, _) = s.ellipse();
            e.ellipse = e.ellipse.max((a1 - a2).abs().max((b1 - b2).abs()) / c.scale);
        }
        e
    }

    /// Distortion differentials `Q = phi - T^{-1} phi_tilde` per sign.
    pub fn distortion(&self, mate: &ReconstructedSurface) -> DistortionField {
        let g = &self.grid;
        let sffs = self.mate_sff(mate);
        let phi_tilde: [Vec<Option<C2>>; 2] = [Sign::Minus, Sign::Plus].map(|s| {
            sffs.iter().enumerate().map(|(k, m)| m.as_ref().map(|x| x.2.phi(s, self.coef(k).lambda))).collect()
        });
        let q: [Vec<Option<C2>>; 2] = [0, 1].map(|s| {
            phi_tilde[s].iter().enumerate().map(|(k, p)| p.map(|p| self.coef(k).phi[s] - p)).collect()
        });
        let mut sup_norm: f64 = 0.0;
        let mut closed_form_deviation: f64 = 0.0;
        let mut holomorphy_residual: f64 = 0.0;
        let w: Vec<[f64; 2]> = (0..g.len()).map(|k| self.coef(k).omega34).collect();
        for s in Sign::BOTH {
            let si = s.index();
            let valid: Vec<bool> = q[si].iter().map(|x| x.is_some()).collect();
            let arr = split(q[si].iter().map(|x| x.unwrap_or_else(C2::zeros)));
            for k in 0..g.len() {
                let Some(qk) = q[si][k] else { continue };
                let c = self.coef(k);
                let l2 = c.lambda * c.lambda;
                sup_norm = sup_norm.max(cnorm(&qk) / l2);
                let th = mate.theta[si][k];
                let rot = if s == Sign::Minus { cis(th) } else { cis(-th) };
                let closed = c.phi[si] * (Complex64::new(1.0, 0.0) - rot);
                closed_form_deviation = closed_form_deviation.max(cnorm(&(qk - closed)) / (l2 * c.scale));
                let (i, j) = g.ij(k);
                if stencil_ok(g, &valid, i, j) {
                    let d = nabla_complex(g, &arr, &w, i, j, true).unwrap();
                    let r = (d[0].norm_sqr() + d[1].norm_sqr()).sqrt();
                    holomorphy_residual = holomorphy_residual.max(r / (l2 * c.scale * c.scale));
                }
            }
        }
        DistortionField { grid: *g, q, phi_tilde, sup_norm, closed_form_deviation, holomorphy_residual }
    }
}

/// Angle field of one sign, preparing only what that sign needs.
pub fn solve_theta(chart: &SurfaceChart, grid: &Grid, sign: Sign, theta0: f64) -> Result<ThetaField> {
    let mut signs = [false; 2];
    signs[sign.index()] = true;
    MateLattice::new(chart, grid, signs, DEFAULT_SUBSTEPS)?.solve_theta(sign, theta0)
}

/// Per-member results of a family run.
#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub theta0: [f64; 2],
    pub errors: MateErrors,
    pub closure_residual: f64,
    pub frame_defect: f64,
    /// Alignment against the source chart.
    pub to_source: CongruenceReport,
    pub distortion_sup: f64,
    pub closed_form_deviation: f64,
    pub holomorphy_residual: f64,
    pub gauss_residual: f64,
    pub ricci_residual: f64,
    pub codazzi_residual: [f64; 2],
    pub harmonic_residual: [f64; 2],
    pub system_residual: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub chart: String,
    pub grid: Grid,
    /// Every requested sign has vanishing Hopf part; the family is the source alone.
    pub collapsed: bool,
    pub gauge: Option<NormalGauge>,
    pub sup_a: [f64; 2],
    pub samples: Vec<SampleReport>,
    /// Pairwise RMS misfit after optimal alignment.
    pub pairwise_residual: Vec<Vec<f64>>,
    pub pairwise_noncongruent: Vec<Vec<bool>>,
    pub all_pairwise_noncongruent: bool,
    #[serde(skip)]
    pub members: Vec<ReconstructedSurface>,
}

fn is_zero_angle(t: f64) -> bool {
    let r = t.rem_euclid(TAU);
    r == 0.0 || TAU - r < 1e-14
}

/// Reconstruct every `(theta-, theta+)` combination of the two lists (an
/// empty list means the trivial angle) and compare members pairwise.
pub fn moduli_sample(chart: &SurfaceChart, grid: &Grid, thetas_minus: &[f64], thetas_plus: &[f64]) -> Result<FamilyReport> {
    let tm: Vec<f64> = if thetas_minus.is_empty() { vec![0.0] } else { thetas_minus.to_vec() };
    let tp: Vec<f64> = if thetas_plus.is_empty() { vec![0.0] } else { thetas_plus.to_vec() };
    let signs = [tm.iter().any(|&t| !is_zero_angle(t)), tp.iter().any(|&t| !is_zero_angle(t))];
    let open = open_grid(grid)?;
    let geoms = open.try_map(|u, v| PointGeometry::at(chart, u, v))?;
    let vanishes = |s: Sign| geoms.iter().all(|g| g.sff.b(s) <= GAUGE_FLOOR * g.curvature_scale());
    let requested: Vec<Sign> = Sign::BOTH.into_iter().filter(|s| signs[s.index()]).collect();
    if !requested.is_empty() && requested.iter().all(|&s| vanishes(s)) {
        return Ok(FamilyReport {
            chart: chart.name.clone(),
            grid: open,
            collapsed: true,
            gauge: None,
            sup_a: [0.0; 2],
            samples: vec![],
            pairwise_residual: vec![],
            pairwise_noncongruent: vec![],
            all_pairwise_noncongruent: true,
            members: vec![],
        });
    }
    let ml = MateLattice::new(chart, grid, signs, DEFAULT_SUBSTEPS)?;
    let combos: Vec<[f64; 2]> = tm.iter().flat_map(|&a| tp.iter().map(move |&b| [a, b])).collect();
    let runs: Vec<(SampleReport, ReconstructedSurface, DistortionField)> = combos
        .par_iter()
        .map(|&t| -> Result<_> {
            let mate = ml.reconstruct(t, None, None)?;
            let fields = [Sign::Minus, Sign::Plus].map(|s| ml.solve_theta(s, t[s.index()]));
            let [fm, fp] = fields;
            let (fm, fp) = (fm?, fp?);
            let data = ml.mate_data([Some(&fm), Some(&fp)]);
            let dist = ml.distortion(&mate);
            let to_source = congruence_test(&ml.source, &mate.f_tilde, dist.sup_norm, ml.max_scale);
            let rep = SampleReport {
                theta0: mate.theta0,
                errors: ml.mate_errors(&mate),
                closure_residual: mate.closure_residual,
                frame_defect: mate.frame_defect,
                to_source,
                distortion_sup: dist.sup_norm,
                closed_form_deviation: dist.closed_form_deviation,
                holomorphy_residual: dist.holomorphy_residual,
                gauss_residual: data.gauss_residual,
                ricci_residual: data.ricci_residual,
                codazzi_residual: data.codazzi_residual,
                harmonic_residual: [fm.harmonic_residual, fp.harmonic_residual],
                system_residual: [fm.system_residual, fp.system_residual],
            };
            Ok((rep, mate, dist))
        })
        .collect::<Result<_>>()?;
    let n = runs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let results: Vec<(f64, bool)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let q = hopf_gap(&ml, &runs[a].2, &runs[b].2);
            let r = congruence_test(&runs[a].1.f_tilde, &runs[b].1.f_tilde, q, ml.max_scale);
            (r.residual, r.noncongruent)
        })
        .collect();
    let mut pairwise_residual = vec![vec![0.0; n]; n];
    let mut pairwise_noncongruent = vec![vec![false; n]; n];
    for (&(a, b), &(r, nc)) in pairs.iter().zip(&results) {
        pairwise_residual[a][b] = r;
        pairwise_residual[b][a] = r;
        pairwise_noncongruent[a][b] = nc;
        pairwise_noncongruent[b][a] = nc;
    }
    let all_pairwise_noncongruent = results.iter().all(|x| x.1);
    let mut samples = Vec::with_capacity(n);
    let mut members = Vec::with_capacity(n);
    for (rep, mate, _) in runs {
        samples.push(rep);
        members.push(mate);
    }
    Ok(FamilyReport {
        chart: chart.name.clone(),
        grid: ml.grid,
        collapsed: false,
        gauge: Some(ml.gauge),
        sup_a: ml.sup_a,
        samples,
        pairwise_residual,
        pairwise_noncongruent,
        all_pairwise_noncongruent,
        members,
    })
}

/// `sup |phi_tilde_a - phi_tilde_b| / lambda^2` over both signs.
fn hopf_gap(ml: &MateLattice, a: &DistortionField, b: &DistortionField) -> f64 {
    let mut sup: f64 = 0.0;
    for s in 0..2 {
        for (k, (x, y)) in a.phi_tilde[s].iter().zip(&b.phi_tilde[s]).enumerate() {
            if let (Some(x), Some(y)) = (x, y) {
                let l = ml.coef(k).lambda;
                sup = sup.max(cnorm(&(x - y)) / (l * l));
            }
        }
    }
    sup
}
