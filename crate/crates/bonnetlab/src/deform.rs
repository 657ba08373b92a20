//! Infinitesimal isometric deformations of isotropically isothermic
//! surfaces: variation forms of the connection, the bending field they
//! integrate to, and finite-`t` checks of what `f + t T` preserves.
//!
//! Forms are stored by frame components in a normal gauge `(e3, e4)` with
//! `phi_34 = 0`. The bivector `W` with `dW(X) = -sum phi_kl(X) e_k ^ e_l` and
//! the field `T` with `dT(X) = W . f_* X` are integrated jointly with
//! `log L` on the shared RK4 lattice.

use nalgebra::{SMatrix, SVector, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::bonnet::{choose_gauge, d6, gauge_e3, gauge_omega34, NormalGauge};
use crate::chart::{SurfaceChart, V4};
use crate::connection::{hodge, omega12_coord};
use crate::error::{GeomError, Result};
use crate::grid::Grid;
use crate::invariants::PointGeometry;
use crate::lattice::{open_grid, Axis, LineLattice, Order, DEFAULT_SUBSTEPS};
use crate::mixed::{costar_derivative, mixed_form_field, MixedPoint, DEFAULT_ISO_EPS};
use crate::Sign;

/// Structure-equation residual bound for constructed forms.
pub const SYSTEM_TOL: f64 = 1e-4;
/// Closure bound for `log L` (absolute) and for `W`, `T` (relative).
pub const CLOSURE_TOL: f64 = 1e-5;
/// Misfit against `C f + v`, relative to the field norm, above which a
/// bending field counts as nontrivial.
pub const NONTRIVIAL_THRESHOLD: f64 = 1e-2;
pub const DEFAULT_T_VALUES: [f64; 2] = [1e-2, 1e-3];
/// Ceiling of `B / scale` for the vanishing sign of superconformal input.
const SUPERCONFORMAL_TOL: f64 = 1e-8;
/// Floor of `|H| / scale` for the mean curvature gauge.
pub const MEAN_FLOOR: f64 = 1e-2;

/// Index pairs `k < l` of bivector and form components.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Components of a bivector on the pairs in [`PAIRS`] order.
pub type Bivector = [f64; 6];
/// `(w(e1), w(e2))`.
type Form = [f64; 2];
type FormTable = [[Form; 4]; 4];

pub fn wedge(x: &V4, y: &V4) -> Bivector {
    std::array::from_fn(|m| {
        let (p, q) = PAIRS[m];
        x[p] * y[q] - x[q] * y[p]
    })
}

/// `(X ^ Y) . Z = <Y, Z> X - <X, Z> Y`, extended linearly.
pub fn act(w: &Bivector, z: &V4) -> V4 {
    let mut out = V4::zeros();
    for (m, &(p, q)) in PAIRS.iter().enumerate() {
        out[p] += w[m] * z[q];
        out[q] -= w[m] * z[p];
    }
    out
}

fn w2(a: Form, b: Form) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn scaled(a: Form, s: f64) -> Form {
    [a[0] * s, a[1] * s]
}

fn put(t: &mut FormTable, k: usize, l: usize, w: Form) {
    t[k][l] = w;
    t[l][k] = [-w[0], -w[1]];
}

fn axis_index(ax: Axis) -> usize {
    match ax {
        Axis::U => 0,
        Axis::V => 1,
    }
}

fn rel(x: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        x / scale
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// `phi_23 = L (cos a, s sin a)` with `d log L = *Omega` of the sign `s`
    /// and `a` the angle of the isotropic axis in the gauge.
    Isothermic { sign: Sign },
    /// `phi_j3 = u omega_j4`, `phi_j4 = -u omega_j3` for a constant `u`.
    Trivial { u: f64 },
    Zero,
}

impl FormKind {
    fn iso_sign(self) -> Option<Sign> {
        match self {
            FormKind::Isothermic { sign } => Some(sign),
            _ => None,
        }
    }
}

/// Lattice sample: gauge frame, chart derivatives and connection forms.
#[derive(Debug, Clone, Copy)]
pub struct DeformCoef {
    pub frame: [V4; 4],
    pub fu: V4,
    pub fv: V4,
    pub lambda: f64,
    /// Frame components of `omega_kl` for the gauge frame.
    pub omega: FormTable,
    /// Coordinate components of `*Omega` for the isothermic sign.
    pub star_omega: [f64; 2],
    /// Angle of the isotropic axis of the isothermic sign in the gauge.
    pub phase: f64,
    pub scale: f64,
}

fn deform_coef(chart: &SurfaceChart, u: f64, v: f64, gauge: NormalGauge, iso: Option<Sign>) -> Result<DeformCoef> {
    let (e3, g) = gauge_e3(chart, u, v, gauge)?;
    let gg = g.regauge(e3);
    let mut omega = [[[0.0; 2]; 4]; 4];
    put(&mut omega, 0, 1, gg.basis.to_frame(omega12_coord(&gg)));
    put(&mut omega, 2, 3, gg.basis.to_frame(gauge_omega34(chart, u, v, gauge)?));
    for j in 0..2 {
        for a in 2..4 {
            put(&mut omega, j, a, [gg.sff.alpha(j, 0)[a - 2], gg.sff.alpha(j, 1)[a - 2]]);
        }
    }
    let (star_omega, phase) = match iso {
        Some(s) => {
            let mp = MixedPoint::at(chart, u, v, s)?;
            let w = mp.omega;
            ([-w[1], w[0]], mp.e3.dot(&gg.frame.e[3]).atan2(mp.e3.dot(&gg.frame.e[2])))
        }
        None => ([0.0; 2], 0.0),
    };
    Ok(DeformCoef {
        frame: gg.frame.e,
        fu: gg.jet.fu,
        fv: gg.jet.fv,
        lambda: gg.lambda(),
        omega,
        star_omega,
        phase,
        scale: gg.curvature_scale(),
    })
}

fn forms_at(kind: FormKind, c: &DeformCoef, l: f64) -> FormTable {
    let mut phi = [[[0.0; 2]; 4]; 4];
    match kind {
        FormKind::Isothermic { sign } => {
            let s = sign.s();
            let p23 = [l * c.phase.cos(), s * l * c.phase.sin()];
            let st = hodge(p23);
            put(&mut phi, 1, 2, p23);
            put(&mut phi, 0, 2, st);
            put(&mut phi, 0, 3, scaled(p23, s));
            put(&mut phi, 1, 3, scaled(st, -s));
        }
        FormKind::Trivial { u } => {
            for j in 0..2 {
                put(&mut phi, j, 2, scaled(c.omega[j][3], u));
                put(&mut phi, j, 3, scaled(c.omega[j][2], -u));
            }
        }
        FormKind::Zero => {}
    }
    phi
}

/// Sup residuals of the structure equations for the variations, relative to
/// the form size (algebraic equations) or form size times curvature scale
/// (2-form equations).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SystemResiduals {
    /// `|phi_12|`.
    pub tangent_variation: f64,
    /// `omega_1 ^ phi_1a + omega_2 ^ phi_2a`.
    pub coframe: f64,
    /// `d phi_12` against its quadratic terms.
    pub tangent: f64,
    /// `d phi_ja` against its quadratic terms.
    pub mixed: f64,
    /// `d phi_34` against its quadratic terms.
    pub normal: f64,
}

impl SystemResiduals {
    pub fn max(&self) -> f64 {
        [self.tangent_variation, self.coframe, self.tangent, self.mixed, self.normal].into_iter().fold(0.0, f64::max)
    }
}

fn system_residuals(grid: &Grid, coefs: &[DeformCoef], phi: &[FormTable]) -> SystemResiduals {
    let n = grid.len();
    let phi_scale = phi
        .iter()
        .flat_map(|t| PAIRS.iter().flat_map(move |&(k, l)| t[k][l]))
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if phi_scale == 0.0 {
        return SystemResiduals::default();
    }
    let kappa = coefs.iter().map(|c| c.scale).fold(1.0, f64::max);
    // coordinate components phi(d_u), phi(d_v) of every pair
    let coord: Vec<[Vec<f64>; 2]> = PAIRS
        .iter()
        .map(|&(k, l)| [0, 1].map(|x| (0..n).map(|m| coefs[m].lambda * phi[m][k][l][x]).collect()))
        .collect();
    let mut r = SystemResiduals::default();
    for m in 0..n {
        let (i, j) = grid.ij(m);
        let (p, w) = (&phi[m], &coefs[m].omega);
        r.tangent_variation = r.tangent_variation.max(p[0][1][0].abs().max(p[0][1][1].abs()));
        for a in 2..4 {
            r.coframe = r.coframe.max((p[0][a][1] - p[1][a][0]).abs());
        }
        if !grid.interior(i, j) {
            continue;
        }
        let l2 = coefs[m].lambda * coefs[m].lambda;
        let mut d = [[0.0; 4]; 4];
        for (q, &(k, l)) in PAIRS.iter().enumerate() {
            let (Some(a), Some(b)) = (grid.deriv_u(&coord[q][1], i, j), grid.deriv_v(&coord[q][0], i, j)) else { continue };
            d[k][l] = (a - b) / l2;
        }
        let mut tangent = d[0][1];
        for a in 2..4 {
            tangent -= w2(p[0][a], w[a][1]) + w2(w[0][a], p[a][1]);
        }
        r.tangent = r.tangent.max(tangent.abs());
        let mut normal = d[2][3];
        for jj in 0..2 {
            normal -= w2(p[2][jj], w[jj][3]) + w2(w[2][jj], p[jj][3]);
        }
        r.normal = r.normal.max(normal.abs());
        for jj in 0..2 {
            for a in 2..4 {
                let mut e = d[jj][a];
                for rr in 0..2 {
                    e -= w2(w[jj][rr], p[rr][a]);
                }
                for b in 2..4 {
                    e -= w2(p[jj][b], w[b][a]) + w2(w[jj][b], p[b][a]);
                }
                r.mixed = r.mixed.max(e.abs());
            }
        }
    }
    r.tangent_variation /= phi_scale;
    r.coframe /= phi_scale;
    let s2 = phi_scale * kappa;
    r.tangent /= s2;
    r.mixed /= s2;
    r.normal /= s2;
    r
}

/// Variations `phi_kl` of the connection forms on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct VariationForms {
    pub grid: Grid,
    pub kind: FormKind,
    /// Isotropic part of the Hopf differential kept parallel.
    pub preserved: Option<Sign>,
    pub gauge: NormalGauge,
    /// Frame components of `phi_kl`, `k < l`, in [`PAIRS`] order.
    pub phi: Vec<[Form; 6]>,
    pub l: Vec<f64>,
    /// Angle of the isotropic axis in the gauge.
    pub phase: Vec<f64>,
    pub log_l_closure: f64,
    /// `sup |d*Omega| / scale` of the isothermic sign.
    pub isothermic_residual: f64,
    pub residuals: SystemResiduals,
    pub base: (usize, usize),
    #[serde(skip)]
    lattice: LineLattice<DeformCoef>,
    #[serde(skip)]
    node_coefs: Vec<DeformCoef>,
}

impl VariationForms {
    pub fn coef(&self, k: usize) -> &DeformCoef {
        &self.node_coefs[k]
    }
}

/// Forms of the deformation preserving `Phi` of the sign opposite to
/// `sign`, built from the isothermicity of `sign` in its own isotropic gauge.
pub fn build_variation(chart: &SurfaceChart, grid: &Grid, sign: Sign) -> Result<VariationForms> {
    build_variation_with(chart, grid, sign, NormalGauge::Isotropic(sign), DEFAULT_SUBSTEPS)
}

pub fn build_variation_with(
    chart: &SurfaceChart,
    grid: &Grid,
    sign: Sign,
    gauge: NormalGauge,
    substeps: usize,
) -> Result<VariationForms> {
    if !chart.isothermal {
        return Err(GeomError::NonIsothermalChart);
    }
    let grid = open_grid(grid)?;
    let field = mixed_form_field(chart, &grid, sign)?;
    if let Some(k) = field.mask.iter().position(|&m| !m) {
        let (i, j) = grid.ij(k);
        let (u, v) = grid.node(i, j);
        return Err(GeomError::MaskViolation { u, v });
    }
    let scales: Vec<f64> = grid.try_map(|u, v| Ok(PointGeometry::at(chart, u, v)?.curvature_scale()))?;
    let costar = costar_derivative(chart, &field)?;
    let iso = costar.iter().zip(&scales).map(|(c, s)| c.unwrap_or(0.0).abs() / s).fold(0.0, f64::max);
    if iso > DEFAULT_ISO_EPS {
        return Err(GeomError::NotIsothermic { sup: iso });
    }
    assemble(chart, grid, FormKind::Isothermic { sign }, gauge, substeps, iso)
}

/// Forms of the rigid motion family with constant `u`.
pub fn trivial_variation(chart: &SurfaceChart, grid: &Grid, u: f64) -> Result<VariationForms> {
    let grid = open_grid(grid)?;
    let geoms = grid.try_map(|a, b| PointGeometry::at(chart, a, b))?;
    assemble(chart, grid, FormKind::Trivial { u }, choose_gauge(&geoms)?, DEFAULT_SUBSTEPS, 0.0)
}

pub fn zero_variation(chart: &SurfaceChart, grid: &Grid) -> Result<VariationForms> {
    let grid = open_grid(grid)?;
    let geoms = grid.try_map(|a, b| PointGeometry::at(chart, a, b))?;
    assemble(chart, grid, FormKind::Zero, choose_gauge(&geoms)?, DEFAULT_SUBSTEPS, 0.0)
}

fn assemble(
    chart: &SurfaceChart,
    grid: Grid,
    kind: FormKind,
    gauge: NormalGauge,
    substeps: usize,
    isothermic_residual: f64,
) -> Result<VariationForms> {
    if !chart.isothermal {
        return Err(GeomError::NonIsothermalChart);
    }
    let iso = kind.iso_sign();
    let lattice = LineLattice::build(&grid, substeps, |u, v| deform_coef(chart, u, v, gauge, iso))?;
    let base = grid.center_index();
    let (log_l, closure) = if iso.is_some() {
        let rhs = |ax: Axis, c: &DeformCoef, _: &f64| c.star_omega[axis_index(ax)];
        lattice.integrate_checked(base, 0.0, &rhs, &|y| y)
    } else {
        (vec![0.0; grid.len()], 0.0)
    };
    if closure > CLOSURE_TOL {
        return Err(GeomError::NonSimplyConnectedPath { residual: closure });
    }
    let node_coefs: Vec<DeformCoef> = (0..grid.len())
        .map(|k| {
            let (i, j) = grid.ij(k);
            *lattice.at_node(i, j)
        })
        .collect();
    let l: Vec<f64> = log_l.iter().map(|x| x.exp()).collect();
    let tables: Vec<FormTable> = (0..grid.len()).map(|k| forms_at(kind, &node_coefs[k], l[k])).collect();
    let residuals = system_residuals(&grid, &node_coefs, &tables);
    Ok(VariationForms {
        grid,
        kind,
        preserved: iso.map(Sign::opposite),
        gauge,
        phi: tables.iter().map(|t| PAIRS.map(|(k, l)| t[k][l])).collect(),
        l,
        phase: node_coefs.iter().map(|c| c.phase).collect(),
        log_l_closure: closure,
        isothermic_residual,
        residuals,
        base,
        lattice,
        node_coefs,
    })
}

type BendState = [f64; 11];

fn bending_rhs(kind: FormKind, ax: Axis, c: &DeformCoef, y: &BendState) -> BendState {
    let x = axis_index(ax);
    let mut out = [0.0; 11];
    out[0] = c.star_omega[x];
    let phi = forms_at(kind, c, y[0].exp());
    for &(k, l) in &PAIRS {
        let s = -c.lambda * phi[k][l][x];
        if s != 0.0 {
            let b = wedge(&c.frame[k], &c.frame[l]);
            for n in 0..6 {
                out[1 + n] += s * b[n];
            }
        }
    }
    let w: Bivector = std::array::from_fn(|n| y[1 + n]);
    let t = act(&w, if x == 0 { &c.fu } else { &c.fv });
    out[7..11].copy_from_slice(t.as_slice());
    out
}

/// Bending field `T` and its bivector potential `W` on the grid.
#[derive(Debug, Clone, Serialize)]
pub struct BendingField {
    pub grid: Grid,
    pub kind: FormKind,
    pub preserved: Option<Sign>,
    pub t: Vec<V4>,
    pub v: Vec<Bivector>,
    /// Row-first against column-first distance of `W`, relative to `sup |W|`.
    pub closure_bivector: f64,
    /// Same for `T`, relative to `sup |T|`.
    pub closure_field: f64,
    /// Root mean square of `|T|`.
    pub field_norm: f64,
    /// Best rigid-motion fit `C f + v`.
    pub trivial_rotation: Bivector,
    pub trivial_translation: V4,
    pub nontriviality_residual: f64,
    /// `<dT(X), f_* Y> + <f_* X, dT(Y)>` from grid differences of `T`.
    pub bending_residual: f64,
    /// Antisymmetry defect of `<D_{e_i} T, e_j>` relative to its size.
    pub skew_residual: f64,
    #[serde(skip)]
    pub source: Vec<V4>,
    #[serde(skip)]
    pub coefs: Vec<DeformCoef>,
}

impl BendingField {
    pub fn is_nontrivial(&self) -> bool {
        self.nontriviality_residual > NONTRIVIAL_THRESHOLD
    }

    /// Node positions of `f + t T`.
    pub fn deformed(&self, t: f64) -> Vec<V4> {
        self.source.iter().zip(&self.t).map(|(f, x)| f + x * t).collect()
    }
}

/// Least-squares fit of `T` by `C f + v`; returns `(C, v, misfit / |T|)`.
pub fn trivial_fit(source: &[V4], t: &[V4]) -> (Bivector, V4, f64) {
    let n = source.len().max(1) as f64;
    let mean = source.iter().fold(V4::zeros(), |a, b| a + b) / n;
    let row = |f: &V4, p: usize| {
        let mut r = SVector::<f64, 10>::zeros();
        for (m, &(a, b)) in PAIRS.iter().enumerate() {
            if a == p {
                r[m] = f[b];
            } else if b == p {
                r[m] = -f[a];
            }
        }
        r[6 + p] = 1.0;
        r
    };
    let mut ata = SMatrix::<f64, 10, 10>::zeros();
    let mut atb = SVector::<f64, 10>::zeros();
    let mut bb = 0.0;
    for (f, y) in source.iter().zip(t) {
        let fc = f - mean;
        for p in 0..4 {
            let r = row(&fc, p);
            ata += r * r.transpose();
            atb += r * y[p];
            bb += y[p] * y[p];
        }
    }
    if bb == 0.0 {
        return ([0.0; 6], V4::zeros(), 0.0);
    }
    let x = ata.lu().solve(&atb).unwrap_or_else(SVector::zeros);
    let mut rr = 0.0;
    for (f, y) in source.iter().zip(t) {
        let fc = f - mean;
        for p in 0..4 {
            rr += (row(&fc, p).dot(&x) - y[p]).powi(2);
        }
    }
    let c: Bivector = std::array::from_fn(|m| x[m]);
    let v = V4::new(x[6], x[7], x[8], x[9]) - act(&c, &mean);
    (c, v, (rr / bb).sqrt())
}

/// Integrate `W` and `T` from the variation forms, starting from zero at
/// the base node.
pub fn integrate_bending(chart: &SurfaceChart, forms: &VariationForms) -> Result<BendingField> {
    let g = forms.grid;
    let kind = forms.kind;
    let rhs = move |ax: Axis, c: &DeformCoef, y: &BendState| bending_rhs(kind, ax, c, y);
    let id = |y: BendState| y;
    let a = forms.lattice.integrate(forms.base, [0.0; 11], Order::RowFirst, &rhs, &id);
    let b = forms.lattice.integrate(forms.base, [0.0; 11], Order::ColumnFirst, &rhs, &id);
    let sup = |r: std::ops::Range<usize>| a.iter().flat_map(|y| y[r.clone()].iter().map(|x| x.abs())).fold(0.0, f64::max);
    let gap = |r: std::ops::Range<usize>| {
        a.iter().zip(&b).flat_map(|(x, y)| r.clone().map(move |n| (x[n] - y[n]).abs())).fold(0.0, f64::max)
    };
    let closure_bivector = rel(gap(1..7), sup(1..7));
    let closure_field = rel(gap(7..11), sup(7..11));
    let worst = closure_bivector.max(closure_field);
    if worst > CLOSURE_TOL {
        return Err(GeomError::ClosureFailure { residual: worst });
    }
    let t: Vec<V4> = a.iter().map(|y| V4::new(y[7], y[8], y[9], y[10])).collect();
    let v: Vec<Bivector> = a.iter().map(|y| std::array::from_fn(|n| y[1 + n])).collect();
    let source = g.try_map(|u, w| chart.value(u, w))?;
    let field_norm = (t.iter().map(|x| x.norm_squared()).sum::<f64>() / t.len() as f64).sqrt();
    let (trivial_rotation, trivial_translation, nontriviality_residual) = trivial_fit(&source, &t);
    let (bending_residual, skew_residual) = bending_defects(&g, &forms.node_coefs, &t);
    Ok(BendingField {
        grid: g,
        kind,
        preserved: forms.preserved,
        t,
        v,
        closure_bivector,
        closure_field,
        field_norm,
        trivial_rotation,
        trivial_translation,
        nontriviality_residual,
        bending_residual,
        skew_residual,
        source,
        coefs: forms.node_coefs.clone(),
    })
}

fn bending_defects(g: &Grid, coefs: &[DeformCoef], t: &[V4]) -> (f64, f64) {
    let (mut sym, mut size, mut skew, mut frame_size) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..g.len() {
        let ij = g.ij(k);
        let (Some(tu), Some(tv)) = (d6(g, t, ij, Axis::U, false), d6(g, t, ij, Axis::V, false)) else { continue };
        let c = &coefs[k];
        let m = [[tu.dot(&c.fu), tu.dot(&c.fv)], [tv.dot(&c.fu), tv.dot(&c.fv)]];
        let d = m[0][0].abs().max(m[1][1].abs()).max(0.5 * (m[0][1] + m[1][0]).abs());
        sym = sym.max(d);
        size = size.max(c.lambda * tu.norm().max(tv.norm()));
        let l2 = c.lambda * c.lambda;
        skew = skew.max(d / l2);
        frame_size = frame_size.max(m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs())) / l2);
    }
    (rel(sym, size), rel(skew, frame_size))
}

/// Grid derivatives `(f_u, f_v, f_uu, f_uv, f_vv)` at nodes with a
/// three-node margin.
fn grid_jets(g: &Grid, p: &[V4]) -> Vec<Option<[V4; 5]>> {
    let fv: Vec<V4> = (0..g.len()).map(|k| d6(g, p, g.ij(k), Axis::V, false).unwrap_or_else(V4::zeros)).collect();
    (0..g.len())
        .map(|k| {
            let (i, j) = g.ij(k);
            if [g.shift_u(i, 3), g.shift_u(i, -3), g.shift_v(j, 3), g.shift_v(j, -3)].iter().any(Option::is_none) {
                return None;
            }
            Some([
                d6(g, p, (i, j), Axis::U, false)?,
                fv[k],
                d6(g, p, (i, j), Axis::U, true)?,
                d6(g, &fv, (i, j), Axis::U, false)?,
                d6(g, p, (i, j), Axis::V, true)?,
            ])
        })
        .collect()
}

/// Extrinsic data of `f_t` at one node in the frame transported by
/// `(I + t W)` and re-adapted to `f_t`.
#[derive(Debug, Clone, Copy)]
struct MovedData {
    metric: [f64; 3],
    h: Vector2<f64>,
    /// `psi` of each sign, indexed by [`Sign::index`].
    psi: [Vector2<f64>; 2],
    /// `omega_ja(d_q)` for `j` in `{1, 2}`, `a` in `{3, 4}`.
    omega: [[[f64; 2]; 2]; 2],
}

fn moved_data(jet: &[V4; 5], frame: &[V4; 4], w: &Bivector, t: f64) -> Option<MovedData> {
    let [fu, fv, fuu, fuv, fvv] = *jet;
    let gram = nalgebra::Matrix2::new(fu.dot(&fu), fu.dot(&fv), fu.dot(&fv), fv.dot(&fv));
    let gi = gram.try_inverse()?;
    let coords = |x: &V4| gi * Vector2::new(x.dot(&fu), x.dot(&fv));
    let tangent = |x: &V4| {
        let c = coords(x);
        fu * c[0] + fv * c[1]
    };
    let moved: [V4; 4] = std::array::from_fn(|k| frame[k] + act(w, &frame[k]) * t);
    let e1 = tangent(&moved[0]).normalize();
    let e2 = {
        let x = tangent(&moved[1]);
        (x - e1 * x.dot(&e1)).normalize()
    };
    let n3 = (moved[2] - tangent(&moved[2])).normalize();
    let n4 = {
        let x = moved[3] - tangent(&moved[3]);
        (x - n3 * x.dot(&n3)).normalize()
    };
    let hess = [[fuu, fuv], [fuv, fvv]];
    let apply = |a: &Vector2<f64>, b: &Vector2<f64>| {
        let mut acc = V4::zeros();
        for p in 0..2 {
            for q in 0..2 {
                acc += hess[p][q] * (a[p] * b[q]);
            }
        }
        Vector2::new(acc.dot(&n3), acc.dot(&n4))
    };
    let a = [coords(&e1), coords(&e2)];
    let alpha = |i: usize, j: usize| apply(&a[i], &a[j]);
    let (a11, a12, a22) = (alpha(0, 0), alpha(0, 1), alpha(1, 1));
    let jn = |x: Vector2<f64>| Vector2::new(-x[1], x[0]);
    let half = (a11 - a22) * 0.5;
    let unit = [Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];
    let mut omega = [[[0.0; 2]; 2]; 2];
    for j in 0..2 {
        for q in 0..2 {
            let x = apply(&a[j], &unit[q]);
            omega[j][0][q] = x[0];
            omega[j][1][q] = x[1];
        }
    }
    Some(MovedData {
        metric: [gram[(0, 0)], gram[(0, 1)], gram[(1, 1)]],
        h: (a11 + a22) * 0.5,
        psi: [half - jn(a12), half + jn(a12)],
        omega,
    })
}

fn moved_all(b: &BendingField, t: f64) -> Vec<Option<MovedData>> {
    let p = b.deformed(t);
    grid_jets(&b.grid, &p)
        .iter()
        .enumerate()
        .map(|(k, j)| j.as_ref().and_then(|j| moved_data(j, &b.coefs[k].frame, &b.v[k], t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformSample {
    pub t: f64,
    /// `sup |g_t - g| / lambda^2`.
    pub metric: f64,
    /// `sup |H_a(t) - H_a|` relative to the curvature scale.
    pub mean_curvature: f64,
    pub preserved_hopf: Option<f64>,
    pub other_hopf: Option<f64>,
}

/// Deviation ratios between consecutive `t` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformRatio {
    pub t_large: f64,
    pub t_small: f64,
    pub metric: f64,
    pub mean_curvature: f64,
    pub preserved_hopf: Option<f64>,
    pub other_hopf: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformationReport {
    pub preserved: Option<Sign>,
    pub nontrivial: bool,
    pub samples: Vec<DeformSample>,
    pub ratios: Vec<DeformRatio>,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Deviations of `f + t T` from `f` for each `t`.
pub fn verify_deformation(bending: &BendingField, t_values: &[f64]) -> DeformationReport {
    let base = moved_all(bending, 0.0);
    let samples: Vec<DeformSample> = t_values
        .par_iter()
        .map(|&t| {
            let moved = moved_all(bending, t);
            let mut s = DeformSample { t, metric: 0.0, mean_curvature: 0.0, preserved_hopf: None, other_hopf: None };
            let (mut pres, mut other) = (0.0f64, 0.0f64);
            for (k, (m0, m1)) in base.iter().zip(&moved).enumerate() {
                let (Some(m0), Some(m1)) = (m0, m1) else { continue };
                let c = &bending.coefs[k];
                let met = (0..3).map(|q| (m1.metric[q] - m0.metric[q]).abs()).fold(0.0, f64::max);
                s.metric = s.metric.max(met / (c.lambda * c.lambda));
                s.mean_curvature = s.mean_curvature.max((m1.h - m0.h).amax() / c.scale);
                if let Some(p) = bending.preserved {
                    pres = pres.max((m1.psi[p.index()] - m0.psi[p.index()]).amax() / c.scale);
                    let o = p.opposite().index();
                    other = other.max((m1.psi[o] - m0.psi[o]).amax() / c.scale);
                }
            }
            if bending.preserved.is_some() {
                s.preserved_hopf = Some(pres);
                s.other_hopf = Some(other);
            }
            s
        })
        .collect();
    let ratios = samples
        .windows(2)
        .map(|w| DeformRatio {
            t_large: w[0].t,
            t_small: w[1].t,
            metric: ratio(w[0].metric, w[1].metric),
            mean_curvature: ratio(w[0].mean_curvature, w[1].mean_curvature),
            preserved_hopf: w[0].preserved_hopf.zip(w[1].preserved_hopf).map(|(a, b)| ratio(a, b)),
            other_hopf: w[0].other_hopf.zip(w[1].other_hopf).map(|(a, b)| ratio(a, b)),
        })
        .collect();
    DeformationReport { preserved: bending.preserved, nontrivial: bending.is_nontrivial(), samples, ratios }
}

/// Bending field of a superconformal surface with nowhere-vanishing mean
/// curvature, built in the gauge `e3 = H / |H|`. The isothermic sign is the
/// one whose isotropic part does not vanish.
pub fn superconformal_bending(chart: &SurfaceChart, grid: &Grid, substeps: usize) -> Result<(VariationForms, BendingField)> {
    let open = open_grid(grid)?;
    let geoms = open.try_map(|u, v| PointGeometry::at(chart, u, v))?;
    let vanishing = |s: Sign| geoms.iter().all(|g| g.sff.b(s) <= SUPERCONFORMAL_TOL * g.curvature_scale());
    let sign = match (vanishing(Sign::Minus), vanishing(Sign::Plus)) {
        (true, false) => Sign::Plus,
        (false, true) => Sign::Minus,
        _ => {
            return Err(GeomError::BadParameter { name: "chart".into(), reason: "surface is not superconformal".into() })
        }
    };
    if geoms.iter().any(|g| g.sff.h.norm() < MEAN_FLOOR * g.curvature_scale()) {
        return Err(GeomError::GaugeUnavailable);
    }
    let forms = build_variation_with(chart, &open, sign, NormalGauge::Mean, substeps)?;
    let bending = integrate_bending(chart, &forms)?;
    Ok((forms, bending))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiftSample {
    pub t: f64,
    /// `sup |d/dt Q|` of the vertical term of the preserved lift, central
    /// difference at `+/- t`, relative to `sup |Q|`.
    pub lift_variation: f64,
    /// Same for the other lift.
    pub other_lift_variation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuperconformalReport {
    pub lift: Option<Sign>,
    pub nontrivial: bool,
    /// Trace-free part of the vertical term of the lift at `t = 0`, relative
    /// to its size.
    pub base_conformality: f64,
    pub samples: Vec<LiftSample>,
}

/// `Q(d_p, d_q)` for `p <= q` of the vertical term
/// `(omega13 - s omega24)^2 + (omega23 + s omega14)^2`.
fn vertical_term(m: &MovedData, s: f64) -> [f64; 3] {
    let w = &m.omega;
    let a = [0, 1].map(|q| w[0][0][q] - s * w[1][1][q]);
    let b = [0, 1].map(|q| w[1][0][q] + s * w[0][1][q]);
    [a[0] * a[0] + b[0] * b[0], a[0] * a[1] + b[0] * b[1], a[1] * a[1] + b[1] * b[1]]
}

/// First variation of the vertical term of the Gauss lifts under `f + t T`.
pub fn verify_superconformal(bending: &BendingField, t_values: &[f64]) -> SuperconformalReport {
    let base = moved_all(bending, 0.0);
    let lift = bending.preserved;
    let s = lift.map_or(1.0, Sign::s);
    let size = |s: f64| base.iter().flatten().flat_map(|m| vertical_term(m, s)).fold(0.0f64, |a, x| a.max(x.abs()));
    let sizes = [size(s), size(-s)];
    let mut conf = 0.0f64;
    for m in base.iter().flatten() {
        let q = vertical_term(m, s);
        conf = conf.max((q[0] - q[2]).abs().max(2.0 * q[1].abs()));
    }
    let samples = t_values
        .par_iter()
        .map(|&t| {
            let (plus, minus) = (moved_all(bending, t), moved_all(bending, -t));
            let mut d = [0.0f64; 2];
            for (a, b) in plus.iter().zip(&minus) {
                let (Some(a), Some(b)) = (a, b) else { continue };
                for (n, sg) in [s, -s].into_iter().enumerate() {
                    let (qa, qb) = (vertical_term(a, sg), vertical_term(b, sg));
                    for q in 0..3 {
                        d[n] = d[n].max((qa[q] - qb[q]).abs() / (2.0 * t));
                    }
                }
            }
            LiftSample { t, lift_variation: rel(d[0], sizes[0]), other_lift_variation: rel(d[1], sizes[1]) }
        })
        .collect();
    SuperconformalReport {
        lift,
        nontrivial: bending.is_nontrivial(),
        base_conformality: rel(conf, sizes[0]),
        samples,
    }
}

#[cfg(test)]
mod tests;
