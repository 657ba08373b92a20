//! Pointwise second-order invariants: second fundamental form, curvatures,
//! curvature ellipse, isotropic Hopf parts, classification and curvature-line
//! directions.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use crate::chart::{Jet3, SurfaceChart, V4};
use crate::error::{GeomError, Result};
use crate::frame::{frame_from_jet, frame_with_seed, AdaptedFrame, TangentBasis};
use crate::Sign;

pub type C2 = Vector2<Complex64>;

/// Rotation by a right angle in normal coordinates.
pub fn j2(x: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-x[1], x[0])
}

pub fn det2(a: &Vector2<f64>, b: &Vector2<f64>) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondFundamentalData {
    pub alpha11: Vector2<f64>,
    pub alpha12: Vector2<f64>,
    pub alpha22: Vector2<f64>,
    pub h: Vector2<f64>,
    pub u_vec: Vector2<f64>,
    pub v_vec: Vector2<f64>,
}

impl SecondFundamentalData {
    pub fn from_alpha(alpha11: Vector2<f64>, alpha12: Vector2<f64>, alpha22: Vector2<f64>) -> Self {
        SecondFundamentalData {
            alpha11,
            alpha12,
            alpha22,
            h: (alpha11 + alpha22) * 0.5,
            u_vec: (alpha11 - alpha22) * 0.5,
            v_vec: alpha12,
        }
    }

    /// Project second partials onto the normal plane of `frame`.
    pub fn from_jet(jet: &Jet3, frame: &AdaptedFrame, basis: &TangentBasis) -> Self {
        let p = basis.frame_in_coords();
        let hess = [[jet.fuu, jet.fuv], [jet.fuv, jet.fvv]];
        let comp = |j: usize, k: usize| {
            let mut acc = V4::zeros();
            for m in 0..2 {
                for n in 0..2 {
                    let w = p[j][m] * p[k][n];
                    if w != 0.0 {
                        acc += hess[m][n] * w;
                    }
                }
            }
            frame.normal_coords(&acc)
        };
        Self::from_alpha(comp(0, 0), comp(0, 1), comp(1, 1))
    }

    pub fn alpha(&self, j: usize, k: usize) -> Vector2<f64> {
        match (j, k) {
            (0, 0) => self.alpha11,
            (1, 1) => self.alpha22,
            _ => self.alpha12,
        }
    }

    /// `|u + s J v|`.
    pub fn b(&self, sign: Sign) -> f64 {
        (self.u_vec + j2(&self.v_vec) * sign.s()).norm()
    }

    pub fn gauss_k(&self, c: f64) -> f64 {
        c + self.alpha11.dot(&self.alpha22) - self.alpha12.norm_squared()
    }

    pub fn normal_k(&self) -> f64 {
        2.0 * det2(&self.u_vec, &self.v_vec)
    }

    /// `max(1, |alpha|)` with the Frobenius norm over the frame.
    pub fn curvature_scale(&self) -> f64 {
        let n2 = self.alpha11.norm_squared() + 2.0 * self.alpha12.norm_squared() + self.alpha22.norm_squared();
        n2.sqrt().max(1.0)
    }

    /// `(lambda^2/2) pi_s(u - i v)` in normal coordinates.
    pub fn phi(&self, sign: Sign, lambda: f64) -> C2 {
        let xi = C2::new(
            Complex64::new(self.u_vec[0], -self.v_vec[0]),
            Complex64::new(self.u_vec[1], -self.v_vec[1]),
        );
        let jxi = C2::new(-xi[1], xi[0]);
        let i = Complex64::new(0.0, sign.s());
        (xi + jxi * i) * Complex64::new(0.25 * lambda * lambda, 0.0)
    }

    /// Semiaxes of the curvature ellipse and the unit major-axis direction.
    pub fn ellipse(&self) -> (f64, f64, Option<Vector2<f64>>) {
        let m = Matrix2::from_columns(&[self.u_vec, self.v_vec]);
        let svd = m.svd(true, false);
        let (s0, s1) = (svd.singular_values[0], svd.singular_values[1]);
        let uu = svd.u.expect("requested");
        let (l1, l2, axis) = if s0 >= s1 { (s0, s1, uu.column(0)) } else { (s1, s0, uu.column(1)) };
        let scale = self.curvature_scale();
        let dir = (l1 - l2 > 1e-9 * scale).then(|| Vector2::new(axis[0], axis[1]));
        (l1, l2, dir)
    }
}

/// Everything computable from the jet at one point in the deterministic frame.
#[derive(Debug, Clone, Copy)]
pub struct PointGeometry {
    pub u: f64,
    pub v: f64,
    pub jet: Jet3,
    pub frame: AdaptedFrame,
    pub basis: TangentBasis,
    pub sff: SecondFundamentalData,
    pub ambient_c: f64,
    pub isothermal: bool,
}

impl PointGeometry {
    pub fn from_jet(jet: Jet3, u: f64, v: f64, isothermal: bool, ambient_c: f64) -> Self {
        let (frame, basis, _) = frame_from_jet(&jet, isothermal);
        let sff = SecondFundamentalData::from_jet(&jet, &frame, &basis);
        PointGeometry { u, v, jet, frame, basis, sff, ambient_c, isothermal }
    }

    pub fn at(chart: &SurfaceChart, u: f64, v: f64) -> Result<Self> {
        Ok(Self::from_jet(chart.eval_jet(u, v)?, u, v, chart.isothermal, chart.ambient_c))
    }

    /// Like [`PointGeometry::at`] but tolerates stencil points slightly
    /// outside the domain.
    pub fn near(chart: &SurfaceChart, u: f64, v: f64) -> Result<Self> {
        Ok(Self::from_jet(chart.jet_near(u, v)?, u, v, chart.isothermal, chart.ambient_c))
    }

    /// Geometry whose normal gauge starts from a prescribed seed vector.
    pub fn near_with_seed(chart: &SurfaceChart, u: f64, v: f64, seed: &V4) -> Result<Self> {
        let jet = chart.jet_near(u, v)?;
        let (frame, basis) = frame_with_seed(&jet, seed, chart.isothermal).ok_or(GeomError::MaskViolation { u, v })?;
        let sff = SecondFundamentalData::from_jet(&jet, &frame, &basis);
        Ok(PointGeometry { u, v, jet, frame, basis, sff, ambient_c: chart.ambient_c, isothermal: chart.isothermal })
    }

    /// Re-express the normal data in a different normal gauge `(n3, n4)`.
    pub fn regauge(&self, e3: V4) -> Self {
        let mut fr = self.frame;
        fr.e[2] = e3;
        fr.e[3] = crate::frame::cross4(&fr.e[0], &fr.e[1], &e3);
        let sff = SecondFundamentalData::from_jet(&self.jet, &fr, &self.basis);
        PointGeometry { frame: fr, sff, ..*self }
    }

    pub fn lambda(&self) -> f64 {
        self.basis.a
    }

    pub fn amb(&self, c: &Vector2<f64>) -> V4 {
        self.frame.from_normal(c)
    }

    pub fn h_amb(&self) -> V4 {
        self.amb(&self.sff.h)
    }

    /// `u + s J v` as an ambient normal vector.
    pub fn isotropic_axis(&self, sign: Sign) -> V4 {
        self.amb(&(self.sff.u_vec + j2(&self.sff.v_vec) * sign.s()))
    }

    /// Unit vector `e3^s`, undefined where the isotropic part vanishes.
    pub fn e3_pm(&self, sign: Sign, tiny: f64) -> Option<V4> {
        let w = self.isotropic_axis(sign);
        let n = w.norm();
        (n > tiny).then(|| w / n)
    }

    pub fn curvature_scale(&self) -> f64 {
        self.sff.curvature_scale()
    }

    pub fn invariants(&self) -> PointInvariants {
        let s = &self.sff;
        let (l1, l2, axis) = s.ellipse();
        let phi = |sg| self.isothermal.then(|| s.phi(sg, self.lambda()));
        PointInvariants {
            k: s.gauss_k(self.ambient_c),
            k_n: s.normal_k(),
            norm_h2: s.h.norm_squared(),
            b_minus: s.b(Sign::Minus),
            b_plus: s.b(Sign::Plus),
            lambda1: l1,
            lambda2: l2,
            major_axis: axis.map(|a| [a[0], a[1]]),
            phi_minus: phi(Sign::Minus),
            phi_plus: phi(Sign::Plus),
            h: [s.h[0], s.h[1]],
            curvature_scale: s.curvature_scale(),
            ambient_c: self.ambient_c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointInvariants {
    pub k: f64,
    pub k_n: f64,
    pub norm_h2: f64,
    pub b_minus: f64,
    pub b_plus: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub major_axis: Option<[f64; 2]>,
    #[serde(skip)]
    pub phi_minus: Option<C2>,
    #[serde(skip)]
    pub phi_plus: Option<C2>,
    pub h: [f64; 2],
    pub curvature_scale: f64,
    pub ambient_c: f64,
}

impl PointInvariants {
    pub fn b(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Minus => self.b_minus,
            Sign::Plus => self.b_plus,
        }
    }

    pub fn phi(&self, sign: Sign) -> Result<C2> {
        match sign {
            Sign::Minus => self.phi_minus,
            Sign::Plus => self.phi_plus,
        }
        .ok_or(GeomError::NonIsothermalChart)
    }

    /// `|H|^2 - (K - c)`, the sum of squared semiaxes.
    pub fn ellipse_mass(&self) -> f64 {
        self.norm_h2 - (self.k - self.ambient_c)
    }

    /// Residuals of the ellipse and isotropic-norm identities.
    pub fn identity_residuals(&self) -> [f64; 4] {
        let m = self.ellipse_mass();
        [
            (self.lambda1.powi(2) + self.lambda2.powi(2) - m).abs(),
            (2.0 * self.lambda1 * self.lambda2 - self.k_n.abs()).abs(),
            (self.b_plus.powi(2) - (m - self.k_n)).abs(),
            (self.b_minus.powi(2) - (m + self.k_n)).abs(),
        ]
    }
}

pub fn second_fundamental(chart: &SurfaceChart, u: f64, v: f64) -> Result<SecondFundamentalData> {
    Ok(PointGeometry::at(chart, u, v)?.sff)
}

pub fn point_invariants(chart: &SurfaceChart, u: f64, v: f64) -> Result<PointInvariants> {
    Ok(PointGeometry::at(chart, u, v)?.invariants())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointTag {
    Generic,
    PseudoUmbilicPlus,
    PseudoUmbilicMinus,
    Umbilic,
    Minimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointClass {
    pub tag: PointTag,
    pub pseudo_umbilic_plus: bool,
    pub pseudo_umbilic_minus: bool,
    pub minimal: bool,
    pub b_minus: f64,
    pub b_plus: f64,
    pub norm_h: f64,
    pub threshold: f64,
}

pub const DEFAULT_EPS_SCALE: f64 = 1e-6;

pub fn classify_point(inv: &PointInvariants, eps_scale: f64) -> PointClass {
    let eps = eps_scale * inv.curvature_scale;
    let pp = inv.b_plus < eps;
    let pm = inv.b_minus < eps;
    let norm_h = inv.norm_h2.sqrt();
    let minimal = norm_h < eps;
    let tag = match (pp, pm) {
        (true, true) => PointTag::Umbilic,
        (true, false) => PointTag::PseudoUmbilicPlus,
        (false, true) => PointTag::PseudoUmbilicMinus,
        _ if minimal => PointTag::Minimal,
        _ => PointTag::Generic,
    };
    PointClass {
        tag,
        pseudo_umbilic_plus: pp,
        pseudo_umbilic_minus: pm,
        minimal,
        b_minus: inv.b_minus,
        b_plus: inv.b_plus,
        norm_h,
        threshold: eps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureDirections {
    /// Critical angles of `|alpha(X, X)|^2`, with their antipodes, in `[0, 2 pi)`.
    pub principal: Vec<f64>,
    /// Angles in `[0, pi)` along which `alpha(X, X)` is parallel to `H`.
    pub mean_directional: Vec<f64>,
}

/// Critical points of `psi -> |H + cos(psi) u + sin(psi) v|^2` on `[0, 2 pi)`.
fn principal_psi(s: &SecondFundamentalData) -> Vec<f64> {
    let (h, u, v) = (s.h, s.u_vec, s.v_vec);
    let a = v.norm_squared() - u.norm_squared();
    let b = 2.0 * u.dot(&v);
    let dg = |p: f64| a * (2.0 * p).sin() + b * (2.0 * p).cos() - 2.0 * h.dot(&u) * p.sin() + 2.0 * h.dot(&v) * p.cos();
    let n = 2048;
    let step = 2.0 * PI / n as f64;
    let mut roots = Vec::new();
    for k in 0..n {
        let (x0, x1) = (k as f64 * step, (k + 1) as f64 * step);
        let (g0, g1) = (dg(x0), dg(x1));
        if g0 == 0.0 {
            roots.push(x0);
        } else if g0 * g1 < 0.0 {
            let (mut lo, mut hi, mut glo) = (x0, x1, g0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let gm = dg(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if gm * glo < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    roots
}

pub fn directions_from_sff(s: &SecondFundamentalData, u: f64, v: f64, eps_scale: f64) -> Result<CurvatureDirections> {
    let eps = eps_scale * s.curvature_scale();
    if s.b(Sign::Plus) < eps || s.b(Sign::Minus) < eps {
        return Err(GeomError::UndefinedDirections { u, v, reason: "pseudo-umbilic point" });
    }
    let mut principal: Vec<f64> = principal_psi(s)
        .into_iter()
        .flat_map(|p| [0.5 * p, 0.5 * p + PI])
        .map(|t| t.rem_euclid(2.0 * PI))
        .collect();
    principal.sort_by(f64::total_cmp);
    principal.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut mean_directional = Vec::new();
    let (dh_u, dh_v) = (det2(&s.h, &s.u_vec), det2(&s.h, &s.v_vec));
    if s.h.norm() > eps && dh_u.hypot(dh_v) > eps * eps {
        let psi = (-dh_u).atan2(dh_v);
        for t in [0.5 * psi, 0.5 * psi + 0.5 * PI] {
            mean_directional.push(t.rem_euclid(PI));
        }
        mean_directional.sort_by(f64::total_cmp);
    }
    Ok(CurvatureDirections { principal, mean_directional })
}

pub fn curvature_line_directions(chart: &SurfaceChart, u: f64, v: f64) -> Result<CurvatureDirections> {
    directions_from_sff(&second_fundamental(chart, u, v)?, u, v, DEFAULT_EPS_SCALE)
}

/// Gaussian curvature from the metric alone (Brioschi formula).
pub fn brioschi_k(j: &Jet3) -> f64 {
    let (fu, fv) = (j.fu, j.fv);
    let e = fu.dot(&fu);
    let f = fu.dot(&fv);
    let g = fv.dot(&fv);
    let e_u = 2.0 * j.fuu.dot(&fu);
    let e_v = 2.0 * j.fuv.dot(&fu);
    let f_u = j.fuu.dot(&fv) + fu.dot(&j.fuv);
    let f_v = j.fuv.dot(&fv) + fu.dot(&j.fvv);
    let g_u = 2.0 * j.fuv.dot(&fv);
    let g_v = 2.0 * j.fvv.dot(&fv);
    let e_vv = 2.0 * (j.fuvv.dot(&fu) + j.fuv.dot(&j.fuv));
    let g_uu = 2.0 * (j.fuuv.dot(&fv) + j.fuv.dot(&j.fuv));
    let f_uv = j.fuuv.dot(&fv) + j.fuu.dot(&j.fvv) + j.fuv.dot(&j.fuv) + fu.dot(&j.fuvv);
    let m1 = nalgebra::Matrix3::new(
        -0.5 * e_vv + f_uv - 0.5 * g_uu,
        0.5 * e_u,
        f_u - 0.5 * e_v,
        f_v - 0.5 * g_u,
        e,
        f,
        0.5 * g_v,
        f,
        g,
    );
    let m2 = nalgebra::Matrix3::new(0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, f, 0.5 * g_u, f, g);
    (m1.determinant() - m2.determinant()) / (e * g - f * f).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Domain;
    use proptest::prelude::*;

    fn holo() -> SurfaceChart {
        SurfaceChart::analytic("holo", Domain::new(-1.0, 1.0, -1.0, 1.0), true, |u, v| Jet3 {
            f: V4::new(u, v, u * u - v * v, 2.0 * u * v),
            fu: V4::new(1.0, 0.0, 2.0 * u, 2.0 * v),
            fv: V4::new(0.0, 1.0, -2.0 * v, 2.0 * u),
            fuu: V4::new(0.0, 0.0, 2.0, 0.0),
            fuv: V4::new(0.0, 0.0, 0.0, 2.0),
            fvv: V4::new(0.0, 0.0, -2.0, 0.0),
            ..Default::default()
        })
    }

    #[test]
    fn holomorphic_curve_at_origin() {
        let s = second_fundamental(&holo(), 0.0, 0.0).unwrap();
        assert!((s.alpha11 - Vector2::new(2.0, 0.0)).norm() < 1e-14);
        assert!((s.alpha22 - Vector2::new(-2.0, 0.0)).norm() < 1e-14);
        assert!((s.alpha12 - Vector2::new(0.0, 2.0)).norm() < 1e-14);
        let inv = point_invariants(&holo(), 0.0, 0.0).unwrap();
        assert!((inv.k + 8.0).abs() < 1e-12);
        assert!((inv.k_n - 8.0).abs() < 1e-12);
        assert!(inv.norm_h2 < 1e-24);
        assert!(inv.b_plus < 1e-12);
        assert!((inv.b_minus.powi(2) - 16.0).abs() < 1e-12);
        assert!(inv.phi_plus.unwrap().norm() < 1e-12);
        let c = classify_point(&inv, DEFAULT_EPS_SCALE);
        assert_eq!(c.tag, PointTag::PseudoUmbilicPlus);
    }

    #[test]
    fn principal_directions_undefined_at_pseudo_umbilic() {
        assert!(matches!(curvature_line_directions(&holo(), 0.0, 0.0), Err(GeomError::UndefinedDirections { .. })));
    }

    #[test]
    fn brioschi_agrees_with_gauss_equation() {
        let c = holo();
        for &(u, v) in &[(0.0, 0.0), (0.3, -0.2), (0.7, 0.5)] {
            let g = PointGeometry::at(&c, u, v).unwrap();
            let kb = brioschi_k(&g.jet);
            assert!((kb - g.invariants().k).abs() < 1e-10, "{kb} vs {}", g.invariants().k);
        }
    }

    fn random_sff() -> impl Strategy<Value = SecondFundamentalData> {
        proptest::array::uniform6(-3.0f64..3.0).prop_map(|a| {
            SecondFundamentalData::from_alpha(Vector2::new(a[0], a[1]), Vector2::new(a[2], a[3]), Vector2::new(a[4], a[5]))
        })
    }

    proptest! {
        #[test]
        fn ellipse_identities_hold(s in random_sff()) {
            let g = PointGeometry {
                u: 0.0, v: 0.0, jet: Jet3::default(),
                frame: AdaptedFrame { e: [V4::x(), V4::y(), V4::z(), V4::w()], lambda: Some(1.0) },
                basis: TangentBasis { a: 1.0, b: 0.0, c: 1.0 },
                sff: s, ambient_c: 0.0, isothermal: true,
            };
            let inv = g.invariants();
            let scale = inv.curvature_scale.powi(2);
            for r in inv.identity_residuals() {
                prop_assert!(r < 1e-12 * scale);
            }
            prop_assert!(inv.ellipse_mass() >= inv.k_n.abs() - 1e-12 * scale);
            // |phi|^2 = (lambda^4 / 8) B^2 with lambda = 1
            for sg in Sign::BOTH {
                let p = inv.phi(sg).unwrap();
                prop_assert!((p.norm_squared() - inv.b(sg).powi(2) / 8.0).abs() < 1e-12 * scale);
            }
        }

        #[test]
        fn umbilic_implies_both_pseudo_umbilic(s in random_sff(), t in 0.0f64..1.0) {
            let mut s = s;
            s.u_vec *= t * 1e-9;
            s.v_vec *= t * 1e-9;
            let g = PointGeometry {
                u: 0.0, v: 0.0, jet: Jet3::default(),
                frame: AdaptedFrame { e: [V4::x(), V4::y(), V4::z(), V4::w()], lambda: None },
                basis: TangentBasis { a: 1.0, b: 0.0, c: 1.0 },
                sff: s, ambient_c: 0.0, isothermal: false,
            };
            let c = classify_point(&g.invariants(), 1e-6);
            if c.tag == PointTag::Umbilic {
                prop_assert!(c.pseudo_umbilic_minus && c.pseudo_umbilic_plus);
            }
            prop_assert!(c.pseudo_umbilic_minus && c.pseudo_umbilic_plus);
        }
    }
}
