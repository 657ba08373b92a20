//! Connection coefficients `omega_kl(X) = <D_X e_k, e_l>` of frame fields.

use nalgebra::{Matrix2, Vector2};

use crate::chart::{SurfaceChart, V4};
use crate::error::{GeomError, Result};
use crate::fd::{d_du, d_dv, Stencil};
use crate::frame::{frame_with_seed, seed_axis, tangent_frame, TangentBasis};
use crate::invariants::PointGeometry;

/// Pointwise frame rule; `None` where the rule is undefined.
pub type FrameRule<'a> = dyn Fn(f64, f64) -> Option<[V4; 4]> + Sync + 'a;

/// All connection forms of a frame at one point, as `(omega(e1), omega(e2))`
/// with `e1, e2` the rule's own tangent vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionSample {
    pub omega: [[[f64; 2]; 4]; 4],
    /// `*d log lambda` on isothermal charts, in the chart frame.
    pub omega12_conformal: Option<[f64; 2]>,
}

impl ConnectionSample {
    pub fn omega12(&self) -> [f64; 2] {
        self.omega[0][1]
    }
    pub fn omega34(&self) -> [f64; 2] {
        self.omega[2][3]
    }
    /// `omega_ja` for `j` in `{1, 2}` and `a` in `{3, 4}` (one-based).
    pub fn omega_ja(&self, j: usize, a: usize) -> [f64; 2] {
        self.omega[j - 1][a - 1]
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for k in 0..4 {
            for l in 0..4 {
                for m in 0..2 {
                    d = d.max((self.omega[k][l][m] + self.omega[l][k][m]).abs());
                }
            }
        }
        d
    }

    /// Defect of `omega_ja(e_r) = omega_ra(e_j)`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in 2..4 {
            d = d.max((self.omega[0][a][1] - self.omega[1][a][0]).abs());
        }
        d
    }
}

/// Deterministic frame rule: adapted frame with the seed axis frozen at
/// `(u0, v0)` so the normal gauge is smooth around that point.
pub fn frozen_seed_rule(chart: &SurfaceChart, u0: f64, v0: f64) -> Result<impl Fn(f64, f64) -> Option<[V4; 4]> + Sync + '_> {
    let jet = chart.eval_jet(u0, v0)?;
    let (e1, e2, _) = tangent_frame(&jet);
    let k = seed_axis(&e1, &e2).unwrap_or(0);
    let mut seed = V4::zeros();
    seed[k] = 1.0;
    Ok(move |u: f64, v: f64| {
        let jet = chart.jet_near(u, v).ok()?;
        frame_with_seed(&jet, &seed, chart.isothermal).map(|(f, _)| f.e)
    })
}

/// Components of a tangent vector in the coordinate basis.
fn coord_components(fu: &V4, fv: &V4, x: &V4) -> [f64; 2] {
    let g = Matrix2::new(fu.dot(fu), fu.dot(fv), fu.dot(fv), fv.dot(fv));
    let r = Vector2::new(x.dot(fu), x.dot(fv));
    let c = g.try_inverse().map(|gi| gi * r).unwrap_or_default();
    [c[0], c[1]]
}

pub fn connection_sample(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
    rule: &FrameRule<'_>,
    h: f64,
    stencil: Stencil,
) -> Result<ConnectionSample> {
    let jet = chart.eval_jet(u, v)?;
    let e0 = rule(u, v).ok_or(GeomError::MaskViolation { u, v })?;
    let frame_at = |a: f64, b: f64| -> Result<nalgebra::SMatrix<f64, 4, 4>> {
        let e = rule(a, b).ok_or(GeomError::MaskViolation { u: a, v: b })?;
        Ok(nalgebra::Matrix4::from_columns(&e))
    };
    let du = d_du(frame_at, u, v, h, stencil)?;
    let dv = d_dv(frame_at, u, v, h, stencil)?;
    let cs = [coord_components(&jet.fu, &jet.fv, &e0[0]), coord_components(&jet.fu, &jet.fv, &e0[1])];
    let mut omega = [[[0.0; 2]; 4]; 4];
    for k in 0..4 {
        let dku: V4 = du.column(k).into();
        let dkv: V4 = dv.column(k).into();
        for l in 0..4 {
            let wu = dku.dot(&e0[l]);
            let wv = dkv.dot(&e0[l]);
            for m in 0..2 {
                omega[k][l][m] = cs[m][0] * wu + cs[m][1] * wv;
            }
        }
    }
    let omega12_conformal = if chart.isothermal {
        let ll = |a: f64, b: f64| -> Result<f64> { Ok(chart.jet_near(a, b)?.fu.norm().ln()) };
        let (lu, lv) = (d_du(ll, u, v, h, Stencil::Central4)?, d_dv(ll, u, v, h, Stencil::Central4)?);
        let lam = jet.fu.norm();
        Some([-lv / lam, lu / lam])
    } else {
        None
    };
    Ok(ConnectionSample { omega, omega12_conformal })
}

/// Tangent connection form of the chart frame from the jet, in coordinate
/// components `(omega12(d_u), omega12(d_v))`.
pub fn omega12_coord(g: &PointGeometry) -> [f64; 2] {
    let a = g.basis.a;
    let e2 = g.frame.e2();
    [g.jet.fuu.dot(&e2) / a, g.jet.fuv.dot(&e2) / a]
}

pub fn omega12_frame(g: &PointGeometry) -> [f64; 2] {
    g.basis.to_frame(omega12_coord(g))
}

/// `*w` for a form given by frame components.
pub fn hodge(w: [f64; 2]) -> [f64; 2] {
    [-w[1], w[0]]
}

pub fn to_frame(b: &TangentBasis, w: [f64; 2]) -> [f64; 2] {
    b.to_frame(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Domain, Jet3};

    fn unit_sphere() -> SurfaceChart {
        SurfaceChart::analytic("sphere", Domain::new(0.0, 6.0, -1.2, 1.2), false, |u, v| {
            Jet3::from_fn(|i, j| {
                let cu = (u + i as f64 * std::f64::consts::FRAC_PI_2).cos();
                let su = (u + i as f64 * std::f64::consts::FRAC_PI_2).sin();
                let cv = (v + j as f64 * std::f64::consts::FRAC_PI_2).cos();
                let sv = (v + j as f64 * std::f64::consts::FRAC_PI_2).sin();
                V4::new(cu * cv, su * cv, if i == 0 { sv } else { 0.0 }, 0.0)
            })
        })
    }

    #[test]
    fn sphere_shape_operator_is_identity() {
        let c = unit_sphere();
        let (u, v) = (std::f64::consts::PI, 0.3);
        let rule = frozen_seed_rule(&c, u, v).unwrap();
        let s = connection_sample(&c, u, v, &rule, 1e-3, Stencil::Central4).unwrap();
        // the seed axis +x is the inner normal side at u = pi
        let e3 = rule(u, v).unwrap()[2];
        let inward = -c.eval_jet(u, v).unwrap().f;
        assert!(e3.dot(&inward) > 0.9);
        assert!((s.omega_ja(1, 3)[0] - 1.0).abs() < 1e-8);
        assert!((s.omega_ja(2, 3)[1] - 1.0).abs() < 1e-8);
        assert!(s.omega_ja(1, 4)[0].abs() < 1e-8);
        assert!(s.antisymmetry_defect() < 1e-8);
        assert!(s.symmetry_defect() < 1e-8);
    }

    #[test]
    fn richardson_ratio_of_second_order_stencil() {
        let c = unit_sphere();
        let (u, v) = (0.7, 0.4);
        let rule = frozen_seed_rule(&c, u, v).unwrap();
        let s = |h| connection_sample(&c, u, v, &rule, h, Stencil::Central2).unwrap().omega12()[0];
        let (a, b, d) = (s(4e-2), s(2e-2), s(1e-2));
        let r = (a - b) / (b - d);
        assert!((3.5..=4.5).contains(&r), "ratio {r}");
    }

    #[test]
    fn analytic_omega12_matches_fd() {
        let c = unit_sphere();
        let (u, v) = (0.7, 0.4);
        let rule = frozen_seed_rule(&c, u, v).unwrap();
        let s = connection_sample(&c, u, v, &rule, 1e-3, Stencil::Central4).unwrap();
        let g = PointGeometry::at(&c, u, v).unwrap();
        let w = omega12_frame(&g);
        assert!((w[0] - s.omega12()[0]).abs() < 1e-9 && (w[1] - s.omega12()[1]).abs() < 1e-9);
        // latitude circles have geodesic curvature tan(v)
        assert!((w[0].abs() - v.tan()).abs() < 1e-12);
    }
}
