use super::*;
use crate::chart::Jet3;
use crate::zoo::{self, Poly1};
use proptest::prelude::*;

fn clothoids(c1: f64, c2: f64) -> SurfaceChart {
    zoo::product_curves(Poly1(vec![0.0, c1]), Poly1(vec![0.0, c2]), (0.5, 1.5), (0.5, 1.5))
}

/// `k1 k2'' - k1'' k2 + 2 k1 k2 (k1'^2 - k2'^2) / (k1^2 + k2^2)` for linear curvatures.
fn curves_expression(c1: f64, c2: f64, s1: f64, s2: f64) -> f64 {
    let (k1, k2) = (c1 * s1, c2 * s2);
    2.0 * k1 * k2 * (c1 * c1 - c2 * c2) / (k1 * k1 + k2 * k2)
}

/// Chart reparametrized by a rotation of the parameter plane.
fn rotated(chart: &SurfaceChart, t: f64) -> SurfaceChart {
    let base = chart.clone();
    let (c, s) = (t.cos(), t.sin());
    let mut out = SurfaceChart::analytic(format!("rot({})", chart.name), chart.domain, chart.isothermal, move |a, b| {
        let (u, v) = (c * a - s * b, s * a + c * b);
        let j = base.jet_near(u, v).expect("inside base chart");
        // d_a = c d_u + s d_v, d_b = -s d_u + c d_v
        Jet3::from_fn(|i, k| {
            let mut poly = vec![1.0];
            let mul = |p: &[f64], x: f64, y: f64| {
                let mut q = vec![0.0; p.len() + 1];
                for (n, &a) in p.iter().enumerate() {
                    q[n] += a * x;
                    q[n + 1] += a * y;
                }
                q
            };
            for _ in 0..i {
                poly = mul(&poly, c, s);
            }
            for _ in 0..k {
                poly = mul(&poly, -s, c);
            }
            let n = i + k;
            poly.iter().enumerate().fold(V4::zeros(), |acc, (m, &w)| acc + j.partial(n - m, m) * w)
        })
    });
    out.margin = 0.0;
    out
}

#[test]
fn product_circles_mixed_forms_are_normal_connection() {
    let c = zoo::product_circles(0.5, 1.0);
    for sign in Sign::BOTH {
        let p = MixedPoint::at(&c, 0.4, 1.1, sign).unwrap();
        assert!(p.omega12[0].abs() < 1e-12 && p.omega12[1].abs() < 1e-12);
        assert!((p.omega[0] - sign.s() * p.omega34[0]).abs() < 1e-12);
        assert!((p.omega[1] - sign.s() * p.omega34[1]).abs() < 1e-12);
    }
    let g = Grid::for_chart(&c, 16, 16).unwrap();
    let f = mixed_form_field(&c, &g, Sign::Plus).unwrap();
    assert!(f.singular_nodes.is_empty());
    let h = h_pm(&c, 0.4, 1.1, Sign::Minus).unwrap();
    assert!(h.norm() < 1e-9);
}

#[test]
fn distinct_clothoids_match_curves_expression() {
    let c = clothoids(1.0, 2.0);
    for &(u, v) in &[(1.0, 1.0), (0.7, 1.3), (1.4, 0.6)] {
        let g = PointGeometry::at(&c, u, v).unwrap();
        let rho2 = u * u + 4.0 * v * v;
        let e = curves_expression(1.0, 2.0, u, v);
        for sign in Sign::BOTH {
            let cs = costar_omega(&c, u, v, sign).unwrap();
            // Omega = +/- omega34 here, and d*omega34 = E / (k1^2 + k2^2)
            let got = sign.s() * cs * rho2;
            assert!((got - e).abs() < 1e-3 * e.abs(), "{got} vs {e}");
            let (_, hz, _) = analytic_point(&c, u, v, sign).unwrap();
            let cross = -4.0 / g.lambda().powi(2) * hz.im;
            assert!((cross - cs).abs() < 1e-5 * cs.abs().max(1.0));
        }
    }
    assert!((curves_expression(1.0, 2.0, 1.0, 1.0) + 2.4).abs() < 1e-12);
}

#[test]
fn equal_clothoids_are_co_closed() {
    let c = clothoids(1.3, 1.3);
    for &(u, v) in &[(1.0, 1.0), (0.6, 1.4)] {
        for sign in Sign::BOTH {
            assert!(costar_omega(&c, u, v, sign).unwrap().abs() < 1e-5);
        }
    }
}

#[test]
fn constant_exact_form_is_co_closed() {
    let c = zoo::plane();
    let v = costar_of(&c, 0.1, 0.2, H_OUTER, |_, _| Ok([0.7, -1.1])).unwrap();
    assert!(v.abs() < 1e-12);
}

#[test]
fn ellipsoid_signs_agree() {
    let c = zoo::triaxial_ellipsoid(1.0, 1.2, 1.5);
    for &(u, v) in &[(0.3, 0.2), (2.0, -0.7), (4.0, 1.1)] {
        let m = MixedPoint::at(&c, u, v, Sign::Minus).unwrap();
        let p = MixedPoint::at(&c, u, v, Sign::Plus).unwrap();
        assert!((m.omega[0] - p.omega[0]).abs() < 1e-6 && (m.omega[1] - p.omega[1]).abs() < 1e-6);
    }
}

#[test]
fn exterior_derivative_identity() {
    let charts = [
        (zoo::triaxial_ellipsoid(1.0, 1.2, 1.5), (0.5, 0.3)),
        (clothoids(1.0, 2.0), (0.9, 1.2)),
        (zoo::catenoid(1.0), (1.0, 0.4)),
        (zoo::make(&zoo::SurfaceSpec::new("graph_surface")).unwrap().chart, (0.3, -0.4)),
    ];
    for (c, (u, v)) in charts {
        let g = PointGeometry::at(&c, u, v).unwrap();
        for sign in Sign::BOTH {
            let target = -(2.0 * g.sff.gauss_k(0.0) + sign.s() * g.sff.normal_k());
            let got = d_omega(&c, u, v, sign).unwrap();
            let denom = target.abs().max(g.curvature_scale().powi(2));
            assert!((got - target).abs() < 1e-4 * denom, "{}: {got} vs {target}", c.name);
        }
    }
}

#[test]
fn superconformal_sign_has_empty_mask() {
    let c = zoo::make(&zoo::SurfaceSpec::new("holomorphic_curve")).unwrap().chart;
    let g = Grid::for_chart(&c, 8, 8).unwrap();
    assert!(matches!(mixed_form_field(&c, &g, Sign::Plus), Err(GeomError::EmptyMask { sign: '+' })));
    assert!(mixed_form_field(&c, &g, Sign::Minus).is_ok());
}

#[test]
fn ellipsoid_umbilic_indices() {
    let c = zoo::triaxial_ellipsoid(1.0, 1.2, 1.5);
    let mut total = 0.0;
    for p in zoo::ellipsoid_umbilics(1.0, 1.2, 1.5) {
        let p = refine_singular_point(&c, p, Sign::Plus).unwrap();
        let r = index(&c, p, Sign::Plus, &[0.2, 0.1, 0.05]).unwrap();
        assert!(r.cauchy_differences[1] < r.cauchy_differences[0]);
        assert!((r.vanishing_order_estimate - 1.0).abs() < 1e-2);
        total += r.extrapolated;
    }
    assert!((total - 4.0).abs() < 0.05, "{total}");
}

#[test]
fn loops_around_regular_points_shrink() {
    let c = zoo::triaxial_ellipsoid(1.0, 1.2, 1.5);
    let a = loop_integral(&c, (1.0, 0.2), 0.1, Sign::Minus, 512).unwrap();
    let b = loop_integral(&c, (1.0, 0.2), 0.05, Sign::Minus, 512).unwrap();
    assert!(b.abs() < a.abs() && b.abs() < 1e-2);
}

#[test]
fn loop_through_umbilic_is_rejected() {
    let c = zoo::triaxial_ellipsoid(1.0, 1.2, 1.5);
    let p = zoo::ellipsoid_umbilics(1.0, 1.2, 1.5)[0];
    let r = loop_integral(&c, (p.0 - 0.1, p.1), 0.1, Sign::Plus, 512);
    assert!(matches!(r, Err(GeomError::LoopThroughSingularity { .. })));
}

#[test]
fn chern_form_relations() {
    let c = clothoids(1.0, 2.0);
    let (u, v) = (1.1, 0.8);
    let lam2 = PointGeometry::at(&c, u, v).unwrap().lambda().powi(2);
    for sign in Sign::BOTH {
        let (h, hz, _) = analytic_point(&c, u, v, sign).unwrap();
        let a1 = global::chern_a1(&c, u, v, sign).unwrap();
        let wedge = a1[0] * a1[0] + a1[1] * a1[1];
        assert!((wedge - 4.0 / lam2 * h.norm_sqr()).abs() < 1e-6 * wedge.max(1.0));
        let (_, da2_minus_wedge) = global::chern_point(&c, u, v, sign).unwrap();
        let da2 = da2_minus_wedge + wedge;
        assert!((da2 - 4.0 / lam2 * hz.re).abs() < 1e-4 * da2.abs().max(1.0), "{da2} {}", 4.0 / lam2 * hz.re);
        let (lhs, rhs) = global::ricci_like_point(&c, u, v, sign).unwrap();
        assert!((lhs - da2).abs() < 1e-4 * lhs.abs().max(1.0));
        assert!((rhs - wedge).abs() < 1e-6 * rhs.max(1.0));
    }
}

#[test]
fn codazzi_for_isotropic_parts() {
    let charts = [clothoids(1.0, 2.0), zoo::catenoid(1.0), zoo::product_circles(0.5, 1.0)];
    for c in charts {
        let (u, v) = {
            let (a, b) = c.domain.center();
            (a + 0.11, b - 0.07)
        };
        for sign in Sign::BOTH {
            let g = PointGeometry::at(&c, u, v).unwrap();
            let cr0 = &c;
            let hpart = |a: f64, b: f64, k: usize| -> Result<V4> {
                let gg = PointGeometry::near(cr0, a, b)?;
                let h = gg.h_amb();
                // H^s = (H + s i J H) / 2
                Ok(if k == 0 { h * 0.5 } else { gg.frame.j_normal(&h) * (0.5 * sign.s()) })
            };
            let comp = |k: usize| move |a: f64, b: f64| hpart(a, b, k);
            let (rx, ry) = crate::fd::gradient(comp(0), u, v, H_INNER, Stencil::Central4).unwrap();
            let (ix, iy) = crate::fd::gradient(comp(1), u, v, H_INNER, Stencil::Central4).unwrap();
            // d = (d_x - i d_y) / 2
            let d_re = (rx + iy) * 0.5;
            let d_im = (ix - ry) * 0.5;
            let lam2 = g.lambda().powi(2);
            let cr = &c;
            let pcomp = |k: usize| {
                move |a: f64, b: f64| -> Result<V4> {
                    let p = phi_ambient(&PointGeometry::near(cr, a, b)?, sign);
                    Ok(if k == 0 { p.0 } else { p.1 })
                }
            };
            let (px, py) = crate::fd::gradient(pcomp(0), u, v, H_INNER, Stencil::Central4).unwrap();
            let (qx, qy) = crate::fd::gradient(pcomp(1), u, v, H_INNER, Stencil::Central4).unwrap();
            let db_re = (px - qy) * 0.5;
            let db_im = (qx + py) * 0.5;
            let n = |x: V4| g.frame.normal_coords(&x);
            let res = (n(db_re) - n(d_re) * (lam2 / 2.0)).norm() + (n(db_im) - n(d_im) * (lam2 / 2.0)).norm();
            assert!(res < 1e-6 * g.curvature_scale(), "{} {sign:?}: {res}", c.name);
        }
    }
}

#[test]
fn isotropic_parts_vanish_with_b() {
    let c = zoo::make(&zoo::SurfaceSpec::new("holomorphic_curve")).unwrap().chart;
    let g = PointGeometry::at(&c, 0.3, -0.2).unwrap();
    let inv = g.invariants();
    let pp = inv.phi(Sign::Plus).unwrap();
    assert!(inv.b_plus < 1e-12 && (pp[0].norm() + pp[1].norm()) < 1e-12);
    let pm = inv.phi(Sign::Minus).unwrap();
    let norm = (pm[0].norm_sqr() + pm[1].norm_sqr()).sqrt();
    assert!((norm * norm - g.lambda().powi(4) * inv.b_minus.powi(2) / 8.0).abs() < 1e-9);
}

#[test]
fn real_parallel_split_is_holomorphic() {
    let c = clothoids(1.3, 1.3);
    let g = Grid::for_chart(&c, 24, 24).unwrap();
    for sign in Sign::BOTH {
        let r = real_parallel_split(&c, &g, sign).unwrap();
        assert!(r.closure_residual < 1e-8, "{}", r.closure_residual);
        assert!(r.dbar_residual < 1e-4, "{}", r.dbar_residual);
    }
}

#[test]
fn strong_iso_classification() {
    let c = clothoids(1.3, 1.3);
    let g = Grid::for_chart(&c, 10, 10).unwrap();
    let cls = isothermicity_classify(&c, &g, DEFAULT_ISO_EPS).unwrap();
    assert!(cls.strong());
    let c = clothoids(1.0, 2.0);
    let cls = isothermicity_classify(&c, &g, DEFAULT_ISO_EPS).unwrap();
    assert!(cls.strongly_totally_non());
}

#[test]
fn parallel_mean_curvature_on_product_torus() {
    let c = zoo::product_circles(0.5, 1.0);
    assert!(parallel_h_residual(&c, 0.7, 2.1).unwrap() < 1e-9);
    let c = clothoids(1.0, 2.0);
    assert!(parallel_h_residual(&c, 1.0, 1.0).unwrap() > 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn mixed_form_is_frame_independent(t in 0.0..std::f64::consts::TAU) {
        let base = zoo::make(&zoo::SurfaceSpec::new("graph_surface")).unwrap().chart;
        let rc = rotated(&base, t);
        // the rotated chart point (a, b) maps to base point (u, v)
        let (a, b) = (0.1, -0.05);
        let (u, v) = (t.cos() * a - t.sin() * b, t.sin() * a + t.cos() * b);
        for sign in Sign::BOTH {
            let w = omega_pm_coord(&base, u, v, sign).unwrap();
            let wr = omega_pm_coord(&rc, a, b, sign).unwrap();
            let expect = [t.cos() * w[0] + t.sin() * w[1], -t.sin() * w[0] + t.cos() * w[1]];
            prop_assert!((wr[0] - expect[0]).abs() < 1e-6 && (wr[1] - expect[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn classification_survives_scaling(mu in 0.5f64..3.0) {
        let base = clothoids(1.0, 2.0);
        let sc = zoo::scaled(&base, mu);
        let g = Grid::for_chart(&base, 6, 6).unwrap();
        let a = isothermicity_classify(&base, &g, DEFAULT_ISO_EPS).unwrap();
        let b = isothermicity_classify(&sc, &g, DEFAULT_ISO_EPS).unwrap();
        for (x, y) in a.flags.iter().zip(&b.flags) {
            prop_assert_eq!(x.minus, y.minus);
            prop_assert_eq!(x.plus, y.plus);
        }
    }
}
