use super::*;
use crate::zoo;
use num_complex::Complex64;
use proptest::prelude::*;

fn clothoids(c1: f64, c2: f64) -> SurfaceChart {
    zoo::product_curves(zoo::Poly1(vec![0.0, c1]), zoo::Poly1(vec![0.0, c2]), (0.5, 1.5), (0.5, 1.5))
}

/// Inverted z^2 graph with the center placed so that `H` stays away from zero.
fn inverted_curve() -> SurfaceChart {
    let h = zoo::holomorphic_curve(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], 1.0);
    zoo::inverted(&h, V4::new(0.0, 0.0, 0.0, 3.0))
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

#[test]
fn clothoid_forms_close_for_both_signs() {
    let c = clothoids(1.0, 1.0);
    let g = Grid::for_chart(&c, 32, 32).unwrap();
    for s in Sign::BOTH {
        let f = build_variation(&c, &g, s).unwrap();
        assert_eq!(f.preserved, Some(s.opposite()));
        assert!(f.residuals.max() < SYSTEM_TOL, "{:?}", f.residuals);
        assert!(f.log_l_closure < 1e-9 && f.isothermic_residual < DEFAULT_ISO_EPS);
        assert!(f.l.iter().all(|&l| l > 0.0));
        assert_eq!(f.l[g.idx(f.base.0, f.base.1)], 1.0);
        // isotropic gauge: the axis is e3 itself
        assert!(f.phase.iter().all(|p| p.abs() < 1e-12));
    }
}

#[test]
fn clothoid_bending_is_nontrivial_and_preserving() {
    let c = clothoids(1.0, 1.0);
    let g = Grid::for_chart(&c, 32, 32).unwrap();
    let f = build_variation(&c, &g, Sign::Minus).unwrap();
    let b = integrate_bending(&c, &f).unwrap();
    assert!(b.closure_bivector < 1e-8 && b.closure_field < 1e-8);
    assert!(b.is_nontrivial(), "{}", b.nontriviality_residual);
    assert!(b.bending_residual < 1e-4 && b.skew_residual < 1e-4);
    let r = verify_deformation(&b, &DEFAULT_T_VALUES);
    let q = r.ratios[0];
    assert!(within(q.metric, 80.0, 120.0), "{q:?}");
    assert!(within(q.mean_curvature, 80.0, 120.0), "{q:?}");
    assert!(within(q.preserved_hopf.unwrap(), 80.0, 120.0), "{q:?}");
    assert!(within(q.other_hopf.unwrap(), 8.0, 12.0), "{q:?}");
}

#[test]
fn trivial_family_is_a_rigid_motion() {
    let c = clothoids(1.0, 1.0);
    let g = Grid::for_chart(&c, 32, 32).unwrap();
    let f = trivial_variation(&c, &g, 1.0).unwrap();
    assert!(f.residuals.max() < SYSTEM_TOL, "{:?}", f.residuals);
    let b = integrate_bending(&c, &f).unwrap();
    assert!(b.field_norm > 1e-2);
    assert!(b.nontriviality_residual < 1e-5, "{}", b.nontriviality_residual);
    let r = verify_deformation(&b, &DEFAULT_T_VALUES);
    assert!(within(r.ratios[0].metric, 80.0, 120.0));
    assert!(r.preserved.is_none() && r.samples[0].preserved_hopf.is_none());
}

#[test]
fn zero_forms_give_zero_field() {
    let c = clothoids(1.0, 1.0);
    let g = Grid::for_chart(&c, 16, 16).unwrap();
    let f = zero_variation(&c, &g).unwrap();
    assert_eq!(f.residuals.max(), 0.0);
    let b = integrate_bending(&c, &f).unwrap();
    assert!(b.t.iter().all(|x| *x == V4::zeros()));
    assert_eq!(b.nontriviality_residual, 0.0);
    for s in verify_deformation(&b, &DEFAULT_T_VALUES).samples {
        assert_eq!((s.metric, s.mean_curvature), (0.0, 0.0));
    }
}

#[test]
fn distinct_clothoids_are_not_isothermic() {
    let c = clothoids(1.0, 2.0);
    let g = Grid::for_chart(&c, 16, 16).unwrap();
    assert!(matches!(build_variation(&c, &g, Sign::Minus), Err(GeomError::NotIsothermic { .. })));
}

#[test]
fn non_isothermal_chart_is_rejected() {
    let e = zoo::triaxial_ellipsoid(1.0, 1.2, 1.5);
    let g = Grid::for_chart(&e, 8, 8).unwrap();
    assert!(matches!(build_variation(&e, &g, Sign::Minus), Err(GeomError::NonIsothermalChart)));
}

#[test]
fn superconformal_variant_keeps_the_lift_holomorphic() {
    let c = inverted_curve();
    let g = Grid::for_chart(&c, 48, 48).unwrap();
    let (f, b) = superconformal_bending(&c, &g, 2).unwrap();
    assert_eq!(f.gauge, NormalGauge::Mean);
    assert_eq!(f.preserved, Some(Sign::Minus));
    assert!(f.residuals.max() < SYSTEM_TOL, "{:?}", f.residuals);
    assert!(b.is_nontrivial());
    let r = verify_superconformal(&b, &DEFAULT_T_VALUES);
    assert!(r.base_conformality < 1e-4);
    for s in &r.samples {
        assert!(s.lift_variation < 1e-3, "{s:?}");
        assert!(s.other_lift_variation > 1e-3, "{s:?}");
    }
    // the vanishing isotropic part stays zero to first order
    let d = verify_deformation(&b, &DEFAULT_T_VALUES);
    assert!(d.samples.iter().all(|s| s.preserved_hopf.unwrap() < 1e-6 * s.t / 1e-2));
    assert!(within(d.ratios[0].mean_curvature, 80.0, 120.0));
}

#[test]
fn bending_field_does_not_depend_on_the_gauge() {
    let c = inverted_curve();
    let g = Grid::for_chart(&c, 24, 24).unwrap();
    let (_, mean) = superconformal_bending(&c, &g, 2).unwrap();
    let f = build_variation_with(&c, &g, Sign::Plus, NormalGauge::Isotropic(Sign::Plus), 2).unwrap();
    let iso = integrate_bending(&c, &f).unwrap();
    let gap = mean.t.iter().zip(&iso.t).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(gap < 1e-6 * mean.field_norm, "{gap}");
}

#[test]
fn superconformal_variant_needs_vanishing_part() {
    let c = clothoids(1.0, 1.0);
    let g = Grid::for_chart(&c, 8, 8).unwrap();
    assert!(matches!(superconformal_bending(&c, &g, 1), Err(GeomError::BadParameter { .. })));
}

fn coef_with(phase: f64) -> DeformCoef {
    DeformCoef {
        frame: [V4::x(), V4::y(), V4::z(), V4::w()],
        fu: V4::x(),
        fv: V4::y(),
        lambda: 1.0,
        omega: [[[0.0; 2]; 4]; 4],
        star_omega: [0.0; 2],
        phase,
        scale: 1.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bivector_action_matches_definition(
        x in prop::array::uniform4(-2.0f64..2.0),
        y in prop::array::uniform4(-2.0f64..2.0),
        z in prop::array::uniform4(-2.0f64..2.0),
    ) {
        let (x, y, z) = (V4::from(x), V4::from(y), V4::from(z));
        let lhs = act(&wedge(&x, &y), &z);
        let rhs = x * y.dot(&z) - y * x.dot(&z);
        prop_assert!((lhs - rhs).norm() < 1e-12);
        // skew: <W a, b> = -<a, W b>
        let w = wedge(&x, &y);
        prop_assert!((act(&w, &z).dot(&x) + z.dot(&act(&w, &x))).abs() < 1e-12);
    }

    #[test]
    fn rigid_fields_fit_exactly(
        c in prop::array::uniform6(-1.0f64..1.0),
        v in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let ch = clothoids(1.0, 1.0);
        let g = Grid::for_chart(&ch, 6, 6).unwrap();
        let src = g.try_map(|a, b| ch.value(a, b)).unwrap();
        let v = V4::from(v);
        let t: Vec<V4> = src.iter().map(|f| act(&c, f) + v).collect();
        let (cc, vv, r) = trivial_fit(&src, &t);
        prop_assert!(r < 1e-10);
        prop_assert!((vv - v).norm() < 1e-8);
        prop_assert!(cc.iter().zip(&c).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    /// The first variations of `H` and of the preserved isotropic Hopf part
    /// vanish pointwise for the constructed forms.
    #[test]
    fn constructed_forms_fix_mean_curvature_and_one_hopf_part(phase in -3.2f64..3.2, l in 0.1f64..5.0, minus in any::<bool>()) {
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let p = forms_at(FormKind::Isothermic { sign }, &coef_with(phase), l);
        let keep = sign.opposite().s();
        for a in 2..4 {
            let b = 5 - a;
            let dh = 0.5 * (p[0][a][0] + p[1][a][1]);
            prop_assert!(dh.abs() < 1e-12);
            let odd = if a == 2 { -1.0 } else { 1.0 };
            let dpsi = 0.5 * (p[0][a][0] - p[1][a][1]) + keep * odd * p[0][b][1];
            prop_assert!(dpsi.abs() < 1e-12);
        }
        prop_assert!(p[2][3] == [0.0, 0.0] && p[0][1] == [0.0, 0.0]);
        // f23: phi_23 = L (cos a, s sin a)
        prop_assert!((p[1][2][0] - l * phase.cos()).abs() < 1e-12);
        prop_assert!((p[1][2][1] - sign.s() * l * phase.sin()).abs() < 1e-12);
    }
}
