//! Catalog of test surfaces with analytic jets.

mod curves;
pub mod facts;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use curves::{CurvatureCurve, CurveJet, Poly1, CURVE_NODES};
pub use facts::{certify, Fact, FactCheck};

use crate::chart::{Domain, Jet3, JetSource, SurfaceChart, V4};
use crate::error::{GeomError, Result};
use crate::taylor::{Taylor2, Taylor4};

/// Parameter value of a zoo entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Num(f64),
    List(Vec<f64>),
    Surface(Box<SurfaceSpec>),
}

/// Zoo name plus parameters, as read from a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, Param>,
}

impl SurfaceSpec {
    pub fn new(name: &str) -> Self {
        SurfaceSpec { name: name.into(), params: BTreeMap::new() }
    }

    pub fn num(mut self, key: &str, x: f64) -> Self {
        self.params.insert(key.into(), Param::Num(x));
        self
    }

    pub fn list(mut self, key: &str, x: &[f64]) -> Self {
        self.params.insert(key.into(), Param::List(x.to_vec()));
        self
    }

    pub fn surface(mut self, key: &str, s: SurfaceSpec) -> Self {
        self.params.insert(key.into(), Param::Surface(Box::new(s)));
        self
    }

    fn get_num(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(Param::Num(x)) => Ok(*x),
            Some(_) => Err(bad(key, "expected a number")),
        }
    }

    fn get_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(Param::List(x)) => Ok(x.clone()),
            Some(Param::Num(x)) => Ok(vec![*x]),
            Some(_) => Err(bad(key, "expected a list of numbers")),
        }
    }

    fn get_surface(&self, key: &str) -> Result<&SurfaceSpec> {
        match self.params.get(key) {
            Some(Param::Surface(s)) => Ok(s),
            _ => Err(bad(key, "expected a nested surface table")),
        }
    }
}

fn bad(name: &str, reason: &str) -> GeomError {
    GeomError::BadParameter { name: name.into(), reason: reason.into() }
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(name, "must be positive and finite"))
    }
}

#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub name: String,
    pub chart: SurfaceChart,
    pub facts: Vec<Fact>,
}

pub const NAMES: [&str; 10] = [
    "plane",
    "product_circles",
    "product_curves",
    "round_sphere",
    "triaxial_ellipsoid",
    "holomorphic_curve",
    "catenoid",
    "graph_surface",
    "inverted",
    "scaled",
];

pub fn make(spec: &SurfaceSpec) -> Result<ZooEntry> {
    let (chart, facts) = match spec.name.as_str() {
        "plane" => (plane(), vec![Fact::FlatNormalBundle, Fact::Minimal]),
        "product_circles" => {
            let r1 = positive("r1", spec.get_num("r1", 0.5)?)?;
            let r2 = positive("r2", spec.get_num("r2", 1.0)?)?;
            (product_circles(r1, r2), vec![Fact::FlatNormalBundle, Fact::ParallelH, Fact::Isothermic])
        }
        "product_curves" => {
            let k1 = spec.get_list("k1", &[0.0, 1.0])?;
            let k2 = spec.get_list("k2", &[0.0, 1.0])?;
            let ur = spec.get_list("u_range", &[0.5, 1.5])?;
            let vr = spec.get_list("v_range", &[0.5, 1.5])?;
            if ur.len() != 2 || vr.len() != 2 || ur[1] <= ur[0] || vr[1] <= vr[0] {
                return Err(bad("u_range/v_range", "expected increasing [lo, hi] pairs"));
            }
            let facts = if proportional_linear(&k1, &k2) {
                vec![Fact::FlatNormalBundle, Fact::Isothermic, Fact::StronglyIsoIsothermic, Fact::VerticallyHarmonicMinus]
            } else {
                vec![Fact::FlatNormalBundle, Fact::Isothermic]
            };
            (product_curves(Poly1(k1), Poly1(k2), (ur[0], ur[1]), (vr[0], vr[1])), facts)
        }
        "round_sphere" => {
            let r = positive("r", spec.get_num("r", 1.0)?)?;
            (round_sphere(r), vec![Fact::TotallyUmbilic, Fact::FlatNormalBundle])
        }
        "triaxial_ellipsoid" => {
            let a = positive("a", spec.get_num("a", 1.0)?)?;
            let b = positive("b", spec.get_num("b", 1.2)?)?;
            let c = positive("c", spec.get_num("c", 1.5)?)?;
            (triaxial_ellipsoid(a, b, c), vec![Fact::FlatNormalBundle, Fact::MixedFormsAgree])
        }
        "holomorphic_curve" => {
            let raw = spec.get_list("coeffs", &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0])?;
            if raw.len() % 2 != 0 || raw.is_empty() {
                return Err(bad("coeffs", "expected [re0, im0, re1, im1, ...]"));
            }
            let coeffs: Vec<Complex64> = raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            let r = spec.get_num("radius", 1.0)?;
            (holomorphic_curve(coeffs, positive("radius", r)?), vec![Fact::Minimal, Fact::SuperconformalPlus])
        }
        "catenoid" => {
            let s = positive("scale", spec.get_num("scale", 1.0)?)?;
            (catenoid(s), vec![Fact::Minimal, Fact::FlatNormalBundle, Fact::StronglyIsoIsothermic])
        }
        "graph_surface" => {
            let r = Poly2::from_flat("r_terms", &spec.get_list("r_terms", &[2.0, 0.0, 0.5, 0.0, 2.0, 0.25])?)?;
            let s = Poly2::from_flat("s_terms", &spec.get_list("s_terms", &[1.0, 1.0, 0.3])?)?;
            let half = positive("half_width", spec.get_num("half_width", 1.0)?)?;
            (graph_surface(r, s, half), vec![])
        }
        "inverted" => {
            let base = make(spec.get_surface("base")?)?;
            let c = spec.get_list("center", &DEFAULT_CENTER)?;
            if c.len() != 4 {
                return Err(bad("center", "expected four coordinates"));
            }
            let center = V4::new(c[0], c[1], c[2], c[3]);
            let facts = base.facts.iter().copied().filter(|f| f.conformally_invariant()).collect();
            (inverted(&base.chart, center), facts)
        }
        "scaled" => {
            let base = make(spec.get_surface("base")?)?;
            let mu = positive("mu", spec.get_num("mu", 2.0)?)?;
            let facts = base.facts.iter().copied().filter(|f| f.conformally_invariant() || f.similarity_invariant()).collect();
            (scaled(&base.chart, mu), facts)
        }
        other => return Err(GeomError::UnknownEntry(other.into())),
    };
    Ok(ZooEntry { name: spec.name.clone(), chart, facts })
}

fn proportional_linear(k1: &[f64], k2: &[f64]) -> bool {
    k1.len() == 2 && k2.len() == 2 && k1[0] == 0.0 && k2[0] == 0.0 && k1[1] == k2[1] && k1[1] != 0.0
}

pub const DEFAULT_CENTER: [f64; 4] = [1.7, -2.3, 0.9, 2.9];

pub fn plane() -> SurfaceChart {
    SurfaceChart::analytic("plane", Domain::new(-1.0, 1.0, -1.0, 1.0), true, |u, v| {
        Jet3 { f: V4::new(u, v, 0.0, 0.0), fu: V4::x(), fv: V4::y(), ..Default::default() }
    })
}

fn circle_derivative(r: f64, s: f64, n: usize) -> (f64, f64) {
    let ph = s / r + n as f64 * FRAC_PI_2;
    let sc = r * r.powi(-(n as i32));
    (sc * ph.cos(), sc * ph.sin())
}

/// Product of two circles of radii `r1, r2` parametrized by arclength.
pub fn product_circles(r1: f64, r2: f64) -> SurfaceChart {
    let d = Domain::new(0.0, 2.0 * PI * r1, 0.0, 2.0 * PI * r2);
    SurfaceChart::analytic(format!("product_circles({r1},{r2})"), d, true, move |u, v| {
        Jet3::from_fn(|i, j| match (i, j) {
            (i, 0) => {
                let (a, b) = circle_derivative(r1, u, i);
                let mut x = V4::new(a, b, 0.0, 0.0);
                if i == 0 {
                    let (c, e) = circle_derivative(r2, v, 0);
                    x[2] = c;
                    x[3] = e;
                }
                x
            }
            (0, j) => {
                let (c, e) = circle_derivative(r2, v, j);
                V4::new(0.0, 0.0, c, e)
            }
            _ => V4::zeros(),
        })
    })
    .periodic(true, true)
}

/// Product `gamma1(u) x gamma2(v)` of curves with curvatures `k1, k2`.
pub fn product_curves(k1: Poly1, k2: Poly1, ur: (f64, f64), vr: (f64, f64)) -> SurfaceChart {
    let pad = |r: (f64, f64)| 0.1 * (r.1 - r.0);
    let c1 = Arc::new(CurvatureCurve::new(k1.clone(), ur.0, ur.0 - pad(ur), ur.1 + pad(ur)));
    let c2 = Arc::new(CurvatureCurve::new(k2.clone(), vr.0, vr.0 - pad(vr), vr.1 + pad(vr)));
    let d = Domain::new(ur.0, ur.1, vr.0, vr.1);
    let name = format!("product_curves({:?},{:?})", k1.0, k2.0);
    SurfaceChart::analytic(name, d, true, move |u, v| {
        let a = c1.jet(u);
        let b = c2.jet(v);
        let lift1 = |x: nalgebra::Vector2<f64>| V4::new(x[0], x[1], 0.0, 0.0);
        let lift2 = |x: nalgebra::Vector2<f64>| V4::new(0.0, 0.0, x[0], x[1]);
        Jet3 {
            f: lift1(a.pos) + lift2(b.pos),
            fu: lift1(a.d1),
            fv: lift2(b.d1),
            fuu: lift1(a.d2),
            fuv: V4::zeros(),
            fvv: lift2(b.d2),
            fuuu: lift1(a.d3),
            fuuv: V4::zeros(),
            fuvv: V4::zeros(),
            fvvv: lift2(b.d3),
        }
    })
    .with_margin(0.09 * d.width().min(d.height()))
}

/// `(a cos v cos u, b cos v sin u, c sin v, 0)`.
fn ellipsoid_chart(name: String, a: f64, b: f64, c: f64, vmax: f64) -> SurfaceChart {
    let d = Domain::new(0.0, 2.0 * PI, -vmax, vmax);
    SurfaceChart::analytic(name, d, false, move |u, v| {
        Jet3::from_fn(|i, j| {
            let cu = (u + i as f64 * FRAC_PI_2).cos();
            let su = (u + i as f64 * FRAC_PI_2).sin();
            let cv = (v + j as f64 * FRAC_PI_2).cos();
            let sv = (v + j as f64 * FRAC_PI_2).sin();
            V4::new(a * cu * cv, b * su * cv, if i == 0 { c * sv } else { 0.0 }, 0.0)
        })
    })
    .periodic(true, false)
    .with_margin(0.1)
}

pub fn round_sphere(r: f64) -> SurfaceChart {
    ellipsoid_chart(format!("round_sphere({r})"), r, r, r, 1.3)
}

pub fn triaxial_ellipsoid(a: f64, b: f64, c: f64) -> SurfaceChart {
    ellipsoid_chart(format!("triaxial_ellipsoid({a},{b},{c})"), a, b, c, 1.4)
}

/// Classical umbilic positions of the ellipsoid chart; exact up to roundoff.
pub fn ellipsoid_umbilics(a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let mut out = Vec::new();
    if (a2 - b2).abs() < 1e-14 || (b2 - c2).abs() < 1e-14 || (a2 - c2).abs() < 1e-14 {
        return out;
    }
    let between = |x: f64, y: f64, z: f64| (x - y) * (z - y) < 0.0;
    if between(a2, b2, c2) {
        // umbilics in the plane y = 0
        let s = ((c2 - b2) / (c2 - a2)).sqrt();
        let v0 = s.asin();
        for u in [0.0, PI] {
            out.push((u, v0));
            out.push((u, -v0));
        }
    } else if between(b2, a2, c2) {
        // plane x = 0
        let s = ((c2 - a2) / (c2 - b2)).sqrt();
        let v0 = s.asin();
        for u in [FRAC_PI_2, 3.0 * FRAC_PI_2] {
            out.push((u, v0));
            out.push((u, -v0));
        }
    } else {
        // plane z = 0
        let cu = ((a2 - c2) / (a2 - b2)).sqrt();
        let u0 = cu.acos();
        for u in [u0, PI - u0, PI + u0, 2.0 * PI - u0] {
            out.push((u, 0.0));
        }
    }
    out
}

fn poly_derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

fn poly_eval(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Graph `(x, y, Re w(z), Im w(z))` of a complex polynomial over `[-r, r]^2`.
pub fn holomorphic_curve(coeffs: Vec<Complex64>, r: f64) -> SurfaceChart {
    let mut ders = vec![coeffs.clone()];
    for _ in 0..3 {
        let next = poly_derivative(ders.last().expect("nonempty"));
        ders.push(next);
    }
    let name = format!("holomorphic_curve({:?})", coeffs.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>());
    SurfaceChart::analytic(name, Domain::new(-r, r, -r, r), true, move |x, y| {
        let z = Complex64::new(x, y);
        let w: Vec<Complex64> = ders.iter().map(|c| poly_eval(c, z)).collect();
        Jet3::from_fn(|a, b| {
            let n = a + b;
            let mut val = w[n] * Complex64::i().powu(b as u32);
            let mut out = V4::new(0.0, 0.0, 0.0, 0.0);
            match (a, b) {
                (0, 0) => {
                    out[0] = x;
                    out[1] = y;
                }
                (1, 0) => out[0] = 1.0,
                (0, 1) => out[1] = 1.0,
                _ => {}
            }
            if n == 0 {
                val = w[0];
            }
            out[2] = val.re;
            out[3] = val.im;
            out
        })
    })
    .with_margin(0.1 * r)
}

/// Catenoid `s (cosh v cos u, cosh v sin u, v, 0)` in a hyperplane.
pub fn catenoid(s: f64) -> SurfaceChart {
    let d = Domain::new(0.0, 2.0 * PI, -1.0, 1.0);
    SurfaceChart::analytic(format!("catenoid({s})"), d, true, move |u, v| {
        Jet3::from_fn(|i, j| {
            let cu = (u + i as f64 * FRAC_PI_2).cos();
            let su = (u + i as f64 * FRAC_PI_2).sin();
            let ch = if j % 2 == 0 { v.cosh() } else { v.sinh() };
            let z = match (i, j) {
                (0, 0) => v,
                (0, 1) => 1.0,
                _ => 0.0,
            };
            V4::new(ch * cu, ch * su, z, 0.0) * s
        })
    })
    .periodic(true, false)
    .with_margin(0.1)
}

/// Real polynomial in two variables as `(i, j, coefficient)` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2(pub Vec<(u32, u32, f64)>);

impl Poly2 {
    /// Parse `[i, j, coefficient, ...]` triples; `name` labels errors.
    pub fn from_flat(name: &str, flat: &[f64]) -> Result<Poly2> {
        if !flat.len().is_multiple_of(3) {
            return Err(bad(name, "expected [i, j, coefficient, ...] triples"));
        }
        flat.chunks(3)
            .map(|t| {
                if t[0] < 0.0 || t[1] < 0.0 || t[0].fract() != 0.0 || t[1].fract() != 0.0 {
                    Err(bad(name, "exponents must be nonnegative integers"))
                } else {
                    Ok((t[0] as u32, t[1] as u32, t[2]))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Poly2)
    }

    /// `d^{a+b}/du^a dv^b` at `(u, v)`.
    pub fn partial(&self, a: u32, b: u32, u: f64, v: f64) -> f64 {
        let falling = |n: u32, k: u32| (0..k).map(|m| (n - m) as f64).product::<f64>();
        self.0
            .iter()
            .filter(|&&(i, j, _)| i >= a && j >= b)
            .map(|&(i, j, c)| c * falling(i, a) * falling(j, b) * u.powi((i - a) as i32) * v.powi((j - b) as i32))
            .sum()
    }
}

/// Graph `(u, v, R(u, v), S(u, v))` over `[-w, w]^2`.
pub fn graph_surface(r: Poly2, s: Poly2, w: f64) -> SurfaceChart {
    let name = format!("graph_surface({:?},{:?})", r.0, s.0);
    SurfaceChart::analytic(name, Domain::new(-w, w, -w, w), false, move |u, v| {
        Jet3::from_fn(|a, b| {
            let (a, b) = (a as u32, b as u32);
            let lin = |k: usize| match (a, b, k) {
                (0, 0, 0) => u,
                (0, 0, 1) => v,
                (1, 0, 0) | (0, 1, 1) => 1.0,
                _ => 0.0,
            };
            V4::new(lin(0), lin(1), r.partial(a, b, u, v), s.partial(a, b, u, v))
        })
    })
    .with_margin(0.1 * w)
}

fn map_source(chart: &SurfaceChart, name: String, g: impl Fn(Jet3) -> Jet3 + Send + Sync + 'static) -> SurfaceChart {
    let source = match &chart.source {
        JetSource::Analytic(j) => {
            let j = j.clone();
            JetSource::Analytic(Arc::new(move |u, v| g(j(u, v))))
        }
        JetSource::Values { .. } => unreachable!("zoo charts carry analytic jets"),
    };
    SurfaceChart { name, source, ..chart.clone() }
}

/// Ambient inversion `x -> c + (x - c)/|x - c|^2` applied to a chart.
pub fn inverted(base: &SurfaceChart, center: V4) -> SurfaceChart {
    let name = format!("inverted({})", base.name);
    map_source(base, name, move |jet| {
        let g = Taylor4::from_jet(&jet).shift(&(-center));
        let r2 = g.dot(&g);
        let inv: Taylor2 = r2.recip();
        g.mul_scalar(&inv).shift(&center).to_jet()
    })
}

/// Homothety `x -> mu x`.
pub fn scaled(base: &SurfaceChart, mu: f64) -> SurfaceChart {
    let name = format!("scaled({},{mu})", base.name);
    let mut c = map_source(base, name, move |jet| jet.map(|x| x * mu));
    c.margin = base.margin;
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::adapted_frame;
    use crate::grid::Grid;

    #[test]
    fn holomorphic_square_at_origin() {
        let c = holomorphic_curve(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], 1.0);
        let j = c.eval_jet(0.0, 0.0).unwrap();
        assert_eq!(j.fuu, V4::new(0.0, 0.0, 2.0, 0.0));
        assert_eq!(j.fuv, V4::new(0.0, 0.0, 0.0, 2.0));
        assert_eq!(j.fvv, V4::new(0.0, 0.0, -2.0, 0.0));
        let j = c.eval_jet(0.3, -0.2).unwrap();
        assert!((j.fu.norm_squared() - j.fv.norm_squared()).abs() < 1e-14);
        assert!(j.fu.dot(&j.fv).abs() < 1e-14);
    }

    #[test]
    fn product_circles_unit_speed() {
        let c = product_circles(0.5, 1.0);
        for &(u, v) in &[(0.1, 0.2), (2.0, 5.0), (3.1, 0.0)] {
            let j = c.eval_jet(u, v).unwrap();
            assert!((j.fu.norm() - 1.0).abs() < 1e-14 && (j.fv.norm() - 1.0).abs() < 1e-14);
            assert!(j.fu.dot(&j.fv).abs() < 1e-15);
            assert!((j.fuu.norm() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn inversion_matches_direct_evaluation() {
        let base = product_curves(Poly1(vec![0.0, 1.0]), Poly1(vec![0.0, 1.0]), (0.5, 1.5), (0.5, 1.5));
        let center = V4::new(DEFAULT_CENTER[0], DEFAULT_CENTER[1], DEFAULT_CENTER[2], DEFAULT_CENTER[3]);
        let inv = inverted(&base, center);
        let direct = |u: f64, v: f64| {
            let g = base.eval_jet(u, v).unwrap().f - center;
            center + g / g.norm_squared()
        };
        let (u, v) = (0.9, 1.2);
        let j = inv.eval_jet(u, v).unwrap();
        assert!((j.f - direct(u, v)).norm() < 1e-14);
        let h = 1e-3;
        let fu = (direct(u - 2.0 * h, v) - direct(u + 2.0 * h, v) + (direct(u + h, v) - direct(u - h, v)) * 8.0) / (12.0 * h);
        assert!((j.fu - fu).norm() < 1e-9);
        let fuv = (direct(u + h, v + h) - direct(u + h, v - h) - direct(u - h, v + h) + direct(u - h, v - h)) / (4.0 * h * h);
        assert!((j.fuv - fuv).norm() < 1e-5);
        // conformal
        assert!((j.fu.norm_squared() - j.fv.norm_squared()).abs() < 1e-12 * j.fu.norm_squared());
        assert!(j.fu.dot(&j.fv).abs() < 1e-12 * j.fu.norm_squared());
    }

    #[test]
    fn ellipsoid_umbilic_seed_positions() {
        let um = ellipsoid_umbilics(1.0, 1.2, 1.5);
        assert_eq!(um.len(), 4);
        assert!((um[0].1.sin().powi(2) - 0.648).abs() < 1e-12);
    }

    #[test]
    fn zoo_charts_are_immersions_with_good_frames() {
        for name in NAMES {
            let spec = match name {
                "inverted" | "scaled" => SurfaceSpec::new(name).surface("base", SurfaceSpec::new("product_curves")),
                n => SurfaceSpec::new(n),
            };
            let e = make(&spec).unwrap();
            let g = Grid::for_chart(&e.chart, 16, 16).unwrap();
            for k in 0..g.len() {
                let (i, j) = g.ij(k);
                let (u, v) = g.node(i, j);
                let fr = adapted_frame(&e.chart, u, v).unwrap_or_else(|err| panic!("{name} at ({u},{v}): {err}"));
                assert!(fr.orthonormality_defect() < 1e-12, "{name}");
                assert!((fr.det() - 1.0).abs() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn unknown_entry() {
        assert!(matches!(make(&SurfaceSpec::new("klein_bottle")), Err(GeomError::UnknownEntry(_))));
    }

    #[test]
    fn default_entries_certify() {
        let mut specs: Vec<SurfaceSpec> = NAMES[..8].iter().map(|n| SurfaceSpec::new(n)).collect();
        specs.push(SurfaceSpec::new("inverted").surface("base", SurfaceSpec::new("product_curves")));
        specs.push(SurfaceSpec::new("inverted").surface("base", SurfaceSpec::new("holomorphic_curve")));
        specs.push(SurfaceSpec::new("scaled").surface("base", SurfaceSpec::new("product_circles")));
        for spec in specs {
            let entry = make(&spec).unwrap();
            for check in certify(&entry).unwrap() {
                assert!(check.pass, "{} {:?}", entry.chart.name, check);
            }
        }
    }

    #[test]
    fn inversion_drops_signed_facts() {
        let e = make(&SurfaceSpec::new("inverted").surface("base", SurfaceSpec::new("holomorphic_curve"))).unwrap();
        assert!(!e.facts.contains(&Fact::SuperconformalPlus) && !e.facts.contains(&Fact::Minimal));
    }
}
