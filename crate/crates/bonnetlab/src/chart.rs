//! Immersion patches `R^2 -> R^4` and their third-order jets.

use std::fmt;
use std::sync::Arc;

use nalgebra::Vector4;
use serde::Serialize;

use crate::error::{GeomError, Result};

pub type V4 = Vector4<f64>;

/// Value and all partial derivatives up to order three at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet3 {
    pub f: V4,
    pub fu: V4,
    pub fv: V4,
    pub fuu: V4,
    pub fuv: V4,
    pub fvv: V4,
    pub fuuu: V4,
    pub fuuv: V4,
    pub fuvv: V4,
    pub fvvv: V4,
}

impl Jet3 {
    /// `d^{i+j} f / du^i dv^j` for `i + j <= 3`.
    pub fn partial(&self, i: usize, j: usize) -> V4 {
        match (i, j) {
            (0, 0) => self.f,
            (1, 0) => self.fu,
            (0, 1) => self.fv,
            (2, 0) => self.fuu,
            (1, 1) => self.fuv,
            (0, 2) => self.fvv,
            (3, 0) => self.fuuu,
            (2, 1) => self.fuuv,
            (1, 2) => self.fuvv,
            (0, 3) => self.fvvv,
            _ => panic!("jet order {} exceeds three", i + j),
        }
    }

    /// Build from a closure giving `d^{i+j} f / du^i dv^j`.
    pub fn from_fn(d: impl Fn(usize, usize) -> V4) -> Jet3 {
        Jet3 {
            f: d(0, 0),
            fu: d(1, 0),
            fv: d(0, 1),
            fuu: d(2, 0),
            fuv: d(1, 1),
            fvv: d(0, 2),
            fuuu: d(3, 0),
            fuuv: d(2, 1),
            fuvv: d(1, 2),
            fvvv: d(0, 3),
        }
    }

    /// Jet of the chart with the roles of `u` and `v` exchanged.
    pub fn swapped(&self) -> Jet3 {
        Jet3::from_fn(|i, j| self.partial(j, i))
    }

    pub fn map(&self, g: impl Fn(V4) -> V4) -> Jet3 {
        Jet3::from_fn(|i, j| g(self.partial(i, j)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domain {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Domain {
    pub fn new(u0: f64, u1: f64, v0: f64, v1: f64) -> Self {
        Domain { u0, u1, v0, v1 }
    }

    pub fn diameter(&self) -> f64 {
        (self.u1 - self.u0).hypot(self.v1 - self.v0)
    }

    pub fn width(&self) -> f64 {
        self.u1 - self.u0
    }

    pub fn height(&self) -> f64 {
        self.v1 - self.v0
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.u0 + self.u1), 0.5 * (self.v0 + self.v1))
    }

    pub fn contains(&self, u: f64, v: f64, slack: f64) -> bool {
        u >= self.u0 - slack && u <= self.u1 + slack && v >= self.v0 - slack && v <= self.v1 + slack
    }
}

pub type JetFn = Arc<dyn Fn(f64, f64) -> Jet3 + Send + Sync>;
pub type ValueFn = Arc<dyn Fn(f64, f64) -> V4 + Send + Sync>;

#[derive(Clone)]
pub enum JetSource {
    Analytic(JetFn),
    /// Values only; derivatives by central differences. First derivatives use
    /// `h_fd`, second and third use `10 h_fd` and `100 h_fd` to keep roundoff
    /// under control.
    Values { f: ValueFn, h_fd: f64 },
}

impl fmt::Debug for JetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetSource::Analytic(_) => write!(f, "Analytic"),
            JetSource::Values { h_fd, .. } => write!(f, "Values {{ h_fd: {h_fd} }}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SurfaceChart {
    pub name: String,
    pub domain: Domain,
    pub periodic_u: bool,
    pub periodic_v: bool,
    pub source: JetSource,
    pub isothermal: bool,
    pub ambient_c: f64,
    /// How far outside the nominal domain the evaluator remains valid. Used
    /// only by finite-difference stencils straddling the boundary.
    pub margin: f64,
}

impl SurfaceChart {
    pub fn analytic(
        name: impl Into<String>,
        domain: Domain,
        isothermal: bool,
        jet: impl Fn(f64, f64) -> Jet3 + Send + Sync + 'static,
    ) -> Self {
        SurfaceChart {
            name: name.into(),
            domain,
            periodic_u: false,
            periodic_v: false,
            source: JetSource::Analytic(Arc::new(jet)),
            isothermal,
            ambient_c: 0.0,
            margin: 0.05 * domain.diameter(),
        }
    }

    /// Value-only chart with the default step `1e-5 * diameter`.
    pub fn from_values(
        name: impl Into<String>,
        domain: Domain,
        isothermal: bool,
        f: impl Fn(f64, f64) -> V4 + Send + Sync + 'static,
    ) -> Self {
        let h_fd = 1e-5 * domain.diameter();
        SurfaceChart {
            name: name.into(),
            domain,
            periodic_u: false,
            periodic_v: false,
            source: JetSource::Values { f: Arc::new(f), h_fd },
            isothermal,
            ambient_c: 0.0,
            margin: 0.05 * domain.diameter(),
        }
    }

    pub fn periodic(mut self, pu: bool, pv: bool) -> Self {
        self.periodic_u = pu;
        self.periodic_v = pv;
        self
    }

    pub fn with_margin(mut self, m: f64) -> Self {
        self.margin = m;
        self
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.source, JetSource::Analytic(_))
    }

    pub fn is_compact(&self) -> bool {
        self.periodic_u && self.periodic_v
    }

    fn wrap(&self, u: f64, v: f64) -> (f64, f64) {
        let d = &self.domain;
        let u = if self.periodic_u { d.u0 + (u - d.u0).rem_euclid(d.width()) } else { u };
        let v = if self.periodic_v { d.v0 + (v - d.v0).rem_euclid(d.height()) } else { v };
        (u, v)
    }

    /// Jet at a point of the domain (after periodic reduction).
    pub fn eval_jet(&self, u: f64, v: f64) -> Result<Jet3> {
        self.jet_with_slack(u, v, 1e-12 * (1.0 + self.domain.diameter()))
    }

    /// Jet allowing evaluation up to `margin` outside the domain.
    pub fn jet_near(&self, u: f64, v: f64) -> Result<Jet3> {
        self.jet_with_slack(u, v, self.margin)
    }

    fn jet_with_slack(&self, u: f64, v: f64, slack: f64) -> Result<Jet3> {
        if !u.is_finite() || !v.is_finite() {
            return Err(GeomError::OutOfDomain { u, v });
        }
        let (uw, vw) = self.wrap(u, v);
        if !self.domain.contains(uw, vw, slack) {
            return Err(GeomError::OutOfDomain { u, v });
        }
        let jet = match &self.source {
            JetSource::Analytic(j) => j(uw, vw),
            JetSource::Values { f, h_fd } => fd_jet(f.as_ref(), uw, vw, *h_fd),
        };
        let cross = jet.fu.norm_squared() * jet.fv.norm_squared() - jet.fu.dot(&jet.fv).powi(2);
        let scale = jet.fu.norm_squared() * jet.fv.norm_squared();
        if !(cross > 1e-20 * scale.max(1e-300)) || !cross.is_finite() {
            return Err(GeomError::DegenerateImmersion { u, v });
        }
        Ok(jet)
    }

    /// Value of the immersion (no nondegeneracy check).
    pub fn value(&self, u: f64, v: f64) -> Result<V4> {
        let (uw, vw) = self.wrap(u, v);
        if !self.domain.contains(uw, vw, self.margin) {
            return Err(GeomError::OutOfDomain { u, v });
        }
        Ok(match &self.source {
            JetSource::Analytic(j) => j(uw, vw).f,
            JetSource::Values { f, .. } => f(uw, vw),
        })
    }

    /// The same immersion with `u` and `v` exchanged; reverses orientation.
    pub fn swap_uv(&self) -> SurfaceChart {
        let d = self.domain;
        let source = match &self.source {
            JetSource::Analytic(j) => {
                let j = j.clone();
                JetSource::Analytic(Arc::new(move |u, v| j(v, u).swapped()))
            }
            JetSource::Values { f, h_fd } => {
                let f = f.clone();
                JetSource::Values { f: Arc::new(move |u, v| f(v, u)), h_fd: *h_fd }
            }
        };
        SurfaceChart {
            name: format!("{}_swapped", self.name),
            domain: Domain::new(d.v0, d.v1, d.u0, d.u1),
            periodic_u: self.periodic_v,
            periodic_v: self.periodic_u,
            source,
            isothermal: self.isothermal,
            ambient_c: self.ambient_c,
            margin: self.margin,
        }
    }

    /// Discrepancy between `d/du f_uv` and `d/dv f_uu` for value-only charts.
    pub fn fd_commutator_residual(&self, u: f64, v: f64) -> Option<f64> {
        let JetSource::Values { f, h_fd } = &self.source else { return None };
        let h = 100.0 * h_fd;
        let d2 = |a: f64, b: f64| {
            let fuu = (f(a + h, b) - 2.0 * f(a, b) + f(a - h, b)) / (h * h);
            let fuv = (f(a + h, b + h) - f(a + h, b - h) - f(a - h, b + h) + f(a - h, b - h)) / (4.0 * h * h);
            (fuu, fuv)
        };
        let via_v = (d2(u, v + h).0 - d2(u, v - h).0) / (2.0 * h);
        let via_u = (d2(u + h, v).1 - d2(u - h, v).1) / (2.0 * h);
        Some((via_v - via_u).norm())
    }
}

fn fd_jet(f: &(dyn Fn(f64, f64) -> V4 + Send + Sync), u: f64, v: f64, h_fd: f64) -> Jet3 {
    let h1 = h_fd;
    let h2 = 10.0 * h_fd;
    let h3 = 100.0 * h_fd;
    let c = f(u, v);
    let d1 = |du: f64, dv: f64, h: f64| (f(u + du * h, v + dv * h) - f(u - du * h, v - dv * h)) / (2.0 * h);
    let fu = d1(1.0, 0.0, h1);
    let fv = d1(0.0, 1.0, h1);
    let fuu = (f(u + h2, v) - 2.0 * c + f(u - h2, v)) / (h2 * h2);
    let fvv = (f(u, v + h2) - 2.0 * c + f(u, v - h2)) / (h2 * h2);
    let fuv = (f(u + h2, v + h2) - f(u + h2, v - h2) - f(u - h2, v + h2) + f(u - h2, v - h2)) / (4.0 * h2 * h2);
    let h = h3;
    let fuuu = (f(u + 2.0 * h, v) - 2.0 * f(u + h, v) + 2.0 * f(u - h, v) - f(u - 2.0 * h, v)) / (2.0 * h * h * h);
    let fvvv = (f(u, v + 2.0 * h) - 2.0 * f(u, v + h) + 2.0 * f(u, v - h) - f(u, v - 2.0 * h)) / (2.0 * h * h * h);
    let second_u = |b: f64| (f(u + h, b) - 2.0 * f(u, b) + f(u - h, b)) / (h * h);
    let second_v = |a: f64| (f(a, v + h) - 2.0 * f(a, v) + f(a, v - h)) / (h * h);
    let fuuv = (second_u(v + h) - second_u(v - h)) / (2.0 * h);
    let fuvv = (second_v(u + h) - second_v(u - h)) / (2.0 * h);
    Jet3 { f: c, fu, fv, fuu, fuv, fvv, fuuu, fuuv, fuvv, fvvv }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> SurfaceChart {
        SurfaceChart::analytic("plane", Domain::new(-1.0, 1.0, -1.0, 1.0), true, |u, v| Jet3 {
            f: V4::new(u, v, 0.0, 0.0),
            fu: V4::new(1.0, 0.0, 0.0, 0.0),
            fv: V4::new(0.0, 1.0, 0.0, 0.0),
            ..Default::default()
        })
    }

    #[test]
    fn plane_has_vanishing_second_partials() {
        let j = plane().eval_jet(0.3, 0.7).unwrap();
        assert_eq!(j.fuu, V4::zeros());
        assert_eq!(j.fuv, V4::zeros());
        assert_eq!(j.fvv, V4::zeros());
    }

    #[test]
    fn out_of_domain_is_rejected() {
        assert!(matches!(plane().eval_jet(3.0, 0.0), Err(GeomError::OutOfDomain { .. })));
    }

    #[test]
    fn degenerate_point_is_rejected() {
        let c = SurfaceChart::analytic("cone", Domain::new(-1.0, 1.0, -1.0, 1.0), false, |u, v| Jet3 {
            f: V4::new(u * v, v, 0.0, 0.0),
            fu: V4::new(v, 0.0, 0.0, 0.0),
            fv: V4::new(u, 1.0, 0.0, 0.0),
            ..Default::default()
        });
        assert!(matches!(c.eval_jet(0.5, 0.0), Err(GeomError::DegenerateImmersion { .. })));
        assert!(c.eval_jet(0.5, 0.5).is_ok());
    }

    #[test]
    fn periodic_wrap_reduces_coordinates() {
        let c = SurfaceChart::analytic("circle", Domain::new(0.0, 1.0, 0.0, 1.0), false, |u, v| Jet3 {
            f: V4::new(u, v, 0.0, 0.0),
            fu: V4::new(1.0, 0.0, 0.0, 0.0),
            fv: V4::new(0.0, 1.0, 0.0, 0.0),
            ..Default::default()
        })
        .periodic(true, false);
        let j = c.eval_jet(2.25, 0.5).unwrap();
        assert!((j.f[0] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn fd_jets_of_a_cubic_graph() {
        let d = Domain::new(-1.0, 1.0, -1.0, 1.0);
        let c = SurfaceChart::from_values("cubic", d, false, |u, v| {
            V4::new(u, v, u * u * v + v * v * v / 3.0, u * v)
        });
        let (u, v) = (0.3, -0.4);
        let j = c.eval_jet(u, v).unwrap();
        let exact = Jet3 {
            f: V4::new(u, v, u * u * v + v * v * v / 3.0, u * v),
            fu: V4::new(1.0, 0.0, 2.0 * u * v, v),
            fv: V4::new(0.0, 1.0, u * u + v * v, u),
            fuu: V4::new(0.0, 0.0, 2.0 * v, 0.0),
            fuv: V4::new(0.0, 0.0, 2.0 * u, 1.0),
            fvv: V4::new(0.0, 0.0, 2.0 * v, 0.0),
            fuuu: V4::zeros(),
            fuuv: V4::new(0.0, 0.0, 2.0, 0.0),
            fuvv: V4::zeros(),
            fvvv: V4::new(0.0, 0.0, 2.0, 0.0),
        };
        for (i, k) in [(1, 0), (0, 1)] {
            assert!((j.partial(i, k) - exact.partial(i, k)).norm() < 1e-9);
        }
        for (i, k) in [(2, 0), (1, 1), (0, 2)] {
            assert!((j.partial(i, k) - exact.partial(i, k)).norm() < 1e-5);
        }
        for (i, k) in [(3, 0), (2, 1), (1, 2), (0, 3)] {
            assert!((j.partial(i, k) - exact.partial(i, k)).norm() < 1e-3);
        }
        let h_fd = 1e-5 * d.diameter();
        assert!(c.fd_commutator_residual(u, v).unwrap() < 10.0 * (100.0 * h_fd).powi(2) + 1e-6);
    }

    #[test]
    fn swap_exchanges_partials() {
        let c = SurfaceChart::analytic("g", Domain::new(-1.0, 1.0, -1.0, 1.0), false, |u, v| {
            Jet3::from_fn(|i, j| match (i, j) {
                (0, 0) => V4::new(u, v, u * u * v, 0.0),
                (1, 0) => V4::new(1.0, 0.0, 2.0 * u * v, 0.0),
                (0, 1) => V4::new(0.0, 1.0, u * u, 0.0),
                (2, 0) => V4::new(0.0, 0.0, 2.0 * v, 0.0),
                (1, 1) => V4::new(0.0, 0.0, 2.0 * u, 0.0),
                (2, 1) => V4::new(0.0, 0.0, 2.0, 0.0),
                _ => V4::zeros(),
            })
        });
        let s = c.swap_uv();
        let a = c.eval_jet(0.2, 0.6).unwrap();
        let b = s.eval_jet(0.6, 0.2).unwrap();
        assert_eq!(a.fu, b.fv);
        assert_eq!(a.fuuv, b.fuvv);
    }
}
