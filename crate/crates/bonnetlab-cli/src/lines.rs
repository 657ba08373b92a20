//! Curvature-line polylines: RK4 along the critical directions of
//! `|alpha(X, X)|^2`, in the parameter plane, with arclength steps.

use rayon::prelude::*;
use serde::Serialize;

use bonnetlab::invariants::{directions_from_sff, PointGeometry};
use bonnetlab::{GeomError, Grid, SurfaceChart, V4};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Through the direction of largest `|alpha(X, X)|`.
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stop {
    Boundary,
    PseudoUmbilic,
    /// Returned to the seed on a periodic chart.
    Closed,
    MaxSteps,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinePoint {
    /// Signed arclength from the seed.
    pub s: f64,
    pub u: f64,
    pub v: f64,
    #[serde(skip)]
    pub x: V4,
}

#[derive(Debug, Clone, Serialize)]
pub struct Polyline {
    pub id: usize,
    pub family: Family,
    pub seed: (f64, f64),
    pub step: f64,
    /// Why tracing ended, backward then forward.
    pub stops: [Stop; 2],
    pub points: Vec<LinePoint>,
}

type Dir = [f64; 2];

fn stop_of(e: &GeomError) -> Stop {
    match e {
        GeomError::OutOfDomain { .. } => Stop::Boundary,
        GeomError::UndefinedDirections { .. } => Stop::PseudoUmbilic,
        _ => Stop::Degenerate,
    }
}

fn norm(d: Dir) -> f64 {
    d[0].hypot(d[1])
}

struct Tracer<'a> {
    chart: &'a SurfaceChart,
    grid: &'a Grid,
    eps_scale: f64,
}

impl Tracer<'_> {
    /// Principal directions at `(u, v)` as unit-speed parameter velocities,
    /// with the values of `|alpha(X, X)|^2`.
    fn candidates(&self, u: f64, v: f64) -> Result<Vec<(Dir, f64)>, GeomError> {
        if !self.inside(u, v) {
            return Err(GeomError::OutOfDomain { u, v });
        }
        let g = PointGeometry::at(self.chart, u, v)?;
        let angles = directions_from_sff(&g.sff, u, v, self.eps_scale)?.principal;
        if angles.is_empty() {
            return Err(GeomError::UndefinedDirections { u, v, reason: "no critical direction" });
        }
        let rows = g.basis.frame_in_coords();
        Ok(angles
            .into_iter()
            .map(|t| {
                let (c, s) = (t.cos(), t.sin());
                let a = g.sff.alpha(0, 0) * (c * c) + g.sff.alpha(0, 1) * (2.0 * c * s) + g.sff.alpha(1, 1) * (s * s);
                ([c * rows[0][0] + s * rows[1][0], c * rows[0][1] + s * rows[1][1]], a.norm_squared())
            })
            .collect())
    }

    fn inside(&self, u: f64, v: f64) -> bool {
        let d = &self.grid.domain;
        (self.grid.periodic_u || (d.u0..=d.u1).contains(&u)) && (self.grid.periodic_v || (d.v0..=d.v1).contains(&v))
    }

    /// Candidate closest in angle to `prev`.
    fn direction(&self, u: f64, v: f64, prev: Dir) -> Result<Dir, GeomError> {
        let pn = norm(prev);
        self.candidates(u, v)?
            .into_iter()
            .map(|(d, _)| d)
            .max_by(|a, b| {
                let ca = (a[0] * prev[0] + a[1] * prev[1]) / (norm(*a) * pn);
                let cb = (b[0] * prev[0] + b[1] * prev[1]) / (norm(*b) * pn);
                ca.total_cmp(&cb)
            })
            .ok_or(GeomError::UndefinedDirections { u, v, reason: "no critical direction" })
    }

    fn wrap(&self, u: f64, v: f64) -> (f64, f64) {
        let d = &self.grid.domain;
        let u = if self.grid.periodic_u { d.u0 + (u - d.u0).rem_euclid(d.width()) } else { u };
        let v = if self.grid.periodic_v { d.v0 + (v - d.v0).rem_euclid(d.height()) } else { v };
        (u, v)
    }

    /// Parameter-plane distance with periodic axes identified.
    fn distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let d = &self.grid.domain;
        let fold = |x: f64, p: bool, w: f64| if p { let r = x.rem_euclid(w); r.min(w - r) } else { x.abs() };
        fold(a.0 - b.0, self.grid.periodic_u, d.width()).hypot(fold(a.1 - b.1, self.grid.periodic_v, d.height()))
    }

    /// One arclength step of size `h`; returns the new point and heading.
    fn rk4(&self, p: (f64, f64), prev: Dir, h: f64) -> Result<((f64, f64), Dir), GeomError> {
        let k1 = self.direction(p.0, p.1, prev)?;
        let k2 = self.direction(p.0 + 0.5 * h * k1[0], p.1 + 0.5 * h * k1[1], k1)?;
        let k3 = self.direction(p.0 + 0.5 * h * k2[0], p.1 + 0.5 * h * k2[1], k2)?;
        let k4 = self.direction(p.0 + h * k3[0], p.1 + h * k3[1], k3)?;
        let step = [(k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0, (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0];
        let q = (p.0 + h * step[0], p.1 + h * step[1]);
        if !self.inside(q.0, q.1) {
            return Err(GeomError::OutOfDomain { u: q.0, v: q.1 });
        }
        Ok((q, k4))
    }

    /// Points after the seed along `heading`, and the stop reason.
    fn half_line(&self, seed: (f64, f64), heading: Dir, h: f64, max_steps: usize) -> (Vec<(f64, f64)>, Stop) {
        let mut out = Vec::new();
        let (mut p, mut d) = (seed, heading);
        for k in 0..max_steps {
            match self.rk4(p, d, h) {
                Ok((q, e)) => {
                    p = self.wrap(q.0, q.1);
                    d = e;
                    if k >= 4 && self.distance(p, seed) < 0.5 * h * norm(d) {
                        return (out, Stop::Closed);
                    }
                    out.push(p);
                }
                Err(e) => return (out, stop_of(&e)),
            }
        }
        (out, Stop::MaxSteps)
    }

    fn trace(&self, id: usize, seed: (f64, f64), family: Family, max_steps: usize) -> Option<Polyline> {
        let cands = self.candidates(seed.0, seed.1).ok()?;
        let pick = cands.iter().copied().max_by(|a, b| match family {
            Family::Max => a.1.total_cmp(&b.1),
            Family::Min => b.1.total_cmp(&a.1),
        })?;
        let heading = pick.0;
        let jet = self.chart.eval_jet(seed.0, seed.1).ok()?;
        // a quarter of the grid step, measured in arclength
        let h = 0.25 * (jet.fu.norm() * self.grid.du()).min(jet.fv.norm() * self.grid.dv());
        let (fwd, stop_f) = self.half_line(seed, heading, h, max_steps);
        let (back, stop_b) = if stop_f == Stop::Closed { (vec![], Stop::Closed) } else { self.half_line(seed, [-heading[0], -heading[1]], h, max_steps) };
        let nb = back.len() as f64;
        let params: Vec<(f64, (f64, f64))> = back
            .iter()
            .rev()
            .enumerate()
            .map(|(k, &p)| (-(nb - k as f64) * h, p))
            .chain(std::iter::once((0.0, seed)))
            .chain(fwd.iter().enumerate().map(|(k, &p)| ((k + 1) as f64 * h, p)))
            .collect();
        let points = params
            .into_iter()
            .map(|(s, (u, v))| LinePoint { s, u, v, x: self.chart.value(u, v).unwrap_or_else(|_| V4::from_element(f64::NAN)) })
            .collect();
        Some(Polyline { id, family, seed, step: h, stops: [stop_b, stop_f], points })
    }
}

/// Interior seed lattice, `n` per axis, row-major.
pub fn seeds(grid: &Grid, n: usize) -> Vec<(f64, f64)> {
    let d = &grid.domain;
    let at = |k: usize, a: f64, w: f64| a + (k as f64 + 0.5) / n as f64 * w;
    (0..n).flat_map(|j| (0..n).map(move |i| (at(i, d.u0, d.width()), at(j, d.v0, d.height())))).collect()
}

/// Both families through every seed. Seeds at pseudo-umbilic points yield
/// no polyline; ids are assigned before that filtering.
pub fn trace_lines(chart: &SurfaceChart, grid: &Grid, seeds_per_axis: usize, max_steps: usize, eps_scale: f64) -> Vec<Polyline> {
    let tracer = Tracer { chart, grid, eps_scale };
    let jobs: Vec<(usize, (f64, f64), Family)> = seeds(grid, seeds_per_axis)
        .into_iter()
        .enumerate()
        .flat_map(|(k, s)| [(2 * k, s, Family::Max), (2 * k + 1, s, Family::Min)])
        .collect();
    jobs.par_iter().filter_map(|&(id, s, f)| tracer.trace(id, s, f, max_steps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use bonnetlab::zoo;

    #[test]
    fn torus_lines_of_largest_curvature_are_closed_circles() {
        // the u-circles have the smaller radius
        let c = zoo::product_circles(0.5, 1.0);
        let g = Grid::for_chart(&c, 32, 32).unwrap();
        let lines = trace_lines(&c, &g, 2, 4000, 1e-6);
        assert_eq!(lines.len(), 8);
        for l in lines.iter().filter(|l| l.family == Family::Max) {
            assert_eq!(l.stops, [Stop::Closed, Stop::Closed]);
            assert!(l.points.iter().all(|p| (p.v - l.seed.1).abs() < 1e-9), "{:?}", l.seed);
            let length = l.step * l.points.len() as f64;
            assert!((length - std::f64::consts::TAU * 0.5).abs() < l.step, "{length}");
            // points stay on the torus
            assert!(l.points.iter().all(|p| ((p.x[0].powi(2) + p.x[1].powi(2)).sqrt() - 0.5).abs() < 1e-12));
        }
    }

    #[test]
    fn lines_follow_a_principal_direction_to_fourth_order() {
        // a triaxial ellipsoid is a surface in a hyperplane; its lines here
        // are the classical ones, so halving the step barely moves the endpoint
        let c = zoo::triaxial_ellipsoid(1.0, 1.2, 1.5);
        let t = Tracer { chart: &c, grid: &Grid::for_chart(&c, 32, 32).unwrap(), eps_scale: 1e-6 };
        let seed = (0.3, 0.2);
        let end = |h: f64, n: usize| {
            let d = t.candidates(seed.0, seed.1).unwrap().into_iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
            let (pts, _) = t.half_line(seed, d, h, n);
            *pts.last().unwrap()
        };
        let (a, b, c4) = (end(0.04, 10), end(0.02, 20), end(0.01, 40));
        let e1 = t.distance(a, c4);
        let e2 = t.distance(b, c4);
        assert!(e1 / e2 > 10.0, "{e1:e} {e2:e}");
    }

    #[test]
    fn tracing_stops_at_the_boundary() {
        let c = zoo::triaxial_ellipsoid(1.0, 1.2, 1.5);
        let g = Grid::sub(bonnetlab::Domain::new(0.2, 0.6, 0.1, 0.5), 16, 16).unwrap();
        let lines = trace_lines(&c, &g, 2, 10_000, 1e-6);
        assert!(!lines.is_empty());
        for l in &lines {
            assert_eq!(l.stops, [Stop::Boundary, Stop::Boundary]);
            assert!(l.points.iter().all(|p| g.domain.contains(p.u, p.v, 0.0)));
        }
    }
}
