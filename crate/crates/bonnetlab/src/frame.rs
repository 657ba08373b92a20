//! Adapted orthonormal frames and the tangent-basis bookkeeping that converts
//! between coordinate and frame components of 1-forms.

use nalgebra::{Matrix4, Vector2};

use crate::chart::{Jet3, SurfaceChart, V4};
use crate::error::{GeomError, Result};

/// Minimal angle between a seed axis and the tangent plane.
pub const SEED_ANGLE: f64 = 0.2;

/// Oriented 4-dimensional cross product: the unique `w` with
/// `det[a b c w] = |w|^2` and `w` orthogonal to `a, b, c`.
pub fn cross4(a: &V4, b: &V4, c: &V4) -> V4 {
    let mut w = V4::zeros();
    for i in 0..4 {
        let mut m = Matrix4::zeros();
        m.set_row(0, &a.transpose());
        m.set_row(1, &b.transpose());
        m.set_row(2, &c.transpose());
        m[(3, i)] = 1.0;
        w[i] = m.determinant();
    }
    w
}

pub fn det4(e: &[V4; 4]) -> f64 {
    Matrix4::from_columns(e).determinant()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptedFrame {
    pub e: [V4; 4],
    pub lambda: Option<f64>,
}

impl AdaptedFrame {
    pub fn e1(&self) -> V4 {
        self.e[0]
    }
    pub fn e2(&self) -> V4 {
        self.e[1]
    }
    pub fn e3(&self) -> V4 {
        self.e[2]
    }
    pub fn e4(&self) -> V4 {
        self.e[3]
    }

    /// Components of a vector along `(e3, e4)`.
    pub fn normal_coords(&self, x: &V4) -> Vector2<f64> {
        Vector2::new(x.dot(&self.e[2]), x.dot(&self.e[3]))
    }

    pub fn from_normal(&self, c: &Vector2<f64>) -> V4 {
        self.e[2] * c[0] + self.e[3] * c[1]
    }

    /// Rotation by a right angle in the normal plane, `e3 -> e4`.
    pub fn j_normal(&self, x: &V4) -> V4 {
        let c = self.normal_coords(x);
        self.from_normal(&Vector2::new(-c[1], c[0]))
    }

    pub fn orthonormality_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                d = d.max((self.e[i].dot(&self.e[j]) - target).abs());
            }
        }
        d
    }

    pub fn det(&self) -> f64 {
        det4(&self.e)
    }
}

/// Coefficients of `f_u = a e1`, `f_v = b e1 + c e2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentBasis {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TangentBasis {
    /// Coordinate components `(w(d_u), w(d_v))` to frame components `(w(e1), w(e2))`.
    pub fn to_frame(&self, w: [f64; 2]) -> [f64; 2] {
        let w1 = w[0] / self.a;
        [w1, (w[1] - self.b * w1) / self.c]
    }

    pub fn to_coord(&self, w: [f64; 2]) -> [f64; 2] {
        [self.a * w[0], self.b * w[0] + self.c * w[1]]
    }

    /// Coordinates of `e1`, `e2` in the basis `(d_u, d_v)`, as rows.
    pub fn frame_in_coords(&self) -> [[f64; 2]; 2] {
        [[1.0 / self.a, 0.0], [-self.b / (self.a * self.c), 1.0 / self.c]]
    }

    /// Area density `sqrt(det g)`.
    pub fn area(&self) -> f64 {
        self.a * self.c
    }
}

/// Tangent frame and basis coefficients from first derivatives.
pub fn tangent_frame(jet: &Jet3) -> (V4, V4, TangentBasis) {
    let a = jet.fu.norm();
    let e1 = jet.fu / a;
    let b = jet.fv.dot(&e1);
    let w = jet.fv - e1 * b;
    let c = w.norm();
    (e1, w / c, TangentBasis { a, b, c })
}

/// Index of the first ambient axis making an angle of at least
/// [`SEED_ANGLE`] with the tangent plane.
pub fn seed_axis(e1: &V4, e2: &V4) -> Option<usize> {
    let min = SEED_ANGLE.sin();
    (0..4).find(|&k| {
        let mut x = V4::zeros();
        x[k] = 1.0;
        let n = x - e1 * x.dot(e1) - e2 * x.dot(e2);
        n.norm() >= min
    })
}

/// Frame with `e3` the normalized normal part of `seed`.
pub fn frame_with_seed(jet: &Jet3, seed: &V4, isothermal: bool) -> Option<(AdaptedFrame, TangentBasis)> {
    let (e1, e2, basis) = tangent_frame(jet);
    let n = seed - e1 * seed.dot(&e1) - e2 * seed.dot(&e2);
    let nn = n.norm();
    if nn < 1e-8 * seed.norm() {
        return None;
    }
    let e3 = n / nn;
    let e4 = cross4(&e1, &e2, &e3);
    let lambda = isothermal.then_some(basis.a);
    Some((AdaptedFrame { e: [e1, e2, e3, e4], lambda }, basis))
}

/// Deterministic adapted frame from a jet, plus the seed axis that was used.
pub fn frame_from_jet(jet: &Jet3, isothermal: bool) -> (AdaptedFrame, TangentBasis, usize) {
    let (e1, e2, _) = tangent_frame(jet);
    let k = seed_axis(&e1, &e2).unwrap_or(0);
    let mut seed = V4::zeros();
    seed[k] = 1.0;
    let (fr, b) = frame_with_seed(jet, &seed, isothermal).expect("seed axis selected with margin");
    (fr, b, k)
}

pub fn adapted_frame(chart: &SurfaceChart, u: f64, v: f64) -> Result<AdaptedFrame> {
    let jet = chart.eval_jet(u, v)?;
    Ok(frame_from_jet(&jet, chart.isothermal).0)
}

/// Frame whose normal part is spanned by `e3 = n / |n|`, `n` a normal vector.
pub fn frame_with_normal(jet: &Jet3, n: &V4, isothermal: bool, u: f64, v: f64) -> Result<(AdaptedFrame, TangentBasis)> {
    frame_with_seed(jet, n, isothermal).ok_or(GeomError::MaskViolation { u, v })
}
