//! Central finite differences of vector-valued functions on the chart plane.

use std::ops::{Add, Mul, Sub};

use crate::error::Result;

pub trait Lin: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl<T> Lin for T where T: Clone + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    Central2,
    Central4,
}

/// Inner step for derivatives of pointwise data built from analytic jets.
pub const H_INNER: f64 = 7.5e-4;
/// Outer step for derivatives of quantities that are themselves FD values.
pub const H_OUTER: f64 = 2.5e-3;

/// Derivative along `dir` of `g(s)`, sampled at `s = x + k h`.
pub fn derivative_1d<T: Lin>(g: impl Fn(f64) -> Result<T>, h: f64, st: Stencil) -> Result<T> {
    match st {
        Stencil::Central2 => Ok((g(h)? - g(-h)?) * (0.5 / h)),
        Stencil::Central4 => {
            let a = g(h)? - g(-h)?;
            let b = g(2.0 * h)? - g(-2.0 * h)?;
            Ok((a * 8.0 - b) * (1.0 / (12.0 * h)))
        }
    }
}

pub fn d_du<T: Lin>(f: impl Fn(f64, f64) -> Result<T>, u: f64, v: f64, h: f64, st: Stencil) -> Result<T> {
    derivative_1d(|s| f(u + s, v), h, st)
}

pub fn d_dv<T: Lin>(f: impl Fn(f64, f64) -> Result<T>, u: f64, v: f64, h: f64, st: Stencil) -> Result<T> {
    derivative_1d(|s| f(u, v + s), h, st)
}

pub fn gradient<T: Lin>(f: impl Fn(f64, f64) -> Result<T>, u: f64, v: f64, h: f64, st: Stencil) -> Result<(T, T)> {
    Ok((d_du(&f, u, v, h, st)?, d_dv(&f, u, v, h, st)?))
}

/// Second derivative `g''(0)` of a one-variable function.
pub fn second_1d<T: Lin>(g: impl Fn(f64) -> Result<T>, h: f64, st: Stencil) -> Result<T> {
    let c = g(0.0)?;
    match st {
        Stencil::Central2 => Ok((g(h)? + g(-h)? - c * 2.0) * (1.0 / (h * h))),
        Stencil::Central4 => {
            let a = g(h)? + g(-h)?;
            let b = g(2.0 * h)? + g(-2.0 * h)?;
            Ok((a * 16.0 - b - c * 30.0) * (1.0 / (12.0 * h * h)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_is_accurate_on_sine() {
        let d = d_du(|u, _| Ok(u.sin()), 0.4, 0.0, 1e-2, Stencil::Central4).unwrap();
        assert!((d - 0.4f64.cos()).abs() < 1e-9);
        let d2 = second_1d(|s| Ok((0.4 + s).sin()), 1e-2, Stencil::Central4).unwrap();
        assert!((d2 + 0.4f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn second_order_error_quarters_on_halving() {
        let f = |u: f64, _v: f64| Ok(u.exp());
        let e1 = (d_du(f, 0.0, 0.0, 1e-2, Stencil::Central2).unwrap() - 1.0).abs();
        let e2 = (d_du(f, 0.0, 0.0, 5e-3, Stencil::Central2).unwrap() - 1.0).abs();
        let r = e1 / e2;
        assert!((3.9..4.1).contains(&r), "ratio {r}");
    }
}
