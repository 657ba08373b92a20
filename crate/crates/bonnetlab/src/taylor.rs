//! Truncated bivariate Taylor series of total degree three.
//!
//! Used to push third-order jets through ambient maps (inversions, scalings)
//! without numerical differentiation.

use std::ops::{Add, Mul, Sub};

use nalgebra::Vector4;

use crate::chart::Jet3;

const fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Coefficients of `u^i v^j` (not derivatives) for `i + j <= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Taylor2 {
    pub c: [f64; 10],
}

impl Taylor2 {
    pub fn constant(a: f64) -> Self {
        let mut c = [0.0; 10];
        c[0] = a;
        Taylor2 { c }
    }

    /// Build from partial derivatives `d[i][j] = d^{i+j} f / du^i dv^j`.
    pub fn from_partials(value: f64, p: impl Fn(usize, usize) -> f64) -> Self {
        let mut c = [0.0; 10];
        c[0] = value;
        for d in 1..=3 {
            for j in 0..=d {
                let i = d - j;
                c[idx(i, j)] = p(i, j) / (fact(i) * fact(j));
            }
        }
        Taylor2 { c }
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.c[idx(i, j)]
    }

    /// Partial derivative `d^{i+j}/du^i dv^j` at the expansion point.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        self.c[idx(i, j)] * fact(i) * fact(j)
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `g(self)` given `g(a0), g'(a0), g''(a0), g'''(a0)`.
    pub fn compose(&self, g: [f64; 4]) -> Self {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let mut out = Taylor2::constant(g[0]);
        for k in 1..10 {
            out.c[k] = g[1] * delta.c[k] + g[2] / 2.0 * d2.c[k] + g[3] / 6.0 * d3.c[k];
        }
        out
    }

    pub fn recip(&self) -> Self {
        let a = self.c[0];
        self.compose([1.0 / a, -1.0 / (a * a), 2.0 / (a * a * a), -6.0 / (a * a * a * a)])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.c.iter_mut().for_each(|x| *x *= s);
        out
    }
}

fn fact(n: usize) -> f64 {
    match n {
        0 | 1 => 1.0,
        2 => 2.0,
        3 => 6.0,
        _ => (1..=n).product::<usize>() as f64,
    }
}

impl Add for Taylor2 {
    type Output = Taylor2;
    fn add(self, o: Taylor2) -> Taylor2 {
        let mut c = self.c;
        c.iter_mut().zip(o.c.iter()).for_each(|(a, b)| *a += b);
        Taylor2 { c }
    }
}

impl Sub for Taylor2 {
    type Output = Taylor2;
    fn sub(self, o: Taylor2) -> Taylor2 {
        let mut c = self.c;
        c.iter_mut().zip(o.c.iter()).for_each(|(a, b)| *a -= b);
        Taylor2 { c }
    }
}

impl Mul for Taylor2 {
    type Output = Taylor2;
    fn mul(self, o: Taylor2) -> Taylor2 {
        let mut c = [0.0; 10];
        for d1 in 0..=3 {
            for j1 in 0..=d1 {
                let a = self.c[idx(d1 - j1, j1)];
                if a == 0.0 {
                    continue;
                }
                for d2 in 0..=(3 - d1) {
                    for j2 in 0..=d2 {
                        let i = d1 - j1 + d2 - j2;
                        let j = j1 + j2;
                        c[idx(i, j)] += a * o.c[idx(d2 - j2, j2)];
                    }
                }
            }
        }
        Taylor2 { c }
    }
}

/// Four-component series, one per ambient coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Taylor4(pub [Taylor2; 4]);

impl Taylor4 {
    pub fn from_jet(j: &Jet3) -> Self {
        let mut out = [Taylor2::default(); 4];
        for (k, t) in out.iter_mut().enumerate() {
            *t = Taylor2::from_partials(j.f[k], |a, b| j.partial(a, b)[k]);
        }
        Taylor4(out)
    }

    pub fn to_jet(&self) -> Jet3 {
        let comp = |i: usize, j: usize| {
            Vector4::new(
                self.0[0].partial(i, j),
                self.0[1].partial(i, j),
                self.0[2].partial(i, j),
                self.0[3].partial(i, j),
            )
        };
        Jet3 {
            f: comp(0, 0),
            fu: comp(1, 0),
            fv: comp(0, 1),
            fuu: comp(2, 0),
            fuv: comp(1, 1),
            fvv: comp(0, 2),
            fuuu: comp(3, 0),
            fuuv: comp(2, 1),
            fuvv: comp(1, 2),
            fvvv: comp(0, 3),
        }
    }

    pub fn dot(&self, o: &Taylor4) -> Taylor2 {
        (0..4).fold(Taylor2::default(), |acc, k| acc + self.0[k] * o.0[k])
    }

    pub fn shift(&self, c: &Vector4<f64>) -> Taylor4 {
        let mut out = *self;
        for k in 0..4 {
            out.0[k].c[0] += c[k];
        }
        out
    }

    pub fn mul_scalar(&self, s: &Taylor2) -> Taylor4 {
        Taylor4([self.0[0] * *s, self.0[1] * *s, self.0[2] * *s, self.0[3] * *s])
    }
}
