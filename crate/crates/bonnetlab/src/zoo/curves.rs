//! Planar unit-speed curves with prescribed polynomial curvature.

use nalgebra::Vector2;

/// Polynomial in one variable, coefficients by increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly1(pub Vec<f64>);

impl Poly1 {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly1 {
        Poly1(self.0.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }

    /// Antiderivative vanishing at `x0`.
    pub fn integral_from(&self, x0: f64) -> Poly1 {
        let mut c = vec![0.0];
        c.extend(self.0.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64));
        let mut p = Poly1(c);
        let shift = p.eval(x0);
        p.0[0] -= shift;
        p
    }
}

/// Curve `s -> (x, y)` with turning angle `tau(s) = int k`, starting at the
/// origin heading along `+x` at `s = s_start`.
#[derive(Debug, Clone)]
pub struct CurvatureCurve {
    pub k: Poly1,
    dk: Poly1,
    ddk: Poly1,
    tau: Poly1,
    s_lo: f64,
    step: f64,
    nodes: Vec<Vector2<f64>>,
}

/// Derivatives of the curve up to order three at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveJet {
    pub pos: Vector2<f64>,
    pub d1: Vector2<f64>,
    pub d2: Vector2<f64>,
    pub d3: Vector2<f64>,
    pub k: f64,
    pub dk: f64,
    pub ddk: f64,
}

pub const CURVE_NODES: usize = 4096;

impl CurvatureCurve {
    /// Integrate on `[s_lo, s_hi]` from the anchor `s_start` inside it.
    pub fn new(k: Poly1, s_start: f64, s_lo: f64, s_hi: f64) -> Self {
        assert!(s_lo <= s_start && s_start <= s_hi && s_hi > s_lo);
        let dk = k.derivative();
        let ddk = dk.derivative();
        let tau = k.integral_from(s_start);
        let step = (s_hi - s_lo) / CURVE_NODES as f64;
        let mut c = CurvatureCurve { k, dk, ddk, tau, s_lo, step, nodes: vec![Vector2::zeros(); CURVE_NODES + 1] };
        let anchor = ((s_start - s_lo) / step).round() as usize;
        // position at the anchor node, reached from s_start by one step
        let p_anchor = c.rk4(Vector2::zeros(), s_start, s_lo + anchor as f64 * step);
        c.nodes[anchor] = p_anchor;
        for n in anchor + 1..=CURVE_NODES {
            let s0 = s_lo + (n - 1) as f64 * step;
            c.nodes[n] = c.rk4(c.nodes[n - 1], s0, s0 + step);
        }
        for n in (0..anchor).rev() {
            let s0 = s_lo + (n + 1) as f64 * step;
            c.nodes[n] = c.rk4(c.nodes[n + 1], s0, s0 - step);
        }
        c
    }

    fn tangent(&self, s: f64) -> Vector2<f64> {
        let t = self.tau.eval(s);
        Vector2::new(t.cos(), t.sin())
    }

    fn rk4(&self, p: Vector2<f64>, s0: f64, s1: f64) -> Vector2<f64> {
        let h = s1 - s0;
        if h == 0.0 {
            return p;
        }
        let k1 = self.tangent(s0);
        let k2 = self.tangent(s0 + 0.5 * h);
        let k4 = self.tangent(s1);
        p + (k1 + k2 * 4.0 + k4) * (h / 6.0)
    }

    pub fn position(&self, s: f64) -> Vector2<f64> {
        let x = ((s - self.s_lo) / self.step).round().clamp(0.0, CURVE_NODES as f64) as usize;
        let s0 = self.s_lo + x as f64 * self.step;
        // subdivide long excursions outside the tabulated range
        let n = (((s - s0).abs() / self.step).ceil() as usize).max(1);
        let h = (s - s0) / n as f64;
        let mut p = self.nodes[x];
        for m in 0..n {
            let a = s0 + m as f64 * h;
            p = self.rk4(p, a, a + h);
        }
        p
    }

    pub fn jet(&self, s: f64) -> CurveJet {
        let t = self.tangent(s);
        let n = Vector2::new(-t[1], t[0]);
        let k = self.k.eval(s);
        let dk = self.dk.eval(s);
        CurveJet {
            pos: self.position(s),
            d1: t,
            d2: n * k,
            d3: n * dk - t * (k * k),
            k,
            dk,
            ddk: self.ddk.eval(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_curvature_closes_up() {
        let r = 0.7;
        let c = CurvatureCurve::new(Poly1(vec![1.0 / r]), 0.0, 0.0, 2.0 * PI * r);
        let end = c.position(2.0 * PI * r);
        assert!(end.norm() < 1e-10, "{end}");
        let half = c.position(PI * r);
        assert!((half - Vector2::new(0.0, 2.0 * r)).norm() < 1e-10);
    }

    #[test]
    fn zero_curvature_is_a_line() {
        let c = CurvatureCurve::new(Poly1(vec![0.0]), 0.0, -1.0, 1.0);
        assert!((c.position(0.73) - Vector2::new(0.73, 0.0)).norm() < 1e-14);
        assert!((c.position(-0.5) - Vector2::new(-0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn clothoid_curvature_from_positions() {
        let cc = 1.3;
        let c = CurvatureCurve::new(Poly1(vec![0.0, cc]), 0.5, 0.4, 1.6);
        for &s in &[0.6, 1.0, 1.45] {
            let h = 2e-3;
            let p = |x: f64| c.position(x);
            let d1 = (p(s - 2.0 * h) - p(s + 2.0 * h) + (p(s + h) - p(s - h)) * 8.0) / (12.0 * h);
            let d2 = ((p(s + h) + p(s - h)) * 16.0 - p(s + 2.0 * h) - p(s - 2.0 * h) - p(s) * 30.0) / (12.0 * h * h);
            let k = (d1[0] * d2[1] - d1[1] * d2[0]) / d1.norm().powi(3);
            assert!((k - cc * s).abs() < 1e-8, "{k} vs {}", cc * s);
        }
    }
}
