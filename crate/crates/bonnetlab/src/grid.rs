//! Rectangular sample lattices over a chart domain.

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{Domain, SurfaceChart};
use crate::error::{GeomError, Result};
use crate::fd::Lin;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub domain: Domain,
    pub nu: usize,
    pub nv: usize,
    /// Periodic axes omit the duplicated endpoint and wrap in stencils.
    pub periodic_u: bool,
    pub periodic_v: bool,
}

impl Grid {
    pub fn new(domain: Domain, nu: usize, nv: usize) -> Result<Grid> {
        if nu < 5 || nv < 5 {
            return Err(GeomError::BadGrid(format!("{nu}x{nv} is below the 5x5 minimum")));
        }
        if !(domain.width() > 0.0 && domain.height() > 0.0) {
            return Err(GeomError::BadGrid("empty domain".into()));
        }
        Ok(Grid { domain, nu, nv, periodic_u: false, periodic_v: false })
    }

    /// Grid over the whole chart domain, inheriting its periodicity.
    pub fn for_chart(chart: &SurfaceChart, nu: usize, nv: usize) -> Result<Grid> {
        let mut g = Grid::new(chart.domain, nu, nv)?;
        g.periodic_u = chart.periodic_u;
        g.periodic_v = chart.periodic_v;
        Ok(g)
    }

    /// Nonperiodic grid over a subrectangle.
    pub fn sub(domain: Domain, nu: usize, nv: usize) -> Result<Grid> {
        Grid::new(domain, nu, nv)
    }

    pub fn du(&self) -> f64 {
        if self.periodic_u {
            self.domain.width() / self.nu as f64
        } else {
            self.domain.width() / (self.nu - 1) as f64
        }
    }

    pub fn dv(&self) -> f64 {
        if self.periodic_v {
            self.domain.height() / self.nv as f64
        } else {
            self.domain.height() / (self.nv - 1) as f64
        }
    }

    pub fn u(&self, i: usize) -> f64 {
        self.domain.u0 + i as f64 * self.du()
    }

    pub fn v(&self, j: usize) -> f64 {
        self.domain.v0 + j as f64 * self.dv()
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.u(i), self.v(j))
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nu + i
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nu, k / self.nu)
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center_index(&self) -> (usize, usize) {
        (self.nu / 2, self.nv / 2)
    }

    /// Same lattice with each step halved (and twice the nodes, less one on
    /// nonperiodic axes).
    pub fn refined(&self) -> Grid {
        let nu = if self.periodic_u { 2 * self.nu } else { 2 * self.nu - 1 };
        let nv = if self.periodic_v { 2 * self.nv } else { 2 * self.nv - 1 };
        Grid { nu, nv, ..*self }
    }

    /// Parallel evaluation at every node, in row-major order.
    pub fn map<T: Send>(&self, f: impl Fn(f64, f64) -> T + Sync) -> Vec<T> {
        (0..self.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = self.ij(k);
                f(self.u(i), self.v(j))
            })
            .collect()
    }

    pub fn try_map<T: Send>(&self, f: impl Fn(f64, f64) -> Result<T> + Sync) -> Result<Vec<T>> {
        self.map(f).into_iter().collect()
    }

    fn shift(&self, i: usize, d: isize, n: usize, periodic: bool) -> Option<usize> {
        let k = i as isize + d;
        if periodic {
            Some(k.rem_euclid(n as isize) as usize)
        } else if k >= 0 && (k as usize) < n {
            Some(k as usize)
        } else {
            None
        }
    }

    pub fn shift_u(&self, i: usize, d: isize) -> Option<usize> {
        self.shift(i, d, self.nu, self.periodic_u)
    }

    pub fn shift_v(&self, j: usize, d: isize) -> Option<usize> {
        self.shift(j, d, self.nv, self.periodic_v)
    }

    /// True when the five-point stencils in both directions fit.
    pub fn interior(&self, i: usize, j: usize) -> bool {
        self.shift_u(i, -2).is_some()
            && self.shift_u(i, 2).is_some()
            && self.shift_v(j, -2).is_some()
            && self.shift_v(j, 2).is_some()
    }

    /// Fourth-order derivative along `u` of grid samples.
    pub fn deriv_u<T: Lin>(&self, vals: &[T], i: usize, j: usize) -> Option<T> {
        let at = |d| self.shift_u(i, d).map(|ii| vals[self.idx(ii, j)].clone());
        let (m2, m1, p1, p2) = (at(-2)?, at(-1)?, at(1)?, at(2)?);
        Some(((p1 - m1) * 8.0 - (p2 - m2)) * (1.0 / (12.0 * self.du())))
    }

    pub fn deriv_v<T: Lin>(&self, vals: &[T], i: usize, j: usize) -> Option<T> {
        let at = |d| self.shift_v(j, d).map(|jj| vals[self.idx(i, jj)].clone());
        let (m2, m1, p1, p2) = (at(-2)?, at(-1)?, at(1)?, at(2)?);
        Some(((p1 - m1) * 8.0 - (p2 - m2)) * (1.0 / (12.0 * self.dv())))
    }

    pub fn deriv_uu<T: Lin>(&self, vals: &[T], i: usize, j: usize) -> Option<T> {
        let at = |d| self.shift_u(i, d).map(|ii| vals[self.idx(ii, j)].clone());
        let (m2, m1, c, p1, p2) = (at(-2)?, at(-1)?, at(0)?, at(1)?, at(2)?);
        let h = self.du();
        Some(((p1 + m1) * 16.0 - (p2 + m2) - c * 30.0) * (1.0 / (12.0 * h * h)))
    }

    pub fn deriv_vv<T: Lin>(&self, vals: &[T], i: usize, j: usize) -> Option<T> {
        let at = |d| self.shift_v(j, d).map(|jj| vals[self.idx(i, jj)].clone());
        let (m2, m1, c, p1, p2) = (at(-2)?, at(-1)?, at(0)?, at(1)?, at(2)?);
        let h = self.dv();
        Some(((p1 + m1) * 16.0 - (p2 + m2) - c * 30.0) * (1.0 / (12.0 * h * h)))
    }

    /// Composite trapezoid weights for an area integral over the grid.
    pub fn quadrature_weight(&self, i: usize, j: usize) -> f64 {
        let wu = if self.periodic_u || (i > 0 && i + 1 < self.nu) { 1.0 } else { 0.5 };
        let wv = if self.periodic_v || (j > 0 && j + 1 < self.nv) { 1.0 } else { 0.5 };
        wu * wv * self.du() * self.dv()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_grid_omits_endpoint() {
        let mut g = Grid::new(Domain::new(0.0, 1.0, 0.0, 2.0), 8, 5).unwrap();
        g.periodic_u = true;
        assert!((g.du() - 0.125).abs() < 1e-15);
        assert!((g.dv() - 0.5).abs() < 1e-15);
        assert_eq!(g.shift_u(0, -1), Some(7));
        assert_eq!(g.shift_v(0, -1), None);
    }

    #[test]
    fn grid_derivatives_are_fourth_order() {
        let g = Grid::new(Domain::new(0.0, 1.0, 0.0, 1.0), 41, 41).unwrap();
        let vals: Vec<f64> = g.map(|u, v| (u + 2.0 * v).sin());
        let (i, j) = (20, 20);
        let (u, v) = g.node(i, j);
        let du = g.deriv_u(&vals, i, j).unwrap();
        let dvv = g.deriv_vv(&vals, i, j).unwrap();
        assert!((du - (u + 2.0 * v).cos()).abs() < 1e-7);
        assert!((dvv + 4.0 * (u + 2.0 * v).sin()).abs() < 1e-5);
        assert!(g.deriv_u(&vals, 1, j).is_none());
    }

    #[test]
    fn trapezoid_area_of_unit_square() {
        let g = Grid::new(Domain::new(0.0, 1.0, 0.0, 1.0), 11, 7).unwrap();
        let a: f64 = (0..g.nv).flat_map(|j| (0..g.nu).map(move |i| (i, j))).map(|(i, j)| g.quadrature_weight(i, j)).sum();
        assert!((a - 1.0).abs() < 1e-14);
    }
}
