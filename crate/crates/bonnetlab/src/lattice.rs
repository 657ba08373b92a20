//! Path integration of first-order systems `dY = A_u du + A_v dv` over a
//! rectangular grid: RK4 along a base row and then up every column, with the
//! transposed order as a closure oracle.
//!
//! Coefficients are sampled once on every grid line at spacing `step / 2m`
//! (start, midpoint and end of each of the `m` substeps) and shared by all
//! integrations over the same lattice.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::grid::Grid;

/// Default number of RK4 substeps per grid interval.
pub const DEFAULT_SUBSTEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axis {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Order {
    RowFirst,
    ColumnFirst,
}

/// Vector-space operations needed by the integrator.
pub trait LatticeState: Clone + Send + Sync {
    /// `self + a * d`.
    fn axpy(&self, a: f64, d: &Self) -> Self;
    fn dist(&self, other: &Self) -> f64;
}

impl LatticeState for f64 {
    fn axpy(&self, a: f64, d: &Self) -> Self {
        self + a * d
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
}

impl<const N: usize> LatticeState for [f64; N] {
    fn axpy(&self, a: f64, d: &Self) -> Self {
        std::array::from_fn(|k| self[k] + a * d[k])
    }
    fn dist(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

/// Coefficient samples on every row and column of a grid.
#[derive(Debug, Clone)]
pub struct LineLattice<C> {
    pub grid: Grid,
    pub substeps: usize,
    /// `rows[j][k]` sits at `u = u_0 + k * du / (2m)`, `v = v_j`.
    rows: Vec<Vec<C>>,
    cols: Vec<Vec<C>>,
}

impl<C: Send + Sync> LineLattice<C> {
    pub fn build(grid: &Grid, substeps: usize, coef: impl Fn(f64, f64) -> Result<C> + Sync) -> Result<Self> {
        if grid.periodic_u || grid.periodic_v {
            return Err(GeomError::BadGrid("path integration needs a nonperiodic grid".into()));
        }
        let m = substeps.max(1);
        let (nu, nv) = (grid.nu, grid.nv);
        let fu = (nu - 1) * 2 * m + 1;
        let fv = (nv - 1) * 2 * m + 1;
        let hu = grid.du() / (2 * m) as f64;
        let hv = grid.dv() / (2 * m) as f64;
        let u0 = grid.domain.u0;
        let v0 = grid.domain.v0;
        let rows: Vec<Vec<C>> = (0..nv)
            .into_par_iter()
            .map(|j| (0..fu).map(|k| coef(u0 + k as f64 * hu, grid.v(j))).collect::<Result<Vec<C>>>())
            .collect::<Result<_>>()?;
        let cols: Vec<Vec<C>> = (0..nu)
            .into_par_iter()
            .map(|i| (0..fv).map(|k| coef(grid.u(i), v0 + k as f64 * hv)).collect::<Result<Vec<C>>>())
            .collect::<Result<_>>()?;
        Ok(LineLattice { grid: *grid, substeps: m, rows, cols })
    }

    /// Coefficients sampled at grid node `(i, j)`.
    pub fn at_node(&self, i: usize, j: usize) -> &C {
        &self.rows[j][2 * self.substeps * i]
    }

    fn line(&self, axis: Axis, index: usize) -> &[C] {
        match axis {
            Axis::U => &self.rows[index],
            Axis::V => &self.cols[index],
        }
    }

    fn fine_step(&self, axis: Axis) -> f64 {
        let d = match axis {
            Axis::U => self.grid.du(),
            Axis::V => self.grid.dv(),
        };
        d / (2 * self.substeps) as f64
    }

    /// Integrate along one line from node `from` to every other node, in
    /// place over `out` (indexed by node along the line).
    fn sweep<S: LatticeState>(
        &self,
        axis: Axis,
        line: usize,
        from: usize,
        y0: S,
        rhs: &(dyn Fn(Axis, &C, &S) -> S + Sync),
        project: &(dyn Fn(S) -> S + Sync),
    ) -> Vec<S> {
        let coefs = self.line(axis, line);
        let m = self.substeps;
        let h = 2.0 * self.fine_step(axis);
        let n = (coefs.len() - 1) / (2 * m) + 1;
        let mut out: Vec<Option<S>> = vec![None; n];
        out[from] = Some(y0.clone());
        for (dir, range) in [(1isize, (from + 1..n).collect::<Vec<_>>()), (-1, (0..from).rev().collect())] {
            let mut y = y0.clone();
            for node in range {
                let prev = (node as isize - dir) as usize;
                for sub in 0..m {
                    let (a, mid, b) = if dir > 0 {
                        let k = 2 * (prev * m + sub);
                        (k, k + 1, k + 2)
                    } else {
                        let k = 2 * (prev * m - sub);
                        (k, k - 1, k - 2)
                    };
                    let hs = h * dir as f64;
                    let k1 = rhs(axis, &coefs[a], &y);
                    let k2 = rhs(axis, &coefs[mid], &y.axpy(0.5 * hs, &k1));
                    let k3 = rhs(axis, &coefs[mid], &y.axpy(0.5 * hs, &k2));
                    let k4 = rhs(axis, &coefs[b], &y.axpy(hs, &k3));
                    y = y.axpy(hs / 6.0, &k1).axpy(hs / 3.0, &k2).axpy(hs / 3.0, &k3).axpy(hs / 6.0, &k4);
                    y = project(y);
                }
                out[node] = Some(y.clone());
            }
        }
        out.into_iter().map(|s| s.expect("every node visited")).collect()
    }

    /// Integrate from `base` (node indices) over the grid; returns node values
    /// indexed like the grid.
    pub fn integrate<S: LatticeState>(
        &self,
        base: (usize, usize),
        y0: S,
        order: Order,
        rhs: &(dyn Fn(Axis, &C, &S) -> S + Sync),
        project: &(dyn Fn(S) -> S + Sync),
    ) -> Vec<S> {
        let g = &self.grid;
        let (i0, j0) = base;
        match order {
            Order::RowFirst => {
                let spine = self.sweep(Axis::U, j0, i0, y0, rhs, project);
                let cols: Vec<Vec<S>> =
                    (0..g.nu).into_par_iter().map(|i| self.sweep(Axis::V, i, j0, spine[i].clone(), rhs, project)).collect();
                (0..g.len())
                    .map(|k| {
                        let (i, j) = g.ij(k);
                        cols[i][j].clone()
                    })
                    .collect()
            }
            Order::ColumnFirst => {
                let spine = self.sweep(Axis::V, i0, j0, y0, rhs, project);
                let rows: Vec<Vec<S>> =
                    (0..g.nv).into_par_iter().map(|j| self.sweep(Axis::U, j, i0, spine[j].clone(), rhs, project)).collect();
                (0..g.len())
                    .map(|k| {
                        let (i, j) = g.ij(k);
                        rows[j][i].clone()
                    })
                    .collect()
            }
        }
    }

    /// Row-first values together with the sup distance to the column-first
    /// result.
    pub fn integrate_checked<S: LatticeState>(
        &self,
        base: (usize, usize),
        y0: S,
        rhs: &(dyn Fn(Axis, &C, &S) -> S + Sync),
        project: &(dyn Fn(S) -> S + Sync),
    ) -> (Vec<S>, f64) {
        let a = self.integrate(base, y0.clone(), Order::RowFirst, rhs, project);
        let b = self.integrate(base, y0, Order::ColumnFirst, rhs, project);
        let res = a.iter().zip(&b).map(|(x, y)| x.dist(y)).fold(0.0, f64::max);
        (a, res)
    }
}

/// Nonperiodic copy of a grid over the same nodes' hull, for path integration.
pub fn open_grid(grid: &Grid) -> Result<Grid> {
    if !grid.periodic_u && !grid.periodic_v {
        return Ok(*grid);
    }
    let mut d = grid.domain;
    if grid.periodic_u {
        d.u1 = d.u0 + grid.du() * (grid.nu - 1) as f64;
    }
    if grid.periodic_v {
        d.v1 = d.v0 + grid.dv() * (grid.nv - 1) as f64;
    }
    Grid::new(d, grid.nu, grid.nv)
}

/// Polar projection onto the orthogonal group by two Newton-Schulz steps
/// `F <- 1.5 F - 0.5 F F^T F`.
pub fn reorthonormalize(f: &nalgebra::Matrix4<f64>) -> nalgebra::Matrix4<f64> {
    let mut x = *f;
    for _ in 0..2 {
        x = x * 1.5 - x * x.transpose() * x * 0.5;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Domain;

    #[test]
    fn exact_form_integrates_to_potential() {
        let g = Grid::new(Domain::new(0.0, 1.0, -0.5, 0.7), 9, 7).unwrap();
        // d(sin u * e^v)
        let lat = LineLattice::build(&g, 8, |u, v| Ok([u.cos() * v.exp(), u.sin() * v.exp()])).unwrap();
        let rhs = |ax: Axis, c: &[f64; 2], _: &f64| if ax == Axis::U { c[0] } else { c[1] };
        let (vals, res) = lat.integrate_checked((4, 3), 0.0, &rhs, &|y| y);
        let (u0, v0) = g.node(4, 3);
        for k in 0..g.len() {
            let (u, v) = g.node(g.ij(k).0, g.ij(k).1);
            let e = (vals[k] - (u.sin() * v.exp() - u0.sin() * v0.exp())).abs();
            assert!(e < 1e-9, "{k} {e}");
        }
        assert!(res < 1e-9);
    }

    #[test]
    fn linear_ode_fourth_order() {
        // y' = y along u, y' = 2y along v: y = e^{u + 2v}
        let err = |n: usize| {
            let g = Grid::new(Domain::new(0.0, 1.0, 0.0, 1.0), n, n).unwrap();
            let lat = LineLattice::build(&g, 1, |_, _| Ok(())).unwrap();
            let rhs = |ax: Axis, _: &(), y: &f64| if ax == Axis::U { *y } else { 2.0 * y };
            let vals = lat.integrate((0, 0), 1.0, Order::RowFirst, &rhs, &|y| y);
            (vals[g.len() - 1] - 3f64.exp()).abs()
        };
        let r = err(6) / err(11);
        assert!((12.0..20.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn reorthonormalize_fixes_small_drift() {
        let mut f = nalgebra::Matrix4::<f64>::identity();
        f[(0, 1)] = 1e-3;
        f[(2, 2)] = 1.0 + 1e-3;
        let q = reorthonormalize(&f);
        assert!((q * q.transpose() - nalgebra::Matrix4::identity()).norm() < 1e-9);
    }
}
