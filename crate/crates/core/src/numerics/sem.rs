//! Axisymmetric Laplace-Beltrami discretization on a meridian grid.
//!
//! A surface of revolution is parametrized by meridian arclength s with
//! distance to the axis rho(s); dv_g = 2 pi rho(s) ds dtheta / (2 pi).
//! Angular mode l adds l^2 / rho^2 to the Laplacian; for l != 0 the axis
//! nodes are removed (Dirichlet).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::grid::RadialGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: RadialGrid,
    pub rho: Vec<f64>,
    /// Lumped area weights: 2 pi rho w.
    pub area: Vec<f64>,
    pub total_area: f64,
}

impl Discretization {
    pub fn new(grid: RadialGrid, rho: impl Fn(f64) -> f64) -> Self {
        let rho: Vec<f64> = grid.nodes.iter().map(|&s| rho(s).max(0.0)).collect();
        let area: Vec<f64> = rho
            .iter()
            .zip(&grid.weights)
            .map(|(r, w)| 2.0 * PI * r * w)
            .collect();
        let total_area = area.iter().sum();
        Self {
            grid,
            rho,
            area,
            total_area,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Nodes where rho vanishes (points on the rotation axis).
    pub fn axis_nodes(&self) -> Vec<usize> {
        let scale = self.rho.iter().cloned().fold(0.0, f64::max);
        (0..self.len())
            .filter(|&i| self.rho[i] <= 1e-14 * scale)
            .collect()
    }

    /// Nodes carrying unknowns for angular mode `ell`.
    pub fn free_nodes(&self, ell: i64) -> Vec<usize> {
        if ell == 0 {
            return (0..self.len()).collect();
        }
        let axis = self.axis_nodes();
        (0..self.len()).filter(|i| !axis.contains(i)).collect()
    }

    /// Full stiffness matrix for mode `ell` (rows of removed nodes left zero).
    pub fn stiffness(&self, ell: i64) -> DMatrix<f64> {
        let g = &self.grid;
        let p = g.degree();
        let n = self.len();
        let mut k = DMatrix::zeros(n, n);
        for e in 0..g.elements() {
            let jac = 0.5 * (g.breaks[e + 1] - g.breaks[e]);
            for q in 0..=p {
                let gq = g.index(e, q);
                let c = 2.0 * PI * g.rule.weights[q] * self.rho[gq] / jac;
                if c == 0.0 {
                    continue;
                }
                for a in 0..=p {
                    let da = g.rule.diff[q][a];
                    for b in 0..=p {
                        k[(g.index(e, a), g.index(e, b))] += c * da * g.rule.diff[q][b];
                    }
                }
            }
        }
        if ell != 0 {
            let l2 = (ell * ell) as f64;
            let axis = self.axis_nodes();
            for i in 0..n {
                if axis.contains(&i) {
                    for j in 0..n {
                        k[(i, j)] = 0.0;
                        k[(j, i)] = 0.0;
                    }
                } else {
                    k[(i, i)] += l2 * 2.0 * PI * g.weights[i] / self.rho[i];
                }
            }
        }
        k
    }

    /// Stiffness restricted to the free nodes of mode `ell`.
    pub fn stiffness_reduced(&self, ell: i64) -> (DMatrix<f64>, Vec<usize>) {
        let free = self.free_nodes(ell);
        let k = self.stiffness(ell);
        let kr = DMatrix::from_fn(free.len(), free.len(), |i, j| k[(free[i], free[j])]);
        (kr, free)
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.area.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        self.integrate(f) / self.total_area
    }

    pub fn subtract_mean(&self, f: &mut [f64]) {
        let m = self.mean(f);
        f.iter_mut().for_each(|v| *v -= m);
    }

    pub fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        self.area
            .iter()
            .zip(f)
            .map(|(w, v)| w * v.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn sup_norm(&self, f: &[f64]) -> f64 {
        f.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Integral over the cap {s < r} using the interpolant of `f` on the cut element.
    pub fn integrate_cap(&self, f: &[f64], r: f64) -> f64 {
        let g = &self.grid;
        if r >= g.breaks[g.elements()] {
            return self.integrate(f);
        }
        let e_cut = g.element_of(r);
        let p = g.degree();
        let mut total = 0.0;
        for e in 0..e_cut {
            let jac = 0.5 * (g.breaks[e + 1] - g.breaks[e]);
            for q in 0..=p {
                let i = g.index(e, q);
                total += 2.0 * PI * self.rho[i] * g.rule.weights[q] * jac * f[i];
            }
        }
        let a = g.breaks[e_cut];
        if r > a {
            let (x, w) = super::gauss::gauss_legendre(p + 2);
            let jac = 0.5 * (r - a);
            let rho_vals: Vec<f64> = (0..=p).map(|q| self.rho[g.index(e_cut, q)]).collect();
            let f_vals: Vec<f64> = (0..=p).map(|q| f[g.index(e_cut, q)]).collect();
            let (ea, eb) = (a, g.breaks[e_cut + 1]);
            for (xq, wq) in x.iter().zip(&w) {
                let s = a + (xq + 1.0) * jac;
                let basis = g.rule.basis_at(2.0 * (s - ea) / (eb - ea) - 1.0);
                let rho_s: f64 = basis.iter().zip(&rho_vals).map(|(l, v)| l * v).sum();
                let f_s: f64 = basis.iter().zip(&f_vals).map(|(l, v)| l * v).sum();
                total += 2.0 * PI * rho_s * f_s * wq * jac;
            }
        }
        total
    }
}

/// Mean-zero Neumann Poisson solver for mode 0: finds u with
/// K u = M f - mean(f) M 1 and sum(M u) = 0, via a bordered LU factorization.
pub struct PoissonSolver {
    pub stiffness: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl PoissonSolver {
    pub fn new(disc: &Discretization) -> Result<Self> {
        let n = disc.len();
        let k = disc.stiffness(0);
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n)).copy_from(&k);
        for i in 0..n {
            a[(i, n)] = disc.area[i];
            a[(n, i)] = disc.area[i];
        }
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular("bordered Neumann Laplacian".into()));
        }
        Ok(Self {
            stiffness: k,
            lu,
            n,
        })
    }

    /// Solve with a nodal source `f` (load vector M f).
    pub fn solve(&self, disc: &Discretization, f: &[f64]) -> Vec<f64> {
        let load: Vec<f64> = f.iter().zip(&disc.area).map(|(v, w)| v * w).collect();
        self.solve_load(&load)
    }

    /// Solve with an explicit load vector.
    pub fn solve_load(&self, load: &[f64]) -> Vec<f64> {
        let mut b = DVector::zeros(self.n + 1);
        for i in 0..self.n {
            b[i] = load[i];
        }
        let x = self.lu.solve(&b).expect("factorization checked invertible");
        x.iter().take(self.n).cloned().collect()
    }

    pub fn energy_norm(&self, u: &[f64]) -> f64 {
        let v = DVector::from_column_slice(u);
        (v.dot(&(&self.stiffness * &v))).max(0.0).sqrt()
    }
}
