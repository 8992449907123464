use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::Serialize;

use crate::ansatz::AnsatzFields;
use crate::error::{Error, Result};
use crate::numerics::{par_map, Discretization};

/// L^i phi = -Lap phi_i - sum_{i'} c_{ii'} B^{i'} phi_{i'} + mean, on mean-zero
/// fields of angular mode 0, with one Lagrange multiplier per component.
pub struct DiscreteLinearizedSystem {
    pub rank: usize,
    pub len: usize,
    /// c_{ii'}: 1 on the diagonal, a_{ii'}/2 off it.
    pub coupling: Vec<Vec<f64>>,
    /// B^i at the nodes.
    pub bubbles: Vec<Vec<f64>>,
    pub area: Vec<f64>,
    pub total_area: f64,
    pub stiffness: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl std::fmt::Debug for DiscreteLinearizedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteLinearizedSystem")
            .field("rank", &self.rank)
            .field("len", &self.len)
            .finish()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseNormEstimate {
    pub eps: f64,
    /// (mode, ||L^{-1}||) for each probed angular mode.
    pub per_mode: Vec<(i64, f64)>,
    pub value: f64,
    /// sigma_max / sigma_min of the worst mode.
    pub condition: f64,
    pub log_ratio: f64,
}

pub fn assemble_linearized(ans: &AnsatzFields) -> Result<DiscreteLinearizedSystem> {
    let cd = &ans.schedule.config.cartan;
    let n = ans.rank();
    let disc = ans.disc();
    let len = disc.len();
    let coupling: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|ip| cd.coupling(i, ip)).collect())
        .collect();
    let stiffness = ans.space.solver.stiffness.clone();
    let size = n * (len + 1);
    let mut a = DMatrix::zeros(size, size);
    for i in 0..n {
        let o = i * len;
        a.view_mut((o, o), (len, len)).copy_from(&stiffness);
        for ip in 0..n {
            let c = coupling[i][ip];
            if c == 0.0 {
                continue;
            }
            let op = ip * len;
            for k in 0..len {
                a[(o + k, op + k)] -= c * disc.area[k] * ans.bubbles[ip][k];
            }
        }
        let row = n * len + i;
        for k in 0..len {
            a[(o + k, row)] = disc.area[k];
            a[(row, o + k)] = disc.area[k];
        }
    }
    let lu = a.lu();
    if !lu.is_invertible() {
        return Err(Error::Singular(
            "linearized operator around the ansatz".into(),
        ));
    }
    Ok(DiscreteLinearizedSystem {
        rank: n,
        len,
        coupling,
        bubbles: ans.bubbles.clone(),
        area: disc.area.clone(),
        total_area: disc.total_area,
        stiffness,
        lu,
    })
}

impl DiscreteLinearizedSystem {
    fn mean(&self, f: &[f64]) -> f64 {
        self.area.iter().zip(f).map(|(w, v)| w * v).sum::<f64>() / self.total_area
    }

    /// Weak-form action on the mean-zero part of `phi`, tested against
    /// mean-zero functions (the load vector with its mean direction removed).
    pub fn apply(&self, phi: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let centred: Vec<DVector<f64>> = phi
            .iter()
            .map(|f| {
                let m = self.mean(f);
                DVector::from_iterator(self.len, f.iter().map(|v| v - m))
            })
            .collect();
        (0..self.rank)
            .map(|i| {
                let mut load = &self.stiffness * &centred[i];
                for ip in 0..self.rank {
                    let c = self.coupling[i][ip];
                    for k in 0..self.len {
                        load[k] -= c * self.area[k] * self.bubbles[ip][k] * centred[ip][k];
                    }
                }
                let total: f64 = load.iter().sum();
                load.iter()
                    .zip(&self.area)
                    .map(|(l, w)| l - w * total / self.total_area)
                    .collect()
            })
            .collect()
    }

    /// Mean-zero phi with L phi = load in the weak sense (mean of the load absorbed).
    pub fn solve_load(&self, load: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut b = DVector::zeros(self.rank * (self.len + 1));
        for (i, l) in load.iter().enumerate() {
            for k in 0..self.len {
                b[i * self.len + k] = l[k];
            }
        }
        let x = self.lu.solve(&b).expect("factorization checked invertible");
        (0..self.rank)
            .map(|i| x.rows(i * self.len, self.len).iter().cloned().collect())
            .collect()
    }

    /// Solve L phi = h - mean(h) for nodal right-hand sides.
    pub fn solve(&self, h: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let load: Vec<Vec<f64>> = h
            .iter()
            .map(|f| f.iter().zip(&self.area).map(|(v, w)| v * w).collect())
            .collect();
        self.solve_load(&load)
    }

    /// Relative weak residual |L phi - (M h - mean)| / |M h - mean| of a solve.
    pub fn solve_residual(&self, h: &[Vec<f64>], phi: &[Vec<f64>]) -> f64 {
        let lphi = self.apply(phi);
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for i in 0..self.rank {
            let m = self.mean(&h[i]);
            for k in 0..self.len {
                let target = self.area[k] * (h[i][k] - m);
                num = num.max((lphi[i][k] - target).abs());
                den = den.max(target.abs());
            }
        }
        num / den.max(1e-300)
    }

    /// sqrt(sum_i phi_i^T K phi_i).
    pub fn energy_norm(&self, phi: &[Vec<f64>]) -> f64 {
        phi.iter()
            .map(|f| {
                let v = DVector::from_column_slice(f);
                v.dot(&(&self.stiffness * &v))
            })
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    /// Energy-to-energy norm of L^{-1} on mode `ell`, with
    /// sigma_max / sigma_min of the energy-scaled operator.
    pub fn mode_inverse_norm(&self, disc: &Discretization, ell: i64) -> Result<(f64, f64)> {
        let (k, basis) = if ell == 0 {
            // mean-zero basis: drop the last node and solve for it from the mean
            let p = self.len - 1;
            let last = self.area[p];
            let mut pm = DMatrix::zeros(self.len, p);
            for c in 0..p {
                pm[(c, c)] = 1.0;
                pm[(p, c)] = -self.area[c] / last;
            }
            (pm.transpose() * &self.stiffness * &pm, Basis::MeanZero(pm))
        } else {
            let (kr, free) = disc.stiffness_reduced(ell);
            (kr, Basis::Free(free))
        };
        let m = k.nrows();
        let chol = k
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Singular(format!("energy form of mode {ell} not positive")))?;
        let l = chol.l();
        let n = self.rank;
        let mut a = DMatrix::zeros(n * m, n * m);
        for i in 0..n {
            a.view_mut((i * m, i * m), (m, m)).copy_from(&k);
            for ip in 0..n {
                let c = self.coupling[i][ip];
                if c == 0.0 {
                    continue;
                }
                let wb: Vec<f64> = (0..self.len)
                    .map(|q| c * self.area[q] * self.bubbles[ip][q])
                    .collect();
                match &basis {
                    Basis::Free(free) => {
                        for (r, &q) in free.iter().enumerate() {
                            a[(i * m + r, ip * m + r)] -= wb[q];
                        }
                    }
                    Basis::MeanZero(pm) => {
                        let d = DMatrix::from_diagonal(&DVector::from_vec(wb));
                        let blk = pm.transpose() * d * pm;
                        let mut v = a.view_mut((i * m, ip * m), (m, m));
                        v -= blk;
                    }
                }
            }
        }
        // B = L^{-1} A L^{-T} with block-diagonal L
        for i in 0..n {
            for ip in 0..n {
                let blk = a.view((i * m, ip * m), (m, m)).clone_owned();
                let left = l
                    .solve_lower_triangular(&blk)
                    .expect("cholesky factor is invertible");
                let both = l
                    .solve_lower_triangular(&left.transpose())
                    .expect("cholesky factor is invertible")
                    .transpose();
                a.view_mut((i * m, ip * m), (m, m)).copy_from(&both);
            }
        }
        let sv = a.singular_values();
        let smin = sv.min();
        let smax = sv.max();
        if !(smin > 0.0) {
            return Err(Error::Singular(format!(
                "mode {ell}: smallest singular value {smin:e}"
            )));
        }
        Ok((1.0 / smin, smax / smin))
    }

    /// Largest mode inverse norm over `modes`.
    pub fn inverse_norm_estimate(
        &self,
        disc: &Discretization,
        modes: &[i64],
        eps: f64,
    ) -> Result<InverseNormEstimate> {
        let results = par_map(modes, |&ell| self.mode_inverse_norm(disc, ell));
        let mut per_mode = vec![];
        let mut value: f64 = 0.0;
        let mut condition = 0.0;
        for (ell, r) in modes.iter().zip(results) {
            let (v, c) = r?;
            per_mode.push((*ell, v));
            if v > value {
                value = v;
                condition = c;
            }
        }
        Ok(InverseNormEstimate {
            eps,
            per_mode,
            value,
            condition,
            log_ratio: value / eps.ln().abs(),
        })
    }
}

enum Basis {
    MeanZero(DMatrix<f64>),
    Free(Vec<usize>),
}
