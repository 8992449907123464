//! Cartan matrices, bubble exponents, concentration exponents and the
//! triangular system for the scale coefficients d_{i,j}.

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Mass of an interior blow-up point.
pub const RHO_INTERIOR: f64 = 8.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    G2,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::G2 => "G2",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Family {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "G2" => Ok(Family::G2),
            other => Err(invalid(format!("unknown Cartan family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartanData {
    pub family: Family,
    pub rank: usize,
    /// a_{ij}, zero-based.
    pub entries: Vec<Vec<i64>>,
    pub alphas: Vec<i64>,
    pub q: Vec<Rational64>,
}

pub fn build_cartan(family: Family, n: usize) -> Result<CartanData> {
    if n < 2 {
        return Err(invalid(format!("rank must be >= 2, got {n}")));
    }
    if family == Family::G2 && n != 2 {
        return Err(invalid(format!("G2 has rank 2, got {n}")));
    }
    if n > 30 {
        return Err(invalid(format!("rank {n} too large for exact arithmetic")));
    }
    let mut a = vec![vec![0i64; n]; n];
    for i in 0..n {
        a[i][i] = 2;
        if i + 1 < n {
            a[i][i + 1] = -1;
            a[i + 1][i] = -1;
        }
    }
    match family {
        Family::A => {}
        Family::B => a[n - 2][n - 1] = -2,
        Family::C => a[n - 1][n - 2] = -2,
        Family::G2 => a[1][0] = -3,
    }
    let mut alphas: Vec<i64> = (1..n as i64).map(|i| 2 * i).collect();
    alphas.push(2 - 2 * (n as i64 - 1) * a[n - 1][n - 2]);
    let shift = if family == Family::B { 2 } else { 1 };
    let q = (0..n)
        .map(|i| {
            if i == n - 1 {
                Rational64::new(1, alphas[i])
            } else {
                // one-based index i+1
                Rational64::new(n as i64 + shift - (i as i64 + 1), alphas[i])
            }
        })
        .collect();
    Ok(CartanData {
        family,
        rank: n,
        entries: a,
        alphas,
        q,
    })
}

impl CartanData {
    pub fn a(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.alphas[i] as f64
    }

    pub fn q_f64(&self, i: usize) -> f64 {
        self.q[i].to_f64().unwrap()
    }

    /// Coupling weight of component i' in W_i: 1 on the diagonal, a_{ii'}/2 off it.
    pub fn coupling(&self, i: usize, ip: usize) -> f64 {
        if i == ip {
            1.0
        } else {
            self.entries[i][ip] as f64 / 2.0
        }
    }

    /// alpha_i - 2 + sum_{i'<i} a_{ii'} alpha_{i'} for every i (all zero when valid).
    pub fn alpha_identity_defects(&self) -> Vec<i64> {
        (0..self.rank)
            .map(|i| {
                self.alphas[i] - 2
                    + (0..i)
                        .map(|k| self.entries[i][k] * self.alphas[k])
                        .sum::<i64>()
            })
            .collect()
    }

    /// q_i alpha_i + sum_{i'>i} a_{ii'} alpha_{i'} q_{i'} - 1 for every i.
    pub fn q_identity_defects(&self) -> Vec<Rational64> {
        (0..self.rank)
            .map(|i| {
                let mut s = self.q[i] * Rational64::from(self.alphas[i]);
                for k in i + 1..self.rank {
                    s += Rational64::from(self.entries[i][k] * self.alphas[k]) * self.q[k];
                }
                s - Rational64::one()
            })
            .collect()
    }

    /// (N-1)/N * a_{N,N-1} a_{N-1,N}.
    pub fn a_star(&self) -> Rational64 {
        let n = self.rank;
        Rational64::new(n as i64 - 1, n as i64)
            * Rational64::from(self.entries[n - 1][n - 2] * self.entries[n - 2][n - 1])
    }

    /// Pivots of Gaussian elimination without row exchanges (the diagonal of
    /// the reduced upper-triangular matrix).
    pub fn elimination_pivots(&self) -> Vec<Rational64> {
        let n = self.rank;
        let mut m: Vec<Vec<Rational64>> = self
            .entries
            .iter()
            .map(|r| r.iter().map(|&v| Rational64::from(v)).collect())
            .collect();
        for c in 0..n {
            let piv = m[c][c];
            assert!(!piv.is_zero(), "zero pivot in Cartan elimination");
            for r in c + 1..n {
                let f = m[r][c] / piv;
                for k in c..n {
                    let v = m[c][k];
                    m[r][k] -= f * v;
                }
            }
        }
        (0..n).map(|i| m[i][i]).collect()
    }

    /// Expected pivots (2, 3/2, ..., N/(N-1), 2 - a_*).
    pub fn expected_pivots(&self) -> Vec<Rational64> {
        let n = self.rank as i64;
        let mut v: Vec<Rational64> = (1..n).map(|k| Rational64::new(k + 1, k)).collect();
        v.push(Rational64::from(2) - self.a_star());
        v
    }

    /// 2N - a_{N-1,N} a_{N,N-1} (N-1).
    pub fn step_one_constant(&self) -> i64 {
        let n = self.rank;
        2 * n as i64 - self.entries[n - 2][n - 1] * self.entries[n - 1][n - 2] * (n as i64 - 1)
    }

    pub fn is_valid(&self) -> bool {
        self.alpha_identity_defects().iter().all(|d| *d == 0)
            && self.q_identity_defects().iter().all(|d| d.is_zero())
            && self.elimination_pivots() == self.expected_pivots()
            && self.elimination_pivots().iter().all(|p| p.is_positive())
            && self.step_one_constant() != 0
    }

    /// Largest eps below which delta_{i,j} increases strictly in i for the
    /// coefficients `d` of one blow-up point.
    pub fn increasing_threshold(&self, d: &[f64]) -> f64 {
        let mut t: f64 = 1.0;
        for i in 0..self.rank - 1 {
            let gap = self.q_f64(i) - self.q_f64(i + 1);
            t = t.min((d[i + 1] / d[i]).powf(1.0 / gap));
        }
        t
    }
}

/// delta_{i,j} = d_{i,j} eps^{q_i}; `d` is indexed [j][i].
pub fn delta_values(cd: &CartanData, d: &[Vec<f64>], eps: f64) -> Result<Vec<Vec<f64>>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    d.iter()
        .map(|row| {
            if row.len() != cd.rank || row.iter().any(|v| !(*v > 0.0)) {
                return Err(invalid(
                    "d coefficients must be positive with one entry per component",
                ));
            }
            Ok(row
                .iter()
                .enumerate()
                .map(|(i, di)| di * eps.powf(cd.q_f64(i)))
                .collect())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DCoefficients {
    /// d_{i,j} indexed [j][i].
    pub values: Vec<Vec<f64>>,
    pub robin: Vec<f64>,
    /// cross_green[j][j'] = G(xi_{j'}, xi_j); diagonal ignored.
    pub cross_green: Vec<Vec<f64>>,
    /// V_i(xi_j) indexed [j][i].
    pub potentials: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
}

fn interaction(robin: &[f64], cross: &[Vec<f64>], masses: &[f64], j: usize) -> f64 {
    let mut s = masses[j] * robin[j];
    for jp in 0..robin.len() {
        if jp != j {
            s += masses[jp] * cross[j][jp];
        }
    }
    s
}

/// Right-hand side of the d-system for point j, component i.
pub fn d_system_rhs(cd: &CartanData, dc: &DCoefficients, i: usize, j: usize) -> f64 {
    let weight = cd.alpha(i)
        + (0..cd.rank)
            .filter(|&k| k != i)
            .map(|k| cd.a(i, k) as f64 / 2.0 * cd.alpha(k))
            .sum::<f64>();
    -2.0 * cd.alpha(i).ln()
        + 0.5 * weight * interaction(&dc.robin, &dc.cross_green, &dc.masses, j)
        + dc.potentials[j][i].ln()
}

/// Left-hand side alpha_i log d_i + sum_{i'>i} a_{ii'} alpha_{i'} log d_{i'}.
pub fn d_system_lhs(cd: &CartanData, log_d: &[f64], i: usize) -> f64 {
    cd.alpha(i) * log_d[i]
        + (i + 1..cd.rank)
            .map(|k| cd.a(i, k) as f64 * cd.alpha(k) * log_d[k])
            .sum::<f64>()
}

pub fn solve_d_coefficients(
    cd: &CartanData,
    robin: &[f64],
    cross_green: &[Vec<f64>],
    potentials: &[Vec<f64>],
    masses: &[f64],
) -> Result<DCoefficients> {
    let m = robin.len();
    if m == 0 || cross_green.len() != m || potentials.len() != m || masses.len() != m {
        return Err(invalid(
            "d-system inputs must agree on the number of points",
        ));
    }
    if potentials
        .iter()
        .any(|r| r.len() != cd.rank || r.iter().any(|v| !(*v > 0.0)))
    {
        return Err(invalid(
            "potential values must be positive, one per component",
        ));
    }
    let mut dc = DCoefficients {
        values: vec![vec![0.0; cd.rank]; m],
        robin: robin.to_vec(),
        cross_green: cross_green.to_vec(),
        potentials: potentials.to_vec(),
        masses: masses.to_vec(),
    };
    for j in 0..m {
        let mut log_d = vec![0.0; cd.rank];
        for i in (0..cd.rank).rev() {
            let upper: f64 = (i + 1..cd.rank)
                .map(|k| cd.a(i, k) as f64 * cd.alpha(k) * log_d[k])
                .sum();
            log_d[i] = (d_system_rhs(cd, &dc, i, j) - upper) / cd.alpha(i);
        }
        dc.values[j] = log_d.iter().map(|l| l.exp()).collect();
    }
    Ok(dc)
}

impl DCoefficients {
    /// Largest |lhs - rhs| over all (i, j).
    pub fn max_residual(&self, cd: &CartanData) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.values.len() {
            let log_d: Vec<f64> = self.values[j].iter().map(|v| v.ln()).collect();
            for i in 0..cd.rank {
                worst =
                    worst.max((d_system_lhs(cd, &log_d, i) - d_system_rhs(cd, self, i, j)).abs());
            }
        }
        worst
    }
}
