//! Correction phi around the ansatz: the operators S and N, the contraction
//! iteration phi <- L^{-1}(S(phi) + N(phi) + R), and post-solve diagnostics.

use serde::{Deserialize, Serialize};

use crate::ansatz::{residual, residual_rate, AnsatzFields};
use crate::error::{invalid, Error, Result};
use crate::geometry::{dist, Point};
use crate::linop::{assemble_linearized, DiscreteLinearizedSystem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Iteration {
    Picard,
    /// phi <- (1 - omega) phi + omega T(phi)
    Damped {
        omega: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates with max |phi| above this are rejected.
    pub overflow_cap: f64,
    /// Ball constant: ||phi|| <= radius eps^{(2-p)/(4Np)} |log eps|.
    pub ball_radius: f64,
    pub iteration: Iteration,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            overflow_cap: 50.0,
            ball_radius: 1.0,
            iteration: Iteration::Picard,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectionState {
    #[serde(skip)]
    pub phi: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Energy norm of phi after each iteration.
    pub norms: Vec<f64>,
    /// Energy norm of each update.
    pub steps: Vec<f64>,
    /// steps[n] / steps[n-1].
    pub ratios: Vec<f64>,
    pub ball: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub eps: f64,
    #[serde(skip)]
    pub u: Vec<Vec<f64>>,
    /// eps V_i e^{u_i} at the nodes.
    #[serde(skip)]
    pub densities: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    /// Expected limits 2 pi alpha_i m.
    pub mass_limits: Vec<f64>,
    pub mass_deviation: f64,
    pub phi_norm: f64,
    pub residual_norm: f64,
    /// L^2 norm of u - Lap^{-1}(sum_j a_ij eps V_j e^{u_j} - mean) after removing means.
    pub final_residual: f64,
    /// Same check written in mean-field form with rho recomputed from u.
    pub mean_field_residual: f64,
    pub max_ratio_after_first: f64,
}

/// sum_{i'} a_{ii'} w_{i'} - mean, for nodal w.
fn couple(ans: &AnsatzFields, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cd = &ans.schedule.config.cartan;
    let disc = ans.disc();
    (0..ans.rank())
        .map(|i| {
            let mut out = vec![0.0; disc.len()];
            for (ip, f) in w.iter().enumerate() {
                let a = cd.a(i, ip) as f64;
                if a != 0.0 {
                    out.iter_mut().zip(f).for_each(|(o, v)| *o += a * v);
                }
            }
            disc.subtract_mean(&mut out);
            out
        })
        .collect()
}

/// S_i(phi) = sum a_{ii'} (eps V e^{W_{i'}} - B^{i'}/2) phi_{i'} - mean.
pub fn op_s(ans: &AnsatzFields, phi: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let terms: Vec<Vec<f64>> = (0..ans.rank())
        .map(|i| {
            let e = ans.density(i, &ans.w[i]);
            (0..e.len())
                .map(|k| (e[k] - 0.5 * ans.bubbles[i][k]) * phi[i][k])
                .collect()
        })
        .collect();
    couple(ans, &terms)
}

/// N_i(phi) = sum a_{ii'} eps V e^{W_{i'}} (e^{phi_{i'}} - 1 - phi_{i'}) - mean.
pub fn op_n(ans: &AnsatzFields, phi: &[Vec<f64>], cap: f64) -> Result<Vec<Vec<f64>>> {
    let max = phi.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(max <= cap) {
        return Err(Error::Overflow { max, cap });
    }
    let terms: Vec<Vec<f64>> = (0..ans.rank())
        .map(|i| {
            let e = ans.density(i, &ans.w[i]);
            (0..e.len())
                .map(|k| {
                    let p = phi[i][k];
                    // e^p - 1 - p without cancellation for small p
                    let q = if p.abs() < 1e-3 {
                        p * p * (0.5 + p * (1.0 / 6.0 + p / 24.0))
                    } else {
                        p.exp_m1() - p
                    };
                    e[k] * q
                })
                .collect()
        })
        .collect();
    Ok(couple(ans, &terms))
}

/// R_i without S and N: the ansatz residual.
fn op_r(ans: &AnsatzFields) -> Vec<Vec<f64>> {
    residual(ans).fields
}

/// Radius of the admissible ball for the configured constant.
pub fn ball_radius(ans: &AnsatzFields, constant: f64) -> f64 {
    let cfg = &ans.schedule.config;
    let eps = cfg.eps;
    constant * eps.powf(residual_rate(ans.rank(), cfg.p)) * eps.ln().abs()
}

pub struct Solver<'a> {
    pub ans: &'a AnsatzFields,
    pub system: DiscreteLinearizedSystem,
    pub options: SolverOptions,
    rhs0: Vec<Vec<f64>>,
}

impl<'a> Solver<'a> {
    pub fn new(ans: &'a AnsatzFields, options: SolverOptions) -> Result<Self> {
        if !(options.tol > 0.0) || options.max_iter == 0 {
            return Err(invalid("solver needs tol > 0 and max_iter > 0"));
        }
        if let Iteration::Damped { omega } = options.iteration {
            if !(omega > 0.0 && omega <= 1.0) {
                return Err(invalid("damping factor must lie in (0, 1]"));
            }
        }
        Ok(Self {
            ans,
            system: assemble_linearized(ans)?,
            options,
            rhs0: op_r(ans),
        })
    }

    /// T(phi) = L^{-1}(S(phi) + N(phi) + R).
    pub fn map(&self, phi: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let s = op_s(self.ans, phi);
        let n = op_n(self.ans, phi, self.options.overflow_cap)?;
        let h: Vec<Vec<f64>> = (0..self.ans.rank())
            .map(|i| {
                (0..s[i].len())
                    .map(|k| s[i][k] + n[i][k] + self.rhs0[i][k])
                    .collect()
            })
            .collect();
        Ok(self.system.solve(&h))
    }

    pub fn run(&self) -> Result<CorrectionState> {
        let len = self.ans.space.len();
        let rank = self.ans.rank();
        let ball = ball_radius(self.ans, self.options.ball_radius);
        let mut st = CorrectionState {
            phi: vec![vec![0.0; len]; rank],
            iterations: 0,
            norms: vec![],
            steps: vec![],
            ratios: vec![],
            ball,
        };
        let mut above = 0;
        for it in 1..=self.options.max_iter {
            let t = self.map(&st.phi)?;
            let next: Vec<Vec<f64>> = match self.options.iteration {
                Iteration::Picard => t,
                Iteration::Damped { omega } => st
                    .phi
                    .iter()
                    .zip(&t)
                    .map(|(a, b)| {
                        a.iter()
                            .zip(b)
                            .map(|(x, y)| (1.0 - omega) * x + omega * y)
                            .collect()
                    })
                    .collect(),
            };
            let diff: Vec<Vec<f64>> = next
                .iter()
                .zip(&st.phi)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect();
            let step = self.system.energy_norm(&diff);
            let norm = self.system.energy_norm(&next);
            if let Some(prev) = st.steps.last() {
                let r = step / prev;
                st.ratios.push(r);
                above = if r >= 1.0 { above + 1 } else { 0 };
            }
            st.phi = next;
            st.steps.push(step);
            st.norms.push(norm);
            st.iterations = it;
            if norm > ball {
                return Err(Error::BallViolation { norm, radius: ball });
            }
            if above >= 3 {
                return Err(Error::Divergence {
                    iteration: it,
                    ratios: st.ratios.clone(),
                });
            }
            if step < self.options.tol {
                return Ok(st);
            }
        }
        Err(Error::NoConvergence {
            iterations: self.options.max_iter,
            last_step: *st.steps.last().unwrap_or(&f64::NAN),
        })
    }
}

/// Solve for the correction and report the diagnostics of u = W + phi.
pub fn fixed_point_solve(
    ans: &AnsatzFields,
    options: SolverOptions,
) -> Result<(CorrectionState, SolutionReport)> {
    let solver = Solver::new(ans, options)?;
    let st = solver.run()?;
    let rep = report(ans, &st);
    Ok((st, rep))
}

fn report(ans: &AnsatzFields, st: &CorrectionState) -> SolutionReport {
    let cfg = &ans.schedule.config;
    let disc = ans.disc();
    let n = ans.rank();
    let u: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            ans.w[i]
                .iter()
                .zip(&st.phi[i])
                .map(|(a, b)| a + b)
                .collect()
        })
        .collect();
    let densities: Vec<Vec<f64>> = (0..n).map(|i| ans.density(i, &u[i])).collect();
    let masses: Vec<f64> = densities.iter().map(|d| disc.integrate(d)).collect();
    let m = cfg.poles.len() as f64;
    let mass_limits: Vec<f64> = (0..n)
        .map(|i| 2.0 * std::f64::consts::PI * cfg.cartan.alpha(i) * m)
        .collect();
    let mass_deviation = masses
        .iter()
        .zip(&mass_limits)
        .map(|(a, b)| (a / b - 1.0).abs())
        .fold(0.0, f64::max);
    let final_residual = system_residual(ans, &u, &couple(ans, &densities));
    // mean-field form: rho_j (V_j e^{u_j} / int V_j e^{u_j} - 1/|Sigma|)
    let mf: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let ve: Vec<f64> = (0..disc.len())
                .map(|k| ans.potentials[j][k] * u[j][k].exp())
                .collect();
            let z = disc.integrate(&ve);
            ve.iter().map(|v| masses[j] * v / z).collect()
        })
        .collect();
    let mean_field_residual = system_residual(ans, &u, &couple(ans, &mf));
    SolutionReport {
        eps: cfg.eps,
        masses,
        mass_limits,
        mass_deviation,
        phi_norm: *st.norms.last().unwrap_or(&0.0),
        residual_norm: residual(ans).total,
        final_residual,
        mean_field_residual,
        max_ratio_after_first: st.ratios.iter().skip(1).cloned().fold(0.0, f64::max),
        u,
        densities,
    }
}

/// || (u - mean u) - Lap^{-1} f ||_{L^2} summed over components.
fn system_residual(ans: &AnsatzFields, u: &[Vec<f64>], f: &[Vec<f64>]) -> f64 {
    let disc = ans.disc();
    (0..u.len())
        .map(|i| {
            let v = ans.space.solve(&f[i]);
            let mu = disc.mean(&u[i]);
            let d: Vec<f64> = u[i].iter().zip(&v).map(|(a, b)| a - mu - b).collect();
            disc.lp_norm(&d, 2.0)
        })
        .sum()
}

impl SolutionReport {
    /// int eps V_i e^{u_i} psi dv_g for each component.
    pub fn weak_star_test(&self, ans: &AnsatzFields, psi: impl Fn(&Point) -> f64) -> Vec<f64> {
        let disc = ans.disc();
        let surf = &ans.schedule.config.surface;
        let w: Vec<f64> = ans
            .space
            .nodes()
            .iter()
            .map(|&s| psi(&surf.point(s, 0.0)))
            .collect();
        self.densities
            .iter()
            .map(|d| disc.integrate(&d.iter().zip(&w).map(|(a, b)| a * b).collect::<Vec<_>>()))
            .collect()
    }

    /// Expected weak-* limit sum_j 2 pi alpha_i psi(xi_j).
    pub fn weak_star_limit(&self, ans: &AnsatzFields, psi: impl Fn(&Point) -> f64) -> Vec<f64> {
        let cfg = &ans.schedule.config;
        let s: f64 = ans.schedule.centers.iter().map(&psi).sum();
        (0..cfg.cartan.rank)
            .map(|i| 2.0 * std::f64::consts::PI * cfg.cartan.alpha(i) * s)
            .collect()
    }

    /// int_{d_g(x, center) < r} eps V_i e^{u_i} dv_g; `center` must lie on the axis.
    pub fn local_mass(&self, ans: &AnsatzFields, center: &Point, r: f64) -> Result<Vec<f64>> {
        let surf = &ans.schedule.config.surface;
        let disc = ans.disc();
        let len = surf.meridian_length();
        let (s0, _) = surf.meridian_coords(center);
        let on_axis =
            dist(center, &surf.point(s0, 0.0)) < 1e-12 && (s0 < 1e-12 || (len - s0) < 1e-12);
        if !on_axis {
            return Err(invalid(
                "local mass is available around points on the rotation axis",
            ));
        }
        Ok(self
            .densities
            .iter()
            .map(|d| {
                if s0 < 1e-12 {
                    disc.integrate_cap(d, r)
                } else {
                    disc.integrate(d) - disc.integrate_cap(d, (len - r).max(0.0))
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{assemble_ansatz, BlowupConfig};
    use crate::cartan::{build_cartan, Family};
    use crate::geometry::{make_surface, Model, Pole};

    fn su3(eps: f64) -> AnsatzFields {
        let cd = build_cartan(Family::A, 2).unwrap();
        let cfg = BlowupConfig::new(
            cd,
            make_surface(Model::UnitDisk, true),
            vec![Pole::North],
            3,
            eps,
        );
        assemble_ansatz(&cfg).unwrap()
    }

    fn smooth(ans: &AnsatzFields, scale: f64) -> Vec<Vec<f64>> {
        (0..ans.rank())
            .map(|i| {
                let mut f: Vec<f64> = ans
                    .space
                    .nodes()
                    .iter()
                    .map(|s| scale * (7.0 * s + i as f64).sin())
                    .collect();
                ans.disc().subtract_mean(&mut f);
                f
            })
            .collect()
    }

    #[test]
    fn operators_vanish_at_zero_and_are_mean_free() {
        let ans = su3(1e-3);
        let z = vec![vec![0.0; ans.space.len()]; 2];
        assert!(op_s(&ans, &z).iter().flatten().all(|v| *v == 0.0));
        assert!(op_n(&ans, &z, 50.0)
            .unwrap()
            .iter()
            .flatten()
            .all(|v| *v == 0.0));
        let phi = smooth(&ans, 0.3);
        for f in op_s(&ans, &phi)
            .iter()
            .chain(op_n(&ans, &phi, 50.0).unwrap().iter())
        {
            assert!(ans.disc().mean(f).abs() < 1e-10);
        }
    }

    #[test]
    fn n_is_quadratic() {
        let ans = su3(1e-3);
        let q: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&t| {
                let n = op_n(&ans, &smooth(&ans, t), 50.0).unwrap();
                n.iter().map(|f| ans.disc().lp_norm(f, 1.1)).sum::<f64>() / (t * t)
            })
            .collect();
        assert!(
            (q[2] / q[1] - 1.0).abs() < 0.05 && (q[1] / q[0] - 1.0).abs() < 0.5,
            "{q:?}"
        );
    }

    #[test]
    fn overflow_is_rejected() {
        let ans = su3(1e-3);
        let phi = smooth(&ans, 100.0);
        assert!(matches!(
            op_n(&ans, &phi, 50.0),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn solve_su3_disk() {
        let ans = su3(1e-3);
        let (st, rep) = fixed_point_solve(&ans, SolverOptions::default()).unwrap();
        assert!(st.iterations < 60);
        assert!(rep.final_residual < 1e-8, "{}", rep.final_residual);
        assert!(rep.mean_field_residual < 1e-8);
        let ones = rep.weak_star_test(&ans, |_| 1.0);
        assert!(ones.iter().zip(&rep.masses).all(|(a, b)| a == b));
        let c = ans.schedule.centers[0];
        let all = rep.local_mass(&ans, &c, 10.0).unwrap();
        assert!(all
            .iter()
            .zip(&rep.masses)
            .all(|(a, b)| (a - b).abs() < 1e-9 * b));
        assert!(st.phi.iter().all(|f| ans.disc().mean(f).abs() < 1e-10));
    }
}
