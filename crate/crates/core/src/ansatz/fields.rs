use serde::Serialize;

use super::config::BlowupConfig;
use crate::bubbles::{bubble_source, project_bubble, ProjectedField};
use crate::cartan::{delta_values, solve_d_coefficients, CartanData, DCoefficients, RHO_INTERIOR};
use crate::error::{invalid, Result};
use crate::geometry::{chart_at, green, green_function, Chart, GreenData, MeridianSpace, Point};
use crate::numerics::{ln_sum_pow, par_map, Discretization};

/// Concentration data that needs no mesh: charts, Green data, d-coefficients
/// and the scales delta_{i,j}.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub config: BlowupConfig,
    pub centers: Vec<Point>,
    pub charts: Vec<Chart>,
    pub greens: Vec<GreenData>,
    pub d: DCoefficients,
    /// delta_{i,j} indexed [j][i].
    pub delta: Vec<Vec<f64>>,
    /// Annulus (inner, outer) chart radii indexed [j][i]; inner 0 for i = 1, outer infinite for i = N.
    pub annuli: Vec<Vec<(f64, f64)>>,
    /// Largest eps for which the scales at every point increase in i.
    pub threshold: f64,
}

pub fn schedule(config: &BlowupConfig) -> Result<Schedule> {
    config.validate()?;
    let surf = &config.surface;
    let centers: Vec<Point> = config.poles.iter().map(|p| surf.pole_point(*p)).collect();
    let charts = centers
        .iter()
        .map(|c| {
            let ch = chart_at(surf, c)?;
            match config.r0 {
                Some(r0) => ch.with_r0(r0),
                None => Ok(ch),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let greens = centers
        .iter()
        .zip(&charts)
        .map(|(c, ch)| green(surf, c, Some(*ch)))
        .collect::<Result<Vec<_>>>()?;
    let m = centers.len();
    let robin: Vec<f64> = greens.iter().map(|g| g.robin).collect();
    let cross: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            (0..m)
                .map(|jp| {
                    if jp == j {
                        0.0
                    } else {
                        green_function(surf, &centers[jp], &centers[j])
                    }
                })
                .collect()
        })
        .collect();
    let pots: Vec<Vec<f64>> = centers
        .iter()
        .map(|c| config.potentials.iter().map(|v| v.eval(c)).collect())
        .collect();
    let d = solve_d_coefficients(
        &config.cartan,
        &robin,
        &cross,
        &pots,
        &vec![RHO_INTERIOR; m],
    )?;
    let mut s = Schedule {
        config: config.clone(),
        centers,
        charts,
        greens,
        d,
        delta: vec![],
        annuli: vec![],
        threshold: 0.0,
    };
    s.refresh()?;
    Ok(s)
}

impl Schedule {
    fn refresh(&mut self) -> Result<()> {
        let cd = &self.config.cartan;
        self.delta = delta_values(cd, &self.d.values, self.config.eps)?;
        self.annuli = self
            .delta
            .iter()
            .map(|row| {
                (0..cd.rank)
                    .map(|i| {
                        let inner = if i == 0 {
                            0.0
                        } else {
                            (row[i - 1] * row[i]).sqrt()
                        };
                        let outer = if i + 1 == cd.rank {
                            f64::INFINITY
                        } else {
                            (row[i] * row[i + 1]).sqrt()
                        };
                        (inner, outer)
                    })
                    .collect()
            })
            .collect();
        self.threshold = self
            .d
            .values
            .iter()
            .map(|d| cd.increasing_threshold(d))
            .fold(1.0, f64::min);
        Ok(())
    }

    /// Same schedule with every d_{i,j} multiplied by `factor`.
    pub fn with_d_scaled(&self, factor: f64) -> Result<Self> {
        let mut s = self.clone();
        for row in &mut s.d.values {
            row.iter_mut().for_each(|v| *v *= factor);
        }
        s.refresh()?;
        Ok(s)
    }

    pub fn cartan(&self) -> &CartanData {
        &self.config.cartan
    }

    pub fn rank(&self) -> usize {
        self.config.cartan.rank
    }

    pub fn eps(&self) -> f64 {
        self.config.eps
    }

    /// Theta_{ij} at chart point |y| (rescaled by delta_{i,j}), from the
    /// expansions of the projected bubbles inside the cutoff radius.
    pub fn theta_at(&self, i: usize, j: usize, y: f64) -> f64 {
        self.theta_at_point(i, j, [y, 0.0])
    }

    /// Theta_{ij} at a rescaled chart point y.
    pub fn theta_at_point(&self, i: usize, j: usize, y: [f64; 2]) -> f64 {
        let cd = self.cartan();
        let chart = &self.charts[j];
        let delta = &self.delta[j];
        let r = delta[i] * y[0].hypot(y[1]);
        let x = chart.from_chart(&[delta[i] * y[0], delta[i] * y[1]]);
        let h = self.greens[j].h(&x);
        let half = RHO_INTERIOR / 2.0;
        let ai = cd.alpha(i);
        let mut t = chart.conformal(r) - (2.0 * ai * ai).ln() - ai * delta[i].ln() + half * ai * h;
        let mut weight = ai;
        for ip in (0..cd.rank).filter(|&ip| ip != i) {
            let c = cd.coupling(i, ip);
            let ap = cd.alpha(ip);
            t += c * (-2.0 * ln_sum_pow(delta[ip], r, ap) + half * ap * h);
            weight += c * ap;
        }
        for jp in (0..self.centers.len()).filter(|&jp| jp != j) {
            t += half * weight * green_function(&self.config.surface, &x, &self.centers[jp]);
        }
        t + self.config.potentials[i].eval(&x).ln() + (2.0 * self.eps()).ln() - (ai - 2.0) * r.ln()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaProfile {
    pub i: usize,
    pub j: usize,
    /// Sample points |y| on the rescaled annulus.
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
    /// delta_{i,j}|y| + eps^{1/(2i)} with i counted from one.
    pub bound: Vec<f64>,
    pub sup_ratio: f64,
}

/// Theta_{ij} on `samples` log-spaced points of the annulus A_{ij} / delta_{i,j},
/// truncated at the cutoff radius.
pub fn theta(schedule: &Schedule, i: usize, j: usize, samples: usize) -> Result<ThetaProfile> {
    if i >= schedule.rank() || j >= schedule.centers.len() || samples < 2 {
        return Err(invalid("theta: index out of range or too few samples"));
    }
    let delta = schedule.delta[j][i];
    let (inner, outer) = schedule.annuli[j][i];
    let y_max = outer.min(schedule.charts[j].r0) / delta;
    let y_min = if inner > 0.0 {
        inner / delta
    } else {
        1e-3 * y_max.min(1.0)
    };
    if !(y_max > y_min) {
        return Err(invalid("theta: annulus is empty below the cutoff radius"));
    }
    let floor = schedule.eps().powf(1.0 / (2.0 * (i + 1) as f64));
    let (lo, hi) = (y_min.ln(), y_max.ln());
    let y: Vec<f64> = (0..samples)
        .map(|s| (lo + (hi - lo) * s as f64 / (samples - 1) as f64).exp())
        .collect();
    let theta: Vec<f64> = y.iter().map(|&v| schedule.theta_at(i, j, v)).collect();
    let bound: Vec<f64> = y.iter().map(|&v| delta * v + floor).collect();
    let sup_ratio = theta
        .iter()
        .zip(&bound)
        .map(|(t, b)| t.abs() / b)
        .fold(0.0, f64::max);
    Ok(ThetaProfile {
        i,
        j,
        y,
        theta,
        bound,
        sup_ratio,
    })
}

/// The approximate solution on a mesh.
#[derive(Debug)]
pub struct AnsatzFields {
    pub schedule: Schedule,
    pub space: MeridianSpace,
    /// Projected bubbles PU^i_j indexed [i][j].
    pub pu: Vec<Vec<ProjectedField>>,
    /// W_i at the nodes.
    pub w: Vec<Vec<f64>>,
    /// B^i = sum_j chi_j e^{-phi_j} |y|^{alpha_i - 2} e^{U^i_j}.
    pub bubbles: Vec<Vec<f64>>,
    /// V_i at the nodes.
    pub potentials: Vec<Vec<f64>>,
}

pub fn assemble_ansatz(config: &BlowupConfig) -> Result<AnsatzFields> {
    let sched = schedule(config)?;
    let n = config.cartan.rank;
    let m = config.poles.len();
    let scales: Vec<Vec<f64>> = sched.delta.clone();
    let space = MeridianSpace::new(
        &config.surface,
        &config.poles,
        &scales,
        config.r0,
        &config.grid,
        config.k,
    )?;
    let jobs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let solved = par_map(&jobs, |&(i, j)| {
        project_bubble(&space, j, config.cartan.alpha(i), sched.delta[j][i])
    });
    let mut pu: Vec<Vec<ProjectedField>> = (0..n).map(|_| Vec::with_capacity(m)).collect();
    for ((i, _), f) in jobs.iter().zip(solved) {
        pu[*i].push(f?);
    }
    let len = space.len();
    let bubbles: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut b = vec![0.0; len];
            for f in &pu[i] {
                let src = f
                    .source
                    .clone()
                    .unwrap_or_else(|| bubble_source(&space, f.pole_index, f.alpha, f.delta));
                b.iter_mut().zip(src).for_each(|(a, v)| *a += v);
            }
            b
        })
        .collect();
    let w = combine(&config.cartan, &pu, len);
    let potentials = config
        .potentials
        .iter()
        .map(|v| {
            space
                .nodes()
                .iter()
                .map(|&s| v.eval(&config.surface.point(s, 0.0)))
                .collect()
        })
        .collect();
    Ok(AnsatzFields {
        schedule: sched,
        space,
        pu,
        w,
        bubbles,
        potentials,
    })
}

/// W_i = sum_{i'} c_{ii'} sum_j PU^{i'}_j with c_{ii} = 1, c_{ii'} = a_{ii'}/2.
fn combine(cd: &CartanData, pu: &[Vec<ProjectedField>], len: usize) -> Vec<Vec<f64>> {
    (0..cd.rank)
        .map(|i| {
            let mut w = vec![0.0; len];
            for (ip, row) in pu.iter().enumerate() {
                let c = cd.coupling(i, ip);
                if c == 0.0 {
                    continue;
                }
                for f in row {
                    w.iter_mut().zip(&f.values).for_each(|(a, v)| *a += c * v);
                }
            }
            w
        })
        .collect()
}

impl AnsatzFields {
    pub fn rank(&self) -> usize {
        self.w.len()
    }

    pub fn eps(&self) -> f64 {
        self.schedule.eps()
    }

    pub fn disc(&self) -> &Discretization {
        &self.space.disc
    }

    /// Largest deviation of W from a fresh reassembly of its parts.
    pub fn assembly_defect(&self) -> f64 {
        let again = combine(&self.schedule.config.cartan, &self.pu, self.space.len());
        again
            .iter()
            .zip(&self.w)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn mean_defects(&self) -> Vec<f64> {
        self.w.iter().map(|w| self.disc().mean(w).abs()).collect()
    }

    /// eps V_i e^{u_i} at the nodes.
    pub fn density(&self, i: usize, u: &[f64]) -> Vec<f64> {
        let eps = self.eps();
        self.potentials[i]
            .iter()
            .zip(u)
            .map(|(v, x)| eps * v * x.exp())
            .collect()
    }

    /// Every nodal field emitted by the assembly.
    pub fn all_fields(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.w.iter().map(|v| v.as_slice()).collect();
        out.extend(self.bubbles.iter().map(|v| v.as_slice()));
        out.extend(self.pu.iter().flatten().map(|f| f.values.as_slice()));
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub eps: f64,
    pub p: f64,
    /// R^i at the nodes.
    #[serde(skip)]
    pub fields: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    /// sum_i ||R^i||_p
    pub total: f64,
    /// ||2 eps V_i e^{W_i} - B^i||_p per component.
    pub bubble_gap: Vec<f64>,
    pub means: Vec<f64>,
}

/// R^i = sum_{i'} a_{ii'} (eps V_{i'} e^{W_{i'}} - B^{i'}/2) - mean, using the
/// projection right-hand sides for -Lap W.
pub fn residual(ans: &AnsatzFields) -> ResidualReport {
    let cd = &ans.schedule.config.cartan;
    let p = ans.schedule.config.p;
    let disc = ans.disc();
    let n = ans.rank();
    let gaps: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            ans.density(i, &ans.w[i])
                .iter()
                .zip(&ans.bubbles[i])
                .map(|(e, b)| e - 0.5 * b)
                .collect()
        })
        .collect();
    let fields: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = vec![0.0; disc.len()];
            for (ip, g) in gaps.iter().enumerate() {
                let a = cd.a(i, ip) as f64;
                if a != 0.0 {
                    r.iter_mut().zip(g).for_each(|(x, v)| *x += a * v);
                }
            }
            disc.subtract_mean(&mut r);
            r
        })
        .collect();
    let norms: Vec<f64> = fields.iter().map(|f| disc.lp_norm(f, p)).collect();
    let bubble_gap = gaps.iter().map(|g| 2.0 * disc.lp_norm(g, p)).collect();
    let means = fields.iter().map(|f| disc.mean(f).abs()).collect();
    ResidualReport {
        eps: ans.eps(),
        p,
        total: norms.iter().sum(),
        fields,
        norms,
        bubble_gap,
        means,
    }
}

/// (int |f|^p dv_g)^{1/p}.
pub fn lp_norm(disc: &Discretization, f: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(invalid("lp_norm needs p >= 1"));
    }
    if f.len() != disc.len() {
        return Err(invalid("field length does not match the grid"));
    }
    Ok(disc.lp_norm(f, p))
}

/// Rate predicted for the residual, (2 - p) / (4 N p).
pub fn residual_rate(rank: usize, p: f64) -> f64 {
    (2.0 - p) / (4.0 * rank as f64 * p)
}

/// Rate predicted for the bubble gap, (2 - p) / (4 N).
pub fn bubble_gap_rate(rank: usize, p: f64) -> f64 {
    (2.0 - p) / (4.0 * rank as f64)
}
