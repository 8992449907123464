//! Meridian discretization of a model surface with chart data tabulated at
//! the nodes for each blow-up pole.

use std::f64::consts::PI;

use super::chart::{chart_at, cutoff_band, Chart};
use super::green::{green, GreenData};
use super::{rotate, Point, Pole, Surface};
use crate::error::{invalid, Error, Result};
use crate::numerics::{Cluster, Discretization, End, GridSpec, PoissonSolver, RadialGrid};

/// Chart quantities of one pole sampled at the grid nodes.
#[derive(Debug, Clone)]
pub struct PoleTable {
    pub pole: Pole,
    pub chart: Chart,
    pub green: GreenData,
    /// |y| at each node.
    pub r: Vec<f64>,
    /// Conformal factor at each node.
    pub phi: Vec<f64>,
    /// chi(|y| / r0) at each node.
    pub chi: Vec<f64>,
    /// G(x, xi) at each node (infinite at the pole node).
    pub g: Vec<f64>,
    /// Regular part H(x, xi) at each node.
    pub h: Vec<f64>,
}

pub struct MeridianSpace {
    pub surface: Surface,
    pub disc: Discretization,
    pub solver: PoissonSolver,
    pub poles: Vec<PoleTable>,
    pub k: u32,
}

impl std::fmt::Debug for MeridianSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeridianSpace")
            .field("surface", &self.surface)
            .field("nodes", &self.disc.len())
            .field(
                "poles",
                &self.poles.iter().map(|p| p.pole).collect::<Vec<_>>(),
            )
            .field("k", &self.k)
            .finish()
    }
}

impl MeridianSpace {
    /// `scales[j]` are chart-radius concentration scales at `poles[j]`.
    pub fn new(
        surface: &Surface,
        poles: &[Pole],
        scales: &[Vec<f64>],
        r0: Option<f64>,
        spec: &GridSpec,
        k: u32,
    ) -> Result<Self> {
        if poles.is_empty() || poles.len() != scales.len() {
            return Err(invalid("need one scale list per pole"));
        }
        let len = surface.meridian_length();
        let mut clusters = vec![];
        let mut fixed = vec![];
        let mut charts = vec![];
        for (pole, sc) in poles.iter().zip(scales) {
            let xi = surface.pole_point(*pole);
            if surface.pole_of(&xi) != Some(*pole)
                || (*pole == Pole::South && surface.model != super::Model::Sphere)
            {
                return Err(invalid(format!(
                    "pole {pole:?} not available on {:?}",
                    surface.model
                )));
            }
            let mut chart = chart_at(surface, &xi)?;
            if let Some(r0) = r0 {
                chart = chart.with_r0(r0)?;
            }
            let end = if *pole == Pole::North {
                End::Start
            } else {
                End::End
            };
            let to_s = |t: f64| if *pole == Pole::North { t } else { len - t };
            let mut dist_scales: Vec<f64> = sc
                .iter()
                .map(|&r| surface.distance_of_chart_radius(r))
                .collect();
            dist_scales.push(surface.distance_of_chart_radius(chart.r0));
            clusters.push(Cluster {
                end,
                scales: dist_scales,
            });
            fixed.extend(
                cutoff_band(chart.r0)
                    .into_iter()
                    .map(|r| to_s(surface.distance_of_chart_radius(r))),
            );
            charts.push(chart);
        }
        let grid = RadialGrid::graded(len, &clusters, &fixed, spec, k)?;
        grid.check_resolution(8)?;
        let disc = Discretization::new(grid, |s| surface.rho(s));
        let solver = PoissonSolver::new(&disc)?;
        let poles = poles
            .iter()
            .zip(charts)
            .map(|(&pole, chart)| {
                let gd = green(surface, &chart.center, Some(chart))?;
                let n = disc.len();
                let mut t = PoleTable {
                    pole,
                    chart,
                    green: gd,
                    r: vec![0.0; n],
                    phi: vec![0.0; n],
                    chi: vec![0.0; n],
                    g: vec![0.0; n],
                    h: vec![0.0; n],
                };
                for (i, &s) in disc.grid.nodes.iter().enumerate() {
                    let d = surface.pole_distance(pole, s);
                    let r = surface.chart_radius_of_distance(d);
                    t.r[i] = r;
                    t.phi[i] = surface.conformal_of_distance(d);
                    t.chi[i] = chart.chi(r);
                    if r > 0.0 {
                        let x = surface.point(s, 0.0);
                        t.g[i] = t.green.g(&x);
                        t.h[i] = t.g[i] - t.chi[i] * (1.0 / r).ln() / (2.0 * PI);
                    } else {
                        t.g[i] = f64::INFINITY;
                        t.h[i] = t.green.robin;
                    }
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            surface: *surface,
            disc,
            solver,
            poles,
            k,
        })
    }

    pub fn len(&self) -> usize {
        self.disc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disc.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.disc.grid.nodes
    }

    /// Mean-zero Neumann solve of -Lap u = f - mean(f).
    pub fn solve(&self, f: &[f64]) -> Vec<f64> {
        self.solver.solve(&self.disc, f)
    }

    pub fn energy_norm(&self, u: &[f64]) -> f64 {
        self.solver.energy_norm(u)
    }

    /// Check that a chart-radius scale at pole `j` is resolved.
    pub fn check_scale(&self, j: usize, scale: f64) -> Result<()> {
        let end = if self.poles[j].pole == Pole::North {
            End::Start
        } else {
            End::End
        };
        let d = self.surface.distance_of_chart_radius(scale);
        let n = self.disc.grid.nodes_per_decade(d, end);
        if n < 8 {
            return Err(Error::Unresolved {
                scale,
                nodes: n,
                required: 8,
            });
        }
        Ok(())
    }

    /// Evaluate a nodal field at an embedded point.
    pub fn eval(&self, values: &[f64], x: &Point) -> f64 {
        let (s, _) = self.surface.meridian_coords(x);
        self.disc.grid.interpolate(values, s)
    }

    /// Sample points used for rotation checks: every node meridian position
    /// at a few generic angles, excluding the rotation axis.
    pub fn sample_points(&self) -> Vec<Point> {
        let mut pts = vec![];
        for (i, &s) in self.nodes().iter().enumerate() {
            if self.disc.rho[i] <= 0.0 {
                continue;
            }
            for th in [0.3, 1.7, 4.1] {
                pts.push(self.surface.point(s, th));
            }
        }
        pts
    }

    /// max |f(R x) - f(x)| over the sample points for the rotation by 2 pi / k.
    pub fn symmetry_defect(&self, values: &[f64]) -> f64 {
        self.sample_points()
            .iter()
            .map(|x| (self.eval(values, &rotate(x, self.k)) - self.eval(values, x)).abs())
            .fold(0.0, f64::max)
    }
}
