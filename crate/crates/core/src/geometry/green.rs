use std::f64::consts::PI;

use super::chart::{chart_at, cutoff, cutoff_band, cutoff_derivatives, Chart};
use super::{dist, Model, Point, Pole, Surface};
use crate::error::{invalid, Result};
use crate::numerics::{
    quad, Cluster, Discretization, Domain, End, GridSpec, PoissonSolver, QuadOptions, RadialGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreenMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone)]
struct NumericPart {
    pole: Pole,
    grid: RadialGrid,
    values: Vec<f64>,
}

/// Neumann Green function G(., xi) with its regular part relative to `chart`.
#[derive(Debug, Clone)]
pub struct GreenData {
    pub surface: Surface,
    pub xi: Point,
    pub chart: Chart,
    pub method: GreenMethod,
    pub robin: f64,
    numeric: Option<NumericPart>,
}

fn sphere_constant(a: f64) -> f64 {
    ((2.0 * a).ln() - 0.5) / (2.0 * PI)
}

fn sphere_green(a: f64, x: &Point, xi: &Point) -> f64 {
    -dist(x, xi).ln() / (2.0 * PI) + sphere_constant(a)
}

/// Closed-form Neumann Green function with zero mean.
pub fn green_function(surface: &Surface, x: &Point, xi: &Point) -> f64 {
    match surface.model {
        Model::UnitDisk => {
            let r = surface.scale;
            let (x1, x2) = (x[0] / r, x[1] / r);
            let (z1, z2) = (xi[0] / r, xi[1] / r);
            let d = (x1 - z1).hypot(x2 - z2);
            // 1 - x conj(xi)
            let re = 1.0 - (x1 * z1 + x2 * z2);
            let im = -(x2 * z1 - x1 * z2);
            let refl = re.hypot(im);
            -(d.ln() + refl.ln()) / (2.0 * PI)
                + (x1 * x1 + x2 * x2 + z1 * z1 + z2 * z2) / (4.0 * PI)
                - 3.0 / (8.0 * PI)
        }
        Model::Sphere => sphere_green(surface.scale, x, xi),
        Model::Hemisphere => {
            let mirror = [xi[0], xi[1], -xi[2]];
            sphere_green(surface.scale, x, xi) + sphere_green(surface.scale, x, &mirror)
        }
    }
}

/// Closed-form Robin value H(xi, xi) for the chart returned by `chart_at`.
pub fn robin_value(surface: &Surface, xi: &Point) -> f64 {
    match surface.model {
        Model::UnitDisk => {
            let r = surface.scale;
            let q = (xi[0] * xi[0] + xi[1] * xi[1]) / (r * r);
            (r.ln() - (1.0 - q).ln()) / (2.0 * PI) + q / (2.0 * PI) - 3.0 / (8.0 * PI)
        }
        Model::Sphere => sphere_constant(surface.scale),
        Model::Hemisphere => {
            let mirror = [xi[0], xi[1], -xi[2]];
            sphere_constant(surface.scale) + sphere_green(surface.scale, xi, &mirror)
        }
    }
}

pub fn green(surface: &Surface, xi: &Point, chart: Option<Chart>) -> Result<GreenData> {
    let chart = match chart {
        Some(c) => c,
        None => chart_at(surface, xi)?,
    };
    Ok(GreenData {
        surface: *surface,
        xi: *xi,
        chart,
        method: GreenMethod::ClosedForm,
        robin: robin_value(surface, xi),
        numeric: None,
    })
}

/// Regular part for a pole-centered source by solving its defining Neumann
/// problem on a graded meridian grid.
pub fn green_numeric(
    surface: &Surface,
    pole: Pole,
    r0: Option<f64>,
    spec: &GridSpec,
) -> Result<GreenData> {
    if surface.model != Model::Sphere && pole == Pole::South {
        return Err(invalid("south pole is only available on the sphere"));
    }
    let xi = surface.pole_point(pole);
    let mut chart = chart_at(surface, &xi)?;
    if let Some(r0) = r0 {
        chart = chart.with_r0(r0)?;
    }
    let len = surface.meridian_length();
    let t0 = surface.distance_of_chart_radius(chart.r0);
    let t1 = surface.distance_of_chart_radius(2.0 * chart.r0);
    let end = if pole == Pole::North {
        End::Start
    } else {
        End::End
    };
    let to_s = |t: f64| if pole == Pole::North { t } else { len - t };
    let fixed: Vec<f64> = cutoff_band(chart.r0)
        .into_iter()
        .map(|r| to_s(surface.distance_of_chart_radius(r)))
        .collect();
    let grid = RadialGrid::graded(
        len,
        &[Cluster {
            end,
            scales: vec![t0],
        }],
        &fixed,
        spec,
        1,
    )?;
    grid.check_resolution(8)?;
    let disc = Discretization::new(grid, |s| surface.rho(s));
    let r0v = chart.r0;
    let src: Vec<f64> = disc
        .grid
        .nodes
        .iter()
        .map(|&s| {
            let t = surface.pole_distance(pole, s);
            let r = surface.chart_radius_of_distance(t);
            let (_, c1, c2) = cutoff_derivatives(r / r0v);
            if c1 == 0.0 && c2 == 0.0 {
                return 0.0;
            }
            let lap_chi = c2 / (r0v * r0v) + c1 / (r0v * r);
            let grad_dot = (c1 / r0v) * (-1.0 / r);
            let phi = surface.conformal_of_distance(t);
            (-phi).exp() * (lap_chi * (1.0 / r).ln() + 2.0 * grad_dot) / (2.0 * PI)
        })
        .collect();
    let solver = PoissonSolver::new(&disc)?;
    let mut h = solver.solve(&disc, &src);
    let integral = quad(
        |t| {
            let r = surface.chart_radius_of_distance(t);
            if r <= 0.0 {
                return 0.0;
            }
            cutoff(r / r0v) * (1.0 / r).ln() * 2.0 * PI * surface.rho(t)
        },
        &Domain::Interval {
            a: 0.0,
            b: t1,
            scales: vec![t0],
        },
        &QuadOptions::default(),
    )?;
    let c = -integral.value / (2.0 * PI) / surface.area;
    h.iter_mut().for_each(|v| *v += c);
    let robin = h[if pole == Pole::North { 0 } else { h.len() - 1 }];
    Ok(GreenData {
        surface: *surface,
        xi,
        chart,
        method: GreenMethod::Numeric,
        robin,
        numeric: Some(NumericPart {
            pole,
            grid: disc.grid,
            values: h,
        }),
    })
}

impl GreenData {
    /// Singular part (1/2pi) chi ln(1/|y|).
    fn singular(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return f64::INFINITY;
        }
        self.chart.chi(r) * (1.0 / r).ln() / (2.0 * PI)
    }

    pub fn g(&self, x: &Point) -> f64 {
        match &self.numeric {
            None => green_function(&self.surface, x, &self.xi),
            Some(_) => self.h(x) + self.singular(self.chart.radius_of(x)),
        }
    }

    pub fn h(&self, x: &Point) -> f64 {
        match &self.numeric {
            None => {
                let r = self.chart.radius_of(x);
                if r <= 1e-300 {
                    return self.robin;
                }
                green_function(&self.surface, x, &self.xi) - self.singular(r)
            }
            Some(n) => {
                let (s, _) = self.surface.meridian_coords(x);
                let _ = n.pole;
                n.grid.interpolate(&n.values, s)
            }
        }
    }

    /// Regular part at chart radius r for a pole-centered source (any direction).
    pub fn h_radial(&self, r: f64) -> f64 {
        let x = self.chart.from_chart(&[r, 0.0]);
        self.h(&x)
    }
}
