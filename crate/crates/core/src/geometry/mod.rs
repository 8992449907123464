//! Model surfaces of revolution, isothermal charts and Neumann Green functions.

mod chart;
mod green;
mod space;

pub use chart::{chart_at, cutoff, cutoff_band, cutoff_derivatives, Chart, ChartKind};
pub use green::{green, green_function, green_numeric, robin_value, GreenData, GreenMethod};
pub use space::{MeridianSpace, PoleTable};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    UnitDisk,
    Sphere,
    Hemisphere,
}

impl std::str::FromStr for Model {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "unitdisk" | "disk" => Ok(Model::UnitDisk),
            "sphere" => Ok(Model::Sphere),
            "hemisphere" => Ok(Model::Hemisphere),
            other => Err(invalid(format!("unsupported surface model {other:?}"))),
        }
    }
}

/// Fixed point of the rotation on the meridian: the start (north pole or disk
/// center) or the end (south pole) of the meridian interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pole {
    North,
    South,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub model: Model,
    /// Disk radius or sphere radius.
    pub scale: f64,
    pub area: f64,
    pub normalized: bool,
    pub has_boundary: bool,
}

pub fn make_surface(model: Model, normalized: bool) -> Surface {
    let (scale, area) = match (model, normalized) {
        (Model::UnitDisk, true) => (1.0 / PI.sqrt(), 1.0),
        (Model::UnitDisk, false) => (1.0, PI),
        (Model::Sphere, true) => (0.5 / PI.sqrt(), 1.0),
        (Model::Sphere, false) => (1.0, 4.0 * PI),
        (Model::Hemisphere, true) => (1.0 / (2.0 * PI).sqrt(), 1.0),
        (Model::Hemisphere, false) => (1.0, 2.0 * PI),
    };
    Surface {
        model,
        scale,
        area,
        normalized,
        has_boundary: model != Model::Sphere,
    }
}

impl Surface {
    pub fn analytic_area(&self) -> f64 {
        let r = self.scale;
        match self.model {
            Model::UnitDisk => PI * r * r,
            Model::Sphere => 4.0 * PI * r * r,
            Model::Hemisphere => 2.0 * PI * r * r,
        }
    }

    pub fn gauss_curvature(&self) -> f64 {
        match self.model {
            Model::UnitDisk => 0.0,
            _ => 1.0 / (self.scale * self.scale),
        }
    }

    /// Geodesic curvature of the boundary, if any.
    pub fn boundary_curvature(&self) -> Option<f64> {
        match self.model {
            Model::UnitDisk => Some(1.0 / self.scale),
            Model::Hemisphere => Some(0.0),
            Model::Sphere => None,
        }
    }

    pub fn meridian_length(&self) -> f64 {
        match self.model {
            Model::UnitDisk => self.scale,
            Model::Sphere => PI * self.scale,
            Model::Hemisphere => 0.5 * PI * self.scale,
        }
    }

    /// Distance to the rotation axis at meridian arclength s.
    pub fn rho(&self, s: f64) -> f64 {
        match self.model {
            Model::UnitDisk => s,
            _ => self.scale * (s / self.scale).sin(),
        }
    }

    pub fn height(&self, s: f64) -> f64 {
        match self.model {
            Model::UnitDisk => 0.0,
            _ => self.scale * (s / self.scale).cos(),
        }
    }

    /// Area of the cap {s' < s} around the start of the meridian.
    pub fn cap_area(&self, s: f64) -> f64 {
        match self.model {
            Model::UnitDisk => PI * s * s,
            _ => 2.0 * PI * self.scale * self.scale * (1.0 - (s / self.scale).cos()),
        }
    }

    pub fn point(&self, s: f64, theta: f64) -> Point {
        let r = self.rho(s);
        [r * theta.cos(), r * theta.sin(), self.height(s)]
    }

    /// Meridian arclength and angle of an embedded point.
    pub fn meridian_coords(&self, x: &Point) -> (f64, f64) {
        let rho = x[0].hypot(x[1]);
        let theta = x[1].atan2(x[0]);
        let s = match self.model {
            Model::UnitDisk => rho,
            _ => self.scale * rho.atan2(x[2]),
        };
        (s, theta)
    }

    pub fn contains(&self, x: &Point) -> bool {
        let tol = 1e-9 * self.scale;
        match self.model {
            Model::UnitDisk => x[2].abs() <= tol && x[0].hypot(x[1]) <= self.scale + tol,
            Model::Sphere => (norm(x) - self.scale).abs() <= tol,
            Model::Hemisphere => (norm(x) - self.scale).abs() <= tol && x[2] >= -tol,
        }
    }

    /// Geodesic distance to the boundary (infinite without boundary).
    pub fn distance_to_boundary(&self, x: &Point) -> f64 {
        let (s, _) = self.meridian_coords(x);
        match self.model {
            Model::Sphere => f64::INFINITY,
            _ => self.meridian_length() - s,
        }
    }

    pub fn pole_point(&self, pole: Pole) -> Point {
        match pole {
            Pole::North => self.point(0.0, 0.0),
            Pole::South => self.point(self.meridian_length(), 0.0),
        }
    }

    /// Which fixed point of the rotation `x` is, if any.
    pub fn pole_of(&self, x: &Point) -> Option<Pole> {
        symmetric_centers(self, 2).into_iter().find_map(|(p, c)| {
            if dist(&c, x) <= 1e-9 * self.scale {
                Some(p)
            } else {
                None
            }
        })
    }

    /// Meridian distance of node s from a pole.
    pub fn pole_distance(&self, pole: Pole, s: f64) -> f64 {
        match pole {
            Pole::North => s,
            Pole::South => self.meridian_length() - s,
        }
    }

    /// Chart radius |y| of meridian distance t from a pole.
    pub fn chart_radius_of_distance(&self, t: f64) -> f64 {
        match self.model {
            Model::UnitDisk => t,
            _ => 2.0 * self.scale * (t / (2.0 * self.scale)).tan(),
        }
    }

    /// Conformal factor of the pole chart at meridian distance t.
    pub fn conformal_of_distance(&self, t: f64) -> f64 {
        match self.model {
            Model::UnitDisk => 0.0,
            _ => 4.0 * (t / (2.0 * self.scale)).cos().ln(),
        }
    }

    /// Meridian distance corresponding to chart radius r.
    pub fn distance_of_chart_radius(&self, r: f64) -> f64 {
        match self.model {
            Model::UnitDisk => r,
            _ => 2.0 * self.scale * (r / (2.0 * self.scale)).atan(),
        }
    }
}

/// Fixed points of the rotation by 2 pi / k about the symmetry axis.
pub fn symmetric_centers(surface: &Surface, k: u32) -> Vec<(Pole, Point)> {
    let _ = k;
    match surface.model {
        Model::UnitDisk | Model::Hemisphere => vec![(Pole::North, surface.pole_point(Pole::North))],
        Model::Sphere => vec![
            (Pole::North, surface.pole_point(Pole::North)),
            (Pole::South, surface.pole_point(Pole::South)),
        ],
    }
}

/// Rotation by 2 pi / k about the z axis.
pub fn rotate(x: &Point, k: u32) -> Point {
    let t = 2.0 * PI / k.max(1) as f64;
    let (s, c) = t.sin_cos();
    [c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]]
}

pub(crate) fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

pub(crate) fn dist(x: &Point, y: &Point) -> f64 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn areas_and_curvature() {
        for m in [Model::UnitDisk, Model::Sphere, Model::Hemisphere] {
            let s = make_surface(m, true);
            assert!((s.area - 1.0).abs() < 1e-12);
            assert!((s.analytic_area() - 1.0).abs() < 1e-12);
            assert!((s.cap_area(s.meridian_length()) - 1.0).abs() < 1e-12);
        }
        let sp = make_surface(Model::Sphere, false);
        assert!((sp.area - 4.0 * PI).abs() < 1e-12);
        assert!(!sp.has_boundary);
        let h = make_surface(Model::Hemisphere, false);
        assert!(h.has_boundary);
        assert_eq!(h.boundary_curvature(), Some(0.0));
        let d = make_surface(Model::UnitDisk, false);
        assert_eq!(d.gauss_curvature(), 0.0);
        assert_eq!(d.boundary_curvature(), Some(1.0));
        assert!("torus".parse::<Model>().is_err());
        assert_eq!("hemisphere".parse::<Model>().unwrap(), Model::Hemisphere);
    }

    #[test]
    fn symmetric_center_sets() {
        let d = make_surface(Model::UnitDisk, true);
        assert_eq!(symmetric_centers(&d, 3).len(), 1);
        let s = make_surface(Model::Sphere, true);
        let c = symmetric_centers(&s, 5);
        assert_eq!(c.len(), 2);
        assert!((c[0].1[2] + c[1].1[2]).abs() < 1e-15);
        let h = make_surface(Model::Hemisphere, true);
        let c = symmetric_centers(&h, 3);
        assert_eq!(c.len(), 1);
        assert!(h.distance_to_boundary(&c[0].1) > 0.0);
        for k in 1..7 {
            for (_, p) in symmetric_centers(&s, k) {
                assert!(dist(&rotate(&p, k), &p) < 1e-15);
            }
        }
    }

    #[test]
    fn meridian_round_trip() {
        let s = make_surface(Model::Sphere, true);
        for &t in &[0.0, 0.1, 0.5, 1.0] {
            let sv = t * s.meridian_length();
            let p = s.point(sv, 0.7);
            assert!(s.contains(&p));
            let (s2, _) = s.meridian_coords(&p);
            assert!((s2 - sv).abs() < 1e-14);
        }
    }
}
