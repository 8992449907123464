use super::{norm, Model, Point, Surface};
use crate::error::{invalid, Result};

/// Ratio r_xi / r_0 used when no cutoff radius is configured.
pub const DEFAULT_R0_DIVISOR: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartKind {
    /// Translation chart of the flat disk.
    Flat,
    /// Stereographic projection from the antipode of the center, scaled so
    /// that the conformal factor vanishes at the center.
    Stereographic {
        a: f64,
        e1: Point,
        e2: Point,
        n: Point,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub center: Point,
    pub kind: ChartKind,
    /// Radius of the chart ball in chart coordinates.
    pub radius: f64,
    /// Cutoff radius (chi = 1 on |y| < r0, 0 on |y| > 2 r0).
    pub r0: f64,
}

fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn chart_at(surface: &Surface, xi: &Point) -> Result<Chart> {
    if !surface.contains(xi) {
        return Err(invalid(format!("point {xi:?} is not on the surface")));
    }
    let dist_b = surface.distance_to_boundary(xi);
    if dist_b <= 1e-3 * surface.scale {
        return Err(invalid("chart center on or too near the boundary"));
    }
    let (kind, radius) = match surface.model {
        Model::UnitDisk => (ChartKind::Flat, dist_b),
        Model::Sphere | Model::Hemisphere => {
            let a = surface.scale;
            let n = [xi[0] / a, xi[1] / a, xi[2] / a];
            let helper = if n[0].abs() < 0.9 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            };
            let t = dot(&helper, &n);
            let mut e1 = [
                helper[0] - t * n[0],
                helper[1] - t * n[1],
                helper[2] - t * n[2],
            ];
            let l = norm(&e1);
            e1.iter_mut().for_each(|v| *v /= l);
            let e2 = cross(&n, &e1);
            let radius = if surface.model == Model::Sphere {
                2.0 * a
            } else {
                surface.chart_radius_of_distance(dist_b)
            };
            (ChartKind::Stereographic { a, e1, e2, n }, radius)
        }
    };
    Ok(Chart {
        center: *xi,
        kind,
        radius,
        r0: radius / DEFAULT_R0_DIVISOR,
    })
}

impl Chart {
    pub fn with_r0(mut self, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 < self.radius / 4.0) {
            return Err(invalid(format!(
                "cutoff radius {r0} must lie in (0, r_xi/4) with r_xi = {}",
                self.radius
            )));
        }
        self.r0 = r0;
        Ok(self)
    }

    pub fn to_chart(&self, x: &Point) -> [f64; 2] {
        match self.kind {
            ChartKind::Flat => [x[0] - self.center[0], x[1] - self.center[1]],
            ChartKind::Stereographic { a, e1, e2, n } => {
                let h = dot(x, &n);
                let f = 2.0 * a / (a + h);
                [f * dot(x, &e1), f * dot(x, &e2)]
            }
        }
    }

    pub fn from_chart(&self, y: &[f64; 2]) -> Point {
        match self.kind {
            ChartKind::Flat => [self.center[0] + y[0], self.center[1] + y[1], 0.0],
            ChartKind::Stereographic { a, e1, e2, n } => {
                let r = y[0].hypot(y[1]);
                let theta = 2.0 * (r / (2.0 * a)).atan();
                let (st, ct) = theta.sin_cos();
                let (u1, u2) = if r > 0.0 {
                    (y[0] / r, y[1] / r)
                } else {
                    (0.0, 0.0)
                };
                let mut x = [0.0; 3];
                for d in 0..3 {
                    x[d] = a * (ct * n[d] + st * (u1 * e1[d] + u2 * e2[d]));
                }
                x
            }
        }
    }

    /// |y_xi(x)|.
    pub fn radius_of(&self, x: &Point) -> f64 {
        let y = self.to_chart(x);
        y[0].hypot(y[1])
    }

    /// Conformal factor at chart radius r (metric e^phi |dy|^2).
    pub fn conformal(&self, r: f64) -> f64 {
        match self.kind {
            ChartKind::Flat => 0.0,
            ChartKind::Stereographic { a, .. } => -2.0 * (r * r / (4.0 * a * a)).ln_1p(),
        }
    }

    /// chi(|y| / r0).
    pub fn chi(&self, r: f64) -> f64 {
        cutoff(r / self.r0)
    }
}

/// Chart radii subdividing the cutoff transition band [r0, 2 r0]; grids put
/// element breaks there so the steep part of chi is resolved.
pub fn cutoff_band(r0: f64) -> Vec<f64> {
    (0..=16).map(|k| r0 * (1.0 + k as f64 / 16.0)).collect()
}

fn psi(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let v = (-1.0 / x).exp();
    let x2 = x * x;
    (v, v / x2, v * (1.0 / (x2 * x2) - 2.0 / (x2 * x)))
}

/// Smooth radial cutoff: 1 on [0, 1], 0 on [2, inf), C^inf in between.
pub fn cutoff(t: f64) -> f64 {
    cutoff_derivatives(t).0
}

/// (chi, chi', chi'') at t.
pub fn cutoff_derivatives(t: f64) -> (f64, f64, f64) {
    if t <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if t >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let (a, da, dda) = psi(2.0 - t);
    let (b, db, ddb) = psi(t - 1.0);
    // d/dt of psi(2 - t) flips the sign of the first derivative
    let (a1, a2) = (-da, dda);
    let (b1, b2) = (db, ddb);
    let s = a + b;
    let s1 = a1 + b1;
    let num1 = a1 * b - a * b1;
    let chi = a / s;
    let chi1 = num1 / (s * s);
    let chi2 = (a2 * b - a * b2) / (s * s) - 2.0 * num1 * s1 / (s * s * s);
    (chi, chi1, chi2)
}

#[cfg(test)]
mod tests {
    use super::super::{make_surface, Pole};
    use super::*;

    #[test]
    fn cutoff_profile_and_derivatives() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(2.5), 0.0);
        assert!((cutoff(1.5) - 0.5).abs() < 1e-15);
        for &t in &[1.1, 1.3, 1.5, 1.77, 1.95] {
            let h = 1e-5;
            let (_, d1, d2) = cutoff_derivatives(t);
            let fd1 = (cutoff(t + h) - cutoff(t - h)) / (2.0 * h);
            let fd2 = (cutoff(t + h) - 2.0 * cutoff(t) + cutoff(t - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-8, "{t} {d1} {fd1}");
            assert!((d2 - fd2).abs() < 1e-4, "{t} {d2} {fd2}");
        }
    }

    #[test]
    fn disk_center_chart_is_identity() {
        let s = make_surface(Model::UnitDisk, true);
        let c = chart_at(&s, &s.pole_point(Pole::North)).unwrap();
        let y = c.to_chart(&[0.1, -0.2, 0.0]);
        assert_eq!(y, [0.1, -0.2]);
        assert_eq!(c.conformal(0.3), 0.0);
        assert!((c.radius - s.scale).abs() < 1e-15);
    }

    #[test]
    fn stereographic_round_trip_and_normalization() {
        let s = make_surface(Model::Sphere, true);
        let xi = s.point(0.4 * s.scale, 1.1);
        let c = chart_at(&s, &xi).unwrap();
        let y0 = c.to_chart(&xi);
        assert!(y0[0].abs() < 1e-15 && y0[1].abs() < 1e-15);
        assert_eq!(c.conformal(0.0), 0.0);
        let h = 1e-6;
        assert!(((c.conformal(h) - c.conformal(0.0)) / h).abs() < 1e-5);
        let y = [0.05, -0.12];
        let x = c.from_chart(&y);
        assert!(s.contains(&x));
        let back = c.to_chart(&x);
        assert!((back[0] - y[0]).abs() < 1e-14 && (back[1] - y[1]).abs() < 1e-14);
    }

    #[test]
    fn boundary_points_rejected() {
        let d = make_surface(Model::UnitDisk, true);
        assert!(chart_at(&d, &[d.scale, 0.0, 0.0]).is_err());
        let h = make_surface(Model::Hemisphere, true);
        assert!(chart_at(&h, &[h.scale, 0.0, 0.0]).is_err());
        let c = chart_at(&h, &h.pole_point(Pole::North)).unwrap();
        assert!(c.with_r0(c.radius / 3.0).is_err());
        assert!(c.with_r0(c.radius / 5.0).is_ok());
    }

    /// Five-point Laplacian of the conformal factor against -2 K e^phi.
    fn gauss_residual(c: &Chart, k: f64, h: f64) -> f64 {
        let n = (0.2 / h).round() as i64;
        let phi = |x: f64, y: f64| c.conformal(x.hypot(y));
        let mut worst: f64 = 0.0;
        for i in -n..=n {
            for j in -n..=n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                let lap = (phi(x + h, y) + phi(x - h, y) + phi(x, y + h) + phi(x, y - h)
                    - 4.0 * phi(x, y))
                    / (h * h);
                worst = worst.max((-lap - 2.0 * k * phi(x, y).exp()).abs());
            }
        }
        worst
    }

    #[test]
    fn gauss_equation_residual_converges() {
        let s = make_surface(Model::Sphere, true);
        let c = chart_at(&s, &s.pole_point(Pole::North)).unwrap();
        let hs = [0.02, 0.01, 0.005];
        let pairs: Vec<(f64, f64)> = hs
            .iter()
            .map(|&h| (h, gauss_residual(&c, s.gauss_curvature(), h)))
            .collect();
        let fit = crate::numerics::loglog_rate_fit(&pairs).unwrap();
        assert!(fit.slope >= 1.8, "order {}", fit.slope);
    }
}
