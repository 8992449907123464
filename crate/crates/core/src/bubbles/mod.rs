//! Singular Liouville bubbles, their masses and projections onto mean-zero
//! Neumann fields.

mod project;

pub use project::{
    bubble_source, expansion_pu, expansion_pz, far_field, project_bubble, project_z, z_function,
    FieldKind, FieldMethod, ProjectedField,
};

use std::f64::consts::PI;

use crate::error::Result;
use crate::numerics::{ln_sum_pow, radial_disk, radial_plane, QuadOptions, QuadResult};

/// Mass of an interior blow-up point.
pub const RHO: f64 = crate::cartan::RHO_INTERIOR;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bubble {
    pub alpha: f64,
    pub tau: f64,
}

impl Bubble {
    pub fn new(alpha: f64, tau: f64) -> Self {
        Self { alpha, tau }
    }

    pub fn eval(&self, y: [f64; 2]) -> f64 {
        bubble_eval(self.alpha, self.tau, y[0].hypot(y[1]))
    }

    /// |y|^{alpha-2} e^{w} at radius r.
    pub fn density(&self, r: f64) -> f64 {
        bubble_density(self.alpha, self.tau, r)
    }
}

/// w_tau^alpha at radius r = |y|.
pub fn bubble_eval(alpha: f64, tau: f64, r: f64) -> f64 {
    (2.0 * alpha * alpha).ln() + alpha * tau.ln() - 2.0 * ln_sum_pow(tau, r, alpha)
}

pub fn bubble_density(alpha: f64, tau: f64, r: f64) -> f64 {
    if r == 0.0 {
        return if alpha == 2.0 {
            (bubble_eval(alpha, tau, 0.0)).exp()
        } else {
            0.0
        };
    }
    ((alpha - 2.0) * r.ln() + bubble_eval(alpha, tau, r)).exp()
}

/// Quadrature of |y|^{alpha-2} e^{w} over the plane, or over |y| < r.
pub fn bubble_mass(alpha: f64, tau: f64, truncation: Option<f64>) -> Result<QuadResult> {
    let opts = QuadOptions::default();
    let f = |r: f64| bubble_density(alpha, tau, r);
    match truncation {
        None => radial_plane(f, &[tau], &opts),
        Some(r) => radial_disk(f, r, &[tau], &opts),
    }
}

/// 4 pi alpha (1 - delta^alpha / (delta^alpha + r^alpha)).
pub fn truncated_mass(alpha: f64, delta: f64, r: f64) -> f64 {
    4.0 * PI * alpha * (1.0 - 1.0 / (1.0 + (r / delta).powf(alpha)))
}
