use nalgebra::DVector;

use super::{bubble_eval, RHO};
use crate::error::{invalid, Result};
use crate::geometry::MeridianSpace;
use crate::numerics::ln_sum_pow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMethod {
    PdeSolve,
    Expansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Bubble,
    Kernel,
}

/// A nodal field on a meridian space produced from one bubble at pole `pole_index`.
#[derive(Debug, Clone)]
pub struct ProjectedField {
    pub kind: FieldKind,
    pub method: FieldMethod,
    pub alpha: f64,
    pub delta: f64,
    pub pole_index: usize,
    pub values: Vec<f64>,
    /// Right-hand side before mean removal (PDE solves only).
    pub source: Option<Vec<f64>>,
    /// Relative algebraic residual of the discrete solve.
    pub residual: f64,
}

/// chi e^{-phi} |y|^{alpha-2} e^{U} at the nodes, U the bubble of scale delta.
pub fn bubble_source(space: &MeridianSpace, j: usize, alpha: f64, delta: f64) -> Vec<f64> {
    let t = &space.poles[j];
    (0..space.len())
        .map(|i| {
            if t.chi[i] == 0.0 {
                return 0.0;
            }
            let r = t.r[i];
            let w = bubble_eval(alpha, delta, r);
            let radial = if r == 0.0 {
                if alpha == 2.0 {
                    0.0
                } else {
                    return 0.0;
                }
            } else {
                (alpha - 2.0) * r.ln()
            };
            t.chi[i] * (radial + w - t.phi[i]).exp()
        })
        .collect()
}

/// z(|y|/delta) = (delta^alpha - r^alpha) / (delta^alpha + r^alpha).
pub fn z_function(alpha: f64, delta: f64, r: f64) -> f64 {
    let t = (alpha * (r.ln() - delta.ln())).exp();
    if t.is_infinite() {
        return -1.0;
    }
    (1.0 - t) / (1.0 + t)
}

fn check(space: &MeridianSpace, j: usize, alpha: f64, delta: f64) -> Result<()> {
    if j >= space.poles.len() {
        return Err(invalid(format!("no pole with index {j}")));
    }
    if !(alpha >= 2.0) || !(delta > 0.0) {
        return Err(invalid("need alpha >= 2 and delta > 0"));
    }
    let r0 = space.poles[j].chart.r0;
    if delta > 0.5 * r0 {
        return Err(invalid(format!(
            "scale {delta} not small against r0 = {r0}"
        )));
    }
    space.check_scale(j, delta)
}

fn solve_with_residual(space: &MeridianSpace, source: &[f64]) -> (Vec<f64>, f64) {
    let u = space.solve(source);
    let mean = space.disc.mean(source);
    let load = DVector::from_iterator(
        space.len(),
        source
            .iter()
            .zip(&space.disc.area)
            .map(|(f, w)| (f - mean) * w),
    );
    let ku = &space.solver.stiffness * DVector::from_column_slice(&u);
    let res = (ku - &load).amax() / load.amax().max(1e-300);
    (u, res)
}

/// Numeric PU: -Lap_g PU = source - mean, Neumann, zero mean.
pub fn project_bubble(
    space: &MeridianSpace,
    j: usize,
    alpha: f64,
    delta: f64,
) -> Result<ProjectedField> {
    check(space, j, alpha, delta)?;
    let source = bubble_source(space, j, alpha, delta);
    let (values, residual) = solve_with_residual(space, &source);
    Ok(ProjectedField {
        kind: FieldKind::Bubble,
        method: FieldMethod::PdeSolve,
        alpha,
        delta,
        pole_index: j,
        values,
        source: Some(source),
        residual,
    })
}

/// Numeric PZ with source chi e^{-phi} |y|^{alpha-2} e^{U} Z.
pub fn project_z(
    space: &MeridianSpace,
    j: usize,
    alpha: f64,
    delta: f64,
) -> Result<ProjectedField> {
    check(space, j, alpha, delta)?;
    let t = &space.poles[j];
    let source: Vec<f64> = bubble_source(space, j, alpha, delta)
        .iter()
        .enumerate()
        .map(|(i, b)| b * z_function(alpha, delta, t.r[i]))
        .collect();
    let (values, residual) = solve_with_residual(space, &source);
    Ok(ProjectedField {
        kind: FieldKind::Kernel,
        method: FieldMethod::PdeSolve,
        alpha,
        delta,
        pole_index: j,
        values,
        source: Some(source),
        residual,
    })
}

/// chi (U - log(2 alpha^2 delta^alpha)) + (alpha rho / 2) H.
pub fn expansion_pu(space: &MeridianSpace, j: usize, alpha: f64, delta: f64) -> ProjectedField {
    let t = &space.poles[j];
    let values = (0..space.len())
        .map(|i| {
            let local = if t.chi[i] > 0.0 {
                -2.0 * t.chi[i] * ln_sum_pow(delta, t.r[i], alpha)
            } else {
                0.0
            };
            local + alpha * RHO / 2.0 * t.h[i]
        })
        .collect();
    ProjectedField {
        kind: FieldKind::Bubble,
        method: FieldMethod::Expansion,
        alpha,
        delta,
        pole_index: j,
        values,
        source: None,
        residual: 0.0,
    }
}

/// Z + 1 = 2 delta^alpha / (delta^alpha + |y|^alpha).
pub fn expansion_pz(space: &MeridianSpace, j: usize, alpha: f64, delta: f64) -> ProjectedField {
    let t = &space.poles[j];
    let values =
        t.r.iter()
            .map(|&r| z_function(alpha, delta, r) + 1.0)
            .collect();
    ProjectedField {
        kind: FieldKind::Kernel,
        method: FieldMethod::Expansion,
        alpha,
        delta,
        pole_index: j,
        values,
        source: None,
        residual: 0.0,
    }
}

impl ProjectedField {
    pub fn sup_difference(&self, other: &ProjectedField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Far-field limit of PU: (alpha rho / 2) G(x, xi).
pub fn far_field(space: &MeridianSpace, j: usize, alpha: f64, i: usize) -> f64 {
    alpha * RHO / 2.0 * space.poles[j].g[i]
}
