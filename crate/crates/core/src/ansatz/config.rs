use serde::{Deserialize, Serialize};

use crate::cartan::CartanData;
use crate::error::{invalid, Result};
use crate::geometry::{rotate, symmetric_centers, Point, Pole, Surface};
use crate::numerics::GridSpec;

/// Rotation-invariant potential V(x) = c0 + cz z + crho2 (x^2 + y^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Potential {
    pub c0: f64,
    #[serde(default)]
    pub cz: f64,
    #[serde(default)]
    pub crho2: f64,
}

impl Potential {
    pub fn constant(c: f64) -> Self {
        Self {
            c0: c,
            cz: 0.0,
            crho2: 0.0,
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.c0 + self.cz * x[2] + self.crho2 * (x[0] * x[0] + x[1] * x[1])
    }
}

#[derive(Debug, Clone)]
pub struct BlowupConfig {
    pub cartan: CartanData,
    pub surface: Surface,
    pub poles: Vec<Pole>,
    pub k: u32,
    pub potentials: Vec<Potential>,
    pub eps: f64,
    pub grid: GridSpec,
    /// Exponent of the L^p norms.
    pub p: f64,
    /// Cutoff radius; chart default when absent.
    pub r0: Option<f64>,
}

impl BlowupConfig {
    pub fn new(cartan: CartanData, surface: Surface, poles: Vec<Pole>, k: u32, eps: f64) -> Self {
        let n = cartan.rank;
        Self {
            cartan,
            surface,
            poles,
            k,
            potentials: vec![Potential::constant(1.0); n],
            eps,
            grid: GridSpec::default(),
            p: 1.1,
            r0: None,
        }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self {
            eps,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.cartan.rank;
        if self.potentials.len() != n {
            return Err(invalid(format!(
                "need {n} potentials, got {}",
                self.potentials.len()
            )));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(invalid(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if !(self.p >= 1.0) {
            return Err(invalid("norm exponent p must be >= 1"));
        }
        if 2 * self.k as i64 <= self.cartan.alphas[n - 1] {
            return Err(invalid(format!(
                "symmetry order k = {} must exceed alpha_N / 2 = {}",
                self.k,
                self.cartan.alphas[n - 1] / 2
            )));
        }
        if self.poles.is_empty() {
            return Err(invalid("need at least one blow-up point"));
        }
        let centers = symmetric_centers(&self.surface, self.k);
        for (j, p) in self.poles.iter().enumerate() {
            if !centers.iter().any(|(c, _)| c == p) {
                return Err(invalid(format!(
                    "{p:?} is not a symmetric center of {:?}",
                    self.surface.model
                )));
            }
            if self.poles[..j].contains(p) {
                return Err(invalid("blow-up points must be distinct"));
            }
        }
        self.grid.validate()?;
        let len = self.surface.meridian_length();
        for (i, v) in self.potentials.iter().enumerate() {
            for step in 0..=64 {
                let s = len * step as f64 / 64.0;
                for th in [0.0, 0.9, 2.3] {
                    let x = self.surface.point(s, th);
                    let val = v.eval(&x);
                    if !(val > 0.0) {
                        return Err(invalid(format!("potential {i} not positive at {x:?}")));
                    }
                    if (v.eval(&rotate(&x, self.k)) - val).abs() > 1e-12 * val.abs().max(1.0) {
                        return Err(invalid(format!(
                            "potential {i} not invariant under the rotation"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
