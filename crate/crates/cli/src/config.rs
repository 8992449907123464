//! Experiment configuration: a TOML file with sections problem, surface,
//! grid, solver and output.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toda_core::ansatz::{BlowupConfig, Potential};
use toda_core::cartan::{build_cartan, Family};
use toda_core::geometry::{make_surface, Model, Pole};
use toda_core::nonlinear::SolverOptions;
use toda_core::numerics::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Identities,
    Green,
    Project,
    ResidualRates,
    Kernel,
    Invnorm,
    Solve,
    Theta,
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Preset::Identities => "identities",
            Preset::Green => "green",
            Preset::Project => "project",
            Preset::ResidualRates => "residual-rates",
            Preset::Kernel => "kernel",
            Preset::Invnorm => "invnorm",
            Preset::Solve => "solve",
            Preset::Theta => "theta",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub preset: Preset,
    pub family: Family,
    pub rank: usize,
    /// Order of the rotation symmetry.
    pub k: u32,
    /// Sweep values; the `project` preset reads them as bubble scales.
    pub eps: Vec<f64>,
    pub p: f64,
    /// One per component; V = 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<Vec<Potential>>,
    /// Threshold overrides keyed by metric name (without the bracketed label).
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub model: Model,
    pub normalized: bool,
    pub poles: Vec<Pole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// File stem; the report is written as `<stem>.csv` and `<stem>.json`.
    pub stem: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("toda-out"),
            stem: "report".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub surface: SurfaceSection,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let mut problem = Problem {
            preset,
            family: Family::A,
            rank: 2,
            k: 3,
            eps: vec![1e-2, 1e-3, 1e-4, 1e-5],
            p: 1.1,
            potentials: None,
            tolerances: BTreeMap::new(),
        };
        let mut surface = SurfaceSection {
            model: Model::UnitDisk,
            normalized: true,
            poles: vec![Pole::North],
            r0: None,
        };
        match preset {
            Preset::Identities => {
                problem.rank = 8;
                problem.eps.clear();
            }
            Preset::Green | Preset::Kernel => problem.eps.clear(),
            Preset::Project => {
                problem.eps = vec![1e-1, 3e-2, 1e-2];
                surface.normalized = false;
                surface.r0 = Some(0.24);
            }
            Preset::Solve => problem.eps = vec![1e-2, 1e-3, 1e-4],
            Preset::ResidualRates | Preset::Invnorm | Preset::Theta => {}
        }
        Self {
            problem,
            surface,
            grid: GridSpec::default(),
            solver: SolverOptions::default(),
            output: OutputSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("malformed config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        for &e in &p.eps {
            if !(e > 0.0 && e < 1.0) {
                bail!("eps values must lie in (0, 1), got {e}");
            }
        }
        if let Some((k, v)) = p.tolerances.iter().find(|(_, v)| !v.is_finite()) {
            bail!("tolerance {k} is not finite: {v}");
        }
        if self.output.stem.is_empty() || self.output.stem.contains(['/', '\\']) {
            bail!("output stem must be a plain file name");
        }
        match p.preset {
            Preset::Identities => {
                if !(2..=8).contains(&p.rank) {
                    bail!("identities checks ranks 2..=rank with rank <= 8");
                }
            }
            Preset::Kernel | Preset::Project => {
                build_cartan(p.family, p.rank)?;
                if p.preset == Preset::Project && p.eps.len() < 2 {
                    bail!("preset project needs at least two scales in eps");
                }
            }
            Preset::Green => {
                self.blowup(0.5)?;
            }
            _ => {
                let need = if p.preset == Preset::Solve { 1 } else { 2 };
                if p.eps.len() < need {
                    bail!("preset {} needs at least {need} eps values", p.preset);
                }
                for &e in &p.eps {
                    self.blowup(e)?;
                }
            }
        }
        self.grid.validate()?;
        Ok(())
    }

    /// Core configuration at one eps.
    pub fn blowup(&self, eps: f64) -> Result<BlowupConfig> {
        let p = &self.problem;
        let mut cfg = BlowupConfig::new(
            build_cartan(p.family, p.rank)?,
            make_surface(self.surface.model, self.surface.normalized),
            self.surface.poles.clone(),
            p.k,
            eps,
        );
        if let Some(v) = &p.potentials {
            cfg.potentials = v.clone();
        }
        cfg.grid = self.grid;
        cfg.p = p.p;
        cfg.r0 = self.surface.r0;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Hash of everything that affects the numbers; output location excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn tolerance(&self, metric: &str, default: f64) -> f64 {
        let base = metric.split('[').next().unwrap_or(metric);
        self.problem
            .tolerances
            .get(base)
            .copied()
            .unwrap_or(default)
    }
}
