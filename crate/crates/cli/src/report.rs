//! Report rows and their CSV/JSON emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    AtMost,
    AtLeast,
    Below,
    Above,
}

impl Cmp {
    pub fn holds(self, value: f64, tol: f64) -> bool {
        match self {
            Cmp::AtMost => value <= tol,
            Cmp::AtLeast => value >= tol,
            Cmp::Below => value < tol,
            Cmp::Above => value > tol,
        }
    }
}

/// One check. `eps` is empty for sweep-level metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub config_hash: String,
    pub eps: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Collects rows for one config, applying tolerance overrides.
pub struct Rows<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
    pub rows: Vec<Row>,
}

impl<'a> Rows<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Self {
        Self {
            cfg,
            hash: cfg.hash(),
            rows: vec![],
        }
    }

    pub fn check(
        &mut self,
        eps: Option<f64>,
        metric: impl Into<String>,
        value: f64,
        cmp: Cmp,
        tol: f64,
    ) {
        let metric = metric.into();
        let tolerance = self.cfg.tolerance(&metric, tol);
        self.rows.push(Row {
            config_hash: self.hash.clone(),
            eps,
            pass: value.is_finite() && cmp.holds(value, tolerance),
            metric,
            value,
            tolerance,
        });
    }

    /// A computation that did not produce a value.
    pub fn error(&mut self, eps: Option<f64>, metric: impl Into<String>) {
        self.check(eps, metric, f64::NAN, Cmp::AtMost, 0.0);
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config_hash: &'a str,
    preset: String,
    pass: bool,
    rows: &'a [Row],
}

pub fn to_csv(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["config_hash", "eps", "metric", "value", "tolerance", "pass"])?;
    for r in rows {
        w.write_record([
            r.config_hash.clone(),
            r.eps.map(|e| format!("{e:e}")).unwrap_or_default(),
            r.metric.clone(),
            format!("{:e}", r.value),
            format!("{:e}", r.tolerance),
            r.pass.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn to_json(cfg: &ExperimentConfig, rows: &[Row]) -> Result<Vec<u8>> {
    let hash = cfg.hash();
    let rep = JsonReport {
        config_hash: &hash,
        preset: cfg.problem.preset.to_string(),
        pass: rows.iter().all(|r| r.pass),
        rows,
    };
    let mut out = serde_json::to_vec_pretty(&rep)?;
    out.push(b'\n');
    Ok(out)
}

/// Writes both files through temporaries so a failure leaves neither behind.
pub fn write_report(cfg: &ExperimentConfig, rows: &[Row]) -> Result<(PathBuf, PathBuf)> {
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("{}.csv", cfg.output.stem));
    let json_path = dir.join(format!("{}.json", cfg.output.stem));
    let csv_tmp = stage(dir, &to_csv(rows)?)?;
    let json_tmp = stage(dir, &to_json(cfg, rows)?)?;
    csv_tmp.persist(&csv_path)?;
    json_tmp.persist(&json_path)?;
    Ok((csv_path, json_path))
}

fn stage(dir: &Path, bytes: &[u8]) -> Result<tempfile::NamedTempFile> {
    let mut f = tempfile::NamedTempFile::new_in(dir)?;
    f.write_all(bytes)?;
    f.as_file().sync_all()?;
    Ok(f)
}
