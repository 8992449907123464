use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Least-squares fit of log(value) against log(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub log_x: Vec<f64>,
    pub log_y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

pub fn loglog_rate_fit(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(invalid(format!(
            "rate fit needs >= 3 points, got {}",
            pairs.len()
        )));
    }
    if let Some(p) = pairs
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0) || !x.is_finite() || !y.is_finite())
    {
        return Err(invalid(format!(
            "rate fit needs positive finite data, got {p:?}"
        )));
    }
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("rate fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        log_x: lx,
        log_y: ly,
        slope,
        intercept,
        residual,
    })
}

/// Slope tolerance used when the measured quantity may carry a |log x| factor.
/// Calibrated on synthetic x^a |log x| data over three decades ending at 1e-8.
pub const LOG_FACTOR_SLOPE_TOL: f64 = 0.08;
