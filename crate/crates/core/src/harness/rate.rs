//! Log-log least-squares rate fitting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RatePoint {
    pub h: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation of log-errors from the fitted line
    pub residual: f64,
    /// indices of the points used
    pub used: Vec<usize>,
    /// excluded points with the reason
    pub excluded: Vec<(usize, String)>,
}

/// Least squares on (log h, log error). Non-positive errors are excluded and
/// noted; fewer than 4 usable points is degenerate.
pub fn fit_rate(points: &[RatePoint]) -> Result<RateFit> {
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if !(p.error > 0.0) || !p.error.is_finite() {
            excluded.push((i, format!("non-positive error {}", p.error)));
            continue;
        }
        used.push(i);
        xs.push(p.h.ln());
        ys.push(p.error.ln());
    }
    if used.len() < 4 {
        return Err(Error::Degenerate(format!(
            "rate fit needs at least 4 positive points, got {}",
            used.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let d = y - (intercept + slope * x);
            d * d
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit { slope, intercept, residual, used, excluded })
}
