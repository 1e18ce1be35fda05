//! Min-max normalization followed by removal of an OLS linear trend.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum series length accepted by the pipeline.
pub const MIN_LEVELS: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedSeries {
    /// Detrended residuals of the normalized series.
    pub values: Vec<f64>,
    pub norm_min: f64,
    pub norm_max: f64,
    pub trend_intercept: f64,
    /// Per index step.
    pub trend_slope: f64,
}

impl PreparedSeries {
    /// Undoes detrending and normalization.
    pub fn reconstruct(&self) -> Vec<f64> {
        let span = self.norm_max - self.norm_min;
        self.values
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let normalized = r + self.trend_intercept + self.trend_slope * k as f64;
                normalized * span + self.norm_min
            })
            .collect()
    }
}

/// `(v − min) / (max − min)`.
pub fn normalize(values: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() || !(max > min) {
        return Err(Error::DegenerateSeries(
            "normalization needs at least two distinct values".into(),
        ));
    }
    let span = max - min;
    let out = values
        .iter()
        .map(|&v| {
            if v == max {
                1.0
            } else {
                (v - min) / span
            }
        })
        .collect();
    Ok((out, min, max))
}

/// OLS fit of `a + b·k` over `k = 0..n`; residuals are returned with the
/// normalization fields set to the identity map `[0, 1]`.
pub fn detrend(values: &[f64]) -> Result<PreparedSeries> {
    let n = values.len();
    if n < MIN_LEVELS {
        return Err(Error::InvalidSize {
            what: "level series",
            min: MIN_LEVELS,
            got: n,
        });
    }
    let nf = n as f64;
    let k_mean = (nf - 1.0) / 2.0;
    let x_mean = values.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, &x) in values.iter().enumerate() {
        let dk = k as f64 - k_mean;
        sxy += dk * (x - x_mean);
        sxx += dk * dk;
    }
    let slope = sxy / sxx;
    let intercept = x_mean - slope * k_mean;
    let residuals = values
        .iter()
        .enumerate()
        .map(|(k, &x)| x - (intercept + slope * k as f64))
        .collect();
    Ok(PreparedSeries {
        values: residuals,
        norm_min: 0.0,
        norm_max: 1.0,
        trend_intercept: intercept,
        trend_slope: slope,
    })
}

/// Normalize, then detrend.
pub fn prepare(values: &[f64]) -> Result<PreparedSeries> {
    if values.len() < MIN_LEVELS {
        return Err(Error::InvalidSize {
            what: "level series",
            min: MIN_LEVELS,
            got: values.len(),
        });
    }
    let (normalized, min, max) = normalize(values)?;
    let mut prepared = detrend(&normalized)?;
    prepared.norm_min = min;
    prepared.norm_max = max;
    Ok(prepared)
}
