//! Grid-search estimation of the Hurst exponent from the `Q` statistic
//!
//! ```text
//! Q(H) = (q / R1) · sqrt(zᵀ S_H⁻¹ z / (m − 1)),   R1 = mean |z_k|
//! ```
//!
//! `Q(H) ≈ 1` when `H` matches the correlation structure of `z`.
//!
//! Because `S_{1/2}` is the identity, `Q(1/2) = q·sqrt(m/(m−1)) / sqrt(d_n(z))`
//! depends only on the kurtosis ratio of `z`, which the Gaussianization step
//! pins to `2/π`. So `Q(1/2) ≈ 1` for every Gaussianized series regardless of
//! its memory, and `|Q(H) − 1|` has a second, uninformative zero at `H = 1/2`.
//! [`Selection::NontrivialRoot`] divides that zero out: it locates the sign
//! change of `(Q(H) − Q(1/2)) / (H − 1/2)` along the grid and reports the grid
//! point nearest to it. [`Selection::Argmin`] is the plain
//! `argmin |Q(H) − 1|` rule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_2_PI;

use crate::error::{Error, Result};
use crate::fbm_model::{build_correlation, toeplitz_quadratic_form, HurstExponent};
use crate::gaussianize::MIN_INCREMENTS;

/// `sqrt(2/π)`, the mean absolute value of a standard Gaussian.
pub fn default_q_constant() -> f64 {
    FRAC_2_PI.sqrt()
}

/// Rounded constant used in the original method description.
pub const PUBLISHED_Q_CONSTANT: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    #[default]
    NontrivialRoot,
    Argmin,
}

impl std::str::FromStr for Selection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nontrivial-root" => Ok(Selection::NontrivialRoot),
            "argmin" => Ok(Selection::Argmin),
            other => Err(Error::Config(format!("unknown selection rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for HurstGrid {
    fn default() -> Self {
        Self {
            start: 0.05,
            stop: 0.95,
            step: 0.05,
        }
    }
}

impl HurstGrid {
    pub fn validate(&self) -> Result<()> {
        let Self { start, stop, step } = *self;
        if !(start > 0.0 && start < stop && stop < 1.0) {
            return Err(Error::Config(format!(
                "grid bounds must satisfy 0 < start < stop < 1, got {start}..{stop}"
            )));
        }
        if !(0.01..=0.1).contains(&step) {
            return Err(Error::Config(format!("grid step must be in [0.01, 0.1], got {step}")));
        }
        Ok(())
    }

    /// Grid points `start + i·step ≤ stop`, rounded to 12 decimals.
    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub h: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub grid: Vec<GridPoint>,
    pub h_hat: f64,
    pub q_at_hat: f64,
    /// `Q(1/2)`, the reference level of the trivial zero.
    pub q_at_half: f64,
    pub r1: f64,
    pub m: usize,
    pub selection: Selection,
}

fn check_series(z: &[f64]) -> Result<f64> {
    if z.len() < MIN_INCREMENTS {
        return Err(Error::InvalidSize {
            what: "Gaussianized series",
            min: MIN_INCREMENTS,
            got: z.len(),
        });
    }
    let r1 = z.iter().map(|v| v.abs()).sum::<f64>() / z.len() as f64;
    if !(r1 > 0.0) {
        return Err(Error::DegenerateSeries("all transformed increments are zero".into()));
    }
    Ok(r1)
}

fn q_with_r1(z: &[f64], r1: f64, h: HurstExponent, q_constant: f64) -> Result<f64> {
    let corr = build_correlation(h, z.len())?;
    let quad = toeplitz_quadratic_form(&corr, z)?;
    Ok(q_constant / r1 * (quad / (z.len() - 1) as f64).sqrt())
}

pub fn q_statistic(z: &[f64], h: HurstExponent, q_constant: f64) -> Result<f64> {
    let r1 = check_series(z)?;
    q_with_r1(z, r1, h, q_constant)
}

pub fn estimate_hurst(
    z: &[f64],
    grid: &HurstGrid,
    q_constant: f64,
    selection: Selection,
) -> Result<HurstEstimate> {
    let r1 = check_series(z)?;
    let hs = grid.points()?;
    let qs: Vec<f64> = hs
        .par_iter()
        .map(|&h| q_with_r1(z, r1, HurstExponent::new(h)?, q_constant))
        .collect::<Result<_>>()?;
    let half_idx = hs.iter().position(|&h| (h - 0.5).abs() < 1e-9);
    let q_at_half = match half_idx {
        Some(i) => qs[i],
        None => q_with_r1(z, r1, HurstExponent::new(0.5)?, q_constant)?,
    };

    let idx = match selection {
        Selection::Argmin => argmin_abs_dev(&qs),
        Selection::NontrivialRoot => nontrivial_root_index(&hs, &qs, q_at_half),
    };
    Ok(HurstEstimate {
        grid: hs
            .iter()
            .zip(&qs)
            .map(|(&h, &q)| GridPoint { h, q })
            .collect(),
        h_hat: hs[idx],
        q_at_hat: qs[idx],
        q_at_half,
        r1,
        m: z.len(),
        selection,
    })
}

/// First index minimizing `|q − 1|`; ascending grid makes ties go to the smaller H.
fn argmin_abs_dev(qs: &[f64]) -> usize {
    let mut best = 0;
    for (i, q) in qs.iter().enumerate() {
        if (q - 1.0).abs() < (qs[best] - 1.0).abs() {
            best = i;
        }
    }
    best
}

fn nontrivial_root_index(hs: &[f64], qs: &[f64], q_half: f64) -> usize {
    let deflated: Vec<(f64, f64)> = hs
        .iter()
        .zip(qs)
        .filter(|(h, _)| (**h - 0.5).abs() > 1e-9)
        .map(|(&h, &q)| (h, (q - q_half) / (h - 0.5)))
        .collect();
    if deflated.is_empty() {
        return argmin_abs_dev(qs);
    }

    let crossing = deflated
        .windows(2)
        .find(|w| w[0].1 <= 0.0 && w[1].1 > 0.0)
        .map(|w| {
            let ((h0, r0), (h1, r1)) = (w[0], w[1]);
            h0 - r0 * (h1 - h0) / (r1 - r0)
        });
    let root = crossing.unwrap_or_else(|| {
        deflated
            .iter()
            .fold(deflated[0], |best, &p| if p.1.abs() < best.1.abs() { p } else { best })
            .0
    });

    let mut best = 0;
    for (i, h) in hs.iter().enumerate() {
        if (h - root).abs() < (hs[best] - root).abs() - 1e-12 {
            best = i;
        }
    }
    best
}
