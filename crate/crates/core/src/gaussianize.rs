//! Odd power transform that brings increments close to Gaussian.
//!
//! The transform `z = sgn(y)|y|^λ` is fitted so that the ratio
//! `(mean|z|)² / mean z²` hits its Gaussian value `2/π`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{Error, Result};

/// Smallest series length any downstream statistic accepts.
pub const MIN_INCREMENTS: usize = 8;
/// Magnitudes below this are treated as exact zeros.
pub const ZERO_FLOOR: f64 = 1e-300;
pub const DEFAULT_RATIO_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const LAMBDA_MIN: f64 = 0.05;
pub const LAMBDA_MAX: f64 = 20.0;
/// Upper end of the domain of [`gaussian_ratio_theoretical`].
pub const THEORETICAL_LAMBDA_CAP: f64 = 40.0;

/// Gaussian value of the kurtosis ratio.
pub const GAUSSIAN_RATIO: f64 = FRAC_2_PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSeries {
    values: Vec<f64>,
}

impl IncrementSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_INCREMENTS {
            return Err(Error::InvalidSize {
                what: "increment series",
                min: MIN_INCREMENTS,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite increment at index {i}")));
        }
        Ok(Self { values })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn zero_fraction(&self) -> f64 {
        let zeros = self.values.iter().filter(|v| v.abs() < ZERO_FLOOR).count();
        zeros as f64 / self.m() as f64
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Transformed increments together with the exponent that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianizedSeries {
    pub values: Vec<f64>,
    pub lambda: f64,
    /// Kurtosis ratio of `values`; absent when every value is zero.
    pub achieved_ratio: Option<f64>,
    /// Tolerance the fit was run with, if the exponent was fitted.
    pub tolerance: Option<f64>,
}

impl GaussianizedSeries {
    /// Wraps increments that are taken as Gaussian already (`λ = 1`).
    pub fn identity(values: Vec<f64>) -> Result<Self> {
        let y = IncrementSeries::new(values)?;
        Ok(transform(&y, 1.0))
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.values.len()
    }
}

/// First differences `x[k+1] − x[k]`.
pub fn increments(x: &[f64]) -> Result<IncrementSeries> {
    if x.len() < MIN_INCREMENTS + 1 {
        return Err(Error::InvalidSize {
            what: "level series",
            min: MIN_INCREMENTS + 1,
            got: x.len(),
        });
    }
    IncrementSeries::new(x.windows(2).map(|w| w[1] - w[0]).collect())
}

/// `(mean |v|)² / mean v²`.
pub fn kurtosis_ratio(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::InvalidSize {
            what: "kurtosis ratio input",
            min: 1,
            got: 0,
        });
    }
    let n = v.len() as f64;
    let (abs_sum, sq_sum) = v
        .iter()
        .fold((0.0, 0.0), |(a, s), x| (a + x.abs(), s + x * x));
    if sq_sum == 0.0 {
        return Err(Error::DegenerateSeries("all values are zero".into()));
    }
    let mean_abs = abs_sum / n;
    Ok(mean_abs * mean_abs / (sq_sum / n))
}

/// Limit of the kurtosis ratio of `sgn(ξ)|ξ|^λ` for Gaussian `ξ`:
/// `Γ((λ+1)/2)² / (√π Γ(λ+½))`.
pub fn gaussian_ratio_theoretical(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < THEORETICAL_LAMBDA_CAP) {
        return Err(Error::Domain(format!(
            "lambda must be in (0, {THEORETICAL_LAMBDA_CAP}), got {lambda}"
        )));
    }
    let log_ratio = 2.0 * ln_gamma((lambda + 1.0) / 2.0) - ln_gamma(lambda + 0.5) - 0.5 * PI.ln();
    Ok(log_ratio.exp())
}

#[inline]
fn signed_power(y: f64, lambda: f64) -> f64 {
    let a = y.abs();
    if a < ZERO_FLOOR {
        0.0
    } else {
        (lambda * a.ln()).exp().copysign(y)
    }
}

/// `z_k = sgn(y_k)|y_k|^λ`.
pub fn transform(y: &IncrementSeries, lambda: f64) -> GaussianizedSeries {
    let values: Vec<f64> = y.values().iter().map(|&v| signed_power(v, lambda)).collect();
    let achieved_ratio = kurtosis_ratio(&values).ok();
    GaussianizedSeries {
        values,
        lambda,
        achieved_ratio,
        tolerance: None,
    }
}

/// `y_k = sgn(z_k)|z_k|^{1/λ}`.
pub fn inverse_transform(z: &GaussianizedSeries) -> Result<IncrementSeries> {
    if !(z.lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {}", z.lambda)));
    }
    let inv = 1.0 / z.lambda;
    IncrementSeries::new(z.values.iter().map(|&v| signed_power(v, inv)).collect())
}

/// Rebuilds a level series from its first value and transformed increments.
pub fn reconstruct(x0: f64, z: &GaussianizedSeries) -> Result<Vec<f64>> {
    let y = inverse_transform(z)?;
    let mut out = Vec::with_capacity(y.m() + 1);
    out.push(x0);
    let mut acc = x0;
    for v in y.values() {
        acc += v;
        out.push(acc);
    }
    Ok(out)
}

/// Kurtosis ratio of the transformed series, evaluated on magnitudes scaled
/// by their maximum (the ratio is scale free; this keeps `|y|^λ` finite).
struct RatioCurve {
    mags: Vec<f64>,
}

impl RatioCurve {
    fn new(y: &IncrementSeries) -> Result<Self> {
        let max = y.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max < ZERO_FLOOR {
            return Err(Error::DegenerateSeries("all increments are zero".into()));
        }
        let mags: Vec<f64> = y
            .values()
            .iter()
            .map(|v| if v.abs() < ZERO_FLOOR { 0.0 } else { v.abs() / max })
            .collect();
        Ok(Self { mags })
    }

    fn ratio(&self, lambda: f64) -> f64 {
        let n = self.mags.len() as f64;
        let (s1, s2) = self.mags.iter().fold((0.0, 0.0), |(s1, s2), &a| {
            let p = if a == 0.0 { 0.0 } else { (lambda * a.ln()).exp() };
            (s1 + p, s2 + p * p)
        });
        let m1 = s1 / n;
        m1 * m1 / (s2 / n)
    }
}

/// Inverts [`gaussian_ratio_theoretical`] by bisection; `None` outside its range.
fn invert_theoretical(d: f64) -> Option<f64> {
    let (mut lo, mut hi) = (1e-6, THEORETICAL_LAMBDA_CAP - 1e-6);
    let f = |l: f64| gaussian_ratio_theoretical(l).unwrap_or(f64::NAN);
    if !(d < f(lo) && d > f(hi)) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Fits the exponent `λ` such that the transformed series has kurtosis ratio
/// within `tol` of `2/π`.
///
/// Returns `1` when the raw series already satisfies the criterion. The
/// Gaussian-theory inversion of the raw ratio seeds a doubling/halving bracket
/// search over `[LAMBDA_MIN, LAMBDA_MAX]`, refined by bisection.
pub fn fit_lambda(y: &IncrementSeries, tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("ratio tolerance must be positive, got {tol}")));
    }
    let curve = RatioCurve::new(y)?;
    let mut distinct = curve.mags.iter().copied().filter(|&a| a > 0.0);
    let first = distinct.next();
    if !distinct.any(|a| Some(a) != first) {
        return Err(Error::Unfittable(
            "fewer than two distinct nonzero magnitudes".into(),
        ));
    }

    let target = GAUSSIAN_RATIO;
    let within = |r: f64| (r - target).abs() <= tol;
    let raw = curve.ratio(1.0);
    if within(raw) {
        return Ok(1.0);
    }

    // If y ≈ sgn(ξ)|ξ|^μ with ξ Gaussian, λ = 1/μ undoes it.
    let guess = invert_theoretical(raw)
        .map(|mu| (1.0 / mu).clamp(LAMBDA_MIN, LAMBDA_MAX))
        .unwrap_or(1.0);
    let r_guess = curve.ratio(guess);
    if within(r_guess) {
        return Ok(guess);
    }

    // ratio(λ) is non-increasing: lo has ratio above target, hi below.
    let (mut lo, mut hi);
    if r_guess > target {
        lo = guess;
        hi = guess;
        loop {
            hi = (hi * 2.0).min(LAMBDA_MAX);
            let r = curve.ratio(hi);
            if within(r) {
                return Ok(hi);
            }
            if r < target {
                break;
            }
            lo = hi;
            if hi >= LAMBDA_MAX {
                return Err(Error::Unfittable(format!(
                    "ratio stays above 2/π up to lambda = {LAMBDA_MAX}"
                )));
            }
        }
    } else {
        hi = guess;
        lo = guess;
        loop {
            lo = (lo / 2.0).max(LAMBDA_MIN);
            let r = curve.ratio(lo);
            if within(r) {
                return Ok(lo);
            }
            if r > target {
                break;
            }
            hi = lo;
            if lo <= LAMBDA_MIN {
                return Err(Error::Unfittable(format!(
                    "ratio stays below 2/π down to lambda = {LAMBDA_MIN}"
                )));
            }
        }
    }

    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let r = curve.ratio(mid);
        if within(r) {
            return Ok(mid);
        }
        if r > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Unfittable(format!(
        "bisection did not reach tolerance {tol} in {max_iter} steps"
    )))
}

/// Fits `λ` and applies the transform.
pub fn gaussianize(y: &IncrementSeries, tol: f64, max_iter: usize) -> Result<GaussianizedSeries> {
    let lambda = fit_lambda(y, tol, max_iter)?;
    let mut z = transform(y, lambda);
    z.tolerance = Some(tol);
    Ok(z)
}
