//! Correlation structure of fractional Gaussian noise and the Toeplitz
//! linear algebra built on it.
//!
//! The increments `ξ_k = B_H(k/n) - B_H((k-1)/n)` of a fractional Brownian
//! motion form a stationary sequence whose unit-variance correlation matrix
//! is symmetric Toeplitz with first row
//!
//! ```text
//! ρ_j = ½ ((j+1)^{2H} + |j-1|^{2H} - 2 j^{2H})
//! ```
//!
//! Quadratic forms `zᵀ S_H⁻¹ z` are evaluated with the Levinson recursion in
//! `O(m²)` time and `O(m)` memory. A dense Cholesky path is kept for
//! cross-checking on small systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diagonal jitter applied on the single retry after a failed factorization.
pub const JITTER: f64 = 1e-10;

/// Hurst exponent, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstExponent(f64);

impl HurstExponent {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidHurst(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HurstExponent {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<HurstExponent> for f64 {
    fn from(h: HurstExponent) -> f64 {
        h.0
    }
}

impl std::fmt::Display for HurstExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// `t^e` for `t >= 0`, with `0^e = 0`.
#[inline]
pub(crate) fn pow_nonneg(t: f64, e: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        (e * t.ln()).exp()
    }
}

/// Correlation between two increments `lag` steps apart.
pub fn increment_correlation(h: HurstExponent, lag: usize) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    // White noise: the power formula leaves ~1e-16 residue at large lags.
    if h.value() == 0.5 {
        return 0.0;
    }
    let e = 2.0 * h.value();
    let n = lag as f64;
    0.5 * (pow_nonneg(n + 1.0, e) + pow_nonneg(n - 1.0, e) - 2.0 * pow_nonneg(n, e))
}

/// Large-lag power law `H(2H-1) lag^{2H-2}` of the increment correlation.
pub fn asymptotic_correlation(h: HurstExponent, lag: usize) -> f64 {
    let h = h.value();
    if lag == 0 {
        return f64::NAN;
    }
    h * (2.0 * h - 1.0) * pow_nonneg(lag as f64, 2.0 * h - 2.0)
}

/// Generator of the symmetric Toeplitz correlation matrix of `m` increments.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementCorrelation {
    first_row: Vec<f64>,
    hurst: HurstExponent,
}

impl IncrementCorrelation {
    #[inline]
    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.first_row.len()
    }

    #[inline]
    pub fn hurst(&self) -> HurstExponent {
        self.hurst
    }

    /// Entry `(j, k)` of the full matrix.
    #[inline]
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.first_row[j.abs_diff(k)]
    }

    /// Dense row-major copy of the matrix. Intended for small `m`.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.m();
        let mut out = Vec::with_capacity(m * m);
        for j in 0..m {
            for k in 0..m {
                out.push(self.entry(j, k));
            }
        }
        out
    }
}

pub fn build_correlation(h: HurstExponent, m: usize) -> Result<IncrementCorrelation> {
    if m < 2 {
        return Err(Error::InvalidSize {
            what: "correlation matrix",
            min: 2,
            got: m,
        });
    }
    Ok(IncrementCorrelation {
        first_row: (0..m).map(|j| increment_correlation(h, j)).collect(),
        hurst: h,
    })
}

/// Solution of a symmetric positive definite Toeplitz system.
#[derive(Debug, Clone)]
pub struct ToeplitzSolution {
    pub x: Vec<f64>,
    /// Whether the diagonal jitter retry was needed.
    pub jittered: bool,
    /// `ln det` of the (possibly jittered) matrix.
    pub log_det: f64,
}

/// Solves `T x = b` for symmetric Toeplitz `T` with first row `row` by the
/// Levinson recursion. Retries once with `JITTER` added to the diagonal.
pub fn levinson_solve(row: &[f64], b: &[f64]) -> Result<ToeplitzSolution> {
    if row.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: row.len(),
            got: b.len(),
        });
    }
    if row.is_empty() {
        return Err(Error::InvalidSize {
            what: "Toeplitz system",
            min: 1,
            got: 0,
        });
    }
    match levinson(row, b, 0.0) {
        Ok((x, log_det)) => Ok(ToeplitzSolution {
            x,
            jittered: false,
            log_det,
        }),
        Err(_) => levinson(row, b, JITTER).map(|(x, log_det)| ToeplitzSolution {
            x,
            jittered: true,
            log_det,
        }),
    }
}

fn levinson(row: &[f64], b: &[f64], jitter: f64) -> Result<(Vec<f64>, f64)> {
    let n = row.len();
    let t0 = row[0] + jitter;
    if !(t0 > 0.0) {
        return Err(Error::IllConditioned { m: n, step: 0 });
    }
    // Work on the unit-diagonal matrix T / t0; rescale x at the end.
    let r = |i: usize| row[i] / t0;

    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    x[0] = b[0];
    let mut log_det = n as f64 * t0.ln();
    if n == 1 {
        x[0] /= t0;
        return Ok((x, log_det));
    }
    y[0] = -r(1);
    let mut beta = 1.0;
    let mut alpha = -r(1);

    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        if !(beta > f64::EPSILON) || !beta.is_finite() {
            return Err(Error::IllConditioned { m: n, step: k });
        }
        log_det += beta.ln();

        let mut acc = b[k];
        for i in 1..=k {
            acc -= r(i) * x[k - i];
        }
        let mu = acc / beta;
        for i in 0..k {
            x[i] += mu * y[k - 1 - i];
        }
        x[k] = mu;

        if k < n - 1 {
            let mut acc = -r(k + 1);
            for i in 1..=k {
                acc -= r(i) * y[k - i];
            }
            alpha = acc / beta;
            for i in 0..k {
                scratch[i] = y[i] + alpha * y[k - 1 - i];
            }
            y[..k].copy_from_slice(&scratch[..k]);
            y[k] = alpha;
        }
    }
    for v in &mut x {
        *v /= t0;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::IllConditioned { m: n, step: n });
    }
    Ok((x, log_det))
}

/// `zᵀ S_H⁻¹ z` via the Levinson recursion.
pub fn toeplitz_quadratic_form(corr: &IncrementCorrelation, z: &[f64]) -> Result<f64> {
    if z.len() != corr.m() {
        return Err(Error::LengthMismatch {
            expected: corr.m(),
            got: z.len(),
        });
    }
    if z.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let sol = levinson_solve(corr.first_row(), z)?;
    let q: f64 = sol.x.iter().zip(z).map(|(a, b)| a * b).sum();
    Ok(q.max(0.0))
}

/// Lower-triangular Cholesky factor of a dense row-major SPD matrix.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            got: a.len(),
        });
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::IllConditioned { m: n, step: i });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// `zᵀ S_H⁻¹ z` through a dense Cholesky factorization, `O(m³)`.
pub fn dense_quadratic_form(corr: &IncrementCorrelation, z: &[f64]) -> Result<f64> {
    let n = corr.m();
    if z.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: z.len(),
        });
    }
    let l = cholesky(&corr.to_dense(), n)?;
    // Forward substitution L w = z; then zᵀ S⁻¹ z = ‖w‖².
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * w[k];
        }
        w[i] = s / l[i * n + i];
    }
    Ok(w.iter().map(|v| v * v).sum())
}
