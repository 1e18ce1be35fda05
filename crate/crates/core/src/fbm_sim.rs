//! Seeded exact simulation of fractional Brownian motion on the grid `k/n`.
//!
//! Random numbers come from `ChaCha8Rng::seed_from_u64(seed)` and standard
//! normals from `rand_distr::StandardNormal`, so a given
//! `(hurst, n, seed, method)` always yields the same path.
//!
//! Two exact generators are provided:
//!
//! * [`Method::Cholesky`] factors the Toeplitz increment correlation with the
//!   Durbin-Levinson recursion and draws increments sequentially from their
//!   conditional laws. This is the Cholesky factorization of the correlation
//!   matrix, computed in `O(n²)` time and `O(n)` memory.
//! * [`Method::Circulant`] embeds the correlation in a `2n` circulant matrix
//!   and samples through one FFT (Davies-Harte), `O(n log n)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbm_model::{increment_correlation, pow_nonneg, HurstExponent};

/// Above this size the circulant method is the default.
pub const CHOLESKY_MAX_N: usize = 4096;

/// Smallest eigenvalue of the circulant embedding tolerated as round-off.
pub const EMBEDDING_EIGEN_TOL: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cholesky,
    Circulant,
}

impl Method {
    pub fn default_for(n: usize) -> Self {
        if n <= CHOLESKY_MAX_N {
            Method::Cholesky
        } else {
            Method::Circulant
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cholesky" => Ok(Method::Cholesky),
            "circulant" => Ok(Method::Circulant),
            other => Err(Error::Config(format!("unknown simulation method {other:?}"))),
        }
    }
}

/// A sample path `B_H(k/n)`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub hurst: HurstExponent,
    pub n: usize,
    pub seed: u64,
    pub method: Method,
    pub values: Vec<f64>,
}

impl FbmPath {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n as f64;
        (0..=self.n).map(move |k| k as f64 / n)
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Covariance `E[B_H(t) B_H(s)] = ½(t^{2H} + s^{2H} − |t−s|^{2H})`.
pub fn fbm_covariance(t: f64, s: f64, h: HurstExponent) -> Result<f64> {
    if !(t >= 0.0 && s >= 0.0) {
        return Err(Error::Domain(format!("times must be nonnegative, got t={t}, s={s}")));
    }
    let e = 2.0 * h.value();
    Ok(0.5 * (pow_nonneg(t, e) + pow_nonneg(s, e) - pow_nonneg((t - s).abs(), e)))
}

pub fn simulate_fbm(h: HurstExponent, n: usize, seed: u64, method: Method) -> Result<FbmPath> {
    let noise = simulate_fgn(h, n, seed, method)?;
    let scale = pow_nonneg(n as f64, -h.value());
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for x in noise {
        acc += scale * x;
        values.push(acc);
    }
    Ok(FbmPath {
        hurst: h,
        n,
        seed,
        method,
        values,
    })
}

/// Unit-variance fractional Gaussian noise of length `n`.
pub fn simulate_fgn(h: HurstExponent, n: usize, seed: u64, method: Method) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidSize {
            what: "fBm grid",
            min: 2,
            got: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match method {
        Method::Cholesky => Ok(durbin_sample(h, n, &mut rng)),
        Method::Circulant => circulant_sample(h, n, &mut rng),
    }
}

fn durbin_sample(h: HurstExponent, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let rho: Vec<f64> = (0..n).map(|j| increment_correlation(h, j)).collect();
    let mut x = Vec::with_capacity(n);
    // phi[j] holds the order-t partial regression coefficient on x[t-j].
    let mut phi = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut var = 1.0;
    let eps: f64 = StandardNormal.sample(rng);
    x.push(eps);
    for t in 1..n {
        let mut num = rho[t];
        for j in 1..t {
            num -= phi[j] * rho[t - j];
        }
        let k = num / var;
        for j in 1..t {
            next[j] = phi[j] - k * phi[t - j];
        }
        next[t] = k;
        phi[1..=t].copy_from_slice(&next[1..=t]);
        var *= 1.0 - k * k;

        let mut mean = 0.0;
        for j in 1..=t {
            mean += phi[j] * x[t - j];
        }
        let eps: f64 = StandardNormal.sample(rng);
        x.push(mean + var.max(0.0).sqrt() * eps);
    }
    x
}

fn circulant_sample(h: HurstExponent, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let size = 2 * n;
    let mut buf: Vec<Complex64> = (0..size)
        .map(|k| {
            let lag = if k <= n { k } else { size - k };
            Complex64::new(increment_correlation(h, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut buf);

    let min_eig = buf.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
    if min_eig < EMBEDDING_EIGEN_TOL {
        return Err(Error::MethodFailure(format!(
            "circulant embedding has negative eigenvalue {min_eig:e}"
        )));
    }
    let norm = size as f64;
    for c in buf.iter_mut() {
        let amp = (c.re.max(0.0) / norm).sqrt();
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *c = Complex64::new(amp * re, amp * im);
    }
    fft.process(&mut buf);
    Ok(buf[..n].iter().map(|c| c.re).collect())
}
