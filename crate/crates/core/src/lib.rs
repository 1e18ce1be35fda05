//! Fractional Brownian motion modelling of power-consumption time series.
//!
//! The analysis chain for one observed series is
//!
//! 1. normalize to `[0, 1]` and remove an OLS linear trend ([`pipeline::prepare`]);
//! 2. take first differences and Gaussianize them with an odd power transform
//!    ([`gaussianize`]);
//! 3. estimate the Hurst exponent by grid search on the `Q` statistic
//!    ([`hurst_estimate`]);
//! 4. test whether the transformed increments behave like fBm increments via
//!    weighted power variations ([`hypothesis_test`]), and classify the series
//!    as antipersistent or persistent.
//!
//! [`fbm_sim`] provides seeded exact fBm paths used as ground truth.

pub mod error;
pub mod fbm_model;
pub mod fbm_sim;
pub mod gaussianize;
pub mod hurst_estimate;
pub mod hypothesis_test;
pub mod pipeline;

pub use error::{Error, Result};
pub use fbm_model::{
    asymptotic_correlation, build_correlation, increment_correlation, toeplitz_quadratic_form,
    HurstExponent, IncrementCorrelation,
};
pub use fbm_sim::{fbm_covariance, simulate_fbm, simulate_fgn, FbmPath, Method};
pub use gaussianize::{
    fit_lambda, gaussian_ratio_theoretical, gaussianize, increments, inverse_transform,
    kurtosis_ratio, transform, GaussianizedSeries, IncrementSeries,
};
pub use hurst_estimate::{estimate_hurst, q_statistic, HurstEstimate, HurstGrid, Selection};
pub use hypothesis_test::{
    classify, test_hypothesis, thresholds, Classification, HypothesisConfig, HypothesisStats,
    Verdict,
};
pub use pipeline::{analyze, analyze_all, AnalysisConfig, BuildingReport};
