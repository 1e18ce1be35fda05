use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ingest::{GapPolicy, Quantity, RawSeries};
use super::prepare::{prepare, MIN_LEVELS};
use crate::error::{Error, Result};
use crate::gaussianize::{self, DEFAULT_MAX_ITER, DEFAULT_RATIO_TOL};
use crate::hurst_estimate::{self, default_q_constant, HurstGrid, Selection};
use crate::hypothesis_test::{
    self, classify, Branch, HypothesisConfig, Memory, NoiseLabel, Persistence, Verdict,
};

/// Fraction of zero increments above which the transform is flagged.
pub const ZERO_WARNING_FRACTION: f64 = 0.5;

/// Immutable configuration of one analysis run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub grid: HurstGrid,
    pub selection: Selection,
    pub q_constant: f64,
    pub ratio_tolerance: f64,
    pub max_iter: usize,
    pub hypothesis: HypothesisConfig,
    pub gap_policy: GapPolicy,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            grid: HurstGrid::default(),
            selection: Selection::default(),
            q_constant: default_q_constant(),
            ratio_tolerance: DEFAULT_RATIO_TOL,
            max_iter: DEFAULT_MAX_ITER,
            hypothesis: HypothesisConfig::default(),
            gap_policy: GapPolicy::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.hypothesis.validate()?;
        if !(self.q_constant > 0.0 && self.q_constant.is_finite()) {
            return Err(Error::Config(format!(
                "q_constant must be positive, got {}",
                self.q_constant
            )));
        }
        if !(self.ratio_tolerance > 0.0 && self.ratio_tolerance < 1.0) {
            return Err(Error::Config(format!(
                "ratio tolerance must be in (0, 1), got {}",
                self.ratio_tolerance
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// One row of the output table. Optional fields are absent when the analysis
/// stopped early or belong to the other hypothesis branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingReport {
    pub building_id: String,
    pub quantity: Quantity,
    pub n_observations: usize,
    pub m: Option<usize>,
    pub lambda: Option<f64>,
    pub achieved_ratio: Option<f64>,
    pub h_hat: Option<f64>,
    pub q_at_hat: Option<f64>,
    pub c: Option<f64>,
    pub a_n: Option<f64>,
    pub a_limit: Option<f64>,
    pub delta: Option<f64>,
    pub b_n: Option<f64>,
    pub d_n_stat: Option<f64>,
    pub beta0: f64,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub branch: Option<Branch>,
    pub verdict: Option<Verdict>,
    pub persistence: Option<Persistence>,
    pub memory_class: Option<Memory>,
    pub noise_label: Option<NoiseLabel>,
    pub forecastable: bool,
    pub warnings: Vec<String>,
}

impl BuildingReport {
    fn empty(series: &RawSeries, cfg: &AnalysisConfig) -> Self {
        Self {
            building_id: series.building_id.clone(),
            quantity: series.quantity,
            n_observations: series.len(),
            m: None,
            lambda: None,
            achieved_ratio: None,
            h_hat: None,
            q_at_hat: None,
            c: None,
            a_n: None,
            a_limit: None,
            delta: None,
            b_n: None,
            d_n_stat: None,
            beta0: cfg.hypothesis.beta0,
            beta1: None,
            beta2: None,
            branch: None,
            verdict: None,
            persistence: None,
            memory_class: None,
            noise_label: None,
            forecastable: false,
            warnings: series.warnings.clone(),
        }
    }
}

/// Runs the full chain on one series. Failures are recorded as warnings in
/// the returned report.
pub fn analyze(series: &RawSeries, cfg: &AnalysisConfig) -> BuildingReport {
    let mut report = BuildingReport::empty(series, cfg);
    if let Err(e) = run(series, cfg, &mut report) {
        let msg = match &e {
            Error::Unfittable(_) => {
                report.verdict = Some(Verdict::Rejected);
                format!("non-Gaussianizable: {e}")
            }
            Error::DegenerateSeries(_) => e.to_string(),
            Error::InvalidSize { .. } => format!("series too short: {e}"),
            _ => e.to_string(),
        };
        report.warnings.push(msg);
    }
    report
}

fn run(series: &RawSeries, cfg: &AnalysisConfig, report: &mut BuildingReport) -> Result<()> {
    if series.len() < MIN_LEVELS {
        return Err(Error::InvalidSize {
            what: "level series",
            min: MIN_LEVELS,
            got: series.len(),
        });
    }
    let prepared = prepare(&series.values)?;
    let y = gaussianize::increments(&prepared.values)?;
    report.m = Some(y.m());
    if y.zero_fraction() > ZERO_WARNING_FRACTION {
        report.warnings.push(format!(
            "{:.0}% of increments are zero; power transform is ill-conditioned",
            100.0 * y.zero_fraction()
        ));
    }

    let z = gaussianize::gaussianize(&y, cfg.ratio_tolerance, cfg.max_iter)?;
    report.lambda = Some(z.lambda);
    report.achieved_ratio = z.achieved_ratio;

    let est = hurst_estimate::estimate_hurst(&z.values, &cfg.grid, cfg.q_constant, cfg.selection)?;
    report.h_hat = Some(est.h_hat);
    report.q_at_hat = Some(est.q_at_hat);

    let stats = hypothesis_test::test_hypothesis(&z.values, est.h_hat, &cfg.hypothesis)?;
    let class = classify(est.h_hat, stats.verdict);
    report.c = Some(stats.c);
    report.a_n = Some(stats.a_n);
    report.a_limit = Some(stats.a_limit);
    report.delta = Some(stats.delta);
    report.b_n = stats.b_n;
    report.d_n_stat = stats.d_n_stat;
    report.beta1 = stats.beta1;
    report.beta2 = stats.beta2;
    report.branch = Some(stats.branch);
    report.verdict = Some(stats.verdict);
    report.persistence = Some(class.persistence);
    report.memory_class = Some(class.memory);
    report.noise_label = Some(class.noise);
    report.forecastable = class.forecastable;
    Ok(())
}

/// Analyzes every series concurrently; output is ordered by (building, quantity).
pub fn analyze_all(series: &[RawSeries], cfg: &AnalysisConfig) -> Vec<BuildingReport> {
    let mut reports: Vec<BuildingReport> = series.par_iter().map(|s| analyze(s, cfg)).collect();
    reports.sort_by(|a, b| {
        (a.building_id.as_str(), a.quantity).cmp(&(b.building_id.as_str(), b.quantity))
    });
    reports
}
