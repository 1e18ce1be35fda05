//! Test of the hypothesis that transformed increments are fBm increments.
//!
//! With `c = mean z²` and `v_k = Σ_{j<k} z_j`, the weighted power variations
//!
//! ```text
//! A_n = (1/m)          Σ v_k  z_k³   → −(3/2)c²          (H < 1/2)
//! B_n = m^{−(1+H)}     Σ v_k² z_k³   → 3c^{5/2}σ·N(0,1)  (H < 1/2)
//! D_n = m^{−2H}        Σ v_k  z_k³   → (3/2)c²·N(0,1)²   (H > 1/2)
//! ```
//!
//! with `σ = (2H+2)^{−1/2}`, are compared against their limits. `A_n` is
//! checked through its relative deviation `δ` from `−(3/2)c²`; `B_n` and `D_n`
//! against α-level quantiles `β₁`, `β₂` of their limit laws.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::gaussianize::MIN_INCREMENTS;

/// Coefficient of `c^{2.5}/sqrt(2H+2)` in `β₁` as published (from `z = 1.65`).
pub const PUBLISHED_BETA1_COEFF: f64 = 4.95;
/// Coefficient of `c²` in `β₂` as published.
pub const PUBLISHED_BETA2_COEFF: f64 = 4.08;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisConfig {
    /// Bound on the relative deviation of `A_n` from its limit.
    pub beta0: f64,
    /// Significance level for `β₁`, `β₂`.
    pub alpha: f64,
    /// Use the published coefficients 4.95 / 4.08 instead of the exact quantiles.
    pub paper_constants: bool,
    /// Also require `δ < β₀` when `Ĥ > 1/2`.
    pub require_delta_persistent: bool,
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        Self {
            beta0: 0.1,
            alpha: 0.1,
            paper_constants: false,
            require_delta_persistent: false,
        }
    }
}

impl HypothesisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(self.beta0 > 0.0) {
            return Err(Error::Config(format!("beta0 must be positive, got {}", self.beta0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Accepted => "accepted",
            Verdict::Rejected => "rejected",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    AntipersistentBranch,
    PersistentBranch,
}

impl Branch {
    /// `Ĥ = 1/2` goes to the antipersistent branch.
    pub fn for_hurst(h: f64) -> Self {
        if h <= 0.5 {
            Branch::AntipersistentBranch
        } else {
            Branch::PersistentBranch
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisStats {
    pub c: f64,
    pub a_n: f64,
    pub b_n: Option<f64>,
    pub d_n_stat: Option<f64>,
    pub a_limit: f64,
    pub delta: f64,
    pub sigma: f64,
    pub beta0: f64,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub h_used: f64,
    pub m: usize,
    pub verdict: Verdict,
    pub branch: Branch,
}

/// `v_1 = 0`, `v_{k+1} = v_k + z_k`.
pub fn partial_sums(z: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    z.iter()
        .map(|&x| {
            let v = acc;
            acc += x;
            v
        })
        .collect()
}

fn check_lengths(z: &[f64], v: &[f64]) -> Result<()> {
    if z.len() != v.len() {
        return Err(Error::LengthMismatch {
            expected: z.len(),
            got: v.len(),
        });
    }
    if z.is_empty() {
        return Err(Error::InvalidSize {
            what: "statistic input",
            min: 1,
            got: 0,
        });
    }
    Ok(())
}

fn weighted_cubic(z: &[f64], v: &[f64], power: i32) -> f64 {
    z.iter().zip(v).map(|(&z, &v)| v.powi(power) * z * z * z).sum()
}

pub fn stat_a(z: &[f64], v: &[f64]) -> Result<f64> {
    check_lengths(z, v)?;
    Ok(weighted_cubic(z, v, 1) / z.len() as f64)
}

/// Intended for `H ∈ (0, 1/2]`.
pub fn stat_b(z: &[f64], v: &[f64], h: f64) -> Result<f64> {
    check_lengths(z, v)?;
    let m = z.len() as f64;
    Ok(weighted_cubic(z, v, 2) * (-(1.0 + h) * m.ln()).exp())
}

/// Intended for `H ∈ (1/2, 1)`.
pub fn stat_d(z: &[f64], v: &[f64], h: f64) -> Result<f64> {
    check_lengths(z, v)?;
    let m = z.len() as f64;
    Ok(weighted_cubic(z, v, 1) * (-2.0 * h * m.ln()).exp())
}

/// `|(a_n − a) / a|`.
pub fn relative_deviation(a_n: f64, a: f64) -> f64 {
    ((a_n - a) / a).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub beta1: f64,
    pub beta2: f64,
}

/// Two-sided standard normal quantile `Φ⁻¹(1 − α/2)`.
pub fn normal_quantile(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}

/// `β₁` bounds `|B_n|` at level α under `3c^{5/2}σ·N(0,1)`;
/// `β₂` is the `1 − α` quantile of `(3/2)c²·N(0,1)²`.
pub fn thresholds(c: f64, h: f64, alpha: f64, paper_constants: bool) -> Thresholds {
    let (k1, k2) = if paper_constants {
        (PUBLISHED_BETA1_COEFF, PUBLISHED_BETA2_COEFF)
    } else {
        let q = normal_quantile(alpha);
        (3.0 * q, 1.5 * q * q)
    };
    Thresholds {
        beta1: k1 * c.powf(2.5) / (2.0 * h + 2.0).sqrt(),
        beta2: k2 * c * c,
    }
}

/// Branch-specific statistic and its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchStatistic {
    Antipersistent { b_n: f64, beta1: f64 },
    Persistent { d_n: f64, beta2: f64 },
}

/// Acceptance rule: `δ < β₀` and `|B_n| < β₁` on the antipersistent branch;
/// `0 < D_n < β₂` (plus `δ < β₀` if requested) on the persistent branch.
pub fn decide(
    delta: f64,
    beta0: f64,
    stat: BranchStatistic,
    require_delta_persistent: bool,
) -> Verdict {
    let delta_ok = delta < beta0;
    let ok = match stat {
        BranchStatistic::Antipersistent { b_n, beta1 } => delta_ok && b_n.abs() < beta1,
        BranchStatistic::Persistent { d_n, beta2 } => {
            (delta_ok || !require_delta_persistent) && d_n > 0.0 && d_n < beta2
        }
    };
    if ok {
        Verdict::Accepted
    } else {
        Verdict::Rejected
    }
}

pub fn test_hypothesis(z: &[f64], h_hat: f64, cfg: &HypothesisConfig) -> Result<HypothesisStats> {
    cfg.validate()?;
    if z.len() < MIN_INCREMENTS {
        return Err(Error::InvalidSize {
            what: "Gaussianized series",
            min: MIN_INCREMENTS,
            got: z.len(),
        });
    }
    if !(h_hat > 0.0 && h_hat < 1.0) {
        return Err(Error::InvalidHurst(h_hat));
    }
    let m = z.len();
    let c = z.iter().map(|x| x * x).sum::<f64>() / m as f64;
    if !(c > 0.0) {
        return Err(Error::DegenerateSeries("mean square of transformed increments is zero".into()));
    }
    let v = partial_sums(z);
    let a_n = stat_a(z, &v)?;
    let a_limit = -1.5 * c * c;
    let delta = relative_deviation(a_n, a_limit);
    let sigma = 1.0 / (2.0 * h_hat + 2.0).sqrt();
    let th = thresholds(c, h_hat, cfg.alpha, cfg.paper_constants);
    let branch = Branch::for_hurst(h_hat);

    let (b_n, d_n_stat, beta1, beta2, stat) = match branch {
        Branch::AntipersistentBranch => {
            let b_n = stat_b(z, &v, h_hat)?;
            (
                Some(b_n),
                None,
                Some(th.beta1),
                None,
                BranchStatistic::Antipersistent { b_n, beta1: th.beta1 },
            )
        }
        Branch::PersistentBranch => {
            let d_n = stat_d(z, &v, h_hat)?;
            (
                None,
                Some(d_n),
                None,
                Some(th.beta2),
                BranchStatistic::Persistent { d_n, beta2: th.beta2 },
            )
        }
    };
    let verdict = decide(delta, cfg.beta0, stat, cfg.require_delta_persistent);

    Ok(HypothesisStats {
        c,
        a_n,
        b_n,
        d_n_stat,
        a_limit,
        delta,
        sigma,
        beta0: cfg.beta0,
        beta1,
        beta2,
        h_used: h_hat,
        m,
        verdict,
        branch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Persistence {
    Antipersistent,
    Independent,
    Persistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Memory {
    Short,
    Independent,
    Long,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseLabel {
    Pink,
    White,
    Black,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub persistence: Persistence,
    pub memory: Memory,
    pub noise: NoiseLabel,
    pub forecastable: bool,
}

pub fn classify(h_hat: f64, verdict: Verdict) -> Classification {
    let (persistence, memory, noise) = if h_hat < 0.5 {
        (Persistence::Antipersistent, Memory::Short, NoiseLabel::Pink)
    } else if h_hat > 0.5 {
        (Persistence::Persistent, Memory::Long, NoiseLabel::Black)
    } else {
        (Persistence::Independent, Memory::Independent, NoiseLabel::White)
    };
    Classification {
        persistence,
        memory,
        noise,
        forecastable: verdict == Verdict::Accepted && h_hat > 0.5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn partial_sum_examples() {
        assert_eq!(partial_sums(&[1.0, -1.0, 1.0]), vec![0.0, 1.0, 0.0]);
        assert_eq!(partial_sums(&[0.0; 4]), vec![0.0; 4]);
        assert_eq!(partial_sums(&[2.0, 3.0]), vec![0.0, 2.0]);
    }

    #[test]
    fn statistic_examples() {
        let z = [1.0, -1.0, 1.0];
        let v = partial_sums(&z);
        assert_abs_diff_eq!(stat_a(&z, &v).unwrap(), -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(stat_b(&z, &v, 0.5).unwrap(), -(3f64.powf(-1.5)), epsilon = 1e-15);
        assert_abs_diff_eq!(stat_b(&z, &v, 0.5).unwrap(), -0.19245, epsilon = 1e-5);
        assert_abs_diff_eq!(stat_d(&z, &v, 0.75).unwrap(), -0.19245, epsilon = 1e-5);
        let zeros = [0.0; 5];
        let v0 = partial_sums(&zeros);
        assert_eq!(stat_a(&zeros, &v0).unwrap(), 0.0);
        assert_eq!(stat_b(&zeros, &v0, 0.3).unwrap(), 0.0);
        assert_eq!(stat_d(&zeros, &v0, 0.7).unwrap(), 0.0);
        assert!(stat_a(&z, &v[..2]).is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = thresholds(1.0, 0.4, 0.1, true);
        assert_abs_diff_eq!(t.beta1, 4.95 / 2.8f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(t.beta1, 2.958, epsilon = 1e-3);
        assert_abs_diff_eq!(t.beta2, 4.08, epsilon = 1e-12);
        let t = thresholds(1.0, 0.4, 0.1, false);
        assert_abs_diff_eq!(t.beta1, 2.9494, epsilon = 1e-3);
        assert_abs_diff_eq!(t.beta1, 3.0 * normal_quantile(0.1) / 2.8f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(t.beta2, 4.0589, epsilon = 1e-3);
        // Bank row: c ≈ 1.003 reproduces the tabulated β₁ = 2.98.
        let t = thresholds(1.003, 0.4, 0.1, true);
        assert!((t.beta1 - 2.98).abs() < 0.01);
    }

    #[test]
    fn derived_coefficients_close_to_published() {
        let q = normal_quantile(0.1);
        assert_abs_diff_eq!(q, 1.6449, epsilon = 1e-4);
        assert!(((3.0 * q) / PUBLISHED_BETA1_COEFF - 1.0).abs() < 0.007);
        assert!(((1.5 * q * q) / PUBLISHED_BETA2_COEFF - 1.0).abs() < 0.007);
    }

    #[test]
    fn quantile_definitions() {
        // β₁: 2(1 − Φ(β₁ c^{−2.5} / (3σ))) = α; β₂: 2Φ(√(2β₂/3)/c) − 1 = 1 − α.
        let n = Normal::standard();
        for (c, h, alpha) in [(1.0, 0.3, 0.1), (2.5, 0.1, 0.05), (0.4, 0.8, 0.2)] {
            let t = thresholds(c, h, alpha, false);
            let sigma = 1.0 / (2.0f64 * h + 2.0).sqrt();
            let p1 = 2.0 * (1.0 - n.cdf(t.beta1 / c.powf(2.5) / (3.0 * sigma)));
            assert_abs_diff_eq!(p1, alpha, epsilon = 1e-9);
            let p2 = 2.0 * n.cdf((2.0 * t.beta2 / 3.0).sqrt() / c) - 1.0;
            assert_abs_diff_eq!(p2, 1.0 - alpha, epsilon = 1e-9);
        }
    }

    #[test]
    fn table_fixtures() {
        // Bank: Ĥ = 0.4, A_n = −1.58, A = −1.57, B_n = 0.22, β₁ = 2.98.
        let d = relative_deviation(-1.58, -1.57);
        assert_abs_diff_eq!(d, 0.0064, epsilon = 1e-4);
        let v = decide(d, 0.1, BranchStatistic::Antipersistent { b_n: 0.22, beta1: 2.98 }, false);
        assert_eq!(v, Verdict::Accepted);
        // Theater: B_n = 3.07 exceeds β₁ = 2.05.
        let d = relative_deviation(-1.59, -1.5);
        let v = decide(d, 0.1, BranchStatistic::Antipersistent { b_n: 3.07, beta1: 2.05 }, false);
        assert_eq!(v, Verdict::Rejected);
        // Textile: A_n = 398.8 against A = −1.5.
        let d = relative_deviation(398.8, -1.5);
        assert!(d > 100.0);
        let v = decide(d, 0.1, BranchStatistic::Antipersistent { b_n: -2.125, beta1: 2.95 }, false);
        assert_eq!(v, Verdict::Rejected);
    }

    #[test]
    fn persistent_branch_rule() {
        let s = BranchStatistic::Persistent { d_n: 1.0, beta2: 4.0 };
        assert_eq!(decide(5.0, 0.1, s, false), Verdict::Accepted);
        assert_eq!(decide(5.0, 0.1, s, true), Verdict::Rejected);
        assert_eq!(decide(0.05, 0.1, s, true), Verdict::Accepted);
        let neg = BranchStatistic::Persistent { d_n: -0.01, beta2: 4.0 };
        assert_eq!(decide(0.0, 0.1, neg, false), Verdict::Rejected);
        let big = BranchStatistic::Persistent { d_n: 4.5, beta2: 4.0 };
        assert_eq!(decide(0.0, 0.1, big, false), Verdict::Rejected);
    }

    #[test]
    fn branch_at_one_half_is_antipersistent() {
        let z: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
        let s = test_hypothesis(&z, 0.5, &HypothesisConfig::default()).unwrap();
        assert_eq!(s.branch, Branch::AntipersistentBranch);
        assert!(s.b_n.is_some() && s.beta1.is_some());
        assert!(s.d_n_stat.is_none() && s.beta2.is_none());
        let s = test_hypothesis(&z, 0.55, &HypothesisConfig::default()).unwrap();
        assert_eq!(s.branch, Branch::PersistentBranch);
        assert!(s.b_n.is_none() && s.beta1.is_none());
        assert!(s.d_n_stat.is_some() && s.beta2.is_some());
    }

    #[test]
    fn stats_invariants() {
        let z: Vec<f64> = (0..100).map(|i| (i as f64 * 1.7).sin()).collect();
        let s = test_hypothesis(&z, 0.3, &HypothesisConfig::default()).unwrap();
        assert_eq!(s.a_limit, -1.5 * s.c * s.c);
        assert_abs_diff_eq!(s.delta, ((s.a_n - s.a_limit) / s.a_limit).abs(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.sigma, 1.0 / 2.6f64.sqrt(), epsilon = 1e-15);
        let th = thresholds(s.c, 0.3, 0.1, false);
        assert_eq!(s.beta1, Some(th.beta1));
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let cfg = HypothesisConfig::default();
        assert!(matches!(
            test_hypothesis(&[0.0; 10], 0.3, &cfg),
            Err(Error::DegenerateSeries(_))
        ));
        assert!(matches!(
            test_hypothesis(&[1.0; 5], 0.3, &cfg),
            Err(Error::InvalidSize { .. })
        ));
        assert!(test_hypothesis(&[1.0; 10], 1.0, &cfg).is_err());
        let bad = HypothesisConfig { alpha: 1.5, ..cfg };
        assert!(matches!(test_hypothesis(&[1.0; 10], 0.3, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn classification_examples() {
        let c = classify(0.4, Verdict::Accepted);
        assert_eq!(c.persistence, Persistence::Antipersistent);
        assert_eq!(c.noise, NoiseLabel::Pink);
        assert_eq!(c.memory, Memory::Short);
        assert!(!c.forecastable);
        let c = classify(0.7, Verdict::Accepted);
        assert_eq!(
            (c.persistence, c.noise, c.memory, c.forecastable),
            (Persistence::Persistent, NoiseLabel::Black, Memory::Long, true)
        );
        let c = classify(0.7, Verdict::Rejected);
        assert_eq!(c.persistence, Persistence::Persistent);
        assert!(!c.forecastable);
        assert_eq!(classify(0.5, Verdict::Accepted).memory, Memory::Independent);
    }

    proptest! {
        #[test]
        fn telescoping(z in prop::collection::vec(-100.0f64..100.0, 1..200)) {
            let v = partial_sums(&z);
            prop_assert_eq!(v[0], 0.0);
            for k in 0..z.len() - 1 {
                prop_assert!((v[k + 1] - v[k] - z[k]).abs() <= 1e-9 * (1.0 + v[k].abs()));
            }
        }

        #[test]
        fn scale_equivariance(
            z in prop::collection::vec(-3.0f64..3.0, 16..128),
            a in prop::sample::select(vec![1e-3, 0.5, 1.0, 3.0, 1e3]),
            h in prop::sample::select(vec![0.2, 0.45, 0.6, 0.85]),
        ) {
            prop_assume!(z.iter().any(|x| x.abs() > 1e-3));
            let cfg = HypothesisConfig::default();
            let za: Vec<f64> = z.iter().map(|x| a * x).collect();
            let s = test_hypothesis(&z, h, &cfg).unwrap();
            let t = test_hypothesis(&za, h, &cfg).unwrap();
            let rel = |x: f64, y: f64| (x - y).abs() <= 1e-10 * x.abs().max(y.abs()).max(1e-300);
            prop_assert!(rel(t.c, a.powi(2) * s.c));
            prop_assert!(rel(t.a_n, a.powi(4) * s.a_n));
            if let (Some(b1), Some(b0)) = (t.b_n, s.b_n) { prop_assert!(rel(b1, a.powi(5) * b0)); }
            if let (Some(d1), Some(d0)) = (t.d_n_stat, s.d_n_stat) { prop_assert!(rel(d1, a.powi(4) * d0)); }
            prop_assert!((t.delta - s.delta).abs() <= 1e-9 * s.delta.max(1.0));
            prop_assert_eq!(t.verdict, s.verdict);
        }
    }
}
