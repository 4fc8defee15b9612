//! Ensembles of trials and their statistics.
//!
//! Every trial gets its own generator seeded from `(master_seed, index)`, so
//! results do not depend on how trials are scheduled across threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::protocol::{Protocol, TrialConfig, TrialResult};
use crate::schedule::predicted_variance;

/// How the true phase is chosen per trial.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "theta", rename_all = "snake_case")]
pub enum ThetaMode {
    /// Flat in `[-pi, pi)`.
    #[default]
    Uniform,
    Fixed(f64),
}

pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub trials: usize,
    pub theta_mode: ThetaMode,
    pub base: TrialConfig,
    pub master_seed: u64,
}

impl EnsembleConfig {
    pub fn new(base: TrialConfig) -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            theta_mode: ThetaMode::Uniform,
            base,
            master_seed: 0,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_theta(mut self, mode: ThetaMode) -> Self {
        self.theta_mode = mode;
        self
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master_seed`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    mix64(mix64(master_seed).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
        let mut counts = vec![0u64; bins];
        let (mut underflow, mut overflow) = (0, 0);
        for &v in values {
            if v < lo {
                underflow += 1;
            } else if v >= hi {
                overflow += 1;
            } else {
                let b = (((v - lo) / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
        }
        Self {
            edges,
            counts,
            underflow,
            overflow,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }
}

/// One point of the error-probability curve on the axis `x = eps N_T / 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorProbPoint {
    pub x: f64,
    pub epsilon: f64,
    /// Fraction of trials with `|residual| >= epsilon`.
    pub empirical: f64,
    /// `1 - erf(x / sqrt 2)`.
    pub predicted: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianityReport {
    pub bias_z: f64,
    /// Kolmogorov–Smirnov distance to `Normal(0, rms^2)`.
    pub ks: f64,
    pub bias_ok: bool,
    pub ks_ok: bool,
}

impl GaussianityReport {
    pub fn passes(&self) -> bool {
        self.bias_ok && self.ks_ok
    }
}

pub const BIAS_Z_MAX: f64 = 3.0;
pub const KS_MAX: f64 = 0.03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub trials: usize,
    #[serde(rename = "K")]
    pub k_max: usize,
    /// Nominal total number of qubits.
    pub n_total: u64,
    /// Average number of qubits actually used per trial.
    pub mean_n_total: f64,
    pub rms_sensitivity: f64,
    /// Standard error of `rms_sensitivity` (delta method).
    pub rms_err: f64,
    pub bias: f64,
    pub bias_se: f64,
    /// `mean_n_total * rms_sensitivity`.
    pub nt_times_delta: f64,
    /// Prediction of the variance recursion for the same schedule and noise.
    pub predicted_delta: f64,
    pub histogram: Histogram,
    pub error_prob_curve: Vec<ErrorProbPoint>,
    pub gaussianity: GaussianityReport,
    /// Median `|theta_k|` entering each cascade step.
    pub median_abs_residual_phase: Vec<f64>,
}

/// Trials together with their statistics.
#[derive(Debug, Clone)]
pub struct EnsembleOutcome {
    pub stats: EnsembleStats,
    pub results: Vec<TrialResult>,
}

impl EnsembleOutcome {
    pub fn residuals(&self) -> Vec<f64> {
        self.results.iter().map(|r| r.residual).collect()
    }
}

fn run_one(protocol: &Protocol, cfg: &EnsembleConfig, index: usize) -> Result<TrialResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.master_seed, index as u64));
    let theta = match cfg.theta_mode {
        ThetaMode::Uniform => rng.random_range(-PI..PI),
        ThetaMode::Fixed(t) => t,
    };
    protocol
        .run_with_rng(theta, &mut rng)
        .map_err(|e| Error::Trial {
            index,
            source: Box::new(e),
        })
}

/// Runs the ensemble on the global thread pool.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleOutcome> {
    run_ensemble_with_workers(cfg, None)
}

/// Runs the ensemble on `workers` threads (global pool when `None`).
pub fn run_ensemble_with_workers(
    cfg: &EnsembleConfig,
    workers: Option<usize>,
) -> Result<EnsembleOutcome> {
    if cfg.trials < 2 {
        return Err(Error::invalid("an ensemble needs at least 2 trials"));
    }
    if let ThetaMode::Fixed(t) = cfg.theta_mode {
        if !(-PI..PI).contains(&t) {
            return Err(Error::invalid(format!("theta = {t} is outside [-pi, pi)")));
        }
    }
    let protocol = Protocol::new(&cfg.base)?;
    let work = || -> Vec<Result<TrialResult>> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_one(&protocol, cfg, i))
            .collect()
    };
    let outcomes = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let results = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let stats = summarize(cfg, &results)?;
    Ok(EnsembleOutcome { stats, results })
}

/// Default `x = eps N_T / 4` grid: `0, 0.05, ..., 3`.
pub fn default_x_grid() -> Vec<f64> {
    (0..=60).map(|i| i as f64 * 0.05).collect()
}

fn summarize(cfg: &EnsembleConfig, results: &[TrialResult]) -> Result<EnsembleStats> {
    let residuals: Vec<f64> = results.iter().map(|r| r.residual).collect();
    let count = residuals.len() as f64;
    let schedule = &cfg.base.schedule;

    let sq: Vec<f64> = residuals.iter().map(|r| r * r).collect();
    let ms = sq.iter().sum::<f64>() / count;
    let rms = ms.sqrt();
    let var_sq = sq.iter().map(|s| (s - ms).powi(2)).sum::<f64>() / (count - 1.0);
    let rms_err = if rms > 0.0 {
        (var_sq / count).sqrt() / (2.0 * rms)
    } else {
        0.0
    };

    let bias = residuals.iter().sum::<f64>() / count;
    let sample_var = residuals.iter().map(|r| (r - bias).powi(2)).sum::<f64>() / (count - 1.0);
    let bias_se = (sample_var / count).sqrt();

    let mean_n_total = results
        .iter()
        .map(|r| r.per_step.iter().map(|s| s.n).sum::<u64>() as f64)
        .sum::<f64>()
        / count;

    let mut noisy = schedule.clone();
    noisy.noise = cfg.base.noise;
    let predicted_delta = predicted_variance(&noisy)?.final_delta;

    let histogram = if rms > 0.0 {
        Histogram::new(&residuals, -5.0 * rms, 5.0 * rms, 50)
    } else {
        Histogram::new(&residuals, -1e-12, 1e-12, 1)
    };

    let cascade_steps = schedule.steps.len();
    let median_abs_residual_phase = (0..cascade_steps)
        .map(|k| {
            let mut v: Vec<f64> = results
                .iter()
                .map(|r| {
                    let t = r.per_step[k].theta_k;
                    if k == 0 {
                        2.0 * t.abs()
                    } else {
                        t.abs()
                    }
                })
                .collect();
            median(&mut v)
        })
        .collect();

    Ok(EnsembleStats {
        trials: results.len(),
        k_max: schedule.k_max,
        n_total: schedule.n_total,
        mean_n_total,
        rms_sensitivity: rms,
        rms_err,
        bias,
        bias_se,
        nt_times_delta: mean_n_total * rms,
        predicted_delta,
        histogram,
        error_prob_curve: error_probability_curve(&residuals, mean_n_total, &default_x_grid()),
        gaussianity: gaussianity_check(&residuals),
        median_abs_residual_phase,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Empirical `P(|residual| >= eps)` with `eps = 4 x / N_T`, next to
/// `1 - erf(x / sqrt 2)`.
pub fn error_probability_curve(
    residuals: &[f64],
    n_total: f64,
    x_grid: &[f64],
) -> Vec<ErrorProbPoint> {
    let mut abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
    abs.sort_by(|a, b| a.total_cmp(b));
    let count = abs.len() as f64;
    x_grid
        .iter()
        .map(|&x| {
            let epsilon = 4.0 * x / n_total;
            let below = abs.partition_point(|&a| a < epsilon);
            ErrorProbPoint {
                x,
                epsilon,
                empirical: (abs.len() - below) as f64 / count,
                predicted: 1.0 - erf(x / std::f64::consts::SQRT_2),
            }
        })
        .collect()
}

/// Largest gap between empirical and predicted exceedance.
pub fn max_curve_deviation(curve: &[ErrorProbPoint]) -> f64 {
    curve
        .iter()
        .map(|p| (p.empirical - p.predicted).abs())
        .fold(0.0, f64::max)
}

/// Largest gap between two empirical curves on the same grid.
pub fn max_curve_gap(a: &[ErrorProbPoint], b: &[ErrorProbPoint]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p.empirical - q.empirical).abs())
        .fold(0.0, f64::max)
}

/// Kolmogorov–Smirnov distance between the sample and `Normal(0, sigma^2)`.
pub fn ks_distance_normal(values: &[f64], sigma: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    let dist = Normal::new(0.0, sigma).expect("positive sigma");
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = dist.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Bias z-score and KS distance to `Normal(0, rms^2)`.
pub fn gaussianity_check(residuals: &[f64]) -> GaussianityReport {
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let var = residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    let bias_z = if var > 0.0 {
        mean / (var / n).sqrt()
    } else {
        0.0
    };
    let ks = if rms > 0.0 {
        ks_distance_normal(residuals, rms)
    } else {
        1.0
    };
    GaussianityReport {
        bias_z,
        ks,
        bias_ok: bias_z.abs() <= BIAS_Z_MAX,
        ks_ok: ks <= KS_MAX,
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
