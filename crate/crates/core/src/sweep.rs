//! Parameter sweeps behind the sensitivity figures.
//!
//! Each sweep returns plain rows (serializable to CSV) so that the caller
//! decides where they go. Every point of a sweep uses the same master seed.

use serde::{Deserialize, Serialize};

use crate::channels::{DephasingConfig, DepolarizationConfig, NoiseConfig};
use crate::dicke::DEFAULT_EXACT_CAP;
use crate::error::Result;
use crate::protocol::{SamplerMode, TrialConfig};
use crate::schedule::{
    predicted_variance, repeat_prefactor, truncate_for_depolarization, with_repeats, Schedule,
    ScheduleMode,
};
use crate::stats::{fit_slope, run_ensemble_with_workers, EnsembleConfig, EnsembleStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub trials: usize,
    pub seed: u64,
    pub sampler: SamplerMode,
    pub mode: ScheduleMode,
    pub exact_cap: usize,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            trials: crate::stats::DEFAULT_TRIALS,
            seed: 0,
            sampler: SamplerMode::Auto,
            mode: ScheduleMode::RecursiveNumeric,
            exact_cap: DEFAULT_EXACT_CAP,
            workers: None,
        }
    }
}

impl SweepOptions {
    fn ensemble(
        &self,
        schedule: Schedule,
        noise: NoiseConfig,
        fluctuating_n: bool,
    ) -> Result<EnsembleStats> {
        let base = TrialConfig::new(schedule, 0.0)
            .with_sampler(self.sampler)
            .with_noise(noise)
            .with_fluctuating_n(fluctuating_n)
            .with_exact_cap(self.exact_cap);
        let cfg = EnsembleConfig::new(base)
            .with_trials(self.trials)
            .with_seed(self.seed);
        Ok(run_ensemble_with_workers(&cfg, self.workers)?.stats)
    }
}

/// Sensitivity versus total resources at fixed `N_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n0: u64,
    pub k: usize,
    pub n_total: u64,
    pub mean_n_total: f64,
    pub rms: f64,
    pub rms_err: f64,
    pub nt_times_delta: f64,
    pub nt_times_delta_err: f64,
    pub predicted_nt_times_delta: f64,
    pub bias_z: f64,
}

fn scaling_row(n0: u64, stats: &EnsembleStats) -> ScalingRow {
    ScalingRow {
        n0,
        k: stats.k_max,
        n_total: stats.n_total,
        mean_n_total: stats.mean_n_total,
        rms: stats.rms_sensitivity,
        rms_err: stats.rms_err,
        nt_times_delta: stats.nt_times_delta,
        nt_times_delta_err: stats.rms_err * stats.mean_n_total,
        predicted_nt_times_delta: stats.predicted_delta * stats.n_total as f64,
        bias_z: stats.gaussianity.bias_z,
    }
}

/// `N_T * Delta theta` for `K = 0..=k_max` and each `N_0`.
pub fn scaling_sweep(
    n0s: &[u64],
    k_max: usize,
    fluctuating_n: bool,
    opts: &SweepOptions,
) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for &n0 in n0s {
        for k in 0..=k_max {
            let schedule = Schedule::new(opts.mode, n0, k)?;
            let stats = opts.ensemble(schedule, NoiseConfig::None, fluctuating_n)?;
            rows.push(scaling_row(n0, &stats));
        }
    }
    Ok(rows)
}

/// One point of an error-probability curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorProbRow {
    pub k: usize,
    pub n_total: u64,
    pub x: f64,
    pub epsilon: f64,
    pub empirical: f64,
    pub predicted: f64,
}

/// Error-probability curves for several `K` at fixed `N_0`.
pub fn error_probability_sweep(
    n0: u64,
    ks: &[usize],
    opts: &SweepOptions,
) -> Result<Vec<ErrorProbRow>> {
    let mut rows = Vec::new();
    for &k in ks {
        let stats = opts.ensemble(Schedule::new(opts.mode, n0, k)?, NoiseConfig::None, false)?;
        rows.extend(stats.error_prob_curve.iter().map(|p| ErrorProbRow {
            k,
            n_total: stats.n_total,
            x: p.x,
            epsilon: p.epsilon,
            empirical: p.empirical,
            predicted: p.predicted,
        }));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DephasingRow {
    pub gamma: f64,
    pub k: usize,
    pub n_total: u64,
    pub rms: f64,
    pub rms_err: f64,
    pub nt_times_delta: f64,
    pub nt_times_delta_err: f64,
    pub predicted_nt_times_delta: f64,
}

/// `N_T * Delta theta` under collective dephasing for each `gamma`.
pub fn dephasing_sweep(
    gammas: &[f64],
    n0: u64,
    k_max: usize,
    opts: &SweepOptions,
) -> Result<Vec<DephasingRow>> {
    let mut rows = Vec::new();
    for &gamma in gammas {
        let noise = NoiseConfig::Dephasing(DephasingConfig::new(gamma)?);
        for k in 0..=k_max {
            let schedule = Schedule::new(opts.mode, n0, k)?.with_noise(noise)?;
            let stats = opts.ensemble(schedule, noise, false)?;
            rows.push(DephasingRow {
                gamma,
                k,
                n_total: stats.n_total,
                rms: stats.rms_sensitivity,
                rms_err: stats.rms_err,
                nt_times_delta: stats.nt_times_delta,
                nt_times_delta_err: stats.rms_err * stats.mean_n_total,
                predicted_nt_times_delta: stats.predicted_delta * stats.n_total as f64,
            });
        }
    }
    Ok(rows)
}

/// Predicted `N_T * Delta theta` under dephasing, without sampling.
pub fn predicted_dephasing_curve(
    gamma: f64,
    n0: u64,
    k_max: usize,
    mode: ScheduleMode,
) -> Result<Vec<f64>> {
    let noise = NoiseConfig::Dephasing(DephasingConfig::new(gamma)?);
    (0..=k_max)
        .map(|k| {
            let s = Schedule::new(mode, n0, k)?.with_noise(noise)?;
            Ok(predicted_variance(&s)?.final_delta * s.n_total as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepolarizationRow {
    pub epsilon: f64,
    /// Length of the noiseless schedule whose budget is spent.
    pub k: usize,
    pub k_tilde: usize,
    pub repeats: usize,
    pub n_total: u64,
    pub rms: f64,
    pub rms_err: f64,
    pub nt_times_delta: f64,
    pub sqrt_nt_times_delta: f64,
    pub predicted_nt_times_delta: f64,
    /// Noiseless ensemble on the untruncated `K` schedule.
    pub noiseless_nt_times_delta: f64,
    pub noiseless_nt_times_delta_err: f64,
}

/// Large-budget prefactor of `Delta theta = beta / sqrt(N_T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub epsilon: f64,
    pub k_tilde: usize,
    pub repeats: usize,
    pub n_total: u64,
    pub beta: f64,
    pub beta_err: f64,
    pub beta_predicted: f64,
}

/// Per-`K` depolarized runs (truncated at the squeezing floor, remaining
/// budget spent on repeats) next to noiseless references.
pub fn depolarization_sweep(
    epsilons: &[f64],
    n0: u64,
    k_max: usize,
    opts: &SweepOptions,
) -> Result<Vec<DepolarizationRow>> {
    let mut rows = Vec::new();
    let mut noiseless = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        noiseless.push(opts.ensemble(
            Schedule::new(opts.mode, n0, k)?,
            NoiseConfig::None,
            false,
        )?);
    }
    for &eps in epsilons {
        let noise = NoiseConfig::Depolarization(DepolarizationConfig::new(eps)?);
        for (k, reference) in noiseless.iter().enumerate() {
            let schedule = truncate_for_depolarization(&Schedule::new(opts.mode, n0, k)?, eps)?;
            let (k_tilde, repeats) = (schedule.k_max, schedule.repeats);
            let stats = opts.ensemble(schedule, noise, false)?;
            rows.push(DepolarizationRow {
                epsilon: eps,
                k,
                k_tilde,
                repeats,
                n_total: stats.n_total,
                rms: stats.rms_sensitivity,
                rms_err: stats.rms_err,
                nt_times_delta: stats.nt_times_delta,
                sqrt_nt_times_delta: stats.rms_sensitivity * stats.mean_n_total.sqrt(),
                predicted_nt_times_delta: stats.predicted_delta * stats.n_total as f64,
                noiseless_nt_times_delta: reference.nt_times_delta,
                noiseless_nt_times_delta_err: reference.rms_err * reference.mean_n_total,
            });
        }
    }
    Ok(rows)
}

/// Cascade length used to locate the truncation step for the asymptote.
const LONG_CASCADE: usize = 14;

/// `beta` from ensembles dominated by `repeats` copies of the last useful step.
pub fn beta_sweep(
    epsilons: &[f64],
    n0: u64,
    repeats: usize,
    opts: &SweepOptions,
) -> Result<Vec<BetaRow>> {
    let mut rows = Vec::new();
    for &eps in epsilons {
        let noise = NoiseConfig::Depolarization(DepolarizationConfig::new(eps)?);
        let long = Schedule::new(opts.mode, n0, LONG_CASCADE)?;
        let truncated = with_repeats(&truncate_for_depolarization(&long, eps)?, repeats)?;
        let beta_predicted = repeat_prefactor(&truncated)?;
        let k_tilde = truncated.k_max;
        let stats = opts.ensemble(truncated, noise, false)?;
        let root = stats.mean_n_total.sqrt();
        rows.push(BetaRow {
            epsilon: eps,
            k_tilde,
            repeats,
            n_total: stats.n_total,
            beta: stats.rms_sensitivity * root,
            beta_err: stats.rms_err * root,
            beta_predicted,
        });
    }
    Ok(rows)
}

/// Fit of `beta = c * E^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    /// `c` with the exponent fixed at `1/4`.
    pub c_quarter: f64,
    /// Free log-log slope.
    pub slope: f64,
    /// Prefactor of the free fit.
    pub c_free: f64,
}

pub fn fit_beta(epsilons: &[f64], betas: &[f64]) -> BetaFit {
    let lx: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = betas.iter().map(|b| b.ln()).collect();
    let n = lx.len() as f64;
    let c_quarter = (ly.iter().zip(&lx).map(|(y, x)| y - 0.25 * x).sum::<f64>() / n).exp();
    let slope = fit_slope(&lx, &ly);
    let intercept = ly.iter().sum::<f64>() / n - slope * lx.iter().sum::<f64>() / n;
    BetaFit {
        c_quarter,
        slope,
        c_free: intercept.exp(),
    }
}
