//! One run of the adaptive phase-estimation cascade.
//!
//! Step 0 measures a coherent state that picked up half the phase and
//! estimates `2 asin(2 mu / N_0)`. Every later step prepares a Gaussian spin
//! state, is rotated by the residual `theta - sum(previous estimates)`, and
//! estimates `asin(mu / <J_x>)`. The final estimate is the sum of the step
//! estimates.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::channels::{
    dephase_moments_with, depolarize_moments, fourier_coefficients, sample_dephasing_angle,
    sample_depolarized_outcome, sample_index, DephasingConfig, DepolarizationConfig,
    FourierCoefficients, NoiseConfig,
};
use crate::dicke::{
    analytic_moments_unchecked, make_coherent_state, make_gss_with, spin_moments_exact,
    GaussianStateSpec, JxEigenbasis, SpinMoments, StateVector, DEFAULT_EXACT_CAP,
};
use crate::error::{Error, Result};
use crate::schedule::{predicted_variance, step_variance, Schedule, ScheduleMode};

/// How measurement outcomes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    /// Full outcome distribution of the state vector.
    Exact,
    /// Normal approximation from the first two moments, rounded to the grid.
    Gaussian,
    /// Exact up to the dimension cap, Gaussian above it.
    #[default]
    Auto,
}

impl fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerMode::Exact => "exact",
            SamplerMode::Gaussian => "gaussian",
            SamplerMode::Auto => "auto",
        })
    }
}

impl FromStr for SamplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(SamplerMode::Exact),
            "gaussian" | "gauss" => Ok(SamplerMode::Gaussian),
            "auto" => Ok(SamplerMode::Auto),
            other => Err(Error::invalid(format!(
                "unknown sampler '{other}' (expected exact, gaussian or auto)"
            ))),
        }
    }
}

fn default_exact_cap() -> usize {
    DEFAULT_EXACT_CAP
}

fn default_fluctuation_scale() -> f64 {
    1.0
}

/// Everything needed to run one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub schedule: Schedule,
    pub theta_true: f64,
    #[serde(default)]
    pub sampler: SamplerMode,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub fluctuating_n: bool,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: usize,
    /// Standard deviation of the particle number in units of `sqrt(N_k)`
    /// when `fluctuating_n` is set.
    #[serde(default = "default_fluctuation_scale")]
    pub n_fluctuation_scale: f64,
}

impl TrialConfig {
    pub fn new(schedule: Schedule, theta_true: f64) -> Self {
        Self {
            schedule,
            theta_true,
            sampler: SamplerMode::Auto,
            noise: NoiseConfig::None,
            fluctuating_n: false,
            rng_seed: 0,
            exact_cap: DEFAULT_EXACT_CAP,
            n_fluctuation_scale: 1.0,
        }
    }

    pub fn with_sampler(mut self, sampler: SamplerMode) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_noise(mut self, noise: NoiseConfig) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_fluctuating_n(mut self, on: bool) -> Self {
        self.fluctuating_n = on;
        self
    }

    pub fn with_exact_cap(mut self, cap: usize) -> Self {
        self.exact_cap = cap;
        self
    }
}

/// One measurement within a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    /// Particle number actually used (differs from nominal with fluctuating N).
    pub n: u64,
    /// Phase seen by this step's state (half the phase at `k = 0`).
    pub theta_k: f64,
    pub mu: f64,
    /// Contribution of this measurement to the final estimate.
    pub theta_est: f64,
    /// Set for the extra measurements of a noise-truncated schedule.
    #[serde(default)]
    pub repeat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub theta_true: f64,
    pub per_step: Vec<StepRecord>,
    pub theta_est_final: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StateKind {
    Coherent,
    Squeezed,
}

#[derive(Debug)]
struct ExactStep {
    basis: JxEigenbasis,
    state: StateVector,
    clean: SpinMoments,
}

#[derive(Debug)]
struct PreparedStep {
    k: usize,
    n: u64,
    s_sq: f64,
    kind: StateKind,
    noisy: bool,
    /// Moments the estimator assumes (noise applied where relevant).
    estimator_moments: SpinMoments,
    exact: Option<ExactStep>,
}

/// Precomputed per-step data shared by every trial of one configuration.
#[derive(Debug)]
pub struct Protocol {
    sampler: SamplerMode,
    noise: NoiseConfig,
    fourier: Option<FourierCoefficients>,
    fluctuating_n: bool,
    n_fluctuation_scale: f64,
    exact_cap: usize,
    steps: Vec<PreparedStep>,
    repeat: Option<PreparedStep>,
    repeats: usize,
    cascade_var: f64,
}

impl Protocol {
    pub fn new(cfg: &TrialConfig) -> Result<Self> {
        let schedule = &cfg.schedule;
        if schedule.steps.is_empty() {
            return Err(Error::invalid("schedule has no steps"));
        }
        if schedule.steps[0].n < 2 {
            return Err(Error::invalid("N_0 must be at least 2"));
        }
        for (i, step) in schedule.steps.iter().enumerate() {
            if step.k != i || step.n < 2 || !(step.s > 0.0) || !step.s.is_finite() {
                return Err(Error::invalid(format!("malformed schedule step {i}")));
            }
        }
        if !(cfg.n_fluctuation_scale >= 0.0) {
            return Err(Error::invalid(
                "particle-number fluctuation scale must be >= 0",
            ));
        }
        if cfg.sampler == SamplerMode::Exact {
            if let Some(big) = schedule
                .steps
                .iter()
                .skip(1)
                .find(|s| s.n as usize > cfg.exact_cap)
            {
                return Err(Error::ExceedsExactCap {
                    dim: big.n as usize + 1,
                    cap: cfg.exact_cap + 1,
                });
            }
        }
        let fourier = match cfg.noise {
            NoiseConfig::Dephasing(d) => Some(fourier_coefficients(&d)),
            _ => None,
        };
        let mut proto = Protocol {
            sampler: cfg.sampler,
            noise: cfg.noise,
            fourier,
            fluctuating_n: cfg.fluctuating_n,
            n_fluctuation_scale: cfg.n_fluctuation_scale,
            exact_cap: cfg.exact_cap,
            steps: Vec::with_capacity(schedule.steps.len()),
            repeat: None,
            repeats: schedule.repeats,
            cascade_var: f64::NAN,
        };
        for step in &schedule.steps {
            let kind = if step.k == 0 {
                StateKind::Coherent
            } else {
                StateKind::Squeezed
            };
            let prepared = proto.prepare(step.k, step.n, step.s_sq(), kind, step.k > 0)?;
            proto.steps.push(prepared);
        }
        if schedule.repeats > 0 {
            let last = schedule.last();
            let kind = if last.k == 0 {
                StateKind::Coherent
            } else {
                StateKind::Squeezed
            };
            proto.repeat = Some(proto.prepare(last.k, last.n, last.s_sq(), kind, true)?);
            let mut noisy = schedule.clone();
            noisy.noise = cfg.noise;
            noisy.repeats = 0;
            proto.cascade_var = *predicted_variance(&noisy)?
                .per_step_var
                .last()
                .expect("non-empty schedule");
        }
        Ok(proto)
    }

    fn uses_exact(&self, kind: StateKind, n: u64) -> bool {
        match self.sampler {
            SamplerMode::Gaussian => false,
            // coherent states are sampled exactly by the binomial law
            _ if kind == StateKind::Coherent => true,
            SamplerMode::Exact => true,
            SamplerMode::Auto => n as usize <= self.exact_cap,
        }
    }

    fn transform(&self, m: &SpinMoments) -> Result<SpinMoments> {
        match (&self.noise, &self.fourier) {
            (NoiseConfig::Dephasing(_), Some(c)) => dephase_moments_with(m, c),
            (NoiseConfig::Depolarization(d), _) => Ok(depolarize_moments(m, d, m.n_qubits as f64)),
            _ => Ok(*m),
        }
    }

    fn clean_moments(kind: StateKind, n: u64, s_sq: f64) -> SpinMoments {
        let nf = n as f64;
        match kind {
            StateKind::Coherent => SpinMoments {
                n_qubits: n as usize,
                jx: 0.5 * nf,
                jy: 0.0,
                jz: 0.0,
                jx2: 0.25 * nf * nf,
                jy2: 0.25 * nf,
                jz2: 0.25 * nf,
            },
            StateKind::Squeezed => analytic_moments_unchecked(nf, s_sq * nf, n as usize),
        }
    }

    fn prepare(
        &self,
        k: usize,
        n: u64,
        s_sq: f64,
        kind: StateKind,
        noisy: bool,
    ) -> Result<PreparedStep> {
        let exact = if kind == StateKind::Squeezed && self.uses_exact(kind, n) {
            Some(build_exact(n, s_sq, self.exact_cap.max(n as usize))?)
        } else {
            None
        };
        let clean = match &exact {
            Some(e) => e.clean,
            None => Self::clean_moments(kind, n, s_sq),
        };
        let estimator_moments = if noisy {
            self.transform(&clean)?
        } else {
            clean
        };
        if !(estimator_moments.jx > 0.0) {
            return Err(Error::Numerical {
                step: k,
                msg: format!("non-positive <J_x> = {}", estimator_moments.jx),
            });
        }
        Ok(PreparedStep {
            k,
            n,
            s_sq,
            kind,
            noisy,
            estimator_moments,
            exact,
        })
    }

    /// Runs the cascade (and any repeats) for one phase and seed.
    pub fn run(&self, theta_true: f64, seed: u64) -> Result<TrialResult> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.run_with_rng(theta_true, &mut rng)
    }

    pub fn run_with_rng<R: Rng + ?Sized>(
        &self,
        theta_true: f64,
        rng: &mut R,
    ) -> Result<TrialResult> {
        if !(-std::f64::consts::PI..std::f64::consts::PI).contains(&theta_true) {
            return Err(Error::invalid(format!(
                "theta = {theta_true} is outside [-pi, pi)"
            )));
        }
        let mut per_step = Vec::with_capacity(self.steps.len() + self.repeats);
        let mut estimate = 0.0;
        for step in &self.steps {
            let n_true = self.draw_particle_number(step.n, rng);
            let record = if step.k == 0 {
                let theta_k = 0.5 * theta_true;
                let mu = self.sample(step, n_true, theta_k, rng)?;
                StepRecord {
                    k: 0,
                    n: n_true,
                    theta_k,
                    mu,
                    theta_est: estimate_step(mu, 0.5 * step.n as f64, true),
                    repeat: false,
                }
            } else {
                let theta_k = theta_true - estimate;
                let mu = self.sample(step, n_true, theta_k, rng)?;
                StepRecord {
                    k: step.k,
                    n: n_true,
                    theta_k,
                    mu,
                    theta_est: estimate_step(mu, step.estimator_moments.jx, false),
                    repeat: false,
                }
            };
            estimate += record.theta_est;
            per_step.push(record);
        }

        if let Some(rep) = &self.repeat {
            let m = &rep.estimator_moments;
            let mut var = self.cascade_var;
            for _ in 0..self.repeats {
                let n_true = self.draw_particle_number(rep.n, rng);
                let theta_k = theta_true - estimate;
                let mu = self.sample(rep, n_true, theta_k, rng)?;
                let delta = estimate_step(mu, m.jx, false);
                let single = step_variance(m, var);
                let weight = var / (var + single);
                var = var * single / (var + single);
                let theta_est = weight * delta;
                estimate += theta_est;
                per_step.push(StepRecord {
                    k: rep.k,
                    n: n_true,
                    theta_k,
                    mu,
                    theta_est,
                    repeat: true,
                });
            }
        }

        if !estimate.is_finite() {
            return Err(Error::Numerical {
                step: per_step.len().saturating_sub(1),
                msg: "estimate is not finite".into(),
            });
        }
        Ok(TrialResult {
            theta_true,
            per_step,
            theta_est_final: estimate,
            residual: estimate - theta_true,
        })
    }

    fn draw_particle_number<R: Rng + ?Sized>(&self, nominal: u64, rng: &mut R) -> u64 {
        if !self.fluctuating_n || self.n_fluctuation_scale == 0.0 {
            return nominal;
        }
        let sd = self.n_fluctuation_scale * (nominal as f64).sqrt();
        let draw = Normal::new(nominal as f64, sd)
            .expect("finite standard deviation")
            .sample(rng);
        draw.round().max(2.0) as u64
    }

    fn sample<R: Rng + ?Sized>(
        &self,
        step: &PreparedStep,
        n_true: u64,
        theta_k: f64,
        rng: &mut R,
    ) -> Result<f64> {
        let noise = if step.noisy {
            self.noise
        } else {
            NoiseConfig::None
        };
        if step.kind == StateKind::Coherent && self.uses_exact(step.kind, n_true) {
            return Ok(sample_coherent(n_true, theta_k, &noise, rng));
        }
        if step.kind == StateKind::Squeezed && self.uses_exact(step.kind, n_true) {
            let mu = if n_true == step.n {
                let exact = step.exact.as_ref().expect("exact step prepared");
                sample_exact(exact, theta_k, &noise, rng)
            } else {
                let cap = self.exact_cap.max(n_true as usize);
                let exact = build_exact(n_true, step.s_sq, cap)?;
                sample_exact(&exact, theta_k, &noise, rng)
            };
            return Ok(mu);
        }
        let clean = Self::clean_moments(step.kind, n_true, step.s_sq);
        let moments = if step.noisy {
            self.transform(&clean)?
        } else {
            clean
        };
        Ok(sample_gaussian(&moments, theta_k, rng))
    }
}

fn build_exact(n: u64, s_sq: f64, cap: usize) -> Result<ExactStep> {
    let n = n as usize;
    let basis = JxEigenbasis::with_cap(n, cap)?;
    let state = make_gss_with(&GaussianStateSpec::new(n, s_sq.sqrt())?, &basis)?;
    let clean = spin_moments_exact(&state);
    Ok(ExactStep {
        basis,
        state,
        clean,
    })
}

/// Estimate from a single outcome: `asin(mu / <J_x>)`, or `2 asin(2 mu / N_0)`
/// at the zeroth step (pass `N_0 / 2` as `jx_expected`). Ratios outside
/// `[-1, 1]` are clamped.
pub fn estimate_step(mu: f64, jx_expected: f64, is_zeroth: bool) -> f64 {
    let ratio = (mu / jx_expected).clamp(-1.0, 1.0);
    if is_zeroth {
        2.0 * ratio.asin()
    } else {
        ratio.asin()
    }
}

/// Outcome of a coherent state of `n` qubits rotated by `theta_k`.
///
/// A rotated product state gives a binomial count with success probability
/// `(1 + sin theta_k) / 2`.
fn sample_coherent<R: Rng + ?Sized>(n: u64, theta_k: f64, noise: &NoiseConfig, rng: &mut R) -> f64 {
    let half = 0.5 * n as f64;
    if let NoiseConfig::Depolarization(d) = noise {
        if d.epsilon > 0.0 && rng.random::<f64>() < d.epsilon {
            return rng.random_range(0..=n) as f64 - half;
        }
    }
    let signal = match noise {
        NoiseConfig::Dephasing(d) => tilted_readout(d, theta_k, rng),
        _ => theta_k.sin(),
    };
    let p = (0.5 * (1.0 + signal)).clamp(0.0, 1.0);
    let count = Binomial::new(n, p)
        .expect("probability in [0, 1]")
        .sample(rng);
    count as f64 - half
}

/// Readout Bloch component of a coherent state after a random y-rotation.
///
/// The rotation tilts the polarization in the x-z plane to length `cos phi`
/// along x; the product state keeps binomial statistics.
fn tilted_readout<R: Rng + ?Sized>(cfg: &DephasingConfig, theta_k: f64, rng: &mut R) -> f64 {
    sample_dephasing_angle(cfg, rng).cos() * theta_k.sin()
}

/// Normal draw from the readout moments, rounded to the outcome grid.
pub fn sample_gaussian<R: Rng + ?Sized>(m: &SpinMoments, theta_k: f64, rng: &mut R) -> f64 {
    let mean = m.readout_mean(theta_k);
    let sd = m.readout_variance(theta_k).max(0.0).sqrt();
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    round_to_grid(mean + sd * z, m.n_qubits)
}

/// Nearest valid `mu` in `{-N/2, ..., N/2}`.
pub fn round_to_grid(x: f64, n: usize) -> f64 {
    let half = 0.5 * n as f64;
    let index = (x + half).round().clamp(0.0, n as f64);
    index - half
}

/// Probability mass allowed outside the readout window before falling back to
/// the full distribution.
const WINDOW_LEAK: f64 = 1e-10;

fn sample_exact<R: Rng + ?Sized>(
    step: &ExactStep,
    theta_k: f64,
    noise: &NoiseConfig,
    rng: &mut R,
) -> f64 {
    let n = step.state.n_qubits();
    let (dist, offset) = match noise {
        NoiseConfig::Dephasing(d) => {
            let phi = sample_dephasing_angle(d, rng);
            let rotated = step.basis.rotate_y(&step.state, phi);
            (step.basis.outcome_distribution(&rotated, theta_k), 0)
        }
        _ => {
            let (lo, hi) = readout_window(&step.clean, theta_k);
            let window = step.basis.outcome_window(&step.state, theta_k, lo, hi);
            let mass: f64 = window.iter().sum();
            if (1.0 - mass).abs() <= WINDOW_LEAK {
                (window.iter().map(|p| p / mass).collect(), lo)
            } else {
                (step.basis.outcome_distribution(&step.state, theta_k), 0)
            }
        }
    };
    let index = match noise {
        NoiseConfig::Depolarization(d) => sample_depolarized_index(&dist, offset, n, d, rng),
        _ => offset + sample_index(&dist, rng),
    };
    index as f64 - 0.5 * n as f64
}

/// Mixes a (possibly windowed) distribution with the uniform one on `0..=n`.
fn sample_depolarized_index<R: Rng + ?Sized>(
    dist: &[f64],
    offset: usize,
    n: usize,
    cfg: &DepolarizationConfig,
    rng: &mut R,
) -> usize {
    if offset == 0 && dist.len() == n + 1 {
        return sample_depolarized_outcome(dist, cfg, rng);
    }
    if cfg.epsilon > 0.0 && rng.random::<f64>() < cfg.epsilon {
        rng.random_range(0..=n)
    } else {
        offset + sample_index(dist, rng)
    }
}

/// Index range holding essentially all of the readout probability.
fn readout_window(m: &SpinMoments, theta_k: f64) -> (usize, usize) {
    let n = m.n_qubits as f64;
    let center = m.readout_mean(theta_k) + 0.5 * n;
    let width = 16.0 * m.readout_variance(theta_k).max(0.0).sqrt() + 32.0;
    let lo = (center - width).floor().max(0.0) as usize;
    let hi = (center + width).ceil().clamp(0.0, n) as usize;
    (lo.min(hi), hi)
}

/// Draws one outcome from a standalone state (exact) or its moments (Gaussian).
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &StateVector,
    basis: &JxEigenbasis,
    theta_k: f64,
    sampler: SamplerMode,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<f64> {
    let clean = spin_moments_exact(state);
    match sampler {
        SamplerMode::Gaussian => {
            let m = match noise {
                NoiseConfig::None => clean,
                _ => noise.transform_moments(&clean)?,
            };
            Ok(sample_gaussian(&m, theta_k, rng))
        }
        SamplerMode::Exact | SamplerMode::Auto => {
            if basis.n_qubits() != state.n_qubits() {
                return Err(Error::invalid("basis and state sizes differ"));
            }
            let step = ExactStep {
                basis: basis.clone(),
                state: state.clone(),
                clean,
            };
            Ok(sample_exact(&step, theta_k, noise, rng))
        }
    }
}

/// Runs one trial as configured.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult> {
    Protocol::new(cfg)?.run(cfg.theta_true, cfg.rng_seed)
}

/// Runs one trial with shot-noise particle-number fluctuations.
pub fn run_trial_fluctuating_n(cfg: &TrialConfig) -> Result<TrialResult> {
    if !cfg.fluctuating_n {
        return Err(Error::invalid("fluctuating_n must be set"));
    }
    run_trial(cfg)
}

/// Runs a depolarization-truncated cascade followed by its repeats.
pub fn run_trial_depolarized_with_repeats(cfg: &TrialConfig) -> Result<TrialResult> {
    match cfg.noise.depolarization() {
        Some(d) if d.epsilon == 0.0 => run_trial(cfg),
        Some(_) if cfg.schedule.mode == ScheduleMode::NoiseTruncated => run_trial(cfg),
        Some(_) => Err(Error::invalid(
            "depolarized repeats need a noise-truncated schedule",
        )),
        None => Err(Error::invalid(
            "depolarized repeats need depolarization noise",
        )),
    }
}

/// Coherent state used by the zeroth step, exposed for examples and tests.
pub fn zeroth_step_state(n0: usize) -> Result<StateVector> {
    make_coherent_state(n0)
}
