//! Per-step particle numbers and squeezing for the adaptive cascade.
//!
//! Step `k = 0` uses an unsqueezed coherent state of `N_0` qubits; steps
//! `k >= 1` use Gaussian states with `N_k = 4 * 3^(k-1) * N_0`. Two squeezing
//! rules are provided:
//!
//! * [`ScheduleMode::ClosedForm`] evaluates the published closed form
//!   `s_k^2 = 3^(5/2 - 3/(2*3^(k-1)) - k) / 2^(7/2 - 5/(2*3^(k-1))) / N_0^(1 - 3^-k)`
//!   as printed;
//! * [`ScheduleMode::RecursiveNumeric`] iterates
//!   `s_k^2 N_k = (N_k^2 Var_{k-1})^(1/3)` together with the full variance
//!   recursion.
//!
//! The two differ by a factor of two in `s_k^2` (the recursion's leading-order
//! closed form is exactly twice the printed one). Both are kept; callers that
//! want the better of the two use [`Schedule::best`].

use serde::{Deserialize, Serialize};

use crate::channels::{DepolarizationConfig, NoiseConfig};
use crate::dicke::{analytic_moments_unchecked, SpinMoments};
use crate::error::{Error, Result};

/// Smallest `N_0` for which the Gaussian-state machinery is meaningful.
pub const MIN_N0: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    ClosedForm,
    RecursiveNumeric,
    NoiseTruncated,
}

impl std::fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScheduleMode::ClosedForm => "closed_form",
            ScheduleMode::RecursiveNumeric => "recursive_numeric",
            ScheduleMode::NoiseTruncated => "noise_truncated",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub k: usize,
    pub n: u64,
    /// Squeezing parameter `s_k` (not squared).
    pub s: f64,
    /// Predicted variance of the accumulated estimate after this step, rad^2.
    pub predicted_var: f64,
}

impl ScheduleStep {
    pub fn s_sq(&self) -> f64 {
        self.s * self.s
    }

    pub fn s2n(&self) -> f64 {
        self.s * self.s * self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub mode: ScheduleMode,
    /// Index of the last cascade step.
    #[serde(rename = "K")]
    pub k_max: usize,
    pub n_total: u64,
    pub steps: Vec<ScheduleStep>,
    /// Extra independent measurements with copies of the last step's state
    /// (only used by depolarization-truncated schedules).
    #[serde(default)]
    pub repeats: usize,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Adjustments made while building the schedule (e.g. downgraded K).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Predicted sensitivities of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPrediction {
    /// Variance after each cascade step (full recursion with noisy moments).
    pub per_step_var: Vec<f64>,
    /// Leading-order recursion `s^2/N + Var/(2 s^4 N^2)` (noiseless).
    pub leading_order_var: Vec<f64>,
    /// Variance after the repeats of a truncated schedule (equals the last
    /// per-step entry when there are none).
    pub final_var: f64,
    pub final_delta: f64,
    pub n_total: u64,
    /// `Delta theta * N_T^(1 - 1/(2*3^K))`.
    pub prefactor: f64,
}

fn pow3(k: usize) -> f64 {
    3f64.powi(k as i32)
}

/// `N_T / N_0 = 2 * 3^K - 1` for the closed-form allocation.
pub fn total_factor(k_max: usize) -> f64 {
    2.0 * pow3(k_max) - 1.0
}

/// `N_0 = N_T / (2 * 3^K - 1)`.
pub fn n0_for_total(n_total: u64, k_max: usize) -> f64 {
    n_total as f64 / total_factor(k_max)
}

/// `[N_0, N_1, ..., N_K]` with `N_k = 4 * 3^(k-1) * N_0`.
pub fn allocation_closed_form(n0: u64, k_max: usize) -> Result<Vec<u64>> {
    if n0 < MIN_N0 {
        return Err(Error::Infeasible(format!("N_0 = {n0} is below {MIN_N0}")));
    }
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(n0);
    let mut n = 4 * n0;
    for _ in 1..=k_max {
        out.push(n);
        n = n.checked_mul(3).ok_or_else(|| {
            Error::Infeasible(format!("K = {k_max} overflows the particle count"))
        })?;
    }
    Ok(out)
}

/// Printed closed-form squeezing `s_k^2` for `k = 0..=K` (with `s_0 = 1`).
pub fn squeezing_closed_form(n0: f64, k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .map(|k| squeezing_closed_form_step(n0, k))
        .collect()
}

fn squeezing_closed_form_step(n0: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let inv = 1.0 / pow3(k - 1);
    let num = 3f64.powf(2.5 - 1.5 * inv - k as f64);
    let den = 2f64.powf(3.5 - 2.5 * inv);
    num / den / n0.powf(1.0 - 1.0 / pow3(k))
}

/// Closed-form solution of the leading-order recursion with the `N_k = 4*3^(k-1) N_0`
/// allocation: `s_k^2 N_k = 13.5^(1/2 - 1/(2*3^(k-1))) * 4^(1/3^(k-1)) * N_0^(1/3^k)`.
pub fn squeezing_leading_order(n0: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let inv = 1.0 / pow3(k - 1);
    let s2n = 13.5f64.powf(0.5 - 0.5 * inv) * 4f64.powf(inv) * n0.powf(1.0 / pow3(k));
    s2n / (4.0 * pow3(k - 1) * n0)
}

/// One step of the variance recursion using (possibly noisy) moments:
/// `Var_k = (dJy)^2/<Jx>^2 + (dJx)^2/<Jx>^2 * Var_{k-1}`.
pub fn step_variance(m: &SpinMoments, prev_var: f64) -> f64 {
    let jx2 = m.jx * m.jx;
    m.var_y() / jx2 + m.var_x() / jx2 * prev_var
}

/// Noiseless analytic moments for `N` qubits with squeezing `s^2`.
pub fn step_moments(n: u64, s_sq: f64) -> SpinMoments {
    let nf = n as f64;
    analytic_moments_unchecked(nf, s_sq * nf, n as usize)
}

/// Moments of step `k` under `noise`; the zeroth (coherent) step is noiseless.
pub fn noisy_step_moments(k: usize, n: u64, s_sq: f64, noise: &NoiseConfig) -> Result<SpinMoments> {
    let m = step_moments(n, s_sq);
    if k == 0 {
        Ok(m)
    } else {
        noise.transform_moments(&m)
    }
}

/// Squeezing from `s_k^2 N_k = (N_k^2 Var_{k-1})^(1/3)`, iterated with the full
/// variance recursion. Returns `s_k^2` for `k = 0..=K`.
pub fn squeezing_recursive(ns: &[u64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ns.len());
    let Some(&n0) = ns.first() else {
        return out;
    };
    out.push(1.0);
    let mut var = 4.0 / n0 as f64;
    for &n in &ns[1..] {
        let nf = n as f64;
        let s2 = (nf * nf * var).cbrt() / nf;
        var = step_variance(&step_moments(n, s2), var);
        out.push(s2);
    }
    out
}

/// Solution of `(A + u u^T) x = rhs` for diagonal `A` by Sherman–Morrison.
pub fn sherman_morrison_diagonal(diag: &[f64], u: &[f64], rhs: &[f64]) -> Vec<f64> {
    let a_inv_b: Vec<f64> = rhs.iter().zip(diag).map(|(b, d)| b / d).collect();
    let a_inv_u: Vec<f64> = u.iter().zip(diag).map(|(v, d)| v / d).collect();
    let ut_a_inv_b: f64 = u.iter().zip(&a_inv_b).map(|(a, b)| a * b).sum();
    let ut_a_inv_u: f64 = u.iter().zip(&a_inv_u).map(|(a, b)| a * b).sum();
    let factor = ut_a_inv_b / (1.0 + ut_a_inv_u);
    a_inv_b
        .iter()
        .zip(&a_inv_u)
        .map(|(b, w)| b - w * factor)
        .collect()
}

/// Optimal particle allocation for a fixed budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Real-valued solution `[N_0, N_1, ..., N_K]`.
    pub exact: Vec<f64>,
    /// Integer allocation preserving the total (largest remainder).
    pub rounded: Vec<u64>,
}

/// Solves the linear system for `x = (N_K, ..., N_1)` with `A = diag(3^-(K-j))/4`
/// and `u = (1, ..., 1)`; `N_0` takes the remainder of the budget.
pub fn solve_allocation_sherman_morrison(k_max: usize, n_total: u64) -> Result<Allocation> {
    if k_max == 0 {
        return Err(Error::invalid("Sherman–Morrison allocation needs K >= 1"));
    }
    let min_total = total_factor(k_max) * MIN_N0 as f64;
    if (n_total as f64) < min_total {
        return Err(Error::Infeasible(format!(
            "N_T = {n_total} is below (2*3^K - 1)*{MIN_N0} = {min_total} for K = {k_max}"
        )));
    }
    // Row j (1-based) of x holds N_{K-j+1}; A_jj = 3^-(K-j) / 4.
    let diag: Vec<f64> = (1..=k_max).map(|j| 0.25 / pow3(k_max - j)).collect();
    let u = vec![1.0; k_max];
    let rhs = vec![n_total as f64; k_max];
    let x = sherman_morrison_diagonal(&diag, &u, &rhs);

    let n0 = n_total as f64 - x.iter().sum::<f64>();
    let mut exact = Vec::with_capacity(k_max + 1);
    exact.push(n0);
    exact.extend(x.iter().rev());

    let rounded = largest_remainder(&exact, n_total);
    if let Some(bad) = rounded.iter().position(|&n| n < 2) {
        return Err(Error::Infeasible(format!("N_{bad} rounds below 2")));
    }
    Ok(Allocation { exact, rounded })
}

/// Rounds non-negative reals to integers with the given total.
pub fn largest_remainder(values: &[f64], total: u64) -> Vec<u64> {
    let mut out: Vec<u64> = values.iter().map(|v| v.max(0.0).floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = values[a] - values[a].floor();
        let fb = values[b] - values[b].floor();
        fb.partial_cmp(&fa)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let missing = total.saturating_sub(assigned) as usize;
    for &i in order.iter().cycle().take(missing) {
        out[i] += 1;
    }
    out
}

impl Schedule {
    /// Closed-form allocation and printed closed-form squeezing.
    pub fn closed_form(n0: u64, k_max: usize) -> Result<Self> {
        let ns = allocation_closed_form(n0, k_max)?;
        Self::assemble(ScheduleMode::ClosedForm, ns)
    }

    /// Closed-form allocation with squeezing from the numeric recursion.
    pub fn recursive_numeric(n0: u64, k_max: usize) -> Result<Self> {
        let ns = allocation_closed_form(n0, k_max)?;
        Self::assemble(ScheduleMode::RecursiveNumeric, ns)
    }

    pub fn new(mode: ScheduleMode, n0: u64, k_max: usize) -> Result<Self> {
        match mode {
            ScheduleMode::ClosedForm => Self::closed_form(n0, k_max),
            ScheduleMode::RecursiveNumeric => Self::recursive_numeric(n0, k_max),
            ScheduleMode::NoiseTruncated => Err(Error::invalid(
                "noise-truncated schedules are derived with truncate_for_depolarization",
            )),
        }
    }

    /// Builds a schedule from a total budget via the Sherman–Morrison allocation.
    pub fn from_total(mode: ScheduleMode, n_total: u64, k_max: usize) -> Result<Self> {
        if k_max == 0 {
            if n_total < MIN_N0 {
                return Err(Error::Infeasible(format!(
                    "N_T = {n_total} is below {MIN_N0}"
                )));
            }
            return Self::assemble(mode, vec![n_total]);
        }
        let alloc = solve_allocation_sherman_morrison(k_max, n_total)?;
        if alloc.rounded[0] < MIN_N0 {
            return Err(Error::Infeasible(format!(
                "N_0 = {} is below {MIN_N0}",
                alloc.rounded[0]
            )));
        }
        Self::assemble(mode, alloc.rounded)
    }

    /// The mode with the lower predicted final variance (closed form on ties).
    pub fn best(n0: u64, k_max: usize) -> Result<Self> {
        let closed = Self::closed_form(n0, k_max)?;
        let recursive = Self::recursive_numeric(n0, k_max)?;
        Ok(if recursive.final_var() < closed.final_var() {
            recursive
        } else {
            closed
        })
    }

    fn assemble(mode: ScheduleMode, ns: Vec<u64>) -> Result<Self> {
        let s_sq = match mode {
            ScheduleMode::ClosedForm => ns
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    if k == 0 {
                        1.0
                    } else {
                        // N_0 implied by this (possibly rounded) N_k
                        let n0 = n as f64 / (4.0 * pow3(k - 1));
                        squeezing_closed_form_step(n0, k)
                    }
                })
                .collect(),
            _ => squeezing_recursive(&ns),
        };
        let mut notes = Vec::new();
        let mut valid = ns.len();
        for (k, (&n, &s2)) in ns.iter().zip(&s_sq).enumerate().skip(1) {
            if s2 * (n as f64) < 1.0 {
                valid = k;
                notes.push(format!(
                    "step {k} has s^2 N = {:.3} < 1; K downgraded to {}",
                    s2 * n as f64,
                    k - 1
                ));
                break;
            }
        }
        let steps = ns[..valid]
            .iter()
            .zip(&s_sq)
            .enumerate()
            .map(|(k, (&n, &s2))| ScheduleStep {
                k,
                n,
                s: s2.sqrt(),
                predicted_var: f64::NAN,
            })
            .collect::<Vec<_>>();
        let mut schedule = Schedule {
            mode,
            k_max: steps.len() - 1,
            n_total: steps.iter().map(|s| s.n).sum(),
            steps,
            repeats: 0,
            noise: NoiseConfig::None,
            notes,
        };
        schedule.refresh_predictions()?;
        Ok(schedule)
    }

    /// Re-evaluates predictions under a noise model.
    pub fn with_noise(mut self, noise: NoiseConfig) -> Result<Self> {
        self.noise = noise;
        self.refresh_predictions()?;
        Ok(self)
    }

    fn refresh_predictions(&mut self) -> Result<()> {
        let pred = predicted_variance(self)?;
        for (step, v) in self.steps.iter_mut().zip(&pred.per_step_var) {
            step.predicted_var = *v;
        }
        Ok(())
    }

    pub fn n0(&self) -> u64 {
        self.steps[0].n
    }

    pub fn last(&self) -> &ScheduleStep {
        self.steps.last().expect("schedule has at least one step")
    }

    pub fn final_var(&self) -> f64 {
        predicted_variance(self)
            .map(|p| p.final_var)
            .unwrap_or(f64::INFINITY)
    }
}

/// Noise-aware moments of step `k` of `schedule`.
pub fn schedule_step_moments(schedule: &Schedule, k: usize) -> Result<SpinMoments> {
    let step = &schedule.steps[k];
    noisy_step_moments(k, step.n, step.s_sq(), &schedule.noise)
}

/// Variance of one repeat measurement made with residual variance `prev_var`.
///
/// Repeats are always exposed to the noise, including coherent-state repeats.
pub fn repeat_variance(schedule: &Schedule, prev_var: f64) -> Result<f64> {
    Ok(step_variance(&repeat_moments(schedule)?, prev_var))
}

/// Noise-transformed moments of one repeat of the last cascade step.
pub fn repeat_moments(schedule: &Schedule) -> Result<SpinMoments> {
    let last = schedule.last();
    schedule
        .noise
        .transform_moments(&step_moments(last.n, last.s_sq()))
}

/// Iterates the variance recursion over the schedule (noise from `schedule.noise`).
pub fn predicted_variance(schedule: &Schedule) -> Result<SensitivityPrediction> {
    let steps = &schedule.steps;
    let n0 = steps[0].n as f64;
    let mut per_step_var = vec![4.0 / n0];
    let mut leading_order_var = vec![4.0 / n0];
    for step in &steps[1..] {
        let prev = *per_step_var.last().unwrap();
        let m = schedule_step_moments(schedule, step.k)?;
        per_step_var.push(step_variance(&m, prev));

        let lo_prev = *leading_order_var.last().unwrap();
        let (s2, n) = (step.s_sq(), step.n as f64);
        leading_order_var.push(s2 / n + lo_prev / (2.0 * s2 * s2 * n * n));
    }

    let mut final_var = *per_step_var.last().unwrap();
    for _ in 0..schedule.repeats {
        let single = repeat_variance(schedule, final_var)?;
        final_var = 1.0 / (1.0 / final_var + 1.0 / single);
    }
    let final_delta = final_var.sqrt();
    let exponent = 1.0 - 1.0 / (2.0 * pow3(schedule.k_max));
    Ok(SensitivityPrediction {
        per_step_var,
        leading_order_var,
        final_var,
        final_delta,
        n_total: schedule.n_total,
        prefactor: final_delta * (schedule.n_total as f64).powf(exponent),
    })
}

/// Number of steps minimizing the predicted variance for a fixed budget.
///
/// Every `K` with `N_T / (2*3^K - 1) >= 10` is tried; ties go to the smaller `K`.
pub fn optimize_num_steps(n_total: u64, mode: ScheduleMode) -> Result<usize> {
    if n_total < 3 * MIN_N0 {
        return Err(Error::Infeasible(format!(
            "N_T = {n_total} is below {}",
            3 * MIN_N0
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    let mut k = 0;
    while n0_for_total(n_total, k) >= MIN_N0 as f64 {
        if let Ok(schedule) = Schedule::from_total(mode, n_total, k) {
            let var = schedule.final_var();
            if best.is_none_or(|(_, v)| var < v) {
                best = Some((k, var));
            }
        }
        k += 1;
    }
    best.map(|(k, _)| k)
        .ok_or_else(|| Error::Infeasible(format!("no feasible K for N_T = {n_total}")))
}

/// Truncates the cascade at the last step whose squeezing is above the
/// depolarization floor `E N_k / 3`, spending the rest of the budget on
/// repeats of that step.
pub fn truncate_for_depolarization(schedule: &Schedule, epsilon: f64) -> Result<Schedule> {
    let cfg = DepolarizationConfig::new(epsilon)?;
    if epsilon == 0.0 {
        return Ok(schedule.clone());
    }
    let k_tilde = schedule
        .steps
        .iter()
        .skip(1)
        .take_while(|s| s.s_sq() >= cfg.squeezing_floor_sq(s.n as f64))
        .map(|s| s.k)
        .last()
        .unwrap_or(0);

    let mut steps = schedule.steps[..=k_tilde].to_vec();
    let mut notes = schedule.notes.clone();
    if k_tilde == 0 {
        notes.push("even k = 1 is below the squeezing floor; coherent-state repeats only".into());
        steps.truncate(1);
    }
    let used: u64 = steps.iter().map(|s| s.n).sum();
    let unit = steps[k_tilde].n;
    let budget = schedule.n_total.max(used);
    let repeats = ((budget - used) / unit) as usize;

    let mut out = Schedule {
        mode: ScheduleMode::NoiseTruncated,
        k_max: k_tilde,
        n_total: used + repeats as u64 * unit,
        steps,
        repeats,
        noise: NoiseConfig::Depolarization(cfg),
        notes,
    };
    out.refresh_predictions()?;
    Ok(out)
}

/// Asymptotic prefactor `beta` in `Delta theta = beta / sqrt(N_T)` when the
/// budget is dominated by repeats of the last step of `schedule`.
pub fn repeat_prefactor(schedule: &Schedule) -> Result<f64> {
    let single = repeat_variance(schedule, 0.0)?;
    Ok((single * schedule.last().n as f64).sqrt())
}

/// Re-targets a truncated schedule to a larger budget by adding repeats.
pub fn with_repeats(schedule: &Schedule, repeats: usize) -> Result<Schedule> {
    let mut out = schedule.clone();
    let cascade: u64 = out.steps.iter().map(|s| s.n).sum();
    out.repeats = repeats;
    out.n_total = cascade + repeats as u64 * out.last().n;
    out.refresh_predictions()?;
    Ok(out)
}
