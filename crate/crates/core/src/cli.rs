//! Command-line front end: schedule inspection, ensemble runs and sweeps.
//!
//! Options may also come from a JSON file given with `--config`; flags win
//! over the file, and the resolved settings are written to `manifest.json`
//! next to every output.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::channels::NoiseConfig;
use crate::dicke::DEFAULT_EXACT_CAP;
use crate::error::{Error, Result};
use crate::protocol::{SamplerMode, TrialConfig};
use crate::schedule::{optimize_num_steps, truncate_for_depolarization, Schedule, ScheduleMode};
use crate::stats::{run_ensemble_with_workers, EnsembleConfig, ThetaMode, DEFAULT_TRIALS};
use crate::sweep::{
    beta_sweep, dephasing_sweep, depolarization_sweep, error_probability_sweep, fit_beta,
    scaling_sweep, SweepOptions,
};

/// Version of the CSV column layouts, recorded in every manifest.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "gss-qpe",
    version,
    about = "Adaptive phase estimation with Gaussian spin states"
)]
pub struct Cli {
    /// JSON file with default option values (flags take precedence).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for ensembles (results do not depend on it).
    #[arg(long, global = true, env = "GSS_QPE_WORKERS")]
    pub workers: Option<usize>,
    /// Largest N handled by the exact state-vector sampler.
    #[arg(long, global = true)]
    pub exact_cap: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the per-step allocation, squeezing and predicted sensitivity.
    Schedule(ScheduleArgs),
    /// Run an ensemble of trials and write statistics.
    Run(RunArgs),
    /// Regenerate the datasets behind the sensitivity figures.
    #[command(subcommand)]
    Sweep(SweepCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    ClosedForm,
    RecursiveNumeric,
    /// Whichever of the two predicts the lower variance.
    Best,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Qubits in the zeroth (coherent) step.
    #[arg(long, conflicts_with = "nt")]
    pub n0: Option<u64>,
    /// Total qubit budget.
    #[arg(long)]
    pub nt: Option<u64>,
    /// Index of the last cascade step.
    #[arg(long, short = 'k', conflicts_with = "auto_k")]
    pub k: Option<usize>,
    /// Choose K minimizing the predicted variance (needs --nt).
    #[arg(long)]
    pub auto_k: bool,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Write both schedules as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub budget: BudgetArgs,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fixed true phase (default: uniform in [-pi, pi)).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub sampler: Option<SamplerMode>,
    /// none, dephasing:<gamma> or depol:<epsilon>.
    #[arg(long)]
    pub noise: Option<NoiseConfig>,
    #[arg(long)]
    pub fluctuating_n: bool,
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepCommon {
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sampler: Option<SamplerMode>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SweepCommand {
    /// N_T x Delta theta versus K for each N_0.
    Fig2a {
        #[arg(long, value_delimiter = ',', default_value = "100")]
        n0: Vec<u64>,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[arg(long)]
        fluctuating_n: bool,
        #[command(flatten)]
        common: SweepCommon,
    },
    /// Error-probability curves for several K.
    Fig2b {
        #[arg(long, default_value_t = 100)]
        n0: u64,
        #[arg(long, value_delimiter = ',', default_value = "8,10,13")]
        ks: Vec<usize>,
        #[command(flatten)]
        common: SweepCommon,
    },
    /// Sensitivity under collective dephasing.
    Fig3ab {
        #[arg(long, value_delimiter = ',', default_value = "2,4,10")]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        n0: u64,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[command(flatten)]
        common: SweepCommon,
    },
    /// Sensitivity and large-budget prefactor under depolarization.
    Fig3cd {
        #[arg(long, value_delimiter = ',', default_value = "1e-8,1e-6,1e-4")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        n0: u64,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        /// Repeats of the last useful step for the asymptote.
        #[arg(long, default_value_t = 200)]
        repeats: usize,
        #[command(flatten)]
        common: SweepCommon,
    },
}

/// Optional defaults read from `--config`.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n0: Option<u64>,
    pub nt: Option<u64>,
    pub k: Option<usize>,
    pub auto_k: Option<bool>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub theta: Option<f64>,
    pub sampler: Option<SamplerMode>,
    pub noise: Option<NoiseConfig>,
    pub fluctuating_n: Option<bool>,
    pub mode: Option<ModeChoice>,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub exact_cap: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidParameter(format!("config {}: {e}", path.display())))
    }
}

/// Materialized settings of a `run`, echoed into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub n0: Option<u64>,
    pub nt: Option<u64>,
    pub k: usize,
    pub auto_k: bool,
    pub trials: usize,
    pub seed: u64,
    pub theta: Option<f64>,
    pub sampler: SamplerMode,
    pub noise: NoiseConfig,
    pub fluctuating_n: bool,
    pub mode: ModeChoice,
    pub exact_cap: usize,
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub csv_schema_version: u32,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn version_string() -> String {
    concat!("v", env!("CARGO_PKG_VERSION")).to_string()
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// `2` for configuration and I/O problems, `3` for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical { .. } => 3,
        Error::Trial { source, .. } => exit_code(source),
        _ => 2,
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let workers = cli.workers.or(file.workers);
    if workers == Some(0) {
        return Err(Error::invalid("--workers must be at least 1"));
    }
    let exact_cap = cli
        .exact_cap
        .or(file.exact_cap)
        .unwrap_or(DEFAULT_EXACT_CAP);
    match cli.command {
        Command::Schedule(args) => cmd_schedule(&args, &file),
        Command::Run(args) => cmd_run(&args, &file, workers, exact_cap),
        Command::Sweep(cmd) => cmd_sweep(cmd, &file, workers, exact_cap),
    }
}

#[derive(Debug, Clone, Copy)]
enum Budget {
    N0(u64),
    Total(u64),
}

fn resolve_budget(args: &BudgetArgs, file: &FileConfig) -> Result<(Budget, Option<usize>)> {
    let (n0, nt) = match (args.n0, args.nt) {
        (None, None) => (file.n0, file.nt),
        flags => flags,
    };
    let budget = match (n0, nt) {
        (Some(n0), None) => Budget::N0(n0),
        (None, Some(nt)) => Budget::Total(nt),
        _ => return Err(Error::invalid("give exactly one of --n0 or --nt")),
    };
    let auto_k = args.auto_k || (args.k.is_none() && file.auto_k.unwrap_or(false));
    let k = if auto_k { None } else { args.k.or(file.k) };
    match (k, auto_k, budget) {
        (None, false, _) => Err(Error::invalid("give --k or --auto-k")),
        (None, true, Budget::N0(_)) => Err(Error::invalid(
            "--auto-k needs --nt (with N_0 fixed, more steps always help)",
        )),
        _ => Ok((budget, k)),
    }
}

fn schedule_for(budget: Budget, k: Option<usize>, mode: ScheduleMode) -> Result<Schedule> {
    match budget {
        Budget::N0(n0) => Schedule::new(mode, n0, k.expect("K resolved for fixed N_0")),
        Budget::Total(nt) => {
            let k = match k {
                Some(k) => k,
                None => optimize_num_steps(nt, mode)?,
            };
            Schedule::from_total(mode, nt, k)
        }
    }
}

fn select_schedule(
    budget: Budget,
    k: Option<usize>,
    choice: ModeChoice,
) -> Result<(Schedule, Vec<String>)> {
    let mut notes = Vec::new();
    let schedule = match choice {
        ModeChoice::ClosedForm => schedule_for(budget, k, ScheduleMode::ClosedForm)?,
        ModeChoice::RecursiveNumeric => schedule_for(budget, k, ScheduleMode::RecursiveNumeric)?,
        ModeChoice::Best => {
            let closed = schedule_for(budget, k, ScheduleMode::ClosedForm)?;
            let recursive = schedule_for(budget, k, ScheduleMode::RecursiveNumeric)?;
            let (c, r) = (closed.final_var().sqrt(), recursive.final_var().sqrt());
            notes.push(format!(
                "predicted delta: closed_form {c:.6e} (K={}), recursive_numeric {r:.6e} (K={})",
                closed.k_max, recursive.k_max
            ));
            if r < c {
                recursive
            } else {
                closed
            }
        }
    };
    notes.extend(schedule.notes.iter().cloned());
    Ok((schedule, notes))
}

fn print_schedule_table(out: &mut impl Write, schedule: &Schedule) -> std::io::Result<()> {
    writeln!(
        out,
        "mode={} K={} N_T={}{}",
        schedule.mode,
        schedule.k_max,
        schedule.n_total,
        if schedule.repeats > 0 {
            format!(" repeats={}", schedule.repeats)
        } else {
            String::new()
        }
    )?;
    writeln!(
        out,
        "{:>3} {:>12} {:>14} {:>14} {:>14}",
        "k", "N_k", "s_k^2", "s_k^2*N_k", "pred_dtheta"
    )?;
    for s in &schedule.steps {
        writeln!(
            out,
            "{:>3} {:>12} {:>14.6} {:>14.6} {:>14.6e}",
            s.k,
            s.n,
            s.s_sq(),
            s.s2n(),
            s.predicted_var.sqrt()
        )?;
    }
    for note in &schedule.notes {
        writeln!(out, "note: {note}")?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScheduleReport<'a> {
    closed_form: &'a Schedule,
    recursive_numeric: &'a Schedule,
    preferred: ScheduleMode,
}

fn cmd_schedule(args: &ScheduleArgs, file: &FileConfig) -> Result<()> {
    let (budget, k) = resolve_budget(&args.budget, file)?;
    let closed = schedule_for(budget, k, ScheduleMode::ClosedForm)?;
    let recursive = schedule_for(budget, k, ScheduleMode::RecursiveNumeric)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    print_schedule_table(&mut out, &closed)?;
    writeln!(out)?;
    print_schedule_table(&mut out, &recursive)?;
    let preferred = if recursive.final_var() < closed.final_var() {
        ScheduleMode::RecursiveNumeric
    } else {
        ScheduleMode::ClosedForm
    };
    writeln!(out, "\npreferred: {preferred}")?;
    if let Some(path) = &args.out {
        let report = ScheduleReport {
            closed_form: &closed,
            recursive_numeric: &recursive,
            preferred,
        };
        write_json(path, &report)?;
    }
    Ok(())
}

fn resolve_run(
    args: &RunArgs,
    file: &FileConfig,
    workers: Option<usize>,
    exact_cap: usize,
) -> Result<(RunSettings, Vec<String>)> {
    let (budget, k) = resolve_budget(&args.budget, file)?;
    let mode = args.mode.or(file.mode).unwrap_or(ModeChoice::Best);
    let noise = args.noise.or(file.noise).unwrap_or_default();
    let (mut schedule, mut notes) = select_schedule(budget, k, mode)?;
    if let Some(d) = noise.depolarization() {
        if d.epsilon > 0.0 {
            let truncated = truncate_for_depolarization(&schedule, d.epsilon)?;
            notes.push(format!(
                "depolarization: cascade truncated at k={} with {} repeats",
                truncated.k_max, truncated.repeats
            ));
            schedule = truncated;
        }
    }
    if !noise.is_none() {
        schedule = schedule.with_noise(noise)?;
    }
    let (n0, nt) = match budget {
        Budget::N0(n) => (Some(n), None),
        Budget::Total(n) => (None, Some(n)),
    };
    let settings = RunSettings {
        n0,
        nt,
        k: schedule.k_max,
        auto_k: k.is_none(),
        trials: args.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
        seed: args.seed.or(file.seed).unwrap_or(0),
        theta: args.theta.or(file.theta),
        sampler: args.sampler.or(file.sampler).unwrap_or_default(),
        noise,
        fluctuating_n: args.fluctuating_n || file.fluctuating_n.unwrap_or(false),
        mode,
        exact_cap,
        workers,
        out_dir: args
            .out_dir
            .clone()
            .or_else(|| file.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("gss-qpe-out")),
        schedule,
    };
    Ok((settings, notes))
}

#[derive(Debug, Serialize)]
struct ResidualRow {
    trial: usize,
    theta_true: f64,
    theta_est: f64,
    residual: f64,
}

fn cmd_run(
    args: &RunArgs,
    file: &FileConfig,
    workers: Option<usize>,
    exact_cap: usize,
) -> Result<()> {
    let started = Instant::now();
    let (settings, notes) = resolve_run(args, file, workers, exact_cap)?;
    for note in &notes {
        eprintln!("note: {note}");
    }
    let base = TrialConfig::new(settings.schedule.clone(), 0.0)
        .with_sampler(settings.sampler)
        .with_noise(settings.noise)
        .with_fluctuating_n(settings.fluctuating_n)
        .with_exact_cap(settings.exact_cap);
    let theta_mode = match settings.theta {
        Some(t) => ThetaMode::Fixed(t),
        None => ThetaMode::Uniform,
    };
    let cfg = EnsembleConfig::new(base)
        .with_trials(settings.trials)
        .with_seed(settings.seed)
        .with_theta(theta_mode);
    let outcome = run_ensemble_with_workers(&cfg, settings.workers)?;
    let stats = &outcome.stats;

    let dir = &settings.out_dir;
    fs::create_dir_all(dir)?;
    let stats_path = dir.join("stats.json");
    write_json(&stats_path, stats)?;
    let residuals_path = dir.join("residuals.csv");
    write_csv(
        &residuals_path,
        outcome
            .results
            .iter()
            .enumerate()
            .map(|(i, r)| ResidualRow {
                trial: i,
                theta_true: r.theta_true,
                theta_est: r.theta_est_final,
                residual: r.residual,
            }),
    )?;
    let errorprob_path = dir.join("errorprob.csv");
    write_csv(&errorprob_path, stats.error_prob_curve.iter().copied())?;

    let outputs = vec![stats_path, residuals_path, errorprob_path];
    write_manifest(
        dir,
        "run",
        settings.seed,
        serde_json::to_value(&settings)?,
        started,
        outputs,
        notes,
    )?;

    println!(
        "K={} N_T={} rms={:.6e} NTxDelta={:.4} bias_z={:.3}",
        stats.k_max,
        stats.n_total,
        stats.rms_sensitivity,
        stats.nt_times_delta,
        stats.gaussianity.bias_z
    );
    Ok(())
}

fn sweep_options(
    common: &SweepCommon,
    file: &FileConfig,
    workers: Option<usize>,
    exact_cap: usize,
) -> (SweepOptions, ModeChoice, PathBuf) {
    let choice = common
        .mode
        .or(file.mode)
        .unwrap_or(ModeChoice::RecursiveNumeric);
    let mode = match choice {
        ModeChoice::ClosedForm => ScheduleMode::ClosedForm,
        // the recursion is never worse than the closed form for these schedules
        ModeChoice::RecursiveNumeric | ModeChoice::Best => ScheduleMode::RecursiveNumeric,
    };
    let opts = SweepOptions {
        trials: common.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS),
        seed: common.seed.or(file.seed).unwrap_or(0),
        sampler: common.sampler.or(file.sampler).unwrap_or_default(),
        mode,
        exact_cap,
        workers,
    };
    let dir = common
        .out_dir
        .clone()
        .or_else(|| file.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("gss-qpe-out"));
    (opts, choice, dir)
}

fn tag(value: f64) -> String {
    format!("{value:e}").replace('+', "")
}

fn cmd_sweep(
    cmd: SweepCommand,
    file: &FileConfig,
    workers: Option<usize>,
    exact_cap: usize,
) -> Result<()> {
    let started = Instant::now();
    let mut outputs = Vec::new();
    let mut notes = Vec::new();
    let (name, config, opts, dir) = match cmd {
        SweepCommand::Fig2a {
            n0,
            kmax,
            fluctuating_n,
            common,
        } => {
            let (opts, choice, dir) = sweep_options(&common, file, workers, exact_cap);
            fs::create_dir_all(&dir)?;
            let rows = scaling_sweep(&n0, kmax, fluctuating_n, &opts)?;
            for &n in &n0 {
                let path = dir.join(format!("fig2a_n0_{n}.csv"));
                write_csv(&path, rows.iter().filter(|r| r.n0 == n))?;
                outputs.push(path);
            }
            for r in &rows {
                println!(
                    "n0={} K={} N_T={} NTxDelta={:.4} predicted={:.4}",
                    r.n0, r.k, r.n_total, r.nt_times_delta, r.predicted_nt_times_delta
                );
            }
            let config = serde_json::json!({ "n0": n0, "kmax": kmax, "fluctuating_n": fluctuating_n, "mode": choice, "options": &opts });
            ("sweep fig2a", config, opts, dir)
        }
        SweepCommand::Fig2b { n0, ks, common } => {
            let (opts, choice, dir) = sweep_options(&common, file, workers, exact_cap);
            fs::create_dir_all(&dir)?;
            let rows = error_probability_sweep(n0, &ks, &opts)?;
            for &k in &ks {
                let path = dir.join(format!("fig2b_k_{k}.csv"));
                let curve: Vec<_> = rows.iter().filter(|r| r.k == k).collect();
                let dev = curve
                    .iter()
                    .map(|r| (r.empirical - r.predicted).abs())
                    .fold(0.0, f64::max);
                println!("K={k} max|empirical-predicted|={dev:.4}");
                write_csv(&path, curve)?;
                outputs.push(path);
            }
            let config =
                serde_json::json!({ "n0": n0, "ks": ks, "mode": choice, "options": &opts });
            ("sweep fig2b", config, opts, dir)
        }
        SweepCommand::Fig3ab {
            gamma,
            n0,
            kmax,
            common,
        } => {
            let (opts, choice, dir) = sweep_options(&common, file, workers, exact_cap);
            fs::create_dir_all(&dir)?;
            let rows = dephasing_sweep(&gamma, n0, kmax, &opts)?;
            for &g in &gamma {
                let path = dir.join(format!("fig3ab_gamma_{}.csv", tag(g)));
                write_csv(&path, rows.iter().filter(|r| r.gamma == g))?;
                outputs.push(path);
            }
            for r in &rows {
                println!(
                    "gamma={} K={} NTxDelta={:.4} predicted={:.4}",
                    r.gamma, r.k, r.nt_times_delta, r.predicted_nt_times_delta
                );
            }
            let config = serde_json::json!({ "gamma": gamma, "n0": n0, "kmax": kmax, "mode": choice, "options": &opts });
            ("sweep fig3ab", config, opts, dir)
        }
        SweepCommand::Fig3cd {
            eps,
            n0,
            kmax,
            repeats,
            common,
        } => {
            let (opts, choice, dir) = sweep_options(&common, file, workers, exact_cap);
            fs::create_dir_all(&dir)?;
            let rows = depolarization_sweep(&eps, n0, kmax, &opts)?;
            for &e in &eps {
                let path = dir.join(format!("fig3c_eps_{}.csv", tag(e)));
                write_csv(&path, rows.iter().filter(|r| r.epsilon == e))?;
                outputs.push(path);
            }
            let betas = beta_sweep(&eps, n0, repeats, &opts)?;
            let path = dir.join("fig3d_beta.csv");
            write_csv(&path, betas.iter())?;
            outputs.push(path);
            for b in &betas {
                println!(
                    "eps={:e} k_tilde={} beta={:.5} predicted={:.5}",
                    b.epsilon, b.k_tilde, b.beta, b.beta_predicted
                );
            }
            if betas.len() >= 2 {
                let fit = fit_beta(&eps, &betas.iter().map(|b| b.beta).collect::<Vec<_>>());
                println!(
                    "beta fit: c(E^1/4)={:.4} slope={:.4} c(free)={:.4}",
                    fit.c_quarter, fit.slope, fit.c_free
                );
                notes.push(format!(
                    "beta fit: c_quarter={} slope={} c_free={}",
                    fit.c_quarter, fit.slope, fit.c_free
                ));
            }
            let config = serde_json::json!({ "eps": eps, "n0": n0, "kmax": kmax, "repeats": repeats, "mode": choice, "options": &opts });
            ("sweep fig3cd", config, opts, dir)
        }
    };
    write_manifest(&dir, name, opts.seed, config, started, outputs, notes)
}

fn write_manifest(
    dir: &Path,
    command: &str,
    seed: u64,
    config: serde_json::Value,
    started: Instant,
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
) -> Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        version: version_string(),
        csv_schema_version: CSV_SCHEMA_VERSION,
        master_seed: seed,
        config,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        outputs,
        notes,
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
