//! One adaptive run, step by step: residual phase, outcome and estimate.

use gss_qpe::protocol::{run_trial, SamplerMode, TrialConfig};
use gss_qpe::schedule::Schedule;

fn main() -> gss_qpe::Result<()> {
    let theta = 1.234_567;
    let cfg = TrialConfig::new(Schedule::recursive_numeric(100, 4)?, theta)
        .with_sampler(SamplerMode::Auto)
        .with_seed(2024);
    let result = run_trial(&cfg)?;

    println!(
        "{:>2} {:>6} {:>14} {:>10} {:>14}",
        "k", "N_k", "theta_k", "mu", "theta_est"
    );
    for s in &result.per_step {
        println!(
            "{:>2} {:>6} {:>14.6e} {:>10.1} {:>14.6e}",
            s.k, s.n, s.theta_k, s.mu, s.theta_est
        );
    }
    println!("\ntrue theta      {theta}");
    println!("estimate        {}", result.theta_est_final);
    println!("residual        {:.3e}", result.residual);
    Ok(())
}
