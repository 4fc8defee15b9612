//! Shot-noise fluctuations of the particle number in every step.

use gss_qpe::protocol::{SamplerMode, TrialConfig};
use gss_qpe::schedule::Schedule;
use gss_qpe::stats::{run_ensemble, EnsembleConfig};

fn main() -> gss_qpe::Result<()> {
    for k in [0, 3, 6] {
        let base = TrialConfig::new(Schedule::recursive_numeric(100, k)?, 0.0)
            .with_sampler(SamplerMode::Gaussian);
        let fixed = run_ensemble(
            &EnsembleConfig::new(base.clone())
                .with_trials(4000)
                .with_seed(1),
        )?;
        let fluct = run_ensemble(
            &EnsembleConfig::new(base.with_fluctuating_n(true))
                .with_trials(4000)
                .with_seed(1),
        )?;
        println!(
            "K = {k}: fixed N_T*dtheta = {:.3}, fluctuating mean(N_T)*dtheta = {:.3} (mean N_T = {:.0})",
            fixed.stats.nt_times_delta, fluct.stats.nt_times_delta, fluct.stats.mean_n_total
        );
    }
    Ok(())
}
