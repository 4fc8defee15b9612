//! Error-probability curves and the Gaussianity of the final residuals.

use gss_qpe::protocol::{SamplerMode, TrialConfig};
use gss_qpe::schedule::Schedule;
use gss_qpe::stats::{max_curve_deviation, run_ensemble, EnsembleConfig};

fn main() -> gss_qpe::Result<()> {
    for k in [6, 8] {
        let base = TrialConfig::new(Schedule::recursive_numeric(100, k)?, 0.0)
            .with_sampler(SamplerMode::Gaussian);
        let out = run_ensemble(&EnsembleConfig::new(base).with_trials(5000).with_seed(3))?;
        let s = &out.stats;
        println!(
            "K = {k}: N_T = {}, max |P_emp - P_erf| = {:.4}, bias z = {:.2}, KS = {:.4}",
            s.n_total,
            max_curve_deviation(&s.error_prob_curve),
            s.gaussianity.bias_z,
            s.gaussianity.ks
        );
        for p in s.error_prob_curve.iter().step_by(10) {
            println!(
                "    x = {:.2}: empirical {:.4}, 1 - erf(x/sqrt2) = {:.4}",
                p.x, p.empirical, p.predicted
            );
        }
    }
    Ok(())
}
