//! Depolarization: truncated cascade plus repeats, and the E^(1/4) law of the
//! large-budget prefactor.

use gss_qpe::protocol::SamplerMode;
use gss_qpe::sweep::{beta_sweep, fit_beta, SweepOptions};

fn main() -> gss_qpe::Result<()> {
    let opts = SweepOptions {
        trials: 2000,
        seed: 9,
        sampler: SamplerMode::Gaussian,
        ..Default::default()
    };
    let eps = [1e-8, 1e-6, 1e-4];
    let rows = beta_sweep(&eps, 100, 200, &opts)?;
    for r in &rows {
        println!(
            "E = {:e}: k~ = {}, N_T = {}, beta = {:.5} +- {:.5} (predicted {:.5}), beta/E^0.25 = {:.3}",
            r.epsilon,
            r.k_tilde,
            r.n_total,
            r.beta,
            r.beta_err,
            r.beta_predicted,
            r.beta / r.epsilon.powf(0.25)
        );
    }
    let fit = fit_beta(&eps, &rows.iter().map(|r| r.beta).collect::<Vec<_>>());
    println!(
        "fit: beta = {:.3} E^(1/4); free slope {:.3}",
        fit.c_quarter, fit.slope
    );
    Ok(())
}
