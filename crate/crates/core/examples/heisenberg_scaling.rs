//! N_T x Delta theta versus the number of steps, approaching a constant.

use gss_qpe::protocol::SamplerMode;
use gss_qpe::sweep::{scaling_sweep, SweepOptions};

fn main() -> gss_qpe::Result<()> {
    let opts = SweepOptions {
        trials: 4000,
        seed: 1,
        sampler: SamplerMode::Gaussian,
        ..Default::default()
    };
    let rows = scaling_sweep(&[100, 1000], 8, false, &opts)?;
    println!(
        "{:>5} {:>3} {:>12} {:>12} {:>10} {:>10}",
        "N_0", "K", "N_T", "rms", "N_T*rms", "predicted"
    );
    for r in rows {
        println!(
            "{:>5} {:>3} {:>12} {:>12.4e} {:>10.3} {:>10.3}",
            r.n0, r.k, r.n_total, r.rms, r.nt_times_delta, r.predicted_nt_times_delta
        );
    }
    Ok(())
}
