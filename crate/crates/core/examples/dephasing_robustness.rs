//! Sensitivity under collective dephasing, against the moment-transform
//! prediction.

use gss_qpe::protocol::SamplerMode;
use gss_qpe::schedule::ScheduleMode;
use gss_qpe::sweep::{dephasing_sweep, predicted_dephasing_curve, SweepOptions};

fn main() -> gss_qpe::Result<()> {
    let opts = SweepOptions {
        trials: 2000,
        seed: 5,
        sampler: SamplerMode::Gaussian,
        ..Default::default()
    };
    for gamma in [2.0, 10.0, 1e9] {
        let predicted = predicted_dephasing_curve(gamma, 100, 10, ScheduleMode::RecursiveNumeric)?;
        println!("gamma = {gamma:e}, predicted N_T*dtheta for K = 0..10:");
        println!(
            "    {}",
            predicted
                .iter()
                .map(|v| format!("{v:.2}"))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    println!();
    for r in dephasing_sweep(&[10.0], 100, 6, &opts)? {
        println!(
            "gamma = {} K = {}: simulated {:.3} +- {:.3}, predicted {:.3}",
            r.gamma, r.k, r.nt_times_delta, r.nt_times_delta_err, r.predicted_nt_times_delta
        );
    }
    Ok(())
}
