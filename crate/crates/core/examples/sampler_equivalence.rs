//! Exact readout distribution against its discretized Gaussian approximation.

use gss_qpe::dicke::{make_gss_with, spin_moments_analytic, GaussianStateSpec, JxEigenbasis};
use statrs::distribution::{ContinuousCDF, Normal};

fn main() -> gss_qpe::Result<()> {
    let spec = GaussianStateSpec::new(1000, 0.15)?;
    let basis = JxEigenbasis::new(spec.n_qubits)?;
    let state = make_gss_with(&spec, &basis)?;
    let moments = spin_moments_analytic(&spec)?;
    for theta in [0.0, 0.05, 0.2] {
        let exact = basis.outcome_distribution(&state, theta);
        let normal = Normal::new(
            moments.readout_mean(theta),
            moments.readout_variance(theta).sqrt(),
        )
        .expect("positive width");
        let tv: f64 = exact
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mu = state.mu(i);
                let q = normal.cdf(mu + 0.5) - normal.cdf(mu - 0.5);
                (p - q).abs()
            })
            .sum::<f64>()
            / 2.0;
        println!("theta = {theta:<5}: total-variation distance {tv:.4}");
    }
    Ok(())
}
