//! Builds a Gaussian spin state, compares its exact moments with the
//! large-N formulas, and prints the readout distribution after a small phase.

use gss_qpe::dicke::{
    make_gss_with, spin_moments_analytic, spin_moments_exact, GaussianStateSpec, JxEigenbasis,
};

fn main() -> gss_qpe::Result<()> {
    let spec = GaussianStateSpec::new(400, 0.2)?;
    let basis = JxEigenbasis::new(spec.n_qubits)?;
    let state = make_gss_with(&spec, &basis)?;

    let exact = spin_moments_exact(&state);
    let analytic = spin_moments_analytic(&spec)?;
    println!(
        "N = {}, s = {}, s^2 N = {}",
        spec.n_qubits,
        spec.squeezing,
        spec.s2n()
    );
    println!("{:>8} {:>14} {:>14}", "", "exact", "analytic");
    println!("{:>8} {:>14.6} {:>14.6}", "<Jx>", exact.jx, analytic.jx);
    println!("{:>8} {:>14.6} {:>14.6}", "<Jy^2>", exact.jy2, analytic.jy2);
    println!("{:>8} {:>14.6} {:>14.6}", "<Jz^2>", exact.jz2, analytic.jz2);
    println!("squeezing s^2 = 4 Var(Jy)/N = {:.6}", exact.squeezing_sq());

    let theta = 0.02;
    let dist = basis.outcome_distribution(&state, theta);
    let mean: f64 = dist.iter().enumerate().map(|(i, p)| state.mu(i) * p).sum();
    println!(
        "\nreadout at theta = {theta}: mean mu = {mean:.4} (expected <Jx> sin theta = {:.4})",
        exact.jx * theta.sin()
    );
    for (i, p) in dist.iter().enumerate().filter(|(_, p)| **p > 0.01) {
        println!("  mu = {:>6.1}  P = {:.4}", state.mu(i), p);
    }
    Ok(())
}
