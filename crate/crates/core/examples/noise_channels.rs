//! Effect of collective dephasing and depolarization on the moments that
//! set the single-step sensitivity.

use gss_qpe::channels::{
    dephase_moments, depolarize_moments, fourier_coefficients, DephasingConfig,
    DepolarizationConfig,
};
use gss_qpe::dicke::{spin_moments_analytic, GaussianStateSpec};

fn main() -> gss_qpe::Result<()> {
    let spec = GaussianStateSpec::new(10_000, 0.05)?;
    let clean = spin_moments_analytic(&spec)?;
    let phase_var = |m: &gss_qpe::dicke::SpinMoments| m.var_y() / (m.jx * m.jx);
    println!(
        "noiseless: <Jx> = {:.1}, Var(theta) = {:.3e}",
        clean.jx,
        phase_var(&clean)
    );

    println!("\ndephasing (von Mises concentration gamma)");
    for gamma in [2.0, 4.0, 10.0, 100.0] {
        let cfg = DephasingConfig::new(gamma)?;
        let c = fourier_coefficients(&cfg);
        let m = dephase_moments(&clean, &cfg)?;
        let contraction = m.var_x() / (m.jx * m.jx);
        println!(
            "  gamma = {gamma:>5}: c1 = {:.5}, c2 = {:.5}, <Jx> = {:>8.1}, Var(Jx)/<Jx>^2 = {contraction:.3e}",
            c.c1, c.c2, m.jx
        );
    }

    println!("\ndepolarization (mixing weight E)");
    for eps in [1e-8, 1e-6, 1e-4, 1e-2] {
        let cfg = DepolarizationConfig::new(eps)?;
        let m = depolarize_moments(&clean, &cfg, spec.n_qubits as f64);
        println!(
            "  E = {eps:e}: Var(theta) = {:.3e}, squeezing floor s_min^2 = {:.3e} (state has s^2 = {:.3e})",
            phase_var(&m),
            cfg.squeezing_floor_sq(spec.n_qubits as f64),
            spec.squeezing * spec.squeezing
        );
    }
    Ok(())
}
