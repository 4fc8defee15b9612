//! Particle allocation, squeezing rules and the optimal number of steps.

use gss_qpe::schedule::{
    optimize_num_steps, predicted_variance, solve_allocation_sherman_morrison,
    truncate_for_depolarization, Schedule, ScheduleMode,
};

fn main() -> gss_qpe::Result<()> {
    let alloc = solve_allocation_sherman_morrison(3, 5300)?;
    println!(
        "optimal allocation for N_T = 5300, K = 3: {:?}",
        alloc.rounded
    );

    println!(
        "\n{:>3} {:>12} {:>18} {:>18}",
        "K", "N_T", "closed form", "recursion"
    );
    for k in 0..=8 {
        let c = Schedule::closed_form(100, k)?;
        let r = Schedule::recursive_numeric(100, k)?;
        let nt = c.n_total as f64;
        println!(
            "{k:>3} {:>12} {:>18.4} {:>18.4}",
            c.n_total,
            predicted_variance(&c)?.final_delta * nt,
            predicted_variance(&r)?.final_delta * nt
        );
    }
    println!("(columns: predicted N_T x Delta theta)");

    for nt in [1_000u64, 100_000, 10_000_000] {
        let k = optimize_num_steps(nt, ScheduleMode::RecursiveNumeric)?;
        println!("N_T = {nt:>9}: best K = {k}");
    }

    let long = Schedule::recursive_numeric(100, 8)?;
    for eps in [1e-8, 1e-6, 1e-4] {
        let t = truncate_for_depolarization(&long, eps)?;
        println!(
            "E = {eps:e}: cascade stops at k = {} and repeats it {} times (N_T = {})",
            t.k_max, t.repeats, t.n_total
        );
    }
    Ok(())
}
