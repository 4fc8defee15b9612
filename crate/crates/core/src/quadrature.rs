//! Adaptive Simpson quadrature.

const MIN_DEPTH: u32 = 4;
const MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    refine(f, a, b, fa, fm, fb, whole, tol, 0)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // The second clause stops once the correction is lost in rounding, which
    // otherwise keeps an unattainable tolerance splitting down to MAX_DEPTH.
    let converged = delta.abs() <= 15.0 * tol || delta.abs() <= 1e-15 * (left.abs() + right.abs());
    if depth >= MAX_DEPTH || (depth >= MIN_DEPTH && converged) {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_transcendental() {
        let cubic = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((cubic - 0.0).abs() < 1e-12);
        let sin = adaptive_simpson(&f64::sin, 0.0, std::f64::consts::PI, 1e-12);
        assert!((sin - 2.0).abs() < 1e-11);
    }

    #[test]
    fn unattainable_tolerance_terminates() {
        let got = adaptive_simpson(&|x: f64| (-x * x).exp(), 0.0, 6.0, 1e-300);
        assert!((got - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn narrow_peak_at_endpoint() {
        let w = 1e-5_f64;
        let got = adaptive_simpson(&|x: f64| (-(x / w).powi(2)).exp(), 0.0, 3.0, 1e-16);
        let want = 0.5 * w * std::f64::consts::PI.sqrt();
        assert!((got - want).abs() / want < 1e-9, "{got} vs {want}");
    }
}
