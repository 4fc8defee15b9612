use approx::assert_relative_eq;
use gss_qpe::channels::{
    dephase_moments, depolarize_moments, fourier_coefficients, sample_dephasing_angle,
    sample_depolarized_outcome, DephasingConfig, DepolarizationConfig,
};
use gss_qpe::dicke::{make_gss_with, spin_moments_exact, GaussianStateSpec, JxEigenbasis};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Modified Bessel function of the first kind by its power series.
fn bessel_i(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(order as i32) / (1..=order).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..400 {
        let k = k as f64;
        term *= half * half / (k * (k + order as f64));
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Plain trapezoid rule on the periodic integrand (independent of the library's adaptive rule).
fn trapezoid_moment(gamma: f64, harmonic: f64) -> f64 {
    let n = 20_000;
    let h = 2.0 * PI / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        let phi = -PI + i as f64 * h;
        let w = (gamma * (phi.cos() - 1.0)).exp();
        num += (harmonic * phi).cos() * w;
        den += w;
    }
    num / den
}

#[test]
fn fourier_coefficients_match_bessel_ratios() {
    for gamma in [0.3, 1.0, 2.0, 2.5, 4.0, 10.0, 50.0] {
        let c = fourier_coefficients(&DephasingConfig::new(gamma).unwrap());
        let i0 = bessel_i(0, gamma);
        assert!(
            (c.c1 - bessel_i(1, gamma) / i0).abs() < 1e-10,
            "gamma {gamma}"
        );
        assert!(
            (c.c2 - bessel_i(2, gamma) / i0).abs() < 1e-10,
            "gamma {gamma}"
        );
        assert!(c.c1 >= c.c2 && c.c2 > 0.0);
    }
}

#[test]
fn fourier_coefficients_stay_accurate_when_concentrated() {
    let c = fourier_coefficients(&DephasingConfig::new(1e9).unwrap());
    // 1 - I1/I0 ~ 1/(2g) + 1/(8g^2); 1 - I2/I0 ~ 2/g
    assert_relative_eq!(1.0 - c.c1, 0.5e-9, max_relative = 1e-4);
    assert_relative_eq!(1.0 - c.c2, 2e-9, max_relative = 1e-4);
}

#[test]
fn sampled_c1_at_gamma_10() {
    let cfg = DephasingConfig::new(10.0).unwrap();
    let want = bessel_i(1, 10.0) / bessel_i(0, 10.0);
    assert_relative_eq!(want, 0.9486, epsilon = 1e-4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200_000;
    let mean = (0..n)
        .map(|_| sample_dephasing_angle(&cfg, &mut rng).cos())
        .sum::<f64>()
        / n as f64;
    assert_relative_eq!(mean, want, max_relative = 0.01);
}

#[test]
fn sampled_c2_at_gamma_2() {
    let cfg = DephasingConfig::new(2.0).unwrap();
    let want = trapezoid_moment(2.0, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 400_000;
    let mean = (0..n)
        .map(|_| (2.0 * sample_dephasing_angle(&cfg, &mut rng)).cos())
        .sum::<f64>()
        / n as f64;
    assert_relative_eq!(mean, want, max_relative = 0.02);
}

#[test]
fn quadrature_agrees_with_million_samples_at_gamma_4() {
    let cfg = DephasingConfig::new(4.0).unwrap();
    let c = fourier_coefficients(&cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let n = 1_000_000;
    let (mut s1, mut q1, mut s2, mut q2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let phi = sample_dephasing_angle(&cfg, &mut rng);
        let (a, b) = (phi.cos(), (2.0 * phi).cos());
        s1 += a;
        q1 += a * a;
        s2 += b;
        q2 += b * b;
    }
    let nf = n as f64;
    for (sum, sq, want) in [(s1, q1, c.c1), (s2, q2, c.c2)] {
        let mean = sum / nf;
        let se = ((sq / nf - mean * mean) / nf).sqrt();
        assert!((mean - want).abs() < 3.0 * se, "{mean} vs {want} (se {se})");
    }
}

/// Expectation values of the y-rotated state as Fourier series in the angle.
///
/// With `J_y = W diag(l) W^dag` and `a = W^dag psi`,
/// `<O>(phi) = sum_{k,l} conj(a_k) (W^dag O W)_{kl} a_l e^{i phi (l_k - l_l)}`.
struct RotatedExpectation {
    offset: usize,
    coeffs: Vec<Complex64>,
}

impl RotatedExpectation {
    fn new(
        op: &DMatrix<Complex64>,
        w: &DMatrix<Complex64>,
        a: &DVector<Complex64>,
        idx: &[usize],
    ) -> Self {
        let dim = a.len();
        let rotated = w.adjoint() * op * w;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * dim - 1];
        for k in 0..dim {
            for l in 0..dim {
                let d = idx[k] + dim - 1 - idx[l];
                coeffs[d] += a[k].conj() * rotated[(k, l)] * a[l];
            }
        }
        Self {
            offset: dim - 1,
            coeffs,
        }
    }

    fn at(&self, phi: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(d, c)| {
                (c * Complex64::from_polar(1.0, phi * (d as f64 - self.offset as f64))).re
            })
            .sum()
    }
}

#[test]
fn dephased_moments_match_stochastic_rotations() {
    let (n, s, gamma) = (500usize, 0.2, 4.0);
    let dim = n + 1;
    let j = n as f64 / 2.0;
    let basis = JxEigenbasis::new(n).unwrap();
    let state = make_gss_with(&GaussianStateSpec::new(n, s).unwrap(), &basis).unwrap();

    let mut jp = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim - 1 {
        let mu = i as f64 - j;
        jp[(i + 1, i)] = Complex64::new(((j - mu) * (j + mu + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * Complex64::new(0.5, 0.0);
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    let jz = DMatrix::from_diagonal(&DVector::from_fn(dim, |i, _| {
        Complex64::new(i as f64 - j, 0.0)
    }));

    let eig = SymmetricEigen::new(jy.clone());
    let w = eig.eigenvectors.clone();
    let idx: Vec<usize> = eig
        .eigenvalues
        .iter()
        .map(|l| (l + j).round() as usize)
        .collect();
    let psi = DVector::from_column_slice(state.amplitudes());
    let a = w.adjoint() * psi;

    let ops = [&jx, &(&jx * &jx), &(&jy * &jy), &(&jz * &jz)];
    let series: Vec<RotatedExpectation> = ops
        .iter()
        .map(|op| RotatedExpectation::new(op, &w, &a, &idx))
        .collect();

    let cfg = DephasingConfig::new(gamma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let draws = 100_000;
    let mut sums = [0.0; 4];
    let mut squares = [0.0; 4];
    for _ in 0..draws {
        let phi = sample_dephasing_angle(&cfg, &mut rng);
        for (k, s) in series.iter().enumerate() {
            let v = s.at(phi);
            sums[k] += v;
            squares[k] += v * v;
        }
    }

    let clean = spin_moments_exact(&state);
    let predicted = dephase_moments(&clean, &cfg).unwrap();
    let want = [predicted.jx, predicted.jx2, predicted.jy2, predicted.jz2];
    for k in 0..4 {
        let mean = sums[k] / draws as f64;
        let se = ((squares[k] / draws as f64 - mean * mean).max(0.0) / draws as f64).sqrt();
        let slack = 3.0 * se + 1e-9 * want[k].abs();
        assert!(
            (mean - want[k]).abs() <= slack,
            "moment {k}: MC {mean} vs {} (se {se})",
            want[k]
        );
    }
    assert_relative_eq!(predicted.casimir(), clean.casimir(), max_relative = 1e-12);
}

#[test]
fn depolarized_outcomes_match_moment_transform() {
    let (n, s) = (200usize, 0.3);
    let basis = JxEigenbasis::new(n).unwrap();
    let state = make_gss_with(&GaussianStateSpec::new(n, s).unwrap(), &basis).unwrap();
    let cfg = DepolarizationConfig::new(0.2).unwrap();
    let theta = 0.4;
    let dist = basis.outcome_distribution(&state, theta);

    let moments = depolarize_moments(&spin_moments_exact(&state), &cfg, n as f64);
    let want_mean = moments.readout_mean(theta);
    // second moment of J_z^out = J_x sin + J_y cos, no cross terms for this state
    let want_sq = moments.jx2 * theta.sin().powi(2) + moments.jy2 * theta.cos().powi(2);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 100_000;
    let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
    for _ in 0..draws {
        let mu = sample_depolarized_outcome(&dist, &cfg, &mut rng) as f64 - n as f64 / 2.0;
        s1 += mu;
        s2 += mu * mu;
        s4 += mu.powi(4);
    }
    let d = draws as f64;
    let mean = s1 / d;
    let se_mean = ((s2 / d - mean * mean) / d).sqrt();
    assert!(
        (mean - want_mean).abs() < 3.0 * se_mean,
        "{mean} vs {want_mean}"
    );
    let sq = s2 / d;
    let se_sq = ((s4 / d - sq * sq) / d).sqrt();
    assert!((sq - want_sq).abs() < 3.0 * se_sq, "{sq} vs {want_sq}");
}
