//! Dense-matrix oracles for the Dicke-basis routines.
//!
//! Every reference here is built from explicit `J_x, J_y, J_z` matrices and
//! a general symmetric eigensolver, independent of the recurrence-based
//! rotation used by the library.

use approx::assert_relative_eq;
use gss_qpe::dicke::{
    apply_rotation_y, make_coherent_state, make_gss, spin_moments_exact, GaussianStateSpec,
    JxEigenbasis, StateVector,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

type CMatrix = DMatrix<Complex64>;

struct SpinOps {
    jx: DMatrix<f64>,
    /// `J_y` is purely imaginary in the `z` basis; this stores `i J_y` (real, antisymmetric).
    i_jy: DMatrix<f64>,
    jz: DMatrix<f64>,
}

fn spin_ops(n: usize) -> SpinOps {
    let dim = n + 1;
    let j = n as f64 / 2.0;
    let mut jp = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim - 1 {
        let mu = i as f64 - j;
        jp[(i + 1, i)] = ((j - mu) * (j + mu + 1.0)).sqrt();
    }
    let jm = jp.transpose();
    let jz = DMatrix::from_diagonal(&DVector::from_fn(dim, |i, _| i as f64 - j));
    SpinOps {
        jx: (&jp + &jm) * 0.5,
        // J_y = (J+ - J-)/(2i)  =>  i J_y = (J+ - J-)/2
        i_jy: (&jp - &jm) * 0.5,
        jz,
    }
}

fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

fn jy_complex(ops: &SpinOps) -> CMatrix {
    // J_y = -i (i J_y)
    ops.i_jy.map(|v| Complex64::new(0.0, -v))
}

/// `exp(-i angle J_x)` from a dense symmetric eigendecomposition.
fn dense_rx(ops: &SpinOps, angle: f64) -> CMatrix {
    let eig = SymmetricEigen::new(ops.jx.clone());
    let q = complexify(&eig.eigenvectors);
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|l| Complex64::from_polar(1.0, -angle * l)),
    );
    &q * CMatrix::from_diagonal(&phases) * q.transpose()
}

fn dense_rz(n: usize, angle: f64) -> CMatrix {
    let j = n as f64 / 2.0;
    CMatrix::from_diagonal(&DVector::from_fn(n + 1, |i, _| {
        Complex64::from_polar(1.0, -angle * (i as f64 - j))
    }))
}

fn to_dvec(s: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

fn expect(op: &CMatrix, v: &DVector<Complex64>) -> f64 {
    v.dotc(&(op * v)).re
}

/// Gaussian spin state from the dense `exp(+i pi/2 J_x)` applied to the profile.
fn dense_gss(n: usize, s: f64) -> DVector<Complex64> {
    let ops = spin_ops(n);
    let j = n as f64 / 2.0;
    let mut f = DVector::from_fn(n + 1, |i, _| {
        let mu = i as f64 - j;
        Complex64::new((-mu * mu / (s * s * n as f64)).exp(), 0.0)
    });
    let norm = f.norm();
    f /= Complex64::new(norm, 0.0);
    dense_rx(&ops, -FRAC_PI_2) * f
}

#[test]
fn coherent_four_qubits_matches_tensor_product() {
    // (|0>+|1>)/sqrt2 on four qubits, 16 amplitudes of 1/4, projected onto
    // normalized symmetric sectors with n0 = N/2 + mu qubits in |0>.
    let n = 4;
    let mut sector = vec![0.0; n + 1];
    let mut count = vec![0usize; n + 1];
    for bits in 0u32..16 {
        let zeros = n - bits.count_ones() as usize;
        sector[zeros] += 0.25;
        count[zeros] += 1;
    }
    let brute: Vec<f64> = sector
        .iter()
        .zip(&count)
        .map(|(s, c)| s / (*c as f64).sqrt())
        .collect();
    let lib = make_coherent_state(n).unwrap();
    for (a, b) in lib.amplitudes().iter().zip(&brute) {
        assert_relative_eq!(a.re, *b, epsilon = 1e-14);
    }
}

#[test]
fn gss_n20_moments_match_dense_operators() {
    let n = 20;
    let s = 0.5;
    let ops = spin_ops(n);
    let v = dense_gss(n, s);
    let jx = complexify(&ops.jx);
    let jy = jy_complex(&ops);
    let jz = complexify(&ops.jz);

    let lib = make_gss(&GaussianStateSpec::new(n, s).unwrap()).unwrap();
    assert_relative_eq!(
        lib.overlap_abs(&StateVector::from_amplitudes(n, v.iter().copied().collect()).unwrap()),
        1.0,
        epsilon = 1e-12
    );

    let m = spin_moments_exact(&lib);
    assert_relative_eq!(m.jx, expect(&jx, &v), epsilon = 1e-10);
    assert_relative_eq!(m.jy, expect(&jy, &v), epsilon = 1e-10);
    assert_relative_eq!(m.jz, expect(&jz, &v), epsilon = 1e-10);
    assert_relative_eq!(m.jx2, expect(&(&jx * &jx), &v), epsilon = 1e-10);
    assert_relative_eq!(m.jy2, expect(&(&jy * &jy), &v), epsilon = 1e-10);
    assert_relative_eq!(m.jz2, expect(&(&jz * &jz), &v), epsilon = 1e-10);
}

#[test]
fn outcome_distribution_n10_matches_dense_matrices() {
    let (n, s, theta) = (10, 0.8, 0.3);
    let ops = spin_ops(n);
    let v = dense_gss(n, s);
    let out = dense_rx(&ops, FRAC_PI_2) * dense_rz(n, theta) * v;
    let want: Vec<f64> = out.iter().map(|c| c.norm_sqr()).collect();

    let basis = JxEigenbasis::new(n).unwrap();
    let state =
        gss_qpe::dicke::make_gss_with(&GaussianStateSpec::new(n, s).unwrap(), &basis).unwrap();
    let got = basis.outcome_distribution(&state, theta);
    assert_eq!(got.len(), 11);
    for (g, w) in got.iter().zip(&want) {
        assert_relative_eq!(g, w, epsilon = 1e-12);
    }
}

#[test]
fn rotation_x_matches_dense_exponential() {
    for &(n, angle) in &[
        (1usize, 0.7),
        (7, 1.3),
        (64, FRAC_PI_2),
        (151, 2.9),
        (200, -0.4),
    ] {
        let ops = spin_ops(n);
        let basis = JxEigenbasis::new(n).unwrap();
        let state = if n < 2 {
            make_coherent_state(n).unwrap()
        } else {
            make_gss(&GaussianStateSpec::new(n, 0.6).unwrap()).unwrap()
        };
        let want = dense_rx(&ops, angle) * to_dvec(&state);
        let got = basis.rotate(&state, angle);
        let err: f64 = got
            .amplitudes()
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-10, "N = {n}, angle = {angle}: distance {err}");
    }
}

#[test]
fn z_quarter_turn_maps_jx_distribution_onto_jy() {
    // N = 2 coherent state is the J_x = +1 eigenstate; after exp(-i pi/2 J_z)
    // a J_y measurement must return +1 with certainty.
    let n = 2;
    let ops = spin_ops(n);
    let state = make_coherent_state(n).unwrap();
    let turned = gss_qpe::dicke::apply_rotation_z(&state, FRAC_PI_2);
    let jy = jy_complex(&ops);
    let v = to_dvec(&turned);
    assert_relative_eq!(expect(&jy, &v), 1.0, epsilon = 1e-14);
    assert_relative_eq!(expect(&(&jy * &jy), &v), 1.0, epsilon = 1e-14);
}

#[test]
fn rotation_y_matches_dense_exponential() {
    let n = 30;
    let ops = spin_ops(n);
    // exp(-i a J_y) = exp(-a (i J_y)) with i J_y real antisymmetric; use
    // the Hermitian eigendecomposition of J_y.
    let jy = jy_complex(&ops);
    let eig = SymmetricEigen::new(jy);
    let angle = 0.9;
    let phases = DVector::from_iterator(
        n + 1,
        eig.eigenvalues
            .iter()
            .map(|l| Complex64::from_polar(1.0, -angle * l)),
    );
    let u = &eig.eigenvectors * CMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint();
    let state = make_gss(&GaussianStateSpec::new(n, 0.5).unwrap()).unwrap();
    let want = u * to_dvec(&state);
    let got = apply_rotation_y(&state, angle).unwrap();
    for (a, b) in got.amplitudes().iter().zip(want.iter()) {
        assert!((a - b).norm() < 1e-10);
    }
}

fn arb_state() -> impl Strategy<Value = StateVector> {
    (2usize..60, 0.15f64..1.2)
        .prop_map(|(n, s)| make_gss(&GaussianStateSpec::new(n, s).unwrap()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotations_preserve_norm(state in arb_state(), a in -7.0f64..7.0, b in -7.0f64..7.0) {
        let basis = JxEigenbasis::new(state.n_qubits()).unwrap();
        let r = basis.rotate(&gss_qpe::dicke::apply_rotation_z(&state, a), b);
        prop_assert!((r.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn x_rotations_compose(state in arb_state(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
        let basis = JxEigenbasis::new(state.n_qubits()).unwrap();
        let two = basis.rotate(&basis.rotate(&state, a), b);
        let one = basis.rotate(&state, a + b);
        let d: f64 = two.amplitudes().iter().zip(one.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(d < 1e-9);
    }

    #[test]
    fn casimir_holds(state in arb_state(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let basis = JxEigenbasis::new(state.n_qubits()).unwrap();
        let r = basis.rotate_y(&basis.rotate(&state, a), b);
        let m = spin_moments_exact(&r);
        let j = state.spin();
        prop_assert!((m.casimir() - j * (j + 1.0)).abs() <= 1e-9 * j * (j + 1.0));
        prop_assert!(m.jx * m.jx <= m.jx2 + 1e-9);
        prop_assert!(m.jy * m.jy <= m.jy2 + 1e-9);
        prop_assert!(m.jz * m.jz <= m.jz2 + 1e-9);
    }

    #[test]
    fn readout_mean_is_jx_sin_theta(n in 20usize..300, s in 0.2f64..1.0, theta in -1.5f64..1.5) {
        let spec = GaussianStateSpec::new(n, s).unwrap();
        let basis = JxEigenbasis::new(n).unwrap();
        let state = gss_qpe::dicke::make_gss_with(&spec, &basis).unwrap();
        let jx = spin_moments_exact(&state).jx;
        let p = basis.outcome_distribution(&state, theta);
        let mean: f64 = p.iter().enumerate().map(|(i, q)| state.mu(i) * q).sum();
        prop_assert!((mean - jx * theta.sin()).abs() < 1e-6 * n as f64);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}
