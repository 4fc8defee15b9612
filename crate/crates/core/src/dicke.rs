//! Symmetric N-qubit states in the Dicke basis.
//!
//! A [`StateVector`] stores amplitudes on the `J_z` eigenbasis `|mu>_z`,
//! `mu = -N/2 ..= N/2`, with index 0 holding `mu = -N/2`. Odd `N` gives
//! half-integer `mu`.
//!
//! Rotations about `x` go through [`JxEigenbasis`]: the eigenvectors of the
//! tridiagonal `J_x` matrix are generated by its three-term recurrence (run
//! from both edges toward the centre and matched there), and the eigenvalues
//! are known exactly (`m = -j ..= j`). This stays accurate for dimensions of
//! several thousand where factorial-based Wigner formulas overflow. Build the
//! basis once per particle number and reuse it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Largest particle number handled with full state vectors by default.
pub const DEFAULT_EXACT_CAP: usize = 4096;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps an amplitude vector, checking its length and normalization.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("state needs at least one qubit"));
        }
        if amplitudes.len() != n_qubits + 1 {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for N = {}, got {}",
                n_qubits + 1,
                n_qubits,
                amplitudes.len()
            )));
        }
        let state = StateVector {
            n_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "state is not normalized: |c|^2 = {norm}"
            )));
        }
        Ok(state)
    }

    /// The `|mu = N/2>_z` state (every qubit in `|0>`).
    pub fn top(n_qubits: usize) -> Result<Self> {
        let mut amps = vec![Complex64::new(0.0, 0.0); n_qubits + 1];
        if let Some(last) = amps.last_mut() {
            *last = Complex64::new(1.0, 0.0);
        }
        Self::from_amplitudes(n_qubits, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Total spin `j = N/2`.
    pub fn spin(&self) -> f64 {
        self.n_qubits as f64 / 2.0
    }

    /// Eigenvalue `mu` stored at `index`.
    pub fn mu(&self, index: usize) -> f64 {
        index as f64 - self.spin()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `|<self|other>|`, insensitive to a global phase.
    pub fn overlap_abs(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }
}

/// Parameters of the Gaussian spin state: `N` qubits, squeezing `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianStateSpec {
    pub n_qubits: usize,
    pub squeezing: f64,
}

impl GaussianStateSpec {
    pub fn new(n_qubits: usize, squeezing: f64) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::invalid(format!(
                "Gaussian state needs N >= 2, got {n_qubits}"
            )));
        }
        if !(squeezing > 0.0 && squeezing.is_finite()) {
            return Err(Error::invalid(format!(
                "squeezing must be positive and finite, got {squeezing}"
            )));
        }
        Ok(Self {
            n_qubits,
            squeezing,
        })
    }

    /// `s^2 N`, the quantity controlling the analytic-moment regime.
    pub fn s2n(&self) -> f64 {
        self.squeezing * self.squeezing * self.n_qubits as f64
    }
}

/// First and second moments of the collective spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinMoments {
    pub n_qubits: usize,
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub jx2: f64,
    pub jy2: f64,
    pub jz2: f64,
}

impl SpinMoments {
    pub fn var_x(&self) -> f64 {
        self.jx2 - self.jx * self.jx
    }

    pub fn var_y(&self) -> f64 {
        self.jy2 - self.jy * self.jy
    }

    pub fn var_z(&self) -> f64 {
        self.jz2 - self.jz * self.jz
    }

    /// `jx2 + jy2 + jz2`; equals `j(j+1)` for pure symmetric states.
    pub fn casimir(&self) -> f64 {
        self.jx2 + self.jy2 + self.jz2
    }

    /// Effective squeezing `s^2 = 4 (Delta J_y)^2 / N`.
    pub fn squeezing_sq(&self) -> f64 {
        4.0 * self.var_y() / self.n_qubits as f64
    }

    /// Mean of the readout `J_z^out = J_x sin(theta) + J_y cos(theta)`.
    pub fn readout_mean(&self, theta: f64) -> f64 {
        self.jx * theta.sin() + self.jy * theta.cos()
    }

    /// Variance of the readout, assuming no `J_x`/`J_y` covariance.
    pub fn readout_variance(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.var_y() * c * c + self.var_x() * s * s
    }
}

/// Raising-operator matrix elements `<mu+1|J+|mu> = sqrt((j-mu)(j+mu+1))`
/// for `mu = -j ..= j-1`.
fn ladder_elements(n_qubits: usize) -> Vec<f64> {
    let j = n_qubits as f64 / 2.0;
    (0..n_qubits)
        .map(|i| {
            let mu = i as f64 - j;
            ((j - mu) * (j + mu + 1.0)).sqrt()
        })
        .collect()
}

/// The x-polarized coherent spin state `((|0> + |1>)/sqrt 2)^N`.
pub fn make_coherent_state(n_qubits: usize) -> Result<StateVector> {
    if n_qubits == 0 {
        return Err(Error::invalid("coherent state needs N >= 1"));
    }
    let n = n_qubits as f64;
    let ln_n_fact = ln_gamma(n + 1.0);
    let half_ln2 = 0.5 * n * std::f64::consts::LN_2;
    let amps: Vec<Complex64> = (0..=n_qubits)
        .map(|k| {
            let k = k as f64;
            let ln_binom = ln_n_fact - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0);
            Complex64::new((0.5 * ln_binom - half_ln2).exp(), 0.0)
        })
        .collect();
    let norm = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let amps = amps.into_iter().map(|c| c / norm).collect();
    StateVector::from_amplitudes(n_qubits, amps)
}

/// Gaussian profile `exp(-mu^2 / (s^2 N))` on the `J_y` basis, normalized by
/// direct summation. Returned as a plain real vector indexed like a state.
pub fn gaussian_profile(spec: &GaussianStateSpec) -> Vec<f64> {
    let n = spec.n_qubits as f64;
    let j = n / 2.0;
    let width = spec.s2n();
    let mut profile: Vec<f64> = (0..=spec.n_qubits)
        .map(|i| {
            let mu = i as f64 - j;
            (-mu * mu / width).exp()
        })
        .collect();
    let norm = profile.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut profile {
        *v /= norm;
    }
    profile
}

/// Builds the Gaussian spin state, constructing a rotation basis on the fly.
pub fn make_gss(spec: &GaussianStateSpec) -> Result<StateVector> {
    let basis = JxEigenbasis::new(spec.n_qubits)?;
    make_gss_with(spec, &basis)
}

/// Builds the Gaussian spin state with a caller-supplied basis for `N`.
///
/// `|mu>_y = exp(+i pi/2 J_x) |mu>_z`, so the profile written on the `z`
/// grid is rotated by `-pi/2` about `x`. The result has its mean spin along
/// `+x` and is squeezed along `y`.
pub fn make_gss_with(spec: &GaussianStateSpec, basis: &JxEigenbasis) -> Result<StateVector> {
    basis.check_dim(spec.n_qubits)?;
    let amps = gaussian_profile(spec)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    let profile_state = StateVector::from_amplitudes(spec.n_qubits, amps)?;
    Ok(basis.rotate(&profile_state, -FRAC_PI_2))
}

/// `exp(-i angle J_z) |state>`.
pub fn apply_rotation_z(state: &StateVector, angle: f64) -> StateVector {
    let j = state.spin();
    let amplitudes = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mu = i as f64 - j;
            c * Complex64::from_polar(1.0, -mu * angle)
        })
        .collect();
    StateVector {
        n_qubits: state.n_qubits,
        amplitudes,
    }
}

/// `exp(-i angle J_x) |state>` using a freshly built basis with the default cap.
pub fn apply_rotation_x(state: &StateVector, angle: f64) -> Result<StateVector> {
    let basis = JxEigenbasis::new(state.n_qubits)?;
    Ok(basis.rotate(state, angle))
}

/// `exp(-i angle J_y) |state>`, via `exp(-i pi/2 J_z) exp(-i angle J_x) exp(+i pi/2 J_z)`.
pub fn apply_rotation_y(state: &StateVector, angle: f64) -> Result<StateVector> {
    let basis = JxEigenbasis::new(state.n_qubits)?;
    Ok(basis.rotate_y(state, angle))
}

/// Exact moments from the ladder-operator action on the amplitudes.
pub fn spin_moments_exact(state: &StateVector) -> SpinMoments {
    let c = &state.amplitudes;
    let dim = c.len();
    let j = state.spin();
    let ladder = ladder_elements(state.n_qubits);

    let mut jz = 0.0;
    let mut jz2 = 0.0;
    for (i, amp) in c.iter().enumerate() {
        let mu = i as f64 - j;
        let p = amp.norm_sqr();
        jz += mu * p;
        jz2 += mu * mu * p;
    }

    // J+ |psi>: component i+1 receives a_i c_i.
    let mut raised = vec![Complex64::new(0.0, 0.0); dim];
    let mut lowered = vec![Complex64::new(0.0, 0.0); dim];
    for i in 0..dim - 1 {
        raised[i + 1] = c[i] * ladder[i];
        lowered[i] = c[i + 1] * ladder[i];
    }
    let plus: Complex64 = c.iter().zip(&raised).map(|(a, b)| a.conj() * b).sum();

    // J_x = (J+ + J-)/2, J_y = (J+ - J-)/(2i); second moments as squared norms.
    let mut jx2 = 0.0;
    let mut jy2 = 0.0;
    for (r, l) in raised.iter().zip(&lowered) {
        jx2 += ((r + l) * 0.5).norm_sqr();
        jy2 += ((r - l) * 0.5).norm_sqr();
    }

    SpinMoments {
        n_qubits: state.n_qubits,
        jx: plus.re,
        jy: plus.im,
        jz,
        jx2,
        jy2,
        jz2,
    }
}

/// Closed-form moments of the Gaussian spin state, valid for `s^2 N >= 1`.
pub fn spin_moments_analytic(spec: &GaussianStateSpec) -> Result<SpinMoments> {
    let x = spec.s2n();
    if x < 1.0 {
        return Err(Error::MomentValidity(x));
    }
    Ok(analytic_moments_unchecked(
        spec.n_qubits as f64,
        x,
        spec.n_qubits,
    ))
}

/// Closed-form moments for a (possibly non-integer) particle number.
pub(crate) fn analytic_moments_unchecked(n: f64, s2n: f64, n_qubits: usize) -> SpinMoments {
    let e2 = (-2.0 / s2n).exp();
    SpinMoments {
        n_qubits,
        jx: 0.5 * n * (-0.5 / s2n).exp(),
        jy: 0.0,
        jz: 0.0,
        jx2: n * n * (1.0 + e2) / 8.0,
        jy2: s2n / 4.0,
        jz2: n * n * (1.0 - e2) / 8.0,
    }
}

/// `P(mu | theta) = |<mu|_z exp(-i pi/2 J_x) exp(-i theta J_z) |state>|^2`.
pub fn outcome_distribution(state: &StateVector, theta: f64) -> Result<Vec<f64>> {
    let basis = JxEigenbasis::new(state.n_qubits)?;
    Ok(basis.outcome_distribution(state, theta))
}

/// Orthonormal eigenvectors of `J_x` on the symmetric subspace of `N` qubits.
///
/// Eigenvector `k` has eigenvalue `m = k - N/2` and is stored contiguously.
#[derive(Debug, Clone)]
pub struct JxEigenbasis {
    n_qubits: usize,
    dim: usize,
    vectors: Vec<f64>,
}

impl JxEigenbasis {
    pub fn new(n_qubits: usize) -> Result<Self> {
        Self::with_cap(n_qubits, DEFAULT_EXACT_CAP)
    }

    pub fn with_cap(n_qubits: usize, cap: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("rotation basis needs N >= 1"));
        }
        if n_qubits > cap {
            return Err(Error::ExceedsExactCap {
                dim: n_qubits + 1,
                cap: cap + 1,
            });
        }
        let dim = n_qubits + 1;
        let j = n_qubits as f64 / 2.0;
        let ladder = ladder_elements(n_qubits);
        let mut vectors = vec![0.0; dim * dim];
        for (k, column) in vectors.chunks_exact_mut(dim).enumerate() {
            let m = k as f64 - j;
            jx_eigenvector(m, &ladder, column);
        }
        Ok(Self {
            n_qubits,
            dim,
            vectors,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Eigenvector with eigenvalue `m = k - N/2`, in the `J_z` basis.
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    fn check_dim(&self, n_qubits: usize) -> Result<()> {
        if n_qubits != self.n_qubits {
            return Err(Error::invalid(format!(
                "basis built for N = {}, state has N = {}",
                self.n_qubits, n_qubits
            )));
        }
        Ok(())
    }

    fn rotate_amplitudes(&self, amps: &[Complex64], angle: f64) -> Vec<Complex64> {
        let j = self.n_qubits as f64 / 2.0;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.dim];
        for (k, v) in self.vectors.chunks_exact(self.dim).enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for (a, c) in v.iter().zip(amps) {
                re += a * c.re;
                im += a * c.im;
            }
            let m = k as f64 - j;
            let w = Complex64::new(re, im) * Complex64::from_polar(1.0, -m * angle);
            if w == zero {
                continue;
            }
            for (o, a) in out.iter_mut().zip(v) {
                *o += w * a;
            }
        }
        out
    }

    /// `exp(-i angle J_x) |state>`.
    ///
    /// # Panics
    ///
    /// Panics if the state's particle number differs from the basis.
    pub fn rotate(&self, state: &StateVector, angle: f64) -> StateVector {
        assert_eq!(state.n_qubits, self.n_qubits, "basis/state size mismatch");
        StateVector {
            n_qubits: self.n_qubits,
            amplitudes: self.rotate_amplitudes(&state.amplitudes, angle),
        }
    }

    /// `exp(-i angle J_y) |state>`.
    pub fn rotate_y(&self, state: &StateVector, angle: f64) -> StateVector {
        let turned = apply_rotation_z(state, -FRAC_PI_2);
        let rotated = self.rotate(&turned, angle);
        apply_rotation_z(&rotated, FRAC_PI_2)
    }

    /// Unnormalized readout probabilities restricted to indices `lo..=hi`.
    ///
    /// Costs one full projection plus a partial reconstruction, so it is
    /// cheaper than [`Self::outcome_distribution`] when the window is narrow.
    /// The returned mass is `1` minus whatever lies outside the window.
    pub fn outcome_window(
        &self,
        state: &StateVector,
        theta: f64,
        lo: usize,
        hi: usize,
    ) -> Vec<f64> {
        assert_eq!(state.n_qubits, self.n_qubits, "basis/state size mismatch");
        let hi = hi.min(self.dim - 1);
        let encoded = apply_rotation_z(state, theta);
        let j = self.n_qubits as f64 / 2.0;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; hi + 1 - lo];
        for (k, v) in self.vectors.chunks_exact(self.dim).enumerate() {
            let mut re = 0.0;
            let mut im = 0.0;
            for (a, c) in v.iter().zip(&encoded.amplitudes) {
                re += a * c.re;
                im += a * c.im;
            }
            let m = k as f64 - j;
            let w = Complex64::new(re, im) * Complex64::from_polar(1.0, -m * FRAC_PI_2);
            for (o, a) in out.iter_mut().zip(&v[lo..=hi]) {
                *o += w * a;
            }
        }
        out.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Readout distribution after a `z` rotation by `theta` and the `pi/2`
    /// readout pulse about `x`.
    pub fn outcome_distribution(&self, state: &StateVector, theta: f64) -> Vec<f64> {
        let encoded = apply_rotation_z(state, theta);
        let out = self.rotate_amplitudes(&encoded.amplitudes, FRAC_PI_2);
        let mut probs: Vec<f64> = out.iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        probs
    }
}

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_BY: f64 = 1e-150;

/// Fills `out` with the normalized `J_x` eigenvector of eigenvalue `m`.
///
/// In the `J_z` basis the eigen-equation reads
/// `a_{i-1} v_{i-1} + a_i v_{i+1} = 2 m v_i`. The recurrence is stable while
/// moving from a classically forbidden edge inward, so it is run from both
/// ends to the centre (always inside the allowed band) and the halves are
/// matched by least squares over a few overlapping points.
fn jx_eigenvector(m: f64, ladder: &[f64], out: &mut [f64]) {
    let dim = out.len();
    if dim == 1 {
        out[0] = 1.0;
        return;
    }
    let mid = dim / 2;
    let hi = (mid + 1).min(dim - 1);
    let lo = mid.saturating_sub(1);

    let mut fwd = vec![0.0; hi + 1];
    fwd[0] = 1.0;
    fwd[1] = 2.0 * m / ladder[0];
    for i in 1..hi {
        fwd[i + 1] = (2.0 * m * fwd[i] - ladder[i - 1] * fwd[i - 1]) / ladder[i];
        if fwd[i + 1].abs() > RESCALE_ABOVE {
            fwd[..=i + 1].iter_mut().for_each(|v| *v *= RESCALE_BY);
        }
    }

    let mut bwd = vec![0.0; dim];
    bwd[dim - 1] = 1.0;
    bwd[dim - 2] = 2.0 * m / ladder[dim - 2];
    for i in (lo + 1..dim - 1).rev() {
        bwd[i - 1] = (2.0 * m * bwd[i] - ladder[i] * bwd[i + 1]) / ladder[i - 1];
        if bwd[i - 1].abs() > RESCALE_ABOVE {
            bwd[i - 1..].iter_mut().for_each(|v| *v *= RESCALE_BY);
        }
    }

    let fmax = fwd[lo..=hi].iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let bmax = bwd[lo..=hi].iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut cross = 0.0;
    let mut back_sq = 0.0;
    for i in lo..=hi {
        let f = fwd[i] / fmax;
        let b = bwd[i] / bmax;
        cross += f * b;
        back_sq += b * b;
    }
    let back_scale = cross / back_sq / bmax;

    for (i, o) in out.iter_mut().enumerate() {
        *o = if i <= mid {
            fwd[i] / fmax
        } else {
            bwd[i] * back_scale
        };
    }
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    out.iter_mut().for_each(|v| *v /= norm);
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn dist(a: &StateVector, b: &StateVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn coherent_single_qubit() {
        let s = make_coherent_state(1).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert_relative_eq!(s.amplitudes()[0].re, h, epsilon = 1e-15);
        assert_relative_eq!(s.amplitudes()[1].re, h, epsilon = 1e-15);
    }

    #[test]
    fn coherent_rejects_zero() {
        assert!(make_coherent_state(0).is_err());
    }

    #[test]
    fn coherent_four_qubits() {
        let s = make_coherent_state(4).unwrap();
        let want = [0.25, 0.5, 6f64.sqrt() / 4.0, 0.5, 0.25];
        for (c, w) in s.amplitudes().iter().zip(want) {
            assert_relative_eq!(c.re, w, epsilon = 1e-14);
            assert_eq!(c.im, 0.0);
        }
    }

    #[test]
    fn coherent_moments_n100() {
        let m = spin_moments_exact(&make_coherent_state(100).unwrap());
        assert_relative_eq!(m.jx, 50.0, epsilon = 1e-9);
        assert!(m.jy.abs() < 1e-12 && m.jz.abs() < 1e-12);
        assert_relative_eq!(m.jy2, 25.0, epsilon = 1e-9);
        assert_relative_eq!(m.jz2, 25.0, epsilon = 1e-9);
    }

    #[test]
    fn dicke_top_state_moments() {
        let n = 30;
        let m = spin_moments_exact(&StateVector::top(n).unwrap());
        assert_relative_eq!(m.jz, 15.0);
        assert!(m.jx.abs() < 1e-14 && m.jy.abs() < 1e-14);
        assert_relative_eq!(m.jx2, 7.5, epsilon = 1e-12);
        assert_relative_eq!(m.jy2, 7.5, epsilon = 1e-12);
    }

    #[test]
    fn rotation_z_identity_and_full_turn() {
        let s = make_gss(&GaussianStateSpec::new(9, 0.6).unwrap()).unwrap();
        assert_eq!(apply_rotation_z(&s, 0.0), s);
        let full = apply_rotation_z(&s, 2.0 * PI);
        for (a, b) in full.amplitudes().iter().zip(s.amplitudes()) {
            assert_relative_eq!(a.norm(), b.norm(), epsilon = 1e-14);
        }
        assert_relative_eq!(full.overlap_abs(&s), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_x_identity() {
        let s = make_gss(&GaussianStateSpec::new(40, 0.4).unwrap()).unwrap();
        let r = apply_rotation_x(&s, 0.0).unwrap();
        assert!(dist(&r, &s) < 1e-12);
    }

    #[test]
    fn rotation_x_group_property() {
        let basis = JxEigenbasis::new(25).unwrap();
        let s = make_gss_with(&GaussianStateSpec::new(25, 0.5).unwrap(), &basis).unwrap();
        let twice = basis.rotate(&basis.rotate(&s, FRAC_PI_2), FRAC_PI_2);
        let once = basis.rotate(&s, PI);
        assert!(dist(&twice, &once) < 1e-12);
        let mut four = s.clone();
        for _ in 0..4 {
            four = basis.rotate(&four, FRAC_PI_2);
        }
        assert_relative_eq!(four.overlap_abs(&s), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_x_above_cap_is_rejected() {
        let err = JxEigenbasis::with_cap(101, 100).unwrap_err();
        assert!(matches!(err, Error::ExceedsExactCap { .. }));
    }

    #[test]
    fn x_rotation_swaps_y_and_z_second_moments() {
        let spec = GaussianStateSpec::new(100, 0.3).unwrap();
        let basis = JxEigenbasis::new(100).unwrap();
        let s = make_gss_with(&spec, &basis).unwrap();
        let before = spin_moments_exact(&s);
        let after = spin_moments_exact(&basis.rotate(&s, FRAC_PI_2));
        assert_relative_eq!(after.jz2, before.jy2, max_relative = 1e-10);
        assert_relative_eq!(after.jy2, before.jz2, max_relative = 1e-10);
        assert_relative_eq!(after.jx, before.jx, max_relative = 1e-10);
    }

    #[test]
    fn gss_with_unit_squeezing_is_close_to_coherent() {
        let g = spin_moments_exact(&make_gss(&GaussianStateSpec::new(100, 1.0).unwrap()).unwrap());
        let c = spin_moments_exact(&make_coherent_state(100).unwrap());
        assert_relative_eq!(g.jx, c.jx, max_relative = 0.02);
        assert_relative_eq!(g.jy2, c.jy2, max_relative = 0.02);
    }

    #[test]
    fn gss_squeezed_variance() {
        let g = spin_moments_exact(&make_gss(&GaussianStateSpec::new(100, 0.3).unwrap()).unwrap());
        assert_relative_eq!(g.jy2, 2.25, max_relative = 0.05);
        assert!(g.jy.abs() < 1e-10 && g.jz.abs() < 1e-10);
    }

    #[test]
    fn gss_mean_spin_length() {
        let spec = GaussianStateSpec::new(200, 0.2).unwrap();
        let g = spin_moments_exact(&make_gss(&spec).unwrap());
        let want = 100.0 * (-1.0 / (2.0 * spec.s2n())).exp();
        assert_relative_eq!(g.jx, want, max_relative = 0.01);
    }

    #[test]
    fn analytic_moments_values_and_validity() {
        let m = spin_moments_analytic(&GaussianStateSpec::new(100, 0.3).unwrap()).unwrap();
        assert_relative_eq!(m.jy2, 2.25, epsilon = 1e-12);
        let c = spin_moments_analytic(&GaussianStateSpec::new(400, 1.0).unwrap()).unwrap();
        assert_relative_eq!(c.jx, 200.0 * (-1.0f64 / 800.0).exp(), epsilon = 1e-12);
        let err = spin_moments_analytic(&GaussianStateSpec::new(10, 0.2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::MomentValidity(_)));
    }

    #[test]
    fn analytic_matches_exact_n1000() {
        let spec = GaussianStateSpec::new(1000, 0.1).unwrap();
        let a = spin_moments_analytic(&spec).unwrap();
        let e = spin_moments_exact(&make_gss(&spec).unwrap());
        assert_relative_eq!(a.jx, e.jx, max_relative = 0.02);
        assert_relative_eq!(a.jx2, e.jx2, max_relative = 0.02);
        assert_relative_eq!(a.jy2, e.jy2, max_relative = 0.02);
        assert_relative_eq!(a.jz2, e.jz2, max_relative = 0.02);
        assert!(e.jy.abs() < 1e-8 && e.jz.abs() < 1e-8);
    }

    #[test]
    fn outcome_distribution_symmetric_at_zero() {
        let s = make_gss(&GaussianStateSpec::new(60, 0.4).unwrap()).unwrap();
        let p = outcome_distribution(&s, 0.0).unwrap();
        let n = p.len();
        for i in 0..n {
            assert_relative_eq!(p[i], p[n - 1 - i], epsilon = 1e-12);
        }
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn outcome_mean_follows_signal_law() {
        let s = make_coherent_state(100).unwrap();
        let theta = 0.1;
        let p = outcome_distribution(&s, theta).unwrap();
        let mean: f64 = p
            .iter()
            .enumerate()
            .map(|(i, q)| (i as f64 - 50.0) * q)
            .sum();
        assert_relative_eq!(mean, 50.0 * theta.sin(), epsilon = 1e-8);
    }

    #[test]
    fn eigenbasis_orthonormal_large() {
        let n = 1500;
        let basis = JxEigenbasis::new(n).unwrap();
        for &(a, b) in &[
            (0, 0),
            (0, 1),
            (700, 750),
            (750, 750),
            (1500, 3),
            (1499, 1500),
        ] {
            let dot: f64 = basis
                .eigenvector(a)
                .iter()
                .zip(basis.eigenvector(b))
                .map(|(x, y)| x * y)
                .sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-10, "<{a}|{b}> = {dot}");
        }
    }

    #[test]
    fn outcome_window_matches_full_distribution() {
        let n = 300;
        let basis = JxEigenbasis::new(n).unwrap();
        let state = make_gss_with(&GaussianStateSpec::new(n, 0.3).unwrap(), &basis).unwrap();
        let full = basis.outcome_distribution(&state, 0.1);
        let window = basis.outcome_window(&state, 0.1, 140, 200);
        for (w, f) in window.iter().zip(&full[140..=200]) {
            assert_relative_eq!(w, f, epsilon = 1e-13);
        }
        let all = basis.outcome_window(&state, 0.1, 0, n);
        assert_relative_eq!(all.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}
