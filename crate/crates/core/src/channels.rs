//! Collective dephasing and symmetric-subspace depolarization.
//!
//! Each channel has a stochastic form, used per trial, and a moment
//! transform, used for analytic predictions and the Gaussian sampler.
//! Dephasing is a rigid rotation about `y` by an angle drawn from the von
//! Mises density `exp(gamma cos phi) / (2 pi I0(gamma))`. Depolarization
//! mixes the state with the identity on the `N+1` dimensional subspace.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::dicke::SpinMoments;
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingConfig {
    pub gamma: f64,
}

impl DephasingConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "dephasing concentration must be finite and >= 0, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarizationConfig {
    pub epsilon: f64,
}

impl DepolarizationConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::invalid(format!(
                "depolarization must lie in [0, 1], got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    /// Squeezing floor `s_min^2 = E N / 3`.
    pub fn squeezing_floor_sq(&self, n_qubits: f64) -> f64 {
        self.epsilon * n_qubits / 3.0
    }
}

/// Noise acting on the prepared squeezed states.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "channel", rename_all = "snake_case")]
pub enum NoiseConfig {
    #[default]
    None,
    Dephasing(DephasingConfig),
    Depolarization(DepolarizationConfig),
}

impl NoiseConfig {
    pub fn is_none(&self) -> bool {
        matches!(self, NoiseConfig::None)
    }

    pub fn depolarization(&self) -> Option<DepolarizationConfig> {
        match self {
            NoiseConfig::Depolarization(d) => Some(*d),
            _ => None,
        }
    }

    /// Transforms noiseless moments of an `N`-qubit state.
    pub fn transform_moments(&self, m: &SpinMoments) -> Result<SpinMoments> {
        match self {
            NoiseConfig::None => Ok(*m),
            NoiseConfig::Dephasing(cfg) => dephase_moments(m, cfg),
            NoiseConfig::Depolarization(cfg) => Ok(depolarize_moments(m, cfg, m.n_qubits as f64)),
        }
    }
}

impl fmt::Display for NoiseConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseConfig::None => write!(f, "none"),
            NoiseConfig::Dephasing(c) => write!(f, "dephasing:{}", c.gamma),
            NoiseConfig::Depolarization(c) => write!(f, "depol:{}", c.epsilon),
        }
    }
}

impl FromStr for NoiseConfig {
    type Err = Error;

    /// Parses `none`, `dephasing:<gamma>` or `depol:<epsilon>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(NoiseConfig::None);
        }
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("unrecognized noise spec '{s}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad noise parameter in '{s}'")))?;
        match kind.trim() {
            "dephasing" | "deph" => Ok(NoiseConfig::Dephasing(DephasingConfig::new(value)?)),
            "depol" | "depolarization" => Ok(NoiseConfig::Depolarization(
                DepolarizationConfig::new(value)?,
            )),
            other => Err(Error::invalid(format!("unknown noise channel '{other}'"))),
        }
    }
}

/// `c1 = <cos phi>`, `c2 = <cos 2 phi>` under the dephasing density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients {
    pub c1: f64,
    pub c2: f64,
}

/// Draws a dephasing angle in `[-pi, pi)`.
///
/// Best–Fisher rejection sampling; the uniform and wrapped-normal limits take
/// over at very small and very large concentration.
pub fn sample_dephasing_angle<R: Rng + ?Sized>(cfg: &DephasingConfig, rng: &mut R) -> f64 {
    let kappa = cfg.gamma;
    if kappa < 1e-8 {
        return PI * (2.0 * rng.random::<f64>() - 1.0);
    }
    if kappa > 1e6 {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        return wrap_angle(z / kappa.sqrt());
    }
    let s = if kappa < 1e-5 {
        1.0 / kappa + kappa
    } else {
        let r = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
        let rho = (r - (2.0 * r).sqrt()) / (2.0 * kappa);
        (1.0 + rho * rho) / (2.0 * rho)
    };
    let w = loop {
        let u: f64 = rng.random();
        let z = (PI * u).cos();
        let w = (1.0 + s * z) / (s + z);
        let y = kappa * (s - w);
        let v: f64 = rng.random();
        if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
            break w;
        }
    };
    let phi = w.clamp(-1.0, 1.0).acos();
    if rng.random::<f64>() < 0.5 {
        -phi
    } else {
        phi
    }
}

fn wrap_angle(phi: f64) -> f64 {
    (phi + PI).rem_euclid(2.0 * PI) - PI
}

/// Low Fourier components of the dephasing density by adaptive quadrature.
pub fn fourier_coefficients(cfg: &DephasingConfig) -> FourierCoefficients {
    let g = cfg.gamma;
    if g == 0.0 {
        return FourierCoefficients { c1: 0.0, c2: 0.0 };
    }
    // exp(g (cos phi - 1)) keeps the weight at most 1; the density is even,
    // so integrate over [0, pi]. Since cos(phi) - 1 <= -2 phi^2 / pi^2 there,
    // the weight is below e^-450 beyond `upper`. cos(phi) - 1 is evaluated as
    // -2 sin^2(phi / 2): the direct difference is a rounding staircase near 0
    // that adaptive refinement never resolves.
    let weight = |phi: f64| (-2.0 * g * (0.5 * phi).sin().powi(2)).exp();
    let upper = PI.min(15.0 * PI / g.sqrt());
    let integrate = |f: &dyn Fn(f64) -> f64| {
        let coarse = adaptive_simpson(&f, 0.0, upper, 1e-3 * upper);
        adaptive_simpson(&f, 0.0, upper, 1e-14 * coarse.abs().max(f64::MIN_POSITIVE))
    };
    let norm = integrate(&weight);
    // 1 - c_n = <2 sin^2(n phi / 2)>; this form keeps accuracy as c_n -> 1.
    let gap1 = integrate(&|p: f64| 2.0 * (0.5 * p).sin().powi(2) * weight(p));
    let gap2 = integrate(&|p: f64| 2.0 * p.sin().powi(2) * weight(p));
    FourierCoefficients {
        c1: 1.0 - gap1 / norm,
        c2: 1.0 - gap2 / norm,
    }
}

/// Averages moments of a `y`-symmetric state over the dephasing rotation.
pub fn dephase_moments(m: &SpinMoments, cfg: &DephasingConfig) -> Result<SpinMoments> {
    dephase_moments_with(m, &fourier_coefficients(cfg))
}

/// [`dephase_moments`] with precomputed Fourier coefficients.
pub fn dephase_moments_with(m: &SpinMoments, coeffs: &FourierCoefficients) -> Result<SpinMoments> {
    let tol = 1e-9 * (m.n_qubits as f64).max(1.0);
    if m.jy.abs() > tol {
        return Err(Error::invalid(format!(
            "dephasing transform needs <J_y> = 0, got {}",
            m.jy
        )));
    }
    let FourierCoefficients { c1, c2 } = *coeffs;
    let keep = 0.5 * (1.0 + c2);
    let swap = 0.5 * (1.0 - c2);
    Ok(SpinMoments {
        n_qubits: m.n_qubits,
        jx: c1 * m.jx,
        jy: m.jy,
        jz: 0.0,
        jx2: keep * m.jx2 + swap * m.jz2,
        jy2: m.jy2,
        jz2: swap * m.jx2 + keep * m.jz2,
    })
}

/// Moments after mixing with the maximally mixed symmetric state of `N` qubits.
pub fn depolarize_moments(m: &SpinMoments, cfg: &DepolarizationConfig, n: f64) -> SpinMoments {
    let e = cfg.epsilon;
    let mixed = n * (n + 2.0) / 12.0;
    SpinMoments {
        n_qubits: m.n_qubits,
        jx: (1.0 - e) * m.jx,
        jy: (1.0 - e) * m.jy,
        jz: (1.0 - e) * m.jz,
        jx2: (1.0 - e) * m.jx2 + e * mixed,
        jy2: (1.0 - e) * m.jy2 + e * mixed,
        jz2: (1.0 - e) * m.jz2 + e * mixed,
    }
}

/// Inverse-CDF draw of an index from a normalized probability vector.
pub fn sample_index<R: Rng + ?Sized>(dist: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left the total a hair below 1: return the last populated bin.
    dist.iter()
        .rposition(|p| *p > 0.0)
        .unwrap_or(dist.len() - 1)
}

/// Draws an outcome index from `dist` mixed with the uniform distribution.
pub fn sample_depolarized_outcome<R: Rng + ?Sized>(
    dist: &[f64],
    cfg: &DepolarizationConfig,
    rng: &mut R,
) -> usize {
    if cfg.epsilon > 0.0 && rng.random::<f64>() < cfg.epsilon {
        rng.random_range(0..dist.len())
    } else {
        sample_index(dist, rng)
    }
}
