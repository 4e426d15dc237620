//! Joint spectral amplitude F(ν1, ν2) = Φ(ν1, ν2)·ρ(ν1 + ν2) of the photon
//! pair, evaluated on detunings ν_k = ω_k − ω̄ from the degenerate centre.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian pump envelope ρ(s) = exp(−s²/(2σ²)) in the detuning sum s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSpectrum {
    /// Degenerate centre ω̄ of each photon, rad/s.
    pub center: f64,
    /// Spectral width σ, rad/s.
    pub sigma: f64,
}

impl PumpSpectrum {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pump width must be positive, got {sigma}"
            )));
        }
        Ok(PumpSpectrum { center, sigma })
    }

    pub fn envelope(&self, detuning_sum: f64) -> f64 {
        (-detuning_sum * detuning_sum / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Gaussian phase-matching function Φ(ν1, ν2) = exp(−γ(Aν1 + Bν2)²) with
/// B = −A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchGaussian {
    gamma: f64,
    a_coef: f64,
}

impl PhaseMatchGaussian {
    pub fn new(gamma: f64, a_coef: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(a_coef.is_finite() && a_coef != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "phase-matching coefficient A must be finite and non-zero, got {a_coef}"
            )));
        }
        Ok(PhaseMatchGaussian { gamma, a_coef })
    }

    /// The default crystal of the simulations: A = 0.7/(σ√(2γ)).
    pub fn reference(sigma: f64, gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.7 / (sigma * (2.0 * gamma).sqrt()))
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn a_coef(&self) -> f64 {
        self.a_coef
    }

    pub fn b_coef(&self) -> f64 {
        -self.a_coef
    }

    pub fn value(&self, nu1: f64, nu2: f64) -> f64 {
        let x = self.a_coef * nu1 + self.b_coef() * nu2;
        (-self.gamma * x * x).exp()
    }
}

/// Rotational Doppler shift ±lΩ imprinted by the rotating q-plates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdeShift {
    pub l: u32,
    /// Rotation rate Ω, rad/s.
    pub omega_rot: f64,
}

impl RdeShift {
    /// lΩ in rad/s.
    pub fn detuning(&self) -> f64 {
        f64::from(self.l) * self.omega_rot
    }
}

pub fn jsa_value(nu1: f64, nu2: f64, pump: &PumpSpectrum, pm: &PhaseMatchGaussian) -> f64 {
    pm.value(nu1, nu2) * pump.envelope(nu1 + nu2)
}

/// JSA magnitude sampled on a square detuning grid, peak-normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsaGrid {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    /// Row-major, `values[i * axis2.len() + j]` at (axis1[i], axis2[j]).
    pub values: Vec<f64>,
}

impl JsaGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis2.len() + j]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Spacing of the first axis.
    pub fn cell(&self) -> f64 {
        if self.axis1.len() < 2 {
            0.0
        } else {
            self.axis1[1] - self.axis1[0]
        }
    }
}

pub const MIN_GRID: usize = 16;

/// Samples the JSA on an `n × n` grid over ±`half_width` (rad/s).
///
/// With a shift, each point takes the larger of the two branch magnitudes
/// Φ(ν1 + lΩ, ν2 − lΩ)ρ and Φ(ν1 − lΩ, ν2 + lΩ)ρ: the branches carry opposite
/// OAM tags and do not add coherently.
pub fn jsa_grid(
    pump: &PumpSpectrum,
    pm: &PhaseMatchGaussian,
    shift: Option<RdeShift>,
    half_width: f64,
    n: usize,
) -> Result<JsaGrid> {
    if n < MIN_GRID {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least {MIN_GRID} points per axis, got {n}"
        )));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "grid half width must be positive, got {half_width}"
        )));
    }
    if let Some(s) = shift {
        if !s.omega_rot.is_finite() {
            return Err(Error::InvalidArgument("rotation rate must be finite".into()));
        }
    }
    let axis: Vec<f64> = (0..n)
        .map(|i| half_width * (2.0 * i as f64 / (n - 1) as f64 - 1.0))
        .collect();
    let mut values = Vec::with_capacity(n * n);
    for &nu1 in &axis {
        for &nu2 in &axis {
            let rho = pump.envelope(nu1 + nu2);
            let v = match shift {
                None => pm.value(nu1, nu2) * rho,
                Some(s) => {
                    let d = s.detuning();
                    let up = pm.value(nu1 + d, nu2 - d);
                    let down = pm.value(nu1 - d, nu2 + d);
                    up.max(down) * rho
                }
            };
            values.push(v);
        }
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for v in &mut values {
            *v /= max;
        }
    }
    Ok(JsaGrid {
        axis1: axis.clone(),
        axis2: axis,
        values,
    })
}

/// Local maxima above half the global maximum, strongest first.
///
/// A point is a peak when it exceeds every 8-neighbour that precedes it in
/// row-major order and is not exceeded by any neighbour that follows it, so a
/// plateau of equal values contributes exactly one peak.
pub fn peak_locations(grid: &JsaGrid) -> Vec<(f64, f64)> {
    let (n1, n2) = (grid.axis1.len(), grid.axis2.len());
    let global = grid.max_value();
    if global <= 0.0 {
        return Vec::new();
    }
    let mut peaks: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let v = grid.value(i, j);
            if v <= 0.5 * global {
                continue;
            }
            let mut is_peak = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= n1 as i64 || nj >= n2 as i64 {
                        continue;
                    }
                    let w = grid.value(ni as usize, nj as usize);
                    let before = (di, dj) < (0, 0);
                    if (before && w >= v) || (!before && w > v) {
                        is_peak = false;
                        break 'nb;
                    }
                }
            }
            if is_peak {
                peaks.push((v, i, j));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    peaks
        .into_iter()
        .map(|(_, i, j)| (grid.axis1[i], grid.axis2[j]))
        .collect()
}

/// HOM envelope width τ_c implied by the phase-matching function.
///
/// Along the antidiagonal Φ(ν, −ν) = exp(−4γA²ν²), so the single-photon
/// spectral density |Φ|² has standard deviation 1/(4√γ|A|) and the
/// overlap decays as exp(−τ²/(2τ_c²)) with τ_c = 2√γ|A|.
pub fn effective_coherence_time(pm: &PhaseMatchGaussian) -> f64 {
    2.0 * pm.gamma.sqrt() * pm.a_coef.abs()
}
