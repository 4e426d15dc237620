//! Hong–Ou–Mandel coincidence probabilities for the frequency-entangled pair.
//!
//! Two independent routes are provided: the closed forms (Gaussian dip, and
//! the dip modulated by the 2lΩ quantum beat) and a direct quadrature of the
//! two-photon overlap integral. They must agree for Gaussian spectra.

use std::f64::consts::LN_2;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint_spectrum::{PhaseMatchGaussian, RdeShift};
use crate::quadrature::{integrate, QuadOptions};

/// Integration window half-width, in spectral standard deviations.
pub const WINDOW_SIGMAS: f64 = 8.0;

/// Absolute tolerance of the overlap quadrature.
pub const QUAD_ABS_TOL: f64 = 1e-9;

/// Δω_FWHM = 2√(2 ln 2)/τ_c.
pub fn fwhm_bandwidth(tau_c: f64) -> f64 {
    2.0 * (2.0 * LN_2).sqrt() / tau_c
}

/// Beat angular frequency 2lΩ.
pub fn beat_frequency(l: u32, omega_rot: f64) -> f64 {
    2.0 * f64::from(l) * omega_rot
}

/// Gaussian dip of a frequency-degenerate pair.
pub fn coincidence_plain(tau: f64, tau_c: f64) -> f64 {
    0.5 - 0.5 * (-tau * tau / (2.0 * tau_c * tau_c)).exp()
}

/// Dip of the ±lΩ shifted pair, modulated at the beat frequency 2lΩ.
pub fn coincidence_rde(tau: f64, tau_c: f64, l: u32, omega_rot: f64) -> f64 {
    let envelope = (-tau * tau / (2.0 * tau_c * tau_c)).exp();
    0.5 - 0.5 * (beat_frequency(l, omega_rot) * tau).cos() * envelope
}

/// Shape of a single-photon spectral amplitude about its centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpectralProfile {
    /// exp(−x²/(4·std²)); `std` is the standard deviation of |amplitude|².
    Gaussian { std: f64 },
    /// Antidiagonal cut of the phase-matching function, Φ(x, −x).
    PhaseMatch(PhaseMatchGaussian),
}

impl SpectralProfile {
    fn amplitude(&self, x: f64) -> Complex64 {
        let v = match self {
            SpectralProfile::Gaussian { std } => (-x * x / (4.0 * std * std)).exp(),
            SpectralProfile::PhaseMatch(pm) => pm.value(x, -x),
        };
        Complex64::new(v, 0.0)
    }

    /// Standard deviation of |amplitude|², sets the integration window.
    pub fn spectral_std(&self) -> f64 {
        match self {
            SpectralProfile::Gaussian { std } => *std,
            SpectralProfile::PhaseMatch(pm) => 1.0 / (4.0 * pm.gamma().sqrt() * pm.a_coef().abs()),
        }
    }
}

/// Single-photon amplitudes of the two OAM-tagged branches: the +l photon
/// centred at +lΩ and the −l photon at −lΩ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiphotonSpectra {
    pub profile: SpectralProfile,
    /// lΩ, rad/s.
    pub detuning: f64,
}

impl BiphotonSpectra {
    /// Gaussian spectra whose overlap decays with envelope width `tau_c`.
    pub fn from_coherence_time(tau_c: f64, l: u32, omega_rot: f64) -> Result<Self> {
        if !(tau_c.is_finite() && tau_c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coherence time must be positive, got {tau_c}"
            )));
        }
        Ok(BiphotonSpectra {
            profile: SpectralProfile::Gaussian {
                std: 1.0 / (2.0 * tau_c),
            },
            detuning: f64::from(l) * omega_rot,
        })
    }

    /// Spectra cut from the phase-matching function itself.
    pub fn from_phase_match(pm: PhaseMatchGaussian, shift: Option<RdeShift>) -> Self {
        BiphotonSpectra {
            profile: SpectralProfile::PhaseMatch(pm),
            detuning: shift.map_or(0.0, |s| s.detuning()),
        }
    }

    fn plus(&self, nu: f64) -> Complex64 {
        self.profile.amplitude(nu - self.detuning)
    }

    fn minus(&self, nu: f64) -> Complex64 {
        self.profile.amplitude(nu + self.detuning)
    }
}

/// P(τ) = ½ − ½·Re ∫ f₋*(−ν) f₊(ν) e^{2iντ} dν with both branch amplitudes
/// normalized to unit L² norm, evaluated by adaptive quadrature over
/// ±[`WINDOW_SIGMAS`] spectral widths.
pub fn coincidence_numeric(tau: f64, spectra: &BiphotonSpectra) -> Result<f64> {
    let w = spectra.profile.spectral_std();
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidArgument("spectral width must be positive".into()));
    }
    if !tau.is_finite() {
        return Err(Error::InvalidArgument("delay must be finite".into()));
    }
    let opts = QuadOptions {
        abs_tol: QUAD_ABS_TOL,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    // Integrate in units of the spectral width about each centre; the common
    // Jacobian w cancels in the normalized ratio.
    let d = spectra.detuning;
    let norm_plus = integrate(
        |x| spectra.plus(d + w * x).norm_sqr(),
        -WINDOW_SIGMAS,
        WINDOW_SIGMAS,
        opts,
    )?
    .value;
    let norm_minus = integrate(
        |x| spectra.minus(-d + w * x).norm_sqr(),
        -WINDOW_SIGMAS,
        WINDOW_SIGMAS,
        opts,
    )?
    .value;
    if !(norm_plus > 0.0 && norm_minus > 0.0) {
        return Err(Error::NumericalFailure("spectral amplitude has zero norm".into()));
    }
    let overlap = integrate(
        |x| {
            let nu = d + w * x;
            let phase = Complex64::from_polar(1.0, 2.0 * nu * tau);
            (spectra.minus(-nu).conj() * spectra.plus(nu) * phase).re
        },
        -WINDOW_SIGMAS,
        WINDOW_SIGMAS,
        opts,
    )?
    .value;
    let p = 0.5 - 0.5 * overlap / (norm_plus * norm_minus).sqrt();
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomConfig {
    pub tau_c: f64,
    pub l: u32,
    pub omega_rot: f64,
    pub tau_grid: Vec<f64>,
}

impl HomConfig {
    /// `points` delays evenly spaced over [−span, span].
    pub fn symmetric(tau_c: f64, l: u32, omega_rot: f64, span: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidArgument("need at least two delay points".into()));
        }
        if !(span.is_finite() && span > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "delay span must be positive, got {span}"
            )));
        }
        let tau_grid = (0..points)
            .map(|i| span * (2.0 * i as f64 / (points - 1) as f64 - 1.0))
            .collect();
        let cfg = HomConfig {
            tau_c,
            l,
            omega_rot,
            tau_grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_c.is_finite() && self.tau_c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coherence time must be positive, got {}",
                self.tau_c
            )));
        }
        if !self.omega_rot.is_finite() {
            return Err(Error::InvalidArgument("rotation rate must be finite".into()));
        }
        if self.tau_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("delays must be finite".into()));
        }
        Ok(())
    }

    pub fn beat(&self) -> f64 {
        beat_frequency(self.l, self.omega_rot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Closed,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomTrace {
    /// (delay s, coincidence probability) in grid order.
    pub samples: Vec<(f64, f64)>,
    /// True when every delay satisfies |τ| < τ_c/2, the range in which the
    /// beat formula was originally stated.
    pub within_validity_window: bool,
}

pub fn trace(cfg: &HomConfig, method: Method) -> Result<HomTrace> {
    cfg.validate()?;
    let samples = match method {
        Method::Closed => cfg
            .tau_grid
            .iter()
            .map(|&t| (t, coincidence_rde(t, cfg.tau_c, cfg.l, cfg.omega_rot)))
            .collect(),
        Method::Numeric => {
            let spectra = BiphotonSpectra::from_coherence_time(cfg.tau_c, cfg.l, cfg.omega_rot)?;
            cfg.tau_grid
                .iter()
                .map(|&t| Ok((t, coincidence_numeric(t, &spectra)?)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(HomTrace {
        samples,
        within_validity_window: cfg.tau_grid.iter().all(|t| t.abs() < 0.5 * cfg.tau_c),
    })
}

/// Whether the beat 2lΩ exceeds the FWHM bandwidth, and that bandwidth.
pub fn observability(l: u32, omega_rot: f64, tau_c: f64) -> (bool, f64) {
    let fwhm = fwhm_bandwidth(tau_c);
    (beat_frequency(l, omega_rot) > fwhm, fwhm)
}

/// Dip visibility (p_baseline − p_min)/p_baseline with the baseline taken as
/// the largest probability over the outer 10% of the delay range.
pub fn visibility(trace: &HomTrace) -> Result<f64> {
    let s = &trace.samples;
    if s.is_empty() {
        return Err(Error::InvalidInput("empty trace".into()));
    }
    let (t_min, t_max) = s
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(t, _)| {
            (lo.min(t), hi.max(t))
        });
    let margin = 0.05 * (t_max - t_min);
    let baseline = s
        .iter()
        .filter(|&&(t, _)| t <= t_min + margin || t >= t_max - margin)
        .map(|&(_, p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "trace baseline {baseline} is not positive"
        )));
    }
    let p_min = s.iter().map(|&(_, p)| p).fold(f64::INFINITY, f64::min);
    Ok(((baseline - p_min) / baseline).clamp(0.0, 1.0))
}

/// 2×2 density matrix on {|ω1⟩_a|ω2⟩_b, |ω2⟩_a|ω1⟩_b}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictedDensityMatrix {
    pub rho: Matrix2<Complex64>,
}

impl RestrictedDensityMatrix {
    pub fn trace(&self) -> Complex64 {
        self.rho[(0, 0)] + self.rho[(1, 1)]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.rho - self.rho.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.rho[(0, 0)].re;
        let d = self.rho[(1, 1)].re;
        let b = self.rho[(0, 1)];
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        (mean - radius, mean + radius)
    }
}

/// Density matrix with populations ((1+imb)/2, (1−imb)/2) and real coherence
/// V·√(ρ11·ρ22).
pub fn restricted_density_matrix(
    visibility: f64,
    population_imbalance: f64,
) -> Result<RestrictedDensityMatrix> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidArgument(format!(
            "visibility must lie in [0, 1], got {visibility}"
        )));
    }
    if !(-1.0..=1.0).contains(&population_imbalance) {
        return Err(Error::InvalidArgument(format!(
            "population imbalance must lie in [-1, 1], got {population_imbalance}"
        )));
    }
    let p1 = 0.5 * (1.0 + population_imbalance);
    let p2 = 0.5 * (1.0 - population_imbalance);
    let c = Complex64::new(visibility * (p1 * p2).sqrt(), 0.0);
    Ok(RestrictedDensityMatrix {
        rho: Matrix2::new(Complex64::new(p1, 0.0), c, c.conj(), Complex64::new(p2, 0.0)),
    })
}
