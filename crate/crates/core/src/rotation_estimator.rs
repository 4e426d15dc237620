//! Recovering the beat frequency 2lΩ, the envelope width τ_c and the dip
//! visibility from a measured (or synthesized) HOM trace.
//!
//! Only the product 2lΩ is identifiable: a trace does not separate the
//! topological charge from the rotation rate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom_interference::{coincidence_rde, HomConfig};
use crate::least_squares::{levenberg_marquardt, LmOptions};

pub const MIN_SAMPLES: usize = 32;

/// A beat is resolvable when βτ_c ≥ π, i.e. two full periods fit inside the
/// ±2τ_c core of the envelope.
pub const RESOLUTION_THRESHOLD: f64 = PI;

/// Half-width of the beat analysis window, in units of τ_c.
const BEAT_WINDOW: f64 = 2.0;

/// Frequency-grid oversampling relative to the natural DFT resolution.
const SPECTRAL_OVERSAMPLING: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyTrace {
    /// (delay s, coincidence probability); delays strictly increasing.
    pub samples: Vec<(f64, f64)>,
    pub noise_sigma: f64,
    pub rng_seed: Option<u64>,
}

impl NoisyTrace {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        let trace = NoisyTrace {
            samples,
            noise_sigma: 0.0,
            rng_seed: None,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() < MIN_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "trace has {} samples, at least {MIN_SAMPLES} are needed",
                self.samples.len()
            )));
        }
        if self.samples.iter().any(|(t, p)| !(t.is_finite() && p.is_finite())) {
            return Err(Error::InvalidInput("trace contains non-finite values".into()));
        }
        if self.samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidInput("delays must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Closed-form beat trace plus seeded additive Gaussian noise.
pub fn synthesize_trace(cfg: &HomConfig, noise_sigma: f64, seed: u64) -> Result<NoisyTrace> {
    cfg.validate()?;
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise sigma must be non-negative, got {noise_sigma}"
        )));
    }
    let mut samples: Vec<(f64, f64)> = cfg
        .tau_grid
        .iter()
        .map(|&t| (t, coincidence_rde(t, cfg.tau_c, cfg.l, cfg.omega_rot)))
        .collect();
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_sigma)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for s in &mut samples {
            s.1 += normal.sample(&mut rng);
        }
    }
    Ok(NoisyTrace {
        samples,
        noise_sigma,
        rng_seed: Some(seed),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub tau_c: f64,
    pub visibility: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Fits ½ − (V/2)·exp(−τ²/(2τ_c²)) to the lower envelope of the trace.
///
/// The envelope is taken as the largest |p − ½| inside windows of half a
/// beat period centred on the beat extrema kπ/β, with β a rough estimate
/// from the raw spectrum. Without a detectable beat every sample is its own
/// window.
pub fn fit_envelope(trace: &NoisyTrace) -> Result<EnvelopeFit> {
    trace.validate()?;
    let s = &trace.samples;
    let span = s[s.len() - 1].0 - s[0].0;
    let dips: Vec<(f64, f64)> = s.iter().map(|&(t, p)| (t, 0.5 - p)).collect();

    let raw_beat = dominant_frequency(&dips);
    let window = if raw_beat > 0.0 && PI / raw_beat < span / 8.0 {
        Some(PI / raw_beat)
    } else {
        None
    };
    let envelope: Vec<(f64, f64)> = match window {
        None => dips.iter().map(|&(t, d)| (t, d.abs())).collect(),
        Some(w) => {
            let mut best: Vec<(i64, f64, f64)> = Vec::new();
            for &(t, d) in &dips {
                let k = (t / w).round() as i64;
                match best.last_mut() {
                    Some(last) if last.0 == k => {
                        if d.abs() > last.2 {
                            *last = (k, t, d.abs());
                        }
                    }
                    _ => best.push((k, t, d.abs())),
                }
            }
            best.into_iter().map(|(_, t, e)| (t, e)).collect()
        }
    };

    let peak = envelope.iter().map(|e| e.1).fold(0.0, f64::max);
    let weight: f64 = envelope.iter().map(|e| e.1).sum();
    if peak < 1e-9 || weight <= 0.0 {
        return Ok(EnvelopeFit {
            tau_c: 0.0,
            visibility: 2.0 * peak,
            converged: false,
            iterations: 0,
        });
    }
    let second_moment: f64 = envelope.iter().map(|&(t, e)| e * t * t).sum::<f64>() / weight;
    let scale = second_moment.sqrt().max(span / s.len() as f64);

    // Dimensionless fit in u = τ/scale over (V, c = τ_c/scale).
    let us: Vec<f64> = envelope.iter().map(|e| e.0 / scale).collect();
    let report = levenberg_marquardt(
        DVector::from_vec(vec![2.0 * peak, 1.0]),
        |p| {
            let (v, c) = (p[0], p[1]);
            let mut r = DVector::zeros(us.len());
            let mut j = DMatrix::zeros(us.len(), 2);
            for (k, (&u, e)) in us.iter().zip(&envelope).enumerate() {
                let g = (-u * u / (2.0 * c * c)).exp();
                r[k] = 0.5 * v * g - e.1;
                j[(k, 0)] = 0.5 * g;
                j[(k, 1)] = 0.5 * v * g * u * u / (c * c * c);
            }
            (r, j)
        },
        LmOptions::default(),
    );
    let (v, c) = (report.params[0], report.params[1].abs());
    let rms = (2.0 * report.cost / us.len() as f64).sqrt();
    let identifiable = v.is_finite() && c.is_finite() && c > 0.0 && 0.5 * v > 3.0 * rms && v > 1e-9;
    Ok(EnvelopeFit {
        tau_c: c * scale,
        visibility: v,
        converged: report.converged && identifiable,
        iterations: report.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatEstimate {
    /// Angular beat frequency 2lΩ, rad/s; zero when below resolution.
    pub beat: f64,
    pub below_resolution: bool,
}

/// Dominant angular frequency of (½ − p)·exp(τ²/(2τ_c²)) inside |τ| ≤ 2τ_c,
/// with τ_c from [`fit_envelope`].
pub fn extract_beat(trace: &NoisyTrace) -> Result<BeatEstimate> {
    let env = fit_envelope(trace)?;
    if !env.converged {
        return Ok(BeatEstimate {
            beat: 0.0,
            below_resolution: true,
        });
    }
    extract_beat_with_envelope(trace, env.tau_c)
}

pub fn extract_beat_with_envelope(trace: &NoisyTrace, tau_c: f64) -> Result<BeatEstimate> {
    trace.validate()?;
    if !(tau_c.is_finite() && tau_c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "envelope width must be positive, got {tau_c}"
        )));
    }
    let corrected: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .filter(|(t, _)| t.abs() <= BEAT_WINDOW * tau_c)
        .map(|&(t, p)| (t, (0.5 - p) * (t * t / (2.0 * tau_c * tau_c)).exp()))
        .collect();
    let flagged = BeatEstimate {
        beat: 0.0,
        below_resolution: true,
    };
    if corrected.len() < 8 {
        return Ok(flagged);
    }
    let beat = dominant_frequency(&corrected);
    if beat * tau_c < RESOLUTION_THRESHOLD {
        return Ok(flagged);
    }
    Ok(BeatEstimate {
        beat,
        below_resolution: false,
    })
}

/// Peak of the Hann-windowed discrete-time Fourier transform of `(τ, x)`,
/// searched on an oversampled grid up to the Nyquist frequency and refined
/// by a parabola through the three highest grid values. Returns 0 when the
/// spectrum peaks at DC.
fn dominant_frequency(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len();
    let t0 = samples[0].0;
    let span = samples[n - 1].0 - t0;
    if span.is_nan() || span <= 0.0 {
        return 0.0;
    }
    let step = span / (n - 1) as f64;
    let nyquist = PI / step;
    let d_omega = 2.0 * PI / span / SPECTRAL_OVERSAMPLING;
    let bins = (nyquist / d_omega).ceil() as usize;

    // Work in units of the span to keep the phases well conditioned.
    let weighted: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(t, x)| {
            let u = (t - t0) / span;
            (u, x * 0.5 * (1.0 - (2.0 * PI * u).cos()))
        })
        .collect();
    // The phase is linear in the bin index, so each sample's phasor is
    // advanced by one fixed rotation per bin instead of re-evaluating sin/cos.
    let mut acc = vec![Complex64::new(0.0, 0.0); bins + 1];
    for &(u, x) in &weighted {
        let step = Complex64::from_polar(1.0, -d_omega * span * u);
        let mut z = Complex64::new(x, 0.0);
        for (j, a) in acc.iter_mut().enumerate() {
            *a += z;
            z *= step;
            // Re-anchor periodically so rounding in the recurrence stays bounded.
            if j % 256 == 255 {
                z = x * Complex64::from_polar(1.0, -((j + 1) as f64) * d_omega * span * u);
            }
        }
    }
    let spectrum: Vec<f64> = acc.iter().map(|a| a.norm()).collect();
    let (j, _) = spectrum
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (j, &v)| if v > best.1 { (j, v) } else { best });
    if j == 0 {
        return 0.0;
    }
    if j == bins {
        return j as f64 * d_omega;
    }
    let (a, b, c) = (spectrum[j - 1], spectrum[j], spectrum[j + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    (j as f64 + offset) * d_omega
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    /// Beat angular frequency 2lΩ, rad/s.
    pub beat: f64,
    pub tau_c_hat: f64,
    pub visibility_hat: f64,
    pub rms_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub below_resolution: bool,
}

/// Joint least-squares fit of ½ − (V/2)·cos(βτ)·exp(−τ²/(2τ_c²)), started
/// from the envelope fit and the spectral beat estimate.
pub fn estimate(trace: &NoisyTrace) -> Result<EstimateResult> {
    trace.validate()?;
    let env = fit_envelope(trace)?;
    if !env.converged {
        let rms = rms_residual(trace, env.visibility, 0.0, env.tau_c);
        return Ok(EstimateResult {
            beat: 0.0,
            tau_c_hat: env.tau_c,
            visibility_hat: env.visibility,
            rms_residual: rms,
            converged: false,
            iterations: env.iterations,
            below_resolution: true,
        });
    }
    let beat = extract_beat_with_envelope(trace, env.tau_c)?;
    let scale = env.tau_c;
    let us: Vec<f64> = trace.samples.iter().map(|s| s.0 / scale).collect();
    let ps: Vec<f64> = trace.samples.iter().map(|s| s.1).collect();
    let with_beat = !beat.below_resolution;

    let report = levenberg_marquardt(
        if with_beat {
            DVector::from_vec(vec![env.visibility, beat.beat * scale, 1.0])
        } else {
            DVector::from_vec(vec![env.visibility, 1.0])
        },
        |p| {
            let (v, b, c) = if with_beat {
                (p[0], p[1], p[2])
            } else {
                (p[0], 0.0, p[1])
            };
            let cols = p.len();
            let mut r = DVector::zeros(us.len());
            let mut j = DMatrix::zeros(us.len(), cols);
            for (k, (&u, &pk)) in us.iter().zip(&ps).enumerate() {
                let g = (-u * u / (2.0 * c * c)).exp();
                let (sin, cos) = (b * u).sin_cos();
                r[k] = pk - (0.5 - 0.5 * v * cos * g);
                j[(k, 0)] = 0.5 * cos * g;
                if with_beat {
                    j[(k, 1)] = -0.5 * v * u * sin * g;
                }
                j[(k, cols - 1)] = 0.5 * v * cos * g * u * u / (c * c * c);
            }
            (r, j)
        },
        LmOptions::default(),
    );
    let (v, b, c) = if with_beat {
        (report.params[0], report.params[1].abs(), report.params[2].abs())
    } else {
        (report.params[0], 0.0, report.params[1].abs())
    };
    let tau_c_hat = c * scale;
    let beat_hat = b / scale;
    let converged = report.converged && tau_c_hat.is_finite() && tau_c_hat > 0.0 && v.is_finite();
    Ok(EstimateResult {
        beat: beat_hat,
        tau_c_hat,
        visibility_hat: v,
        rms_residual: (2.0 * report.cost / us.len() as f64).sqrt(),
        converged,
        iterations: report.iterations,
        below_resolution: beat.below_resolution,
    })
}

fn rms_residual(trace: &NoisyTrace, v: f64, beat: f64, tau_c: f64) -> f64 {
    let sum: f64 = trace
        .samples
        .iter()
        .map(|&(t, p)| {
            let model = if tau_c > 0.0 {
                0.5 - 0.5 * v * (beat * t).cos() * (-t * t / (2.0 * tau_c * tau_c)).exp()
            } else {
                0.5
            };
            (p - model).powi(2)
        })
        .sum();
    (sum / trace.samples.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const PS: f64 = 1e-12;

    fn noiseless(l: u32, omega: f64, tau_c: f64, span: f64, n: usize) -> NoisyTrace {
        let cfg = HomConfig::symmetric(tau_c, l, omega, span, n).unwrap();
        synthesize_trace(&cfg, 0.0, 0).unwrap()
    }

    #[test]
    fn noiseless_synthesis_matches_closed_form() {
        let cfg = HomConfig::symmetric(PS, 2, 2e12, 3.0 * PS, 101).unwrap();
        let t = synthesize_trace(&cfg, 0.0, 9).unwrap();
        for &(tau, p) in &t.samples {
            assert_eq!(p, coincidence_rde(tau, PS, 2, 2e12));
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let cfg = HomConfig::symmetric(PS, 2, 2e12, 3.0 * PS, 301).unwrap();
        let a = synthesize_trace(&cfg, 0.01, 42).unwrap();
        let b = synthesize_trace(&cfg, 0.01, 42).unwrap();
        assert_eq!(a, b);
        let c = synthesize_trace(&cfg, 0.01, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_level_statistics() {
        let cfg = HomConfig::symmetric(PS, 2, 2e12, 3.0 * PS, 601).unwrap();
        let t = synthesize_trace(&cfg, 0.01, 7).unwrap();
        let dev: Vec<f64> = t
            .samples
            .iter()
            .map(|&(tau, p)| p - coincidence_rde(tau, PS, 2, 2e12))
            .collect();
        let mean = dev.iter().sum::<f64>() / dev.len() as f64;
        let var = dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (dev.len() - 1) as f64;
        let sd = var.sqrt();
        assert!((0.008..=0.012).contains(&sd), "sample sd {sd}");
    }

    #[test]
    fn short_or_unsorted_traces_rejected() {
        let short: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 0.5)).collect();
        assert!(NoisyTrace::new(short).is_err());
        let mut unsorted: Vec<(f64, f64)> = (0..40).map(|i| (i as f64, 0.5)).collect();
        unsorted.swap(3, 4);
        assert!(NoisyTrace::new(unsorted).is_err());
    }

    #[test]
    fn envelope_of_plain_dip() {
        let t = noiseless(2, 0.0, PS, 3.0 * PS, 601);
        let env = fit_envelope(&t).unwrap();
        assert!(env.converged);
        assert_relative_eq!(env.tau_c, PS, max_relative = 5e-3);
        assert_relative_eq!(env.visibility, 1.0, max_relative = 1e-3);
    }

    #[test]
    fn envelope_of_beating_dip() {
        let t = noiseless(2, 2e12, PS, 3.0 * PS, 1201);
        let env = fit_envelope(&t).unwrap();
        assert!(env.converged);
        assert_relative_eq!(env.tau_c, PS, max_relative = 0.02);
    }

    #[test]
    fn flat_trace_is_unidentifiable() {
        let flat = NoisyTrace::new((0..200).map(|i| (i as f64 * 1e-14, 0.5)).collect()).unwrap();
        let env = fit_envelope(&flat).unwrap();
        assert!(!env.converged);
        assert!(env.visibility.abs() < 1e-6);
        let est = estimate(&flat).unwrap();
        assert!(!est.converged);
    }

    #[test]
    fn beat_from_noiseless_trace() {
        let t = noiseless(2, 2e12, PS, 3.0 * PS, 1201);
        let b = extract_beat(&t).unwrap();
        assert!(!b.below_resolution);
        assert_relative_eq!(b.beat, 8e12, max_relative = 5e-3);
    }

    #[test]
    fn beat_flagged_without_rotation() {
        let t = noiseless(2, 0.0, PS, 3.0 * PS, 1201);
        let b = extract_beat(&t).unwrap();
        assert!(b.below_resolution);
        assert_eq!(b.beat, 0.0);
    }

    #[test]
    fn beat_from_noisy_trace() {
        let cfg = HomConfig::symmetric(PS, 2, 2e12, 3.0 * PS, 1201).unwrap();
        let t = synthesize_trace(&cfg, 0.01, 1234).unwrap();
        let b = extract_beat(&t).unwrap();
        assert_relative_eq!(b.beat, 8e12, max_relative = 0.05);
    }

    #[test]
    fn joint_estimate_round_trips() {
        let t = noiseless(2, 2e12, PS, 3.0 * PS, 1201);
        let est = estimate(&t).unwrap();
        assert!(est.converged);
        assert_relative_eq!(est.beat, 8e12, max_relative = 5e-3);
        assert_relative_eq!(est.tau_c_hat, PS, max_relative = 1e-2);
        assert_relative_eq!(est.visibility_hat, 1.0, max_relative = 1e-2);

        let us = 1e-6;
        let slow = noiseless(2, 1e6, us, 3.0 * us, 1201);
        let est = estimate(&slow).unwrap();
        assert!(est.converged);
        assert_relative_eq!(est.beat, 4e6, max_relative = 5e-3);
    }

    #[test]
    fn sub_threshold_rotation_is_flagged() {
        let t = noiseless(2, 0.4e12, PS, 3.0 * PS, 1201);
        let est = estimate(&t).unwrap();
        assert!(est.below_resolution);
        assert_eq!(est.beat, 0.0);
    }

    #[test]
    fn residual_tracks_noise_level() {
        let cfg = HomConfig::symmetric(PS, 2, 2e12, 3.0 * PS, 1201).unwrap();
        let t = synthesize_trace(&cfg, 0.01, 5).unwrap();
        let est = estimate(&t).unwrap();
        assert!(est.converged);
        assert!(est.rms_residual <= 1.2 * 0.01);
    }
}
