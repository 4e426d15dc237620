//! Type-II (e → o + e) down-conversion geometry in a negative uniaxial
//! crystal.
//!
//! Photons are emitted in the plane that contains the pump and is
//! perpendicular to the principal plane (pump, optic axis). In that plane a
//! photon at internal angle `t` to the pump travels at `acos(cos(cut)·cos(t))`
//! to the optic axis, independent of which side of the pump it leaves on, so
//! the ordinary and extraordinary emission curves are mirror images about the
//! degenerate frequency and meet there once the cut angle exceeds the
//! collinear phase-matching angle.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light expressed so that λ[µm] = C_UM_THZ / f[THz].
const C_UM_THZ: f64 = 299.792_458;

pub const WAVELENGTH_MIN_UM: f64 = 0.3;
pub const WAVELENGTH_MAX_UM: f64 = 1.5;

/// Internal emission angles searched by the root finder.
pub const MAX_INTERNAL_ANGLE_DEG: f64 = 10.0;

/// Bisection stops once the bracket on the internal angle is this narrow (rad).
pub const ANGLE_TOLERANCE: f64 = 1e-12;

/// Intersection refinement target on |Δangle| (degrees).
pub const INTERSECTION_TOLERANCE_DEG: f64 = 1e-6;

pub fn wavelength_um(frequency_thz: f64) -> f64 {
    C_UM_THZ / frequency_thz
}

/// One Sellmeier branch, n² = a + b/(λ² − c) − d·λ² with λ in µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SellmeierCoefficients {
    fn index(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        (self.a + self.b / (l2 - self.c) - self.d * l2).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierSet {
    pub ordinary: SellmeierCoefficients,
    /// Principal extraordinary index (propagation normal to the optic axis).
    pub extraordinary: SellmeierCoefficients,
    #[serde(default)]
    pub provenance: String,
}

impl SellmeierSet {
    /// β-BaB2O4 dispersion of Eimerl et al., J. Appl. Phys. 62, 1968 (1987).
    pub fn bbo_eimerl() -> Self {
        SellmeierSet {
            ordinary: SellmeierCoefficients {
                a: 2.7405,
                b: 0.0184,
                c: 0.0179,
                d: 0.0155,
            },
            extraordinary: SellmeierCoefficients {
                a: 2.3730,
                b: 0.0128,
                c: 0.0156,
                d: 0.0044,
            },
            provenance: "BBO, Eimerl et al., J. Appl. Phys. 62, 1968 (1987)".into(),
        }
    }

    /// Checks the indices are real and above one across the supported window.
    pub fn validate(&self) -> Result<()> {
        let n = 241;
        for i in 0..n {
            let lambda = WAVELENGTH_MIN_UM
                + (WAVELENGTH_MAX_UM - WAVELENGTH_MIN_UM) * i as f64 / (n - 1) as f64;
            for (name, coef) in [("ordinary", &self.ordinary), ("extraordinary", &self.extraordinary)] {
                let idx = coef.index(lambda);
                if !(idx.is_finite() && idx > 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "{name} Sellmeier index {idx} at {lambda} um is not a real index > 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Default for SellmeierSet {
    fn default() -> Self {
        Self::bbo_eimerl()
    }
}

fn check_wavelength(lambda_um: f64) -> Result<()> {
    if (WAVELENGTH_MIN_UM..=WAVELENGTH_MAX_UM).contains(&lambda_um) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            wavelength_um: lambda_um,
            min_um: WAVELENGTH_MIN_UM,
            max_um: WAVELENGTH_MAX_UM,
        })
    }
}

pub fn n_ordinary(lambda_um: f64, s: &SellmeierSet) -> Result<f64> {
    check_wavelength(lambda_um)?;
    Ok(s.ordinary.index(lambda_um))
}

/// Extraordinary index for propagation at `theta` (rad) to the optic axis.
pub fn n_extraordinary(lambda_um: f64, theta: f64, s: &SellmeierSet) -> Result<f64> {
    check_wavelength(lambda_um)?;
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "angle to the optic axis must lie in [0, pi/2], got {theta}"
        )));
    }
    let no = s.ordinary.index(lambda_um);
    let ne = s.extraordinary.index(lambda_um);
    if theta == 0.0 {
        return Ok(no);
    }
    if theta == FRAC_PI_2 {
        return Ok(ne);
    }
    let (sin, cos) = theta.sin_cos();
    Ok(1.0 / (cos * cos / (no * no) + sin * sin / (ne * ne)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalConfig {
    /// Angle between optic axis and pump wave vector, degrees.
    pub cut_angle_deg: f64,
    pub pump_frequency_thz: f64,
    pub sellmeier: SellmeierSet,
}

impl Default for CrystalConfig {
    fn default() -> Self {
        CrystalConfig {
            cut_angle_deg: 45.0,
            pump_frequency_thz: 740.88,
            sellmeier: SellmeierSet::default(),
        }
    }
}

impl CrystalConfig {
    pub fn with_cut_angle(cut_angle_deg: f64) -> Self {
        CrystalConfig {
            cut_angle_deg,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cut_angle_deg > 0.0 && self.cut_angle_deg < 90.0) {
            return Err(Error::InvalidArgument(format!(
                "cut angle must lie in (0, 90) degrees, got {}",
                self.cut_angle_deg
            )));
        }
        if !(self.pump_frequency_thz.is_finite() && self.pump_frequency_thz > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pump frequency must be positive, got {} THz",
                self.pump_frequency_thz
            )));
        }
        Ok(())
    }

    /// Wave number of the extraordinary pump, in units of 2π/c·THz.
    pub fn pump_wavenumber(&self) -> Result<f64> {
        let cut = self.cut_angle_deg.to_radians();
        let n = n_extraordinary(
            wavelength_um(self.pump_frequency_thz),
            cut,
            &self.sellmeier,
        )?;
        Ok(n * self.pump_frequency_thz)
    }

    /// Angle to the optic axis of a photon at internal angle `t` to the pump.
    pub fn axis_angle(&self, t: f64) -> f64 {
        let c = self.cut_angle_deg.to_radians().cos() * t.cos();
        c.clamp(-1.0, 1.0).acos()
    }

    fn index(&self, frequency_thz: f64, t: f64, ray: Ray) -> Result<f64> {
        let lambda = wavelength_um(frequency_thz);
        match ray {
            Ray::Ordinary => n_ordinary(lambda, &self.sellmeier),
            Ray::Extraordinary => n_extraordinary(lambda, self.axis_angle(t), &self.sellmeier),
        }
    }
}

/// Polarization of the signal photon on an emission curve; the idler takes
/// the other one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ray {
    Ordinary,
    Extraordinary,
}

impl Ray {
    pub fn other(self) -> Ray {
        match self {
            Ray::Ordinary => Ray::Extraordinary,
            Ray::Extraordinary => Ray::Ordinary,
        }
    }
}

/// A solved phase-matched pair. Wave numbers share the units of
/// [`CrystalConfig::pump_wavenumber`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionPoint {
    pub signal_frequency_thz: f64,
    pub idler_frequency_thz: f64,
    /// Internal angles to the pump, radians; signal and idler on opposite sides.
    pub signal_internal: f64,
    pub idler_internal: f64,
    pub signal_index: f64,
    pub idler_index: f64,
    pub pump_wavenumber: f64,
    /// External signal angle after refraction at the exit face, degrees.
    pub outside_angle_deg: f64,
}

/// Solves momentum conservation for a signal at `signal_thz` of polarization
/// `ray`. `Ok(None)` means no real phase-matched solution inside the search
/// range (or total internal reflection at the exit face).
pub fn solve_emission_point(
    cfg: &CrystalConfig,
    signal_thz: f64,
    ray: Ray,
) -> Result<Option<EmissionPoint>> {
    let idler_thz = cfg.pump_frequency_thz - signal_thz;
    if !(signal_thz > 0.0 && idler_thz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "signal frequency {signal_thz} THz must lie strictly inside (0, pump)"
        )));
    }
    let kp = cfg.pump_wavenumber()?;

    // Mismatch |k_p − k_s| − k_i as a function of the signal angle, with the
    // idler direction closing the momentum triangle.
    let mismatch = |t: f64| -> Result<f64> {
        let ks = cfg.index(signal_thz, t, ray)? * signal_thz;
        let (sin, cos) = t.sin_cos();
        let (tx, tz) = (ks * sin, kp - ks * cos);
        let ti = tx.atan2(tz);
        let ki = cfg.index(idler_thz, ti, ray.other())? * idler_thz;
        Ok(tx.hypot(tz) - ki)
    };

    let (mut lo, mut hi) = (0.0, MAX_INTERNAL_ANGLE_DEG.to_radians());
    let mut f_lo = mismatch(lo)?;
    let f_hi = mismatch(hi)?;
    if !(f_lo.is_finite() && f_hi.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "non-finite phase mismatch at {signal_thz} THz"
        )));
    }
    if f_lo == 0.0 {
        hi = lo;
    } else if f_lo * f_hi > 0.0 {
        return Ok(None);
    }
    while hi - lo > ANGLE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = mismatch(mid)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
        } else if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let n_s = cfg.index(signal_thz, t, ray)?;
    let ks = n_s * signal_thz;
    let ti = (ks * t.sin()).atan2(kp - ks * t.cos());
    let n_i = cfg.index(idler_thz, ti, ray.other())?;
    let sin_out = n_s * t.sin();
    if sin_out > 1.0 {
        return Ok(None);
    }
    Ok(Some(EmissionPoint {
        signal_frequency_thz: signal_thz,
        idler_frequency_thz: idler_thz,
        signal_internal: t,
        idler_internal: ti,
        signal_index: n_s,
        idler_index: n_i,
        pump_wavenumber: kp,
        outside_angle_deg: sin_out.asin().to_degrees(),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionCurve {
    pub ray: Ray,
    /// (signal frequency THz, outside angle degrees), frequency ascending.
    pub samples: Vec<(f64, f64)>,
}

impl EmissionCurve {
    /// Angle at `freq` by linear interpolation between neighbouring samples
    /// that are not separated by a gap of unsolvable points.
    pub fn angle_at(&self, freq: f64) -> Option<f64> {
        let s = &self.samples;
        let step = self.nominal_step()?;
        let idx = s.partition_point(|&(f, _)| f < freq);
        if idx < s.len() && s[idx].0 == freq {
            return Some(s[idx].1);
        }
        if idx == 0 || idx == s.len() {
            return None;
        }
        let (f0, a0) = s[idx - 1];
        let (f1, a1) = s[idx];
        if f1 - f0 > 1.5 * step {
            return None;
        }
        Some(a0 + (a1 - a0) * (freq - f0) / (f1 - f0))
    }

    fn nominal_step(&self) -> Option<f64> {
        self.samples
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionCurves {
    pub ordinary: EmissionCurve,
    pub extraordinary: EmissionCurve,
    /// Sample frequencies on the common grid, for tabular export.
    pub frequencies_thz: Vec<f64>,
    /// Points where the solver failed (as opposed to having no solution).
    pub failed: usize,
}

/// Samples both emission curves on `n_points` evenly spaced signal
/// frequencies spanning `freq_range` (THz).
pub fn emission_curves(
    cfg: &CrystalConfig,
    freq_range: (f64, f64),
    n_points: usize,
) -> Result<EmissionCurves> {
    cfg.validate()?;
    let (f_min, f_max) = freq_range;
    let pump = cfg.pump_frequency_thz;
    if !(f_min < f_max && f_min >= pump / 4.0 && f_max <= 3.0 * pump / 4.0) {
        return Err(Error::InvalidArgument(format!(
            "frequency window [{f_min}, {f_max}] THz must be increasing and inside [pump/4, 3 pump/4] = [{}, {}]",
            pump / 4.0,
            3.0 * pump / 4.0
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidArgument("need at least two sample points".into()));
    }
    // The pump itself has to be inside the dispersion window.
    cfg.pump_wavenumber()?;

    let frequencies: Vec<f64> = (0..n_points)
        .map(|i| f_min + (f_max - f_min) * i as f64 / (n_points - 1) as f64)
        .collect();
    let mut failed = 0;
    let mut curve = |ray: Ray| {
        let mut samples = Vec::new();
        for &f in &frequencies {
            match solve_emission_point(cfg, f, ray) {
                Ok(Some(p)) => samples.push((f, p.outside_angle_deg)),
                Ok(None) => {}
                Err(_) => failed += 1,
            }
        }
        EmissionCurve { ray, samples }
    };
    let ordinary = curve(Ray::Ordinary);
    let extraordinary = curve(Ray::Extraordinary);
    if ordinary.samples.is_empty() && extraordinary.samples.is_empty() {
        return Err(Error::NoSolution { failed });
    }
    Ok(EmissionCurves {
        ordinary,
        extraordinary,
        frequencies_thz: frequencies,
        failed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionResult {
    pub exists: bool,
    pub frequency_thz: f64,
    pub outside_angle_deg: f64,
    /// |o − e| angle at the reported frequency, degrees.
    pub residual_deg: f64,
}

impl IntersectionResult {
    fn none() -> Self {
        IntersectionResult {
            exists: false,
            frequency_thz: f64::NAN,
            outside_angle_deg: f64::NAN,
            residual_deg: f64::NAN,
        }
    }
}

/// First crossing (lowest frequency) of the two curves, located from a sign
/// change of the angle difference and refined by bisection on the
/// interpolated curves.
pub fn find_intersection(o_curve: &EmissionCurve, e_curve: &EmissionCurve) -> IntersectionResult {
    let diff = |f: f64| -> Option<f64> { Some(o_curve.angle_at(f)? - e_curve.angle_at(f)?) };
    let step = match o_curve.nominal_step() {
        Some(s) => s,
        None => return IntersectionResult::none(),
    };
    for w in o_curve.samples.windows(2) {
        let (f0, f1) = (w[0].0, w[1].0);
        if f1 - f0 > 1.5 * step {
            continue;
        }
        let (Some(d0), Some(d1)) = (diff(f0), diff(f1)) else {
            continue;
        };
        if d0 == 0.0 {
            return crossing_at(o_curve, f0, 0.0);
        }
        if d0 * d1 > 0.0 {
            continue;
        }
        let (mut lo, mut hi, mut d_lo) = (f0, f1, d0);
        let mut f = hi;
        let mut d = d1;
        for _ in 0..200 {
            if d.abs() < INTERSECTION_TOLERANCE_DEG && hi - lo < 1e-6 {
                break;
            }
            f = 0.5 * (lo + hi);
            d = match diff(f) {
                Some(v) => v,
                None => break,
            };
            if d == 0.0 {
                break;
            }
            if (d > 0.0) == (d_lo > 0.0) {
                lo = f;
                d_lo = d;
            } else {
                hi = f;
            }
        }
        return crossing_at(o_curve, f, d.abs());
    }
    IntersectionResult::none()
}

fn crossing_at(curve: &EmissionCurve, f: f64, residual: f64) -> IntersectionResult {
    IntersectionResult {
        exists: true,
        frequency_thz: f,
        outside_angle_deg: curve.angle_at(f).unwrap_or(f64::NAN),
        residual_deg: residual,
    }
}

/// Samples the curves and locates their crossing in one call.
pub fn intersection(
    cfg: &CrystalConfig,
    freq_range: (f64, f64),
    n_points: usize,
) -> Result<(EmissionCurves, IntersectionResult)> {
    let curves = emission_curves(cfg, freq_range, n_points)?;
    let hit = find_intersection(&curves.ordinary, &curves.extraordinary);
    Ok((curves, hit))
}

/// Relative error Δf / (2·l·f_rot) of tagging photons by their rotational
/// Doppler shift when the source itself is Δf wide (all in THz).
pub fn bandwidth_error(bandwidth_thz: f64, l: u32, rotation_thz: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidArgument("topological charge must be >= 1".into()));
    }
    if !(rotation_thz.is_finite() && rotation_thz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rotation frequency must be positive, got {rotation_thz}"
        )));
    }
    if !(bandwidth_thz.is_finite() && bandwidth_thz >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be non-negative, got {bandwidth_thz}"
        )));
    }
    Ok(bandwidth_thz / (2.0 * f64::from(l) * rotation_thz))
}
