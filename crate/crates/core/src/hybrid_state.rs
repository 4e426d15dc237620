//! Two-photon hybrid states and the optical elements of the generation
//! pipeline: SPDC source, quarter-wave plates, rotating q-plates,
//! polarizers and a delayed balanced beam splitter.
//!
//! Photon frequencies are carried as detunings from the degenerate centre
//! frequency of the pair, so shifts of a few Trad/s stay exact next to an
//! optical carrier of ~2e15 rad/s.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance (rad/s) under which two detunings are the same label.
pub const DETUNING_TOLERANCE: f64 = 1e-6;

/// Tolerance on Σ|amplitude|² for states handed to the element operations.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Terms whose squared amplitude falls below this after merging are dropped.
const NEGLIGIBLE_WEIGHT: f64 = 1e-28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Circular polarization (spin angular momentum) of a single photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    /// σ+, left circular, helicity +1.
    Plus,
    /// σ−, right circular, helicity −1.
    Minus,
}

impl Spin {
    pub fn helicity(self) -> i64 {
        match self {
            Spin::Plus => 1,
            Spin::Minus => -1,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }
}

/// Where a photon is: still on its source path, or at a beam-splitter port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpatialMode {
    Source,
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonLabel {
    pub pol: Option<Polarization>,
    pub sam: Option<Spin>,
    /// Topological charge of the orbital angular momentum.
    pub oam: i64,
    /// Offset from the degenerate centre frequency, rad/s.
    pub detuning: f64,
    pub mode: SpatialMode,
}

impl PhotonLabel {
    pub fn polarized(pol: Polarization) -> Self {
        PhotonLabel {
            pol: Some(pol),
            sam: None,
            oam: 0,
            detuning: 0.0,
            mode: SpatialMode::Source,
        }
    }

    pub fn spin(sam: Spin) -> Self {
        PhotonLabel {
            pol: None,
            sam: Some(sam),
            oam: 0,
            detuning: 0.0,
            mode: SpatialMode::Source,
        }
    }

    /// A label carrying only OAM and frequency.
    pub fn oam_frequency(oam: i64, detuning: f64) -> Self {
        PhotonLabel {
            pol: None,
            sam: None,
            oam,
            detuning,
            mode: SpatialMode::Source,
        }
    }

    /// Label equality used for merging and inner products.
    pub fn matches(&self, other: &PhotonLabel) -> bool {
        self.pol == other.pol
            && self.sam == other.sam
            && self.oam == other.oam
            && self.mode == other.mode
            && (self.detuning - other.detuning).abs() <= DETUNING_TOLERANCE
    }

    fn validate(&self) -> Result<()> {
        if self.pol.is_some() && self.sam.is_some() {
            return Err(Error::InvalidState(
                "photon carries both a linear polarization and a spin label".into(),
            ));
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidState("non-finite detuning".into()));
        }
        Ok(())
    }
}

impl fmt::Display for PhotonLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::with_capacity(3);
        match (self.pol, self.sam) {
            (Some(Polarization::H), _) => parts.push("H".into()),
            (Some(Polarization::V), _) => parts.push("V".into()),
            (None, Some(Spin::Plus)) => parts.push("σ+".into()),
            (None, Some(Spin::Minus)) => parts.push("σ-".into()),
            (None, None) => {}
        }
        parts.push(format!("l={:+}", self.oam));
        parts.push(format!("dw={:+e} rad/s", self.detuning));
        write!(f, "|{}>", parts.join(", "))?;
        match self.mode {
            SpatialMode::Source => Ok(()),
            SpatialMode::A => write!(f, "_a"),
            SpatialMode::B => write!(f, "_b"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductTerm {
    pub amplitude: Complex64,
    pub photon1: PhotonLabel,
    pub photon2: PhotonLabel,
}

impl ProductTerm {
    pub fn new(amplitude: Complex64, photon1: PhotonLabel, photon2: PhotonLabel) -> Self {
        ProductTerm {
            amplitude,
            photon1,
            photon2,
        }
    }

    fn same_labels(&self, other: &ProductTerm) -> bool {
        self.photon1.matches(&other.photon1) && self.photon2.matches(&other.photon2)
    }

    fn swapped(&self) -> ProductTerm {
        ProductTerm {
            amplitude: self.amplitude,
            photon1: self.photon2,
            photon2: self.photon1,
        }
    }
}

/// Pure two-photon state: a superposition of labelled product terms with no
/// two terms sharing the same label pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonState {
    terms: Vec<ProductTerm>,
    center_frequency: f64,
}

impl TwoPhotonState {
    /// Builds a state from arbitrary terms, merging duplicates and
    /// rescaling to unit norm.
    pub fn normalized(terms: Vec<ProductTerm>, center_frequency: f64) -> Result<Self> {
        if !(center_frequency.is_finite() && center_frequency > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "centre frequency must be positive and finite, got {center_frequency}"
            )));
        }
        for t in &terms {
            t.photon1.validate()?;
            t.photon2.validate()?;
        }
        let mut state = TwoPhotonState {
            terms: merge_terms(terms),
            center_frequency,
        };
        let norm = state.norm_squared().sqrt();
        if state.terms.is_empty() || norm == 0.0 {
            return Err(Error::EmptyState);
        }
        for t in &mut state.terms {
            t.amplitude /= norm;
        }
        Ok(state)
    }

    /// Relabels every term through `map` and re-merges. The map must be
    /// injective on labels for the norm to survive; all element maps are.
    fn map_terms<F>(&self, mut map: F) -> Result<Self>
    where
        F: FnMut(&ProductTerm) -> Result<ProductTerm>,
    {
        let terms = self.terms.iter().map(&mut map).collect::<Result<Vec<_>>>()?;
        Ok(TwoPhotonState {
            terms: merge_terms(terms),
            center_frequency: self.center_frequency,
        })
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn center_frequency(&self) -> f64 {
        self.center_frequency
    }

    pub fn norm_squared(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    /// The same state with photon 1 and photon 2 exchanged in every term.
    pub fn exchanged(&self) -> Self {
        TwoPhotonState {
            terms: self.terms.iter().map(ProductTerm::swapped).collect(),
            center_frequency: self.center_frequency,
        }
    }

    fn photons(&self) -> impl Iterator<Item = &PhotonLabel> {
        self.terms.iter().flat_map(|t| [&t.photon1, &t.photon2])
    }

    fn check_normalized(&self) -> Result<()> {
        let n = self.norm_squared();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "state is not normalized (sum |a|^2 = {n})"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for TwoPhotonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(
                f,
                "  ({:+.6}{:+.6}i) {} {}",
                t.amplitude.re, t.amplitude.im, t.photon1, t.photon2
            )?;
        }
        Ok(())
    }
}

fn merge_terms(terms: Vec<ProductTerm>) -> Vec<ProductTerm> {
    let mut merged: Vec<ProductTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged.iter_mut().find(|m| m.same_labels(&t)) {
            Some(m) => m.amplitude += t.amplitude,
            None => merged.push(t),
        }
    }
    merged.retain(|t| t.amplitude.norm_sqr() > NEGLIGIBLE_WEIGHT);
    merged
}

/// Type-II SPDC output at the ring intersections: (|H>|V> + |V>|H>)/√2 at
/// the common frequency `center_frequency` (rad/s).
pub fn new_spdc_state(center_frequency: f64) -> Result<TwoPhotonState> {
    let amp = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let h = PhotonLabel::polarized(Polarization::H);
    let v = PhotonLabel::polarized(Polarization::V);
    TwoPhotonState::normalized(
        vec![ProductTerm::new(amp, h, v), ProductTerm::new(amp, v, h)],
        center_frequency,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QwpDirection {
    /// Linear to circular: H → σ+, V → σ−.
    Forward,
    /// Circular to linear: σ+ → H, σ− → V.
    Inverse,
}

pub fn apply_qwp(state: &TwoPhotonState, direction: QwpDirection) -> Result<TwoPhotonState> {
    state.check_normalized()?;
    let convert = |p: &PhotonLabel| -> Result<PhotonLabel> {
        let mut out = *p;
        match (direction, p.pol, p.sam) {
            (QwpDirection::Forward, Some(pol), None) => {
                out.pol = None;
                out.sam = Some(match pol {
                    Polarization::H => Spin::Plus,
                    Polarization::V => Spin::Minus,
                });
            }
            (QwpDirection::Inverse, None, Some(sam)) => {
                out.sam = None;
                out.pol = Some(match sam {
                    Spin::Plus => Polarization::H,
                    Spin::Minus => Polarization::V,
                });
            }
            _ => {
                return Err(Error::InvalidState(format!(
                    "{direction:?} quarter-wave plate cannot act on {p}"
                )))
            }
        }
        Ok(out)
    };
    state.map_terms(|t| {
        Ok(ProductTerm::new(
            t.amplitude,
            convert(&t.photon1)?,
            convert(&t.photon2)?,
        ))
    })
}

/// Rotating q-plate imparting OAM `l` while spinning at `omega` (rad/s).
///
/// Each photon flips helicity, gains `helicity_in * l` units of OAM and is
/// shifted in frequency by `helicity_in * l * omega`.
pub fn apply_rotating_qplate(state: &TwoPhotonState, l: u32, omega: f64) -> Result<TwoPhotonState> {
    if !omega.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rotation rate must be finite, got {omega}"
        )));
    }
    state.check_normalized()?;
    let shift = f64::from(l) * omega;
    let convert = |p: &PhotonLabel| -> Result<PhotonLabel> {
        let sam = match (p.pol, p.sam) {
            (None, Some(sam)) => sam,
            _ => {
                return Err(Error::InvalidState(format!(
                    "q-plate needs circularly polarized input, got {p}"
                )))
            }
        };
        let h = sam.helicity();
        let oam = p
            .oam
            .checked_add(h * i64::from(l))
            .ok_or_else(|| Error::InvalidArgument("OAM overflow".into()))?;
        Ok(PhotonLabel {
            sam: Some(sam.flipped()),
            oam,
            detuning: p.detuning + h as f64 * shift,
            ..*p
        })
    };
    state.map_terms(|t| {
        Ok(ProductTerm::new(
            t.amplitude,
            convert(&t.photon1)?,
            convert(&t.photon2)?,
        ))
    })
}

/// Polarizers that erase the polarization label; surviving terms are merged
/// and renormalized.
pub fn apply_polarizer_projection(state: &TwoPhotonState) -> Result<TwoPhotonState> {
    state.check_normalized()?;
    if state.photons().any(|p| p.sam.is_some()) {
        return Err(Error::InvalidState(
            "polarizer expects linear-polarization labels; apply the inverse QWP first".into(),
        ));
    }
    let strip = |p: &PhotonLabel| PhotonLabel { pol: None, ..*p };
    let terms = state
        .terms
        .iter()
        .map(|t| ProductTerm::new(t.amplitude, strip(&t.photon1), strip(&t.photon2)))
        .collect();
    TwoPhotonState::normalized(terms, state.center_frequency)
}

/// Delay by `tau` (s) followed by a balanced beam splitter, keeping only the
/// coincidence branch: photon 1 leaves through port a, photon 2 through b,
/// and each term picks up `exp(i ω_a τ)` with ω_a the absolute frequency of
/// the photon in port a.
pub fn apply_delay_and_beamsplitter(state: &TwoPhotonState, tau: f64) -> Result<TwoPhotonState> {
    if !tau.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "delay must be finite, got {tau}"
        )));
    }
    state.check_normalized()?;
    if state.photons().any(|p| p.pol.is_some() || p.sam.is_some()) {
        return Err(Error::InvalidState(
            "beam splitter input must be an OAM-frequency state without polarization labels"
                .into(),
        ));
    }
    if state.photons().any(|p| p.mode != SpatialMode::Source) {
        return Err(Error::InvalidState(
            "photons have already passed a beam splitter".into(),
        ));
    }
    if state.terms.len() > 2 || state_overlap(state, &state.exchanged()).norm() < 1.0 - 1e-9 {
        return Err(Error::InvalidState(
            "beam splitter input is not an exchange-symmetric frequency-entangled pair".into(),
        ));
    }
    let center = state.center_frequency;
    state.map_terms(|t| {
        let phase = Complex64::from_polar(1.0, (center + t.photon1.detuning) * tau);
        Ok(ProductTerm::new(
            t.amplitude * phase,
            PhotonLabel {
                mode: SpatialMode::A,
                ..t.photon1
            },
            PhotonLabel {
                mode: SpatialMode::B,
                ..t.photon2
            },
        ))
    })
}

/// One optical element of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Element {
    Qwp(QwpDirection),
    RotatingQPlate { l: u32, omega: f64 },
    PolarizerProjection,
    /// Must be directly followed by [`Element::BeamSplitter`].
    TimeDelay { tau: f64 },
    BeamSplitter,
}

impl Element {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Element::RotatingQPlate { omega, .. } if !omega.is_finite() => Err(
                Error::InvalidArgument(format!("q-plate rotation rate must be finite, got {omega}")),
            ),
            Element::TimeDelay { tau } if !tau.is_finite() => Err(Error::InvalidArgument(
                format!("delay must be finite, got {tau}"),
            )),
            _ => Ok(()),
        }
    }
}

/// Sends `state` through `elements` in order.
pub fn propagate(state: &TwoPhotonState, elements: &[Element]) -> Result<TwoPhotonState> {
    let mut current = state.clone();
    let mut i = 0;
    while i < elements.len() {
        let element = elements[i];
        element.validate()?;
        current = match element {
            Element::Qwp(direction) => apply_qwp(&current, direction)?,
            Element::RotatingQPlate { l, omega } => apply_rotating_qplate(&current, l, omega)?,
            Element::PolarizerProjection => apply_polarizer_projection(&current)?,
            Element::BeamSplitter => apply_delay_and_beamsplitter(&current, 0.0)?,
            Element::TimeDelay { tau } => {
                if elements.get(i + 1) != Some(&Element::BeamSplitter) {
                    return Err(Error::InvalidArgument(
                        "a time delay must be followed by the beam splitter".into(),
                    ));
                }
                i += 1;
                apply_delay_and_beamsplitter(&current, tau)?
            }
        };
        i += 1;
    }
    Ok(current)
}

/// The four states of the generation pipeline, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineStages {
    /// Polarization-entangled SPDC output.
    pub polarization: TwoPhotonState,
    /// After the quarter-wave plates.
    pub spin: TwoPhotonState,
    /// After the rotating q-plates: SAM, OAM and frequency entangled.
    pub hybrid: TwoPhotonState,
    /// After the inverse QWPs and polarizers: OAM-frequency entangled.
    pub oam_frequency: TwoPhotonState,
}

impl PipelineStages {
    pub fn as_array(&self) -> [&TwoPhotonState; 4] {
        [
            &self.polarization,
            &self.spin,
            &self.hybrid,
            &self.oam_frequency,
        ]
    }
}

pub fn run_pipeline(l: u32, omega: f64, center_frequency: f64) -> Result<PipelineStages> {
    let polarization = new_spdc_state(center_frequency)?;
    let spin = apply_qwp(&polarization, QwpDirection::Forward)?;
    let hybrid = apply_rotating_qplate(&spin, l, omega)?;
    let oam_frequency = propagate(
        &hybrid,
        &[Element::Qwp(QwpDirection::Inverse), Element::PolarizerProjection],
    )?;
    Ok(PipelineStages {
        polarization,
        spin,
        hybrid,
        oam_frequency,
    })
}

/// ⟨s1|s2⟩ with distinct label pairs treated as orthonormal.
pub fn state_overlap(s1: &TwoPhotonState, s2: &TwoPhotonState) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in &s1.terms {
        for b in s2.terms.iter().filter(|b| a.same_labels(b)) {
            acc += a.amplitude.conj() * b.amplitude;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const OMEGA_CENTER: f64 = 2.0 * std::f64::consts::PI * 370.44e12;

    fn label_set(state: &TwoPhotonState) -> Vec<(i64, f64, i64, f64)> {
        let mut v: Vec<_> = state
            .terms()
            .iter()
            .map(|t| {
                (
                    t.photon1.oam,
                    t.photon1.detuning,
                    t.photon2.oam,
                    t.photon2.detuning,
                )
            })
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn spdc_state_structure() {
        let s = new_spdc_state(OMEGA_CENTER).unwrap();
        assert_eq!(s.terms().len(), 2);
        for t in s.terms() {
            assert_abs_diff_eq!(t.amplitude.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
            assert_eq!(t.photon1.detuning, 0.0);
            assert_eq!(t.photon1.mode, SpatialMode::Source);
            assert!(t.photon1.sam.is_none());
        }
        assert_eq!(s.terms()[0].photon1.pol, Some(Polarization::H));
        assert_eq!(s.terms()[0].photon2.pol, Some(Polarization::V));
        assert_eq!(s.terms()[1].photon1.pol, Some(Polarization::V));
        assert_abs_diff_eq!(s.norm_squared(), 1.0, epsilon = 1e-15);

        let unit = new_spdc_state(1.0).unwrap();
        assert_eq!(unit.center_frequency(), 1.0);
        assert_eq!(unit.terms().len(), 2);
    }

    #[test]
    fn spdc_rejects_non_positive_frequency() {
        assert!(matches!(new_spdc_state(0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(new_spdc_state(-3.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn qwp_maps_polarization_to_spin() {
        let s = apply_qwp(&new_spdc_state(OMEGA_CENTER).unwrap(), QwpDirection::Forward).unwrap();
        let expected = TwoPhotonState::normalized(
            vec![
                ProductTerm::new(
                    Complex64::new(1.0, 0.0),
                    PhotonLabel::spin(Spin::Plus),
                    PhotonLabel::spin(Spin::Minus),
                ),
                ProductTerm::new(
                    Complex64::new(1.0, 0.0),
                    PhotonLabel::spin(Spin::Minus),
                    PhotonLabel::spin(Spin::Plus),
                ),
            ],
            OMEGA_CENTER,
        )
        .unwrap();
        assert_abs_diff_eq!(state_overlap(&s, &expected).re, 1.0, epsilon = 1e-12);

        let hh = TwoPhotonState::normalized(
            vec![ProductTerm::new(
                Complex64::new(1.0, 0.0),
                PhotonLabel::polarized(Polarization::H),
                PhotonLabel::polarized(Polarization::H),
            )],
            1.0,
        )
        .unwrap();
        let out = apply_qwp(&hh, QwpDirection::Forward).unwrap();
        assert_eq!(out.terms()[0].photon1.sam, Some(Spin::Plus));
        assert_eq!(out.terms()[0].photon2.sam, Some(Spin::Plus));
    }

    #[test]
    fn qwp_rejects_wrong_basis() {
        let s = new_spdc_state(1.0).unwrap();
        assert!(matches!(
            apply_qwp(&s, QwpDirection::Inverse),
            Err(Error::InvalidState(_))
        ));
        let spin = apply_qwp(&s, QwpDirection::Forward).unwrap();
        assert!(matches!(
            apply_qwp(&spin, QwpDirection::Forward),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn qplate_shifts_single_photons() {
        let omega = 1e12;
        let plus = TwoPhotonState::normalized(
            vec![ProductTerm::new(
                Complex64::new(1.0, 0.0),
                PhotonLabel::spin(Spin::Plus),
                PhotonLabel::spin(Spin::Minus),
            )],
            1.0,
        )
        .unwrap();
        let out = apply_rotating_qplate(&plus, 2, omega).unwrap();
        let t = out.terms()[0];
        assert_eq!(t.photon1.sam, Some(Spin::Minus));
        assert_eq!(t.photon1.oam, 2);
        assert_eq!(t.photon1.detuning, 2e12);
        assert_eq!(t.photon2.sam, Some(Spin::Plus));
        assert_eq!(t.photon2.oam, -2);
        assert_eq!(t.photon2.detuning, -2e12);
    }

    #[test]
    fn qplate_at_rest_only_converts_angular_momentum() {
        let spin = apply_qwp(&new_spdc_state(1.0).unwrap(), QwpDirection::Forward).unwrap();
        let out = apply_rotating_qplate(&spin, 3, 0.0).unwrap();
        for t in out.terms() {
            assert_eq!(t.photon1.detuning, 0.0);
            assert_eq!(t.photon2.detuning, 0.0);
            assert_eq!(t.photon1.oam.abs(), 3);
        }
    }

    #[test]
    fn qplate_requires_spin_basis() {
        let s = new_spdc_state(1.0).unwrap();
        assert!(matches!(
            apply_rotating_qplate(&s, 2, 1e12),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn polarizer_yields_oam_frequency_state() {
        let stages = run_pipeline(2, 1e12, OMEGA_CENTER).unwrap();
        let psi_o = &stages.oam_frequency;
        assert_eq!(psi_o.terms().len(), 2);
        for t in psi_o.terms() {
            assert_abs_diff_eq!(t.amplitude.norm(), FRAC_1_SQRT_2, epsilon = 1e-15);
            assert!(t.photon1.pol.is_none() && t.photon1.sam.is_none());
        }
        assert_eq!(
            label_set(psi_o),
            vec![(-2, -2e12, 2, 2e12), (2, 2e12, -2, -2e12)]
        );
    }

    #[test]
    fn polarizer_is_idempotent_and_renormalizes() {
        let psi_o = run_pipeline(2, 1e12, 1.0).unwrap().oam_frequency;
        let again = apply_polarizer_projection(&psi_o).unwrap();
        assert_abs_diff_eq!(state_overlap(&psi_o, &again).re, 1.0, epsilon = 1e-12);

        let single = TwoPhotonState::normalized(
            vec![ProductTerm::new(
                Complex64::new(1.0, 0.0),
                PhotonLabel::polarized(Polarization::H),
                PhotonLabel::oam_frequency(0, 0.0),
            )],
            1.0,
        )
        .unwrap();
        let out = apply_polarizer_projection(&single).unwrap();
        assert_eq!(out.terms().len(), 1);
        assert!(out.terms()[0].photon1.pol.is_none());
        assert_abs_diff_eq!(out.terms()[0].amplitude.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn polarizer_on_singlet_is_empty() {
        let h = PhotonLabel::polarized(Polarization::H);
        let v = PhotonLabel::polarized(Polarization::V);
        let singlet = TwoPhotonState::normalized(
            vec![
                ProductTerm::new(Complex64::new(1.0, 0.0), h, v),
                ProductTerm::new(Complex64::new(-1.0, 0.0), v, h),
            ],
            1.0,
        )
        .unwrap();
        assert_eq!(apply_polarizer_projection(&singlet), Err(Error::EmptyState));
    }

    #[test]
    fn beamsplitter_reproduces_output_state() {
        let (l, omega, tau) = (2u32, 1e12, 0.3e-12);
        let psi_o = run_pipeline(l, omega, OMEGA_CENTER).unwrap().oam_frequency;
        let out = apply_delay_and_beamsplitter(&psi_o, tau).unwrap();
        assert_abs_diff_eq!(out.norm_squared(), 1.0, epsilon = 1e-12);
        let shift = 2e12;
        let lo = OMEGA_CENTER - shift;
        let hi = OMEGA_CENTER + shift;
        let a = |oam, det| PhotonLabel {
            mode: SpatialMode::A,
            ..PhotonLabel::oam_frequency(oam, det)
        };
        let b = |oam, det| PhotonLabel {
            mode: SpatialMode::B,
            ..PhotonLabel::oam_frequency(oam, det)
        };
        let expected = TwoPhotonState::normalized(
            vec![
                ProductTerm::new(
                    Complex64::from_polar(FRAC_1_SQRT_2, lo * tau),
                    a(-2, -shift),
                    b(2, shift),
                ),
                ProductTerm::new(
                    Complex64::from_polar(FRAC_1_SQRT_2, hi * tau),
                    a(2, shift),
                    b(-2, -shift),
                ),
            ],
            OMEGA_CENTER,
        )
        .unwrap();
        assert_abs_diff_eq!(state_overlap(&expected, &out).norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(state_overlap(&expected, &out).re, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn beamsplitter_zero_delay_and_degenerate_cases() {
        let psi_o = run_pipeline(2, 1e12, 1.0).unwrap().oam_frequency;
        let out = apply_delay_and_beamsplitter(&psi_o, 0.0).unwrap();
        for t in out.terms() {
            assert_abs_diff_eq!(t.amplitude.im, 0.0);
            assert_eq!(t.photon1.mode, SpatialMode::A);
            assert_eq!(t.photon2.mode, SpatialMode::B);
        }
        let tau = 1.7e-12;
        let static_plate = run_pipeline(2, 0.0, OMEGA_CENTER).unwrap().oam_frequency;
        let out = apply_delay_and_beamsplitter(&static_plate, tau).unwrap();
        let phases: Vec<f64> = out.terms().iter().map(|t| t.amplitude.arg()).collect();
        assert_abs_diff_eq!(phases[0], phases[1], epsilon = 1e-12);
    }

    #[test]
    fn beamsplitter_rejects_polarized_input() {
        let s = new_spdc_state(1.0).unwrap();
        assert!(matches!(
            apply_delay_and_beamsplitter(&s, 0.0),
            Err(Error::InvalidState(_))
        ));
        let asym = TwoPhotonState::normalized(
            vec![ProductTerm::new(
                Complex64::new(1.0, 0.0),
                PhotonLabel::oam_frequency(2, 1.0),
                PhotonLabel::oam_frequency(-2, -1.0),
            )],
            1.0,
        )
        .unwrap();
        assert!(matches!(
            apply_delay_and_beamsplitter(&asym, 0.0),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn pipeline_special_cases() {
        let stages = run_pipeline(2, 1e12, OMEGA_CENTER).unwrap();
        assert_eq!(stages.as_array().len(), 4);
        for t in stages.oam_frequency.terms() {
            for p in [t.photon1, t.photon2] {
                assert_eq!(p.detuning, p.oam as f64 * 1e12);
            }
        }

        let identity = run_pipeline(0, 5e12, OMEGA_CENTER).unwrap().oam_frequency;
        assert_eq!(identity.terms().len(), 1);
        let t = identity.terms()[0];
        assert_eq!((t.photon1.oam, t.photon2.oam), (0, 0));
        assert_eq!((t.photon1.detuning, t.photon2.detuning), (0.0, 0.0));
        assert_abs_diff_eq!(t.amplitude.norm(), 1.0, epsilon = 1e-15);

        let at_rest = run_pipeline(2, 0.0, OMEGA_CENTER).unwrap().oam_frequency;
        assert_eq!(label_set(&at_rest), vec![(-2, 0.0, 2, 0.0), (2, 0.0, -2, 0.0)]);
    }

    #[test]
    fn overlap_of_bell_states() {
        let plus = new_spdc_state(1.0).unwrap();
        let h = PhotonLabel::polarized(Polarization::H);
        let v = PhotonLabel::polarized(Polarization::V);
        let minus = TwoPhotonState::normalized(
            vec![
                ProductTerm::new(Complex64::new(1.0, 0.0), h, v),
                ProductTerm::new(Complex64::new(-1.0, 0.0), v, h),
            ],
            1.0,
        )
        .unwrap();
        assert_abs_diff_eq!(state_overlap(&plus, &plus).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(state_overlap(&plus, &minus).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn overlap_after_polarization_round_trip() {
        // Tag ψ_o with polarization, send through forward and inverse QWPs,
        // strip polarization again and compare with ψ_o.
        let psi_o = run_pipeline(2, 1e12, OMEGA_CENTER).unwrap().oam_frequency;
        let tagged = TwoPhotonState::normalized(
            psi_o
                .terms()
                .iter()
                .map(|t| {
                    ProductTerm::new(
                        t.amplitude,
                        PhotonLabel {
                            pol: Some(Polarization::H),
                            ..t.photon1
                        },
                        PhotonLabel {
                            pol: Some(Polarization::V),
                            ..t.photon2
                        },
                    )
                })
                .collect(),
            OMEGA_CENTER,
        )
        .unwrap();
        let back = propagate(
            &tagged,
            &[
                Element::Qwp(QwpDirection::Forward),
                Element::Qwp(QwpDirection::Inverse),
                Element::PolarizerProjection,
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(state_overlap(&psi_o, &back).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn element_validation() {
        assert!(Element::RotatingQPlate {
            l: 2,
            omega: f64::NAN
        }
        .validate()
        .is_err());
        assert!(Element::TimeDelay { tau: f64::INFINITY }.validate().is_err());
        let psi_o = run_pipeline(1, 1e12, 1.0).unwrap().oam_frequency;
        assert!(propagate(&psi_o, &[Element::TimeDelay { tau: 1e-12 }]).is_err());
        let out = propagate(
            &psi_o,
            &[Element::TimeDelay { tau: 1e-12 }, Element::BeamSplitter],
        )
        .unwrap();
        assert_eq!(out.terms()[0].photon1.mode, SpatialMode::A);
    }

    #[test]
    fn display_lists_terms() {
        let text = run_pipeline(2, 1e12, 1.0).unwrap().oam_frequency.to_string();
        assert!(text.contains("l=+2"));
        assert!(text.contains("dw=+2e12"));
    }
}
