//! Simulation and analysis of two-photon frequency entanglement generated by
//! type-II down-conversion followed by rotating q-plates.
//!
//! * [`hybrid_state`]: the state as it moves through the optical pipeline.
//! * [`phase_match`]: crystal emission geometry and the bandwidth error.
//! * [`joint_spectrum`]: joint spectral amplitudes with and without the
//!   rotational Doppler shift.
//! * [`hom_interference`]: Hong–Ou–Mandel coincidence traces, closed form and
//!   by quadrature.
//! * [`rotation_estimator`]: inverting a trace for the beat frequency 2lΩ.

pub mod error;
pub mod hom_interference;
pub mod hybrid_state;
pub mod joint_spectrum;
pub mod least_squares;
pub mod phase_match;
pub mod quadrature;
pub mod rotation_estimator;

pub use error::{Error, Result};
pub use hom_interference::{
    coincidence_numeric, coincidence_plain, coincidence_rde, observability,
    restricted_density_matrix, trace, visibility, BiphotonSpectra, HomConfig, HomTrace, Method,
    RestrictedDensityMatrix,
};
pub use hybrid_state::{
    run_pipeline, state_overlap, Element, PhotonLabel, PipelineStages, ProductTerm, TwoPhotonState,
};
pub use joint_spectrum::{
    effective_coherence_time, jsa_grid, jsa_value, peak_locations, JsaGrid, PhaseMatchGaussian,
    PumpSpectrum, RdeShift,
};
pub use phase_match::{
    bandwidth_error, emission_curves, find_intersection, CrystalConfig, EmissionCurve,
    EmissionCurves, IntersectionResult, SellmeierSet,
};
pub use rotation_estimator::{
    estimate, extract_beat, fit_envelope, synthesize_trace, EstimateResult, NoisyTrace,
};
