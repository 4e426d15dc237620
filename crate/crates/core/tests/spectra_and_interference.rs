use proptest::prelude::*;
use rotdop_core::hom_interference::{beat_frequency, fwhm_bandwidth};
use rotdop_core::{
    coincidence_numeric, coincidence_plain, coincidence_rde, jsa_grid, jsa_value, observability,
    peak_locations, trace, BiphotonSpectra, HomConfig, Method, PhaseMatchGaussian, PumpSpectrum,
    RdeShift,
};

const SIGMA: f64 = 1e12;
const GAMMA: f64 = 0.1;
const TAU_C: f64 = 1e-12;

fn reference() -> (PumpSpectrum, PhaseMatchGaussian) {
    (
        PumpSpectrum::new(0.0, SIGMA).unwrap(),
        PhaseMatchGaussian::reference(SIGMA, GAMMA).unwrap(),
    )
}

#[test]
fn unshifted_grid_has_single_central_peak() {
    let (pump, pm) = reference();
    let grid = jsa_grid(&pump, &pm, None, 6e12, 256).unwrap();
    let peaks = peak_locations(&grid);
    assert_eq!(peaks.len(), 1, "{peaks:?}");
    let cell = grid.cell();
    assert!(peaks[0].0.abs() <= cell && peaks[0].1.abs() <= cell);
}

#[test]
fn shifted_grid_has_two_antidiagonal_peaks() {
    let (pump, pm) = reference();
    for omega in [1e12, 2e12] {
        let shift = RdeShift { l: 2, omega_rot: omega };
        let grid = jsa_grid(&pump, &pm, Some(shift), 6e12, 256).unwrap();
        let cell = grid.cell();
        let lo = shift.detuning();
        let mut peaks = peak_locations(&grid);
        peaks.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(peaks.len(), 2, "Ω = {omega}: {peaks:?}");
        assert!((peaks[0].0 + lo).abs() <= cell && (peaks[0].1 - lo).abs() <= cell);
        assert!((peaks[1].0 - lo).abs() <= cell && (peaks[1].1 + lo).abs() <= cell);
        for (a, b) in peaks {
            assert!((a + b).abs() <= cell);
        }
    }
}

#[test]
fn grid_covariance_under_beat_product() {
    let (pump, pm) = reference();
    let a = jsa_grid(&pump, &pm, Some(RdeShift { l: 2, omega_rot: 1e12 }), 6e12, 64).unwrap();
    let b = jsa_grid(&pump, &pm, Some(RdeShift { l: 4, omega_rot: 5e11 }), 6e12, 64).unwrap();
    assert_eq!(a, b);
    assert!(a.values.iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn numeric_overlap_matches_closed_form() {
    for (l, omega) in [(2, 0.0), (2, 2e12), (2, 4e12), (10, 4e11)] {
        let spectra = BiphotonSpectra::from_coherence_time(TAU_C, l, omega).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..601 {
            let tau = -3.0 * TAU_C + 6.0 * TAU_C * i as f64 / 600.0;
            let numeric = coincidence_numeric(tau, &spectra).unwrap();
            worst = worst.max((numeric - coincidence_rde(tau, TAU_C, l, omega)).abs());
        }
        assert!(worst < 1e-6, "(l, Ω) = ({l}, {omega}): {worst}");
    }
}

#[test]
fn faster_rotation_adds_extrema() {
    let count = |omega: f64| {
        let cfg = HomConfig::symmetric(TAU_C, 2, omega, 2e-12, 2001).unwrap();
        let p: Vec<f64> = trace(&cfg, Method::Closed).unwrap().samples.iter().map(|s| s.1).collect();
        p.windows(3)
            .filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0)
            .count()
    };
    assert!(count(4e12) > count(2e12));
}

#[test]
fn observability_anchors() {
    assert!((fwhm_bandwidth(1e-12) / 2.355e12 - 1.0).abs() < 5e-3);
    assert!((fwhm_bandwidth(1e-6) / 2.36e6 - 1.0).abs() < 5e-3);
    let fwhm = fwhm_bandwidth(TAU_C);
    assert!(!observability(2, 0.99 * fwhm / 4.0, TAU_C).0);
    assert!(observability(2, 1.01 * fwhm / 4.0, TAU_C).0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn jsa_is_swap_symmetric(nu1 in -6e12f64..6e12, nu2 in -6e12f64..6e12) {
        let (pump, pm) = reference();
        prop_assert_eq!(jsa_value(nu1, nu2, &pump, &pm), jsa_value(nu2, nu1, &pump, &pm));
    }

    #[test]
    fn closed_forms_are_even_bounded_and_enveloped(
        tau in -1e-11f64..1e-11,
        tau_c in 1e-13f64..1e-11,
        l in 0u32..=20,
        omega in 0.0f64..5e12,
    ) {
        let p = coincidence_rde(tau, tau_c, l, omega);
        prop_assert_eq!(p, coincidence_rde(-tau, tau_c, l, omega));
        prop_assert_eq!(coincidence_plain(tau, tau_c), coincidence_plain(-tau, tau_c));
        prop_assert!((0.0..=1.0).contains(&p));
        let envelope = 0.5 * (-tau * tau / (2.0 * tau_c * tau_c)).exp();
        prop_assert!((p - 0.5).abs() <= envelope + 1e-15);
    }

    #[test]
    fn traces_depend_only_on_beat_product(
        tau in -5e-12f64..5e-12,
        l in 1u32..=20,
        omega in 0.0f64..5e12,
    ) {
        prop_assert_eq!(beat_frequency(l, omega), beat_frequency(2 * l, omega / 2.0));
        prop_assert_eq!(
            coincidence_rde(tau, TAU_C, l, omega),
            coincidence_rde(tau, TAU_C, 2 * l, omega / 2.0)
        );
    }

    #[test]
    fn dip_reaches_half_far_from_zero(tau_c in 1e-15f64..1e-3, l in 0u32..=20, omega in 0.0f64..1e13) {
        prop_assert_eq!(coincidence_plain(0.0, tau_c), 0.0);
        prop_assert_eq!(coincidence_rde(0.0, tau_c, l, omega), 0.0);
        prop_assert!((coincidence_plain(10.0 * tau_c, tau_c) - 0.5).abs() < 1e-10);
        prop_assert!((coincidence_rde(10.0 * tau_c, tau_c, l, omega) - 0.5).abs() < 1e-10);
    }
}
