use num_complex::Complex64;
use proptest::prelude::*;
use tunnelbox::observables::uniform_grid;
use tunnelbox::{
    classical_density, classical_variance, divergence_series, divergence_time, solve_spectrum,
    ClassicalPacket, DivergenceMetric, DivergenceOutcome, Error, ImageMode, PacketExpansion,
    PacketSpec, PhysicalConstants, WaveField, WellGeometry,
};

fn geometry() -> WellGeometry {
    WellGeometry::symmetric(35.0, 3.0, 360.0).unwrap()
}

fn quantum(k0: f64) -> WaveField {
    let s = solve_spectrum(&geometry(), &PhysicalConstants::natural(), 30).unwrap();
    WaveField::from_packet(s, &PacketSpec::new(11.0, 3.0, k0).unwrap()).unwrap()
}

fn classical(k0: f64, mode: ImageMode) -> ClassicalPacket {
    let spec = PacketSpec::new(11.0, 3.0, k0).unwrap();
    ClassicalPacket::from_packet(&spec, &geometry(), &PhysicalConstants::natural(), mode).unwrap()
}

#[test]
fn initial_peak_and_support() {
    let p = classical(0.0, ImageMode::TwoTerm);
    let peak = classical_density(&p, 11.0, 0.0).unwrap();
    assert!((peak - 0.13298076).abs() / 0.13298076 < 0.01);
    assert_eq!(classical_density(&p, 35.0, 0.0).unwrap(), 0.0);
    assert_eq!(classical_density(&p, 50.0, 3.0).unwrap(), 0.0);
    assert!(classical_density(&p, 5.0, -1.0).is_err());
}

#[test]
fn mirror_term_adds_mass_at_the_wall() {
    let p = ClassicalPacket::new(35.0 - 1e-9, 3.0, 0.0, 35.0, ImageMode::TwoTerm).unwrap();
    let peak = 1.0 / (2.0 * std::f64::consts::PI * 9.0).sqrt();
    assert!(classical_density(&p, 35.0 - 1e-6, 0.0).unwrap() > 1.9 * peak);
}

#[test]
fn chamber_integral_and_variance_at_rest() {
    let p = classical(0.0, ImageMode::TwoTerm);
    let (mass, mean, var) = p.moments(0.0).unwrap();
    // The wall at 0 sits 11/3 widths away.
    assert!((mass - 1.0).abs() < 2e-4, "{mass}");
    assert!((mean - 11.0).abs() < 0.01);
    assert!((var - 9.0).abs() / 9.0 < 0.02, "{var}");
    for t in [1.0, 100.0, 1e4] {
        assert_eq!(classical_variance(&p, t).unwrap(), var);
    }
}

#[test]
fn full_images_conserve_mass() {
    let p = classical(0.8, ImageMode::FullImages);
    for t in uniform_grid(0.0, 400.0, 41) {
        let (mass, _, var) = p.moments(t).unwrap();
        assert!((mass - 1.0).abs() < 1e-10, "t = {t}: {mass}");
        assert!(var > 0.0);
    }
}

#[test]
fn speed_follows_momentum() {
    let c = PhysicalConstants::natural();
    let p = classical(0.5, ImageMode::TwoTerm);
    // hbar k / m with hbar = 1, m = 1/2
    assert!((p.speed() - 1.0).abs() < 1e-15);
    assert!((p.wavenumber(&c) - 0.5).abs() < 1e-15);
    assert_eq!(p.wall_right(), 35.0);
}

#[test]
fn mismatched_packets_are_rejected() {
    let field = quantum(0.0);
    let other = ClassicalPacket::new(12.0, 3.0, 0.0, 35.0, ImageMode::TwoTerm).unwrap();
    let err = divergence_series(&field, &other, &[0.0, 1.0], DivergenceMetric::Variance).unwrap_err();
    assert!(matches!(err, Error::Mismatch(_)));
}

#[test]
fn zero_threshold_is_reached_at_start() {
    let field = quantum(0.0);
    let p = classical(0.0, ImageMode::TwoTerm);
    let times = uniform_grid(0.0, 50.0, 11);
    assert_eq!(divergence_time(&field, &p, &times, 0.0).unwrap(), DivergenceOutcome::Reached(0.0));
    assert!(divergence_time(&field, &p, &times, -1.0).is_err());
    assert!(divergence_time(&field, &p, &[1.0, 2.0], 1.0).is_err());
}

#[test]
fn stationary_state_never_diverges_from_its_own_variance() {
    let s = solve_spectrum(&geometry(), &PhysicalConstants::natural(), 6).unwrap();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 6];
    coeffs[0] = Complex64::new(1.0, 0.0);
    let e = PacketExpansion::from_coefficients(&s, coeffs).unwrap();
    let field = WaveField::new(s, e).unwrap();
    let p = ClassicalPacket::new(17.5, 3.0, 0.0, 35.0, ImageMode::TwoTerm).unwrap();
    let times = uniform_grid(0.0, 1000.0, 21);
    let series = divergence_series(&field, &p, &times, DivergenceMetric::Variance).unwrap();
    let spread = series.abs_diff.iter().fold(0.0f64, |m, &d| m.max((d - series.abs_diff[0]).abs()));
    assert!(spread < 1e-9);
    let threshold = series.abs_diff[0] + 1.0;
    assert_eq!(divergence_time(&field, &p, &times, threshold).unwrap(), DivergenceOutcome::NotReached);
}

#[test]
fn rms_metric_compares_widths() {
    let field = quantum(0.0);
    let p = classical(0.0, ImageMode::TwoTerm);
    let times = uniform_grid(0.0, 100.0, 5);
    let series = divergence_series(&field, &p, &times, DivergenceMetric::RmsWidth).unwrap();
    for i in 0..5 {
        let expected = (series.var_qm[i].sqrt() - series.var_cl[i].sqrt()).abs();
        assert_eq!(series.abs_diff[i], expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn divergence_time_is_monotone_in_threshold(t1 in 0.0f64..20.0, dt in 0.0f64..20.0) {
        let field = quantum(0.0);
        let p = classical(0.0, ImageMode::TwoTerm);
        let series = divergence_series(&field, &p, &uniform_grid(0.0, 400.0, 201), DivergenceMetric::Variance).unwrap();
        let a = series.crossing(t1).time().unwrap_or(f64::INFINITY);
        let b = series.crossing(t1 + dt).time().unwrap_or(f64::INFINITY);
        prop_assert!(a <= b);
    }
}
