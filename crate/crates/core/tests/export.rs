use tunnelbox::export::{divergence_csv, series_csv, spectrum_csv, splitting_csv};
use tunnelbox::observables::uniform_grid;
use tunnelbox::{
    solve_spectrum, splitting_report, time_series, DivergenceMetric, DivergenceOutcome,
    DivergenceSeries, PacketSpec, PhysicalConstants, WaveField, WellGeometry,
};

fn field() -> WaveField {
    let g = WellGeometry::symmetric(35.0, 3.0, 360.0).unwrap();
    let s = solve_spectrum(&g, &PhysicalConstants::natural(), 30).unwrap();
    WaveField::from_packet(s, &PacketSpec::new(11.0, 3.0, 0.0).unwrap()).unwrap()
}

#[test]
fn spectrum_rows_parse_back() {
    let f = field();
    let csv = spectrum_csv(f.spectrum());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,E_n,k_n,q_or_kappa,regime,C_n"));
    for (line, state) in lines.zip(f.spectrum().states()) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 6);
        assert_eq!(cols[1].parse::<f64>().unwrap(), state.energy());
    }
}

#[test]
fn identical_runs_give_identical_files() {
    let times = uniform_grid(0.0, 50.0, 26);
    let a = series_csv(&time_series(&field(), &times, field().geometry().right_region()).unwrap());
    let b = series_csv(&time_series(&field(), &times, field().geometry().right_region()).unwrap());
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 27);
}

#[test]
fn divergence_footer() {
    let series = DivergenceSeries {
        times: vec![0.0, 1.0],
        var_qm: vec![9.0, 9.5],
        var_cl: vec![9.0, 9.0],
        abs_diff: vec![0.0, 0.5],
        metric: DivergenceMetric::Variance,
    };
    assert!(divergence_csv(&series, DivergenceOutcome::NotReached).ends_with("# t_star=not_reached\n"));
    assert!(divergence_csv(&series, DivergenceOutcome::Reached(0.5)).ends_with("# t_star=0.5\n"));
}

#[test]
fn splitting_row() {
    let g = WellGeometry::symmetric(35.0, 1.0, 100.0).unwrap();
    let s = solve_spectrum(&g, &PhysicalConstants::natural(), 2).unwrap();
    let csv = splitting_csv(&splitting_report(&s, 1).unwrap());
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("pair_index,"));
}
