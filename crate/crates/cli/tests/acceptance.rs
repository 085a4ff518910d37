//! Acceptance report: one PASS/FAIL line per criterion. Tolerances are
//! pinned below. The report is informational: a FAIL line does not fail the
//! test run, a panic inside a check does.

use std::time::Instant;

use rand::{rngs::StdRng, Rng, SeedableRng};
use tunnelbox::analytics::{
    cluster_pattern, commensurate_positions, early_window_slope, linear_fit, periodic_defects,
    spearman, DEFAULT_DEGENERACY_RATIO, EARLY_WINDOW_FRACTION,
};
use tunnelbox::observables::{uniform_grid, DEFAULT_ENTROPY_RESOLUTION};
use tunnelbox::{
    degeneracy_scan, divergence_series, entropy_vs_position, instanton_action, pair_gap,
    region_overlap, rhs_probability, solve_spectrum, solve_spectrum_with, spatial_entropy,
    Characteristic, ClassicalPacket, DivergenceMetric, ImageMode, ObservableSeries, PacketSpec,
    PhysicalConstants, SeriesPlan, SolverOptions, Spectrum, WaveField, WellGeometry,
};
use tunnelbox_cli::{run_experiment, ExperimentConfig};

// Pinned tolerances.
const FREE_BOX_ENERGY_REL: f64 = 1e-9;
const FREE_BOX_STATE_SUP: f64 = 1e-8;
const FREE_BOX_SECONDS: f64 = 1.0;
const CHARACTERISTIC_REL: f64 = 1e-10;
const CHARACTERISTIC_SECONDS: f64 = 5.0;
const GRAM_TOL: f64 = 1e-8;
const UNITARITY_TOL: f64 = 1e-8;
const UNITARITY_SECONDS: f64 = 10.0;
const INSET_MAX_PROB: f64 = 1e-2;
const RATIO_TARGET: f64 = 0.0200 / 0.0108;
const RATIO_BAND: (f64, f64) = (0.75, 1.25);
const DIVERGENCE_THRESHOLD: f64 = 125.58;
const MAX_PATTERN_DEFECTS: usize = 1;
const MIN_SPEARMAN: f64 = 0.5;
const SPLITTING_SLOPE_TOL: f64 = 0.10;
const ORACLE_PROB_TOL: f64 = 1e-8;
const ENTROPY_HALVING_TOL: f64 = 1e-6;

// Shared setup.
const HALF_WIDTH: f64 = 35.0;
const LEVELS: usize = 30;
const HEIGHTS: [f64; 3] = [7.0, 360.0, 5760.0];
/// Barrier width for the orderings: thin enough that the three heights
/// give visibly different tunneling within the window.
const ORDERING_WIDTH: f64 = 0.1;
const WIDTHS: [f64; 3] = [0.05, 0.1, 0.2];
const WINDOW_END: f64 = 400.0;
const SAMPLES: usize = 2001;

struct Outcome {
    pass: bool,
    detail: String,
}

fn natural() -> PhysicalConstants {
    PhysicalConstants::natural()
}

fn default_packet() -> PacketSpec {
    PacketSpec::new(11.0, 3.0, 0.0).unwrap()
}

fn field(b: f64, v0: f64) -> WaveField {
    let g = WellGeometry::symmetric(HALF_WIDTH, b, v0).unwrap();
    let s = solve_spectrum(&g, &natural(), LEVELS).unwrap();
    WaveField::from_packet(s, &default_packet()).unwrap()
}

fn series(field: &WaveField, times: &[f64]) -> ObservableSeries {
    SeriesPlan::new(field.spectrum(), field.geometry().right_region(), DEFAULT_ENTROPY_RESOLUTION)
        .unwrap()
        .evaluate(field, times)
        .unwrap()
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] > w[1])
}

/// Composite Simpson weights on `[lo, hi]` with `panels` (even) intervals.
fn simpson_nodes(lo: f64, hi: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (hi - lo) / panels as f64;
    (0..=panels)
        .map(|i| {
            let w = if i == 0 || i == panels {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (lo + h * i as f64, w * h / 3.0)
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let clock = Instant::now();
    let l = 73.0;
    let g = WellGeometry::new(l, 35.0, 0.0, 0.0).unwrap();
    let s = solve_spectrum(&g, &natural(), LEVELS).unwrap();
    let mut worst_e = 0.0f64;
    let mut worst_psi = 0.0f64;
    let xs = uniform_grid(0.0, l, 1000);
    for st in s.states() {
        let n = st.index() as f64;
        let exact = (n * std::f64::consts::PI / l).powi(2);
        worst_e = worst_e.max((st.energy() - exact).abs() / exact);
        let sign = st.derivative(0.0).unwrap().signum();
        for &x in &xs {
            let oracle = (2.0 / l).sqrt() * (n * std::f64::consts::PI * x / l).sin();
            worst_psi = worst_psi.max((sign * st.value(x).unwrap() - oracle).abs());
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    Outcome {
        pass: worst_e < FREE_BOX_ENERGY_REL && worst_psi < FREE_BOX_STATE_SUP && secs < FREE_BOX_SECONDS,
        detail: format!("max rel energy error {worst_e:.1e}, sup-norm state error {worst_psi:.1e}, {secs:.3} s"),
    }
}

fn criterion_2() -> Outcome {
    let clock = Instant::now();
    let mut worst = 0.0f64;
    for v0 in HEIGHTS {
        let g = WellGeometry::symmetric(HALF_WIDTH, 3.0, v0).unwrap();
        let solve = |characteristic| {
            let options = SolverOptions { characteristic, ..SolverOptions::default() };
            solve_spectrum_with(&g, &natural(), LEVELS, &options).unwrap().energies()
        };
        let closed = solve(Characteristic::ClosedForm);
        let transfer = solve(Characteristic::TransferMatrix);
        for (a, b) in closed.iter().zip(&transfer) {
            worst = worst.max((a - b).abs() / a.abs());
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    Outcome {
        pass: worst < CHARACTERISTIC_REL && secs < CHARACTERISTIC_SECONDS,
        detail: format!("max rel difference {worst:.1e} over V0 = 7, 360, 5760; {secs:.3} s"),
    }
}

fn gram_error(s: &Spectrum) -> f64 {
    let g = s.geometry();
    let mut nodes = Vec::new();
    for (lo, hi) in [
        (0.0, g.barrier_left()),
        (g.barrier_left(), g.barrier_right()),
        (g.barrier_right(), g.total_length()),
    ] {
        nodes.extend(simpson_nodes(lo, hi, 20_000));
    }
    let table: Vec<Vec<f64>> = s
        .states()
        .iter()
        .map(|st| nodes.iter().map(|&(x, _)| st.value(x).unwrap()).collect())
        .collect();
    let mut worst = 0.0f64;
    for i in 0..table.len() {
        for j in i..table.len() {
            let v: f64 = nodes.iter().enumerate().map(|(k, &(_, w))| w * table[i][k] * table[j][k]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - want).abs());
        }
    }
    worst
}

fn criterion_3() -> Outcome {
    let clock = Instant::now();
    let f = field(3.0, 360.0);
    let gram = gram_error(f.spectrum());
    let n0 = f.norm_at(0.0).unwrap();
    let drift = uniform_grid(0.0, WINDOW_END, SAMPLES)
        .iter()
        .map(|&t| (f.norm_at(t).unwrap() - n0).abs())
        .fold(0.0, f64::max);
    let secs = clock.elapsed().as_secs_f64();
    Outcome {
        pass: gram < GRAM_TOL && drift < UNITARITY_TOL && secs < UNITARITY_SECONDS,
        detail: format!("Gram error {gram:.1e} (Simpson oracle), norm drift {drift:.1e} over {SAMPLES} samples, {secs:.2} s"),
    }
}

fn criterion_4(by_height: &[ObservableSeries]) -> Outcome {
    let times = &by_height[0].times;
    let early = times.iter().take_while(|&&t| t <= 0.25 * WINDOW_END).count();
    let ordered = (1..early).all(|i| {
        let p: Vec<f64> = by_height.iter().map(|s| s.rhs_prob[i]).collect();
        strictly_decreasing(&p)
    });
    let max_tall = by_height[2].rhs_prob.iter().cloned().fold(0.0, f64::max);
    Outcome {
        pass: ordered && max_tall < INSET_MAX_PROB,
        detail: format!(
            "b = {ORDERING_WIDTH}: strict ordering at all {} samples in (0, {}]: {ordered}; max rho_RHS(V0=5760) = {max_tall:.1e}",
            early - 1,
            0.25 * WINDOW_END
        ),
    }
}

fn slopes(list: &[ObservableSeries], pick: fn(&ObservableSeries) -> &[f64]) -> Vec<f64> {
    list.iter()
        .map(|s| early_window_slope(&s.times, pick(s), EARLY_WINDOW_FRACTION).unwrap())
        .collect()
}

fn criterion_5_6(
    by_height: &[ObservableSeries],
    by_width: &[ObservableSeries],
    pick: fn(&ObservableSeries) -> &[f64],
) -> Outcome {
    let h = slopes(by_height, pick);
    let w = slopes(by_width, pick);
    Outcome {
        pass: strictly_decreasing(&h) && strictly_decreasing(&w),
        detail: format!(
            "slopes vs V0 (b = {ORDERING_WIDTH}) {:.4e} > {:.4e} > {:.4e}; vs b = {:?} (V0 = 360) {:.4e} > {:.4e} > {:.4e}",
            h[0], h[1], h[2], WIDTHS, w[0], w[1], w[2]
        ),
    }
}

/// Documented reproduction point for the divergence ratio, in Angstrom.
const DIVERGENCE_WIDTH: f64 = 0.1;
const DIVERGENCE_MOMENTUM: f64 = 0.5;
const DIVERGENCE_WINDOW: f64 = 2e-13;
const DIVERGENCE_GRID_B: [f64; 5] = [0.005, 0.01, 0.02, 0.05, 0.1];
const DIVERGENCE_GRID_K: [f64; 3] = [0.25, 0.5, 0.75];

fn divergence_times(b: f64, k0: f64) -> (Option<f64>, Option<f64>, bool) {
    let c = PhysicalConstants::paper();
    let spec = PacketSpec::new(11.0, 3.0, k0).unwrap();
    let times = uniform_grid(0.0, DIVERGENCE_WINDOW, SAMPLES);
    let mut out = Vec::new();
    let mut series = Vec::new();
    for v0 in [360.0, 5760.0] {
        let g = WellGeometry::symmetric(HALF_WIDTH, b, v0).unwrap();
        let s = solve_spectrum(&g, &c, LEVELS).unwrap();
        let f = WaveField::from_packet(s, &spec).unwrap();
        let p = ClassicalPacket::from_packet(&spec, &g, &c, ImageMode::FullImages).unwrap();
        let d = divergence_series(&f, &p, &times, DivergenceMetric::Variance).unwrap();
        out.push(d.crossing(DIVERGENCE_THRESHOLD).time());
        series.push(d);
    }
    // Fallback ordering: at every threshold both curves cross.
    let mut ordered = true;
    for k in 1..=50 {
        let thr = DIVERGENCE_THRESHOLD * k as f64 / 25.0;
        if let (Some(a), Some(b)) = (series[0].crossing(thr).time(), series[1].crossing(thr).time()) {
            ordered &= b > a;
        }
    }
    (out[0], out[1], ordered)
}

fn criterion_7() -> Outcome {
    let band = (RATIO_TARGET * RATIO_BAND.0, RATIO_TARGET * RATIO_BAND.1);
    let (t_low, t_high, ordered) = divergence_times(DIVERGENCE_WIDTH, DIVERGENCE_MOMENTUM);
    let mut in_band = 0;
    let mut crossing = 0;
    let mut grid_ordered = true;
    let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
    for b in DIVERGENCE_GRID_B {
        for k0 in DIVERGENCE_GRID_K {
            let (a, c, o) = divergence_times(b, k0);
            grid_ordered &= o;
            if let (Some(a), Some(c)) = (a, c) {
                crossing += 1;
                let r = c / a;
                rmin = rmin.min(r);
                rmax = rmax.max(r);
                if r >= band.0 && r <= band.1 {
                    in_band += 1;
                }
            }
        }
    }
    let grid_note = format!(
        "grid b x k0 ({}x{}): {crossing} crossing, {in_band} in band, ratios {rmin:.2}..{rmax:.2}, ordering held everywhere: {grid_ordered}",
        DIVERGENCE_GRID_B.len(),
        DIVERGENCE_GRID_K.len()
    );
    match (t_low, t_high) {
        (Some(a), Some(c)) => {
            let r = c / a;
            Outcome {
                pass: r >= band.0 && r <= band.1,
                detail: format!(
                    "b = {DIVERGENCE_WIDTH} A, k0 = {DIVERGENCE_MOMENTUM}/A: t*(360) = {a:.3e} s, t*(5760) = {c:.3e} s, ratio {r:.3} in [{:.3}, {:.3}]; {grid_note}",
                    band.0, band.1
                ),
            }
        }
        _ => Outcome {
            pass: ordered,
            detail: format!("threshold not crossed at the reproduction point; ordering fallback {ordered}; {grid_note}"),
        },
    }
}

fn criterion_8() -> Outcome {
    let base = WellGeometry::symmetric(HALF_WIDTH, 3.0, 360.0).unwrap();
    let positions = [
        35.0,
        base.with_width_ratio(2.0).unwrap().barrier_left(),
        base.with_width_ratio(3.0).unwrap().barrier_left(),
    ];
    let scan = degeneracy_scan(&base, &natural(), &positions, LEVELS, DEFAULT_DEGENERACY_RATIO);
    let sym = scan.results[0].as_ref().unwrap();
    let all_pairs = (0..LEVELS / 2).all(|p| sym.flags[2 * p]);
    let p2 = cluster_pattern(&scan.results[1].as_ref().unwrap().flags);
    let p3 = cluster_pattern(&scan.results[2].as_ref().unwrap().flags);
    let (d2, d3) = (periodic_defects(&p2, 2), periodic_defects(&p3, 3));
    Outcome {
        pass: all_pairs && d2 <= MAX_PATTERN_DEFECTS && d3 <= MAX_PATTERN_DEFECTS,
        detail: format!(
            "symmetric: all {} pairs flagged: {all_pairs}; 2:1 cluster pattern period-2 defects {d2}; 3:1 period-3 defects {d3}",
            LEVELS / 2
        ),
    }
}

fn criterion_9() -> Outcome {
    let base = WellGeometry::symmetric(HALF_WIDTH, 3.0, 360.0).unwrap();
    let positions = commensurate_positions(&base).unwrap();
    let scan = degeneracy_scan(&base, &natural(), &positions, LEVELS, DEFAULT_DEGENERACY_RATIO);
    let counts: Vec<f64> = scan
        .results
        .iter()
        .map(|r| r.as_ref().unwrap().flagged_pairs() as f64)
        .collect();
    let times = uniform_grid(0.0, WINDOW_END, SAMPLES);
    let traces = entropy_vs_position(&base, &natural(), &default_packet(), &positions, &times, LEVELS);
    let slopes: Vec<f64> = traces.iter().map(|t| t.as_ref().unwrap().early_slope().unwrap()).collect();
    let rho = spearman(&counts, &slopes).unwrap();
    Outcome {
        pass: rho > MIN_SPEARMAN,
        detail: format!(
            "Spearman {rho:.3} over {} positions; flagged pairs {:?}",
            positions.len(),
            counts.iter().map(|&c| c as usize).collect::<Vec<_>>()
        ),
    }
}

fn criterion_10() -> Outcome {
    let c = natural();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..=10 {
        let b = 1.0 + 0.2 * i as f64;
        let g = WellGeometry::symmetric(HALF_WIDTH, b, 100.0).unwrap();
        let s = solve_spectrum(&g, &c, 2).unwrap();
        xs.push(instanton_action(&g, &c) / c.hbar());
        ys.push(pair_gap(&s, 1).unwrap().ln());
    }
    let (slope, _) = linear_fit(&xs, &ys).unwrap();
    Outcome {
        pass: (slope + 1.0).abs() <= SPLITTING_SLOPE_TOL,
        detail: format!(
            "V0 = 100, b = 1.0..3.0: S0/hbar in [{:.1}, {:.1}], slope {slope:.5}",
            xs[0],
            xs[xs.len() - 1]
        ),
    }
}

fn criterion_11() -> Outcome {
    let f = field(ORDERING_WIDTH, 360.0);
    let region = f.geometry().right_region();
    let m = region_overlap(f.spectrum(), region).unwrap();
    let nodes = simpson_nodes(region.lo, region.hi, 40_000);
    let xs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst_p = 0.0f64;
    for _ in 0..10 {
        let t = rng.gen_range(0.0..WINDOW_END);
        let rho = f.density_profile(&xs, t).unwrap();
        let direct: f64 = rho.iter().zip(&nodes).map(|(r, n)| r * n.1).sum();
        worst_p = worst_p.max((rhs_probability(&f, &m, t).unwrap() - direct).abs());
    }
    let mut worst_s = 0.0f64;
    for t in [0.0, 50.0, 200.0, 400.0] {
        let coarse = spatial_entropy(&f, t, DEFAULT_ENTROPY_RESOLUTION).unwrap();
        let fine = spatial_entropy(&f, t, 2 * DEFAULT_ENTROPY_RESOLUTION).unwrap();
        worst_s = worst_s.max((coarse - fine).abs());
    }
    Outcome {
        pass: worst_p < ORACLE_PROB_TOL && worst_s < ENTROPY_HALVING_TOL,
        detail: format!("matrix vs Simpson max |diff| {worst_p:.1e}; entropy 512 vs 1024 panels max |diff| {worst_s:.1e}"),
    }
}

fn criterion_12() -> Outcome {
    let config = ExperimentConfig::default();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run_experiment(&config, a.path()).unwrap();
    run_experiment(&config, b.path()).unwrap();
    let mut identical = true;
    let files = &ma.points[0].files;
    for file in files {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        identical &= x == y;
    }
    Outcome {
        pass: identical && !files.is_empty(),
        detail: format!("{} CSVs compared byte for byte: identical = {identical}", files.len()),
    }
}

fn main() {
    let clock = Instant::now();
    let times = uniform_grid(0.0, WINDOW_END, SAMPLES);
    let by_height: Vec<ObservableSeries> =
        HEIGHTS.iter().map(|&v0| series(&field(ORDERING_WIDTH, v0), &times)).collect();
    let by_width: Vec<ObservableSeries> =
        WIDTHS.iter().map(|&b| series(&field(b, 360.0), &times)).collect();

    let report: Vec<(usize, &str, Outcome)> = vec![
        (1, "free-box oracle", criterion_1()),
        (2, "closed form vs transfer matrix", criterion_2()),
        (3, "orthonormality and unitarity", criterion_3()),
        (4, "tunneling probability ordering", criterion_4(&by_height)),
        (5, "entropy slope orderings", criterion_5_6(&by_height, &by_width, |s| &s.entropy)),
        (6, "variance slope orderings", criterion_5_6(&by_height, &by_width, |s| &s.variance)),
        (7, "divergence-time ratio", criterion_7()),
        (8, "degeneracy patterns", criterion_8()),
        (9, "degeneracy vs entropy rank", criterion_9()),
        (10, "splitting asymptotics", criterion_10()),
        (11, "oracle equivalence", criterion_11()),
        (12, "determinism", criterion_12()),
    ];
    println!();
    let mut passed = 0;
    for (n, name, outcome) in &report {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        passed += usize::from(outcome.pass);
        println!("{tag} [{n:>2}] {name}: {}", outcome.detail);
    }
    println!(
        "acceptance: {passed}/{} criteria pass ({:.1} s)\n",
        report.len(),
        clock.elapsed().as_secs_f64()
    );
}
