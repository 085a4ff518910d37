//! Pipeline orchestration: one spectrum per sweep point, then the requested
//! series, each written to its own CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use tunnelbox::analytics::commensurate_positions;
use tunnelbox::export::{degeneracy_csv, divergence_csv, num, splitting_csv};
use tunnelbox::{
    degeneracy_scan, divergence_series, solve_spectrum, splitting_report, ClassicalPacket,
    ObservableSeries, SeriesPlan, WaveField, WellGeometry,
};

use crate::config::{ExperimentConfig, OutputKind};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub value: Option<f64>,
    pub status: PointStatus,
    pub captured_norm: Option<f64>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    pub error: Option<String>,
}

/// Wall-clock seconds per stage; the only non-reproducible part of a run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimes {
    pub solve: f64,
    pub project: f64,
    pub series: f64,
    pub analysis: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: serde_json::Value,
    pub sweep_axis: Option<String>,
    pub points: Vec<PointRecord>,
    /// Timings vary between runs; everything else is deterministic.
    pub wall_clock_seconds: Vec<StageTimes>,
}

impl RunManifest {
    pub fn failed(&self) -> usize {
        self.points.iter().filter(|p| p.status == PointStatus::Failed).count()
    }

    /// 0 when every point ran, 2 when none did, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.failed() {
            0 => 0,
            n if n == self.points.len() => 2,
            _ => 3,
        }
    }
}

struct PointOutput {
    files: Vec<(&'static str, String)>,
    captured_norm: Option<f64>,
    warnings: Vec<String>,
    times: StageTimes,
}

fn point_prefix(config: &ExperimentConfig, index: usize) -> String {
    match &config.sweep {
        None => String::new(),
        Some(s) => format!("{}_{index:03}_", s.axis.name()),
    }
}

/// Runs every sweep point (in parallel) and writes CSVs plus the manifest.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let points = config.points();
    let results: Vec<(Option<f64>, Result<PointOutput, String>)> = points
        .into_par_iter()
        .map(|(value, geometry)| {
            let out = geometry
                .map_err(|e| e.to_string())
                .and_then(|g| run_point(config, &g).map_err(|e| e.to_string()));
            (value, out)
        })
        .collect();

    let mut records = Vec::with_capacity(results.len());
    let mut timings = Vec::with_capacity(results.len());
    for (index, (value, result)) in results.into_iter().enumerate() {
        let prefix = point_prefix(config, index);
        match result {
            Ok(out) => {
                let mut files = Vec::new();
                for (name, contents) in &out.files {
                    let file = format!("{prefix}{name}.csv");
                    write(&out_dir.join(&file), contents)?;
                    files.push(file);
                }
                records.push(PointRecord {
                    index,
                    value,
                    status: PointStatus::Ok,
                    captured_norm: out.captured_norm,
                    warnings: out.warnings,
                    files,
                    error: None,
                });
                timings.push(out.times);
            }
            Err(error) => {
                records.push(PointRecord {
                    index,
                    value,
                    status: PointStatus::Failed,
                    captured_norm: None,
                    warnings: Vec::new(),
                    files: Vec::new(),
                    error: Some(error),
                });
                timings.push(StageTimes::default());
            }
        }
    }
    let manifest = RunManifest {
        tool: "tunnelbox",
        version: tunnelbox_version(),
        config: config.to_json(),
        sweep_axis: config.sweep.as_ref().map(|s| s.axis.name().to_string()),
        points: records,
        wall_clock_seconds: timings,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&out_dir.join(MANIFEST_NAME), &(json + "\n"))?;
    Ok(manifest)
}

pub fn tunnelbox_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    std::fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn needs_packet(config: &ExperimentConfig) -> bool {
    config.outputs.iter().any(|o| {
        matches!(
            o,
            OutputKind::RhsProb | OutputKind::Entropy | OutputKind::Variance | OutputKind::Divergence
        )
    })
}

fn run_point(config: &ExperimentConfig, geometry: &WellGeometry) -> tunnelbox::Result<PointOutput> {
    let constants = config.constants();
    let mut times = StageTimes::default();
    let mut files: Vec<(&'static str, String)> = Vec::new();
    let mut warnings = Vec::new();
    let mut captured_norm = None;

    let clock = Instant::now();
    let spectrum = solve_spectrum(geometry, &constants, config.n_levels)?;
    times.solve = clock.elapsed().as_secs_f64();

    if config.wants(OutputKind::Splitting) {
        let clock = Instant::now();
        files.push(("splitting", splitting_csv(&splitting_report(&spectrum, config.pair)?)));
        times.analysis += clock.elapsed().as_secs_f64();
    }
    if config.wants(OutputKind::Degeneracy) {
        let clock = Instant::now();
        let positions = match &config.positions {
            Some(p) => p.clone(),
            None => commensurate_positions(geometry)?,
        };
        let scan = degeneracy_scan(geometry, &constants, &positions, config.n_levels, config.degeneracy_ratio);
        for (c, r) in positions.iter().zip(&scan.results) {
            if let Err(e) = r {
                warnings.push(format!("degeneracy scan at barrier_left = {c}: {e}"));
            }
        }
        files.push(("degeneracy", degeneracy_csv(&scan)));
        times.analysis += clock.elapsed().as_secs_f64();
    }

    if needs_packet(config) {
        let clock = Instant::now();
        let field = WaveField::from_packet(spectrum, &config.packet)?;
        times.project = clock.elapsed().as_secs_f64();
        captured_norm = Some(field.captured_norm());
        warnings.extend(field.expansion().warnings().iter().map(|w| w.to_string()));
        let grid = config.time.grid();

        let clock = Instant::now();
        let plan = SeriesPlan::new(field.spectrum(), config.rhs_region_for(geometry), config.entropy_resolution)?;
        if [OutputKind::RhsProb, OutputKind::Entropy, OutputKind::Variance]
            .iter()
            .any(|&o| config.wants(o))
        {
            let series = plan.evaluate(&field, &grid)?;
            for kind in [OutputKind::RhsProb, OutputKind::Entropy, OutputKind::Variance] {
                if config.wants(kind) {
                    files.push((kind.name(), column_csv(&series, kind)));
                }
            }
        }
        times.series = clock.elapsed().as_secs_f64();

        if config.wants(OutputKind::Divergence) {
            let clock = Instant::now();
            let packet = ClassicalPacket::from_packet(&config.packet, geometry, &constants, config.image_mode)?;
            let series = divergence_series(&field, &packet, &grid, config.metric)?;
            files.push(("divergence", divergence_csv(&series, series.crossing(config.threshold))));
            times.analysis += clock.elapsed().as_secs_f64();
        }
    }

    // Stable file order regardless of how outputs were listed.
    files.sort_by_key(|(name, _)| order_of(name));
    Ok(PointOutput { files, captured_norm, warnings, times })
}

fn order_of(name: &str) -> usize {
    ["rhs_prob", "entropy", "variance", "divergence", "degeneracy", "splitting"]
        .iter()
        .position(|n| *n == name)
        .unwrap_or(usize::MAX)
}

/// One output's columns of an observable series.
pub fn column_csv(series: &ObservableSeries, kind: OutputKind) -> String {
    let mut out = String::new();
    match kind {
        OutputKind::RhsProb => {
            out.push_str("t,rhs_prob\n");
            for (t, p) in series.times.iter().zip(&series.rhs_prob) {
                let _ = writeln!(out, "{},{}", num(*t), num(*p));
            }
        }
        OutputKind::Entropy => {
            out.push_str("t,entropy\n");
            for (t, s) in series.times.iter().zip(&series.entropy) {
                let _ = writeln!(out, "{},{}", num(*t), num(*s));
            }
        }
        _ => {
            out.push_str("t,mean_x,variance\n");
            for i in 0..series.len() {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    num(series.times[i]),
                    num(series.mean_x[i]),
                    num(series.variance[i])
                );
            }
        }
    }
    out
}
