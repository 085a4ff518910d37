//! Experiment configuration: a TOML file of sections and `key = value`
//! lines. Every key is optional; unknown keys are rejected.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tunnelbox::{
    DivergenceMetric, ImageMode, Interval, OnsetConvention, PacketSpec, PhysicalConstants, Preset,
    WellGeometry,
};

pub const DEFAULT_HALF_WIDTH: f64 = 35.0;
pub const DEFAULT_BARRIER_WIDTH: f64 = 3.0;
pub const DEFAULT_BARRIER_HEIGHT: f64 = 360.0;
pub const DEFAULT_CENTER: f64 = 11.0;
pub const DEFAULT_WIDTH: f64 = 3.0;
pub const DEFAULT_LEVELS: usize = 30;
pub const DEFAULT_SAMPLES: usize = 2001;
/// Divergence threshold on the variance difference.
pub const DEFAULT_THRESHOLD: f64 = 125.58;

/// Accepted keys per table; drives the unknown-key check.
const SCHEMA: &[(&str, &[&str])] = &[
    ("", &["preset", "levels", "outputs", "geometry", "packet", "time", "analysis", "sweep"]),
    ("geometry", &["total_length", "barrier_left", "barrier_width", "barrier_height"]),
    ("packet", &["center", "width", "momentum"]),
    ("time", &["start", "end", "samples"]),
    (
        "analysis",
        &[
            "rhs_region",
            "entropy_resolution",
            "degeneracy_ratio",
            "threshold",
            "image_mode",
            "metric",
            "onset_convention",
            "positions",
            "pair",
        ],
    ),
    ("sweep", &["axis", "values"]),
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown key `{path}`{}{}", .line.map(|l| format!(" (line {l})")).unwrap_or_default(), .suggestion.as_ref().map(|s| format!("; did you mean `{s}`?")).unwrap_or_default())]
    UnknownKey {
        path: String,
        line: Option<usize>,
        suggestion: Option<String>,
    },

    #[error("invalid `{path}`: {message}")]
    Invalid { path: String, message: String },
}

impl ConfigError {
    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    RhsProb,
    Entropy,
    Variance,
    Divergence,
    Degeneracy,
    Splitting,
}

impl OutputKind {
    pub fn name(self) -> &'static str {
        match self {
            OutputKind::RhsProb => "rhs_prob",
            OutputKind::Entropy => "entropy",
            OutputKind::Variance => "variance",
            OutputKind::Divergence => "divergence",
            OutputKind::Degeneracy => "degeneracy",
            OutputKind::Splitting => "splitting",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    BarrierHeight,
    /// Both chambers keep their width; the box grows with the barrier.
    BarrierWidth,
    BarrierPosition,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::BarrierHeight => "barrier_height",
            SweepAxis::BarrierWidth => "barrier_width",
            SweepAxis::BarrierPosition => "barrier_position",
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &WellGeometry, value: f64) -> tunnelbox::Result<WellGeometry> {
        match self {
            SweepAxis::BarrierHeight => base.with_barrier_height(value),
            SweepAxis::BarrierWidth => WellGeometry::new(
                base.total_length() - base.barrier_width() + value,
                base.barrier_left(),
                value,
                base.barrier_height(),
            ),
            SweepAxis::BarrierPosition => base.with_barrier_left(value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PresetName {
    Natural,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ImageName {
    TwoTerm,
    FullImages,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MetricName {
    Variance,
    RmsWidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ConventionName {
    AsPrinted,
    WithHbar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RegionValue {
    Keyword(String),
    Bounds([f64; 2]),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<PresetName>,
    levels: Option<i64>,
    outputs: Option<Vec<OutputKind>>,
    #[serde(default)]
    geometry: RawGeometry,
    #[serde(default)]
    packet: RawPacket,
    #[serde(default)]
    time: RawTime,
    #[serde(default)]
    analysis: RawAnalysis,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    total_length: Option<f64>,
    barrier_left: Option<f64>,
    barrier_width: Option<f64>,
    barrier_height: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacket {
    center: Option<f64>,
    width: Option<f64>,
    momentum: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    start: Option<f64>,
    end: Option<f64>,
    samples: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    rhs_region: Option<RegionValue>,
    entropy_resolution: Option<i64>,
    degeneracy_ratio: Option<f64>,
    threshold: Option<f64>,
    image_mode: Option<ImageName>,
    metric: Option<MetricName>,
    onset_convention: Option<ConventionName>,
    positions: Option<Vec<f64>>,
    pair: Option<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: SweepAxis,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl TimeWindow {
    pub fn grid(&self) -> Vec<f64> {
        tunnelbox::observables::uniform_grid(self.start, self.end, self.samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// A resolved, validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub geometry: WellGeometry,
    pub packet: PacketSpec,
    pub n_levels: usize,
    pub time: TimeWindow,
    /// `None` means the region right of the barrier at each sweep point.
    pub rhs_region: Option<Interval>,
    pub entropy_resolution: usize,
    pub degeneracy_ratio: f64,
    pub threshold: f64,
    pub image_mode: ImageMode,
    pub metric: DivergenceMetric,
    pub onset_convention: OnsetConvention,
    /// Barrier positions for the degeneracy scan; `None` means the
    /// commensurate set.
    pub positions: Option<Vec<f64>>,
    pub pair: usize,
    pub sweep: Option<Sweep>,
    pub outputs: Vec<OutputKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid")
    }
}

impl ExperimentConfig {
    pub fn constants(&self) -> PhysicalConstants {
        self.preset.constants()
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }

    /// Geometry of each sweep point (one point without a sweep).
    pub fn points(&self) -> Vec<(Option<f64>, tunnelbox::Result<WellGeometry>)> {
        match &self.sweep {
            None => vec![(None, Ok(self.geometry))],
            Some(s) => s
                .values
                .iter()
                .map(|&v| (Some(v), s.axis.apply(&self.geometry, v)))
                .collect(),
        }
    }

    pub fn rhs_region_for(&self, geometry: &WellGeometry) -> Interval {
        self.rhs_region.unwrap_or_else(|| geometry.right_region())
    }

    /// Echo of the resolved values for the run manifest.
    pub fn to_json(&self) -> serde_json::Value {
        let g = &self.geometry;
        serde_json::json!({
            "preset": self.preset.name(),
            "levels": self.n_levels,
            "outputs": self.outputs.iter().map(|o| o.name()).collect::<Vec<_>>(),
            "geometry": {
                "total_length": g.total_length(),
                "barrier_left": g.barrier_left(),
                "barrier_width": g.barrier_width(),
                "barrier_height": g.barrier_height(),
            },
            "packet": {
                "center": self.packet.center(),
                "width": self.packet.width(),
                "momentum": self.packet.momentum(),
            },
            "time": self.time,
            "analysis": {
                "rhs_region": match self.rhs_region {
                    None => serde_json::json!("auto"),
                    Some(r) => serde_json::json!([r.lo, r.hi]),
                },
                "entropy_resolution": self.entropy_resolution,
                "degeneracy_ratio": self.degeneracy_ratio,
                "threshold": self.threshold,
                "image_mode": match self.image_mode {
                    ImageMode::TwoTerm => "two_term",
                    ImageMode::FullImages => "full_images",
                },
                "metric": match self.metric {
                    DivergenceMetric::Variance => "variance",
                    DivergenceMetric::RmsWidth => "rms_width",
                },
                "onset_convention": match self.onset_convention {
                    OnsetConvention::AsPrinted => "as_printed",
                    OnsetConvention::WithHbar => "with_hbar",
                },
                "positions": self.positions,
                "pair": self.pair,
            },
            "sweep": self.sweep,
        })
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| parse_error(text, &e))?;
    check_keys(text, &table)?;
    let raw: RawConfig =
        RawConfig::deserialize(toml::Value::Table(table)).map_err(|e| parse_error(text, &e))?;
    resolve(raw)
}

fn parse_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let (line, column) = match e.span() {
        Some(span) => line_col(text, span.start),
        None => (0, 0),
    };
    ConfigError::Parse {
        line,
        column,
        message: e.message().trim().to_string(),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

fn check_keys(text: &str, table: &toml::Table) -> Result<(), ConfigError> {
    let allowed = |section: &str| SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k);
    let top = allowed("").unwrap_or_default();
    for (key, value) in table {
        if !top.contains(&key.as_str()) {
            return Err(unknown(text, "", key, top));
        }
        if let (Some(keys), toml::Value::Table(inner)) = (allowed(key), value) {
            for inner_key in inner.keys() {
                if !keys.contains(&inner_key.as_str()) {
                    return Err(unknown(text, key, inner_key, keys));
                }
            }
        }
    }
    Ok(())
}

fn unknown(text: &str, section: &str, key: &str, candidates: &[&str]) -> ConfigError {
    let suggestion = candidates
        .iter()
        .map(|c| (strsim::normalized_damerau_levenshtein(key, c), *c))
        .filter(|(score, _)| *score >= 0.6)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c.to_string());
    let line = text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    });
    ConfigError::UnknownKey {
        path: if section.is_empty() { key.to_string() } else { format!("{section}.{key}") },
        line: line.map(|l| l + 1),
        suggestion,
    }
}

fn positive(path: &str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::invalid(path, format!("must be positive and finite, got {value}")))
    }
}

fn non_negative(path: &str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::invalid(path, format!("must be non-negative and finite, got {value}")))
    }
}

fn count(path: &str, value: i64, min: usize) -> Result<usize, ConfigError> {
    usize::try_from(value)
        .ok()
        .filter(|&v| v >= min)
        .ok_or_else(|| ConfigError::invalid(path, format!("must be an integer >= {min}, got {value}")))
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let preset = match raw.preset.unwrap_or(PresetName::Natural) {
        PresetName::Natural => Preset::Natural,
        PresetName::Paper => Preset::Paper,
    };

    let g = &raw.geometry;
    let width = non_negative("geometry.barrier_width", g.barrier_width.unwrap_or(DEFAULT_BARRIER_WIDTH))?;
    let height = non_negative("geometry.barrier_height", g.barrier_height.unwrap_or(DEFAULT_BARRIER_HEIGHT))?;
    let total = positive(
        "geometry.total_length",
        g.total_length.unwrap_or(2.0 * DEFAULT_HALF_WIDTH + width),
    )?;
    let left = positive(
        "geometry.barrier_left",
        g.barrier_left.unwrap_or(if g.total_length.is_some() {
            0.5 * (total - width)
        } else {
            DEFAULT_HALF_WIDTH
        }),
    )?;
    if left + width >= total {
        return Err(ConfigError::invalid(
            "geometry.barrier_left",
            format!(
                "barrier_left + barrier_width = {} must be below total_length = {total}",
                left + width
            ),
        ));
    }
    let geometry = WellGeometry::new(total, left, width, height)
        .map_err(|e| ConfigError::invalid("geometry", e.to_string()))?;

    let p = &raw.packet;
    let center = p.center.unwrap_or(DEFAULT_CENTER);
    if !(center.is_finite() && center > 0.0 && center < total) {
        return Err(ConfigError::invalid(
            "packet.center",
            format!("must lie strictly inside (0, {total}), got {center}"),
        ));
    }
    let sigma = positive("packet.width", p.width.unwrap_or(DEFAULT_WIDTH))?;
    let momentum = p.momentum.unwrap_or(0.0);
    if !momentum.is_finite() {
        return Err(ConfigError::invalid("packet.momentum", "must be finite"));
    }
    let packet = PacketSpec::new(center, sigma, momentum)
        .map_err(|e| ConfigError::invalid("packet", e.to_string()))?;

    let n_levels = count("levels", raw.levels.unwrap_or(DEFAULT_LEVELS as i64), 1)?;

    let default_end = match preset {
        Preset::Natural => 400.0,
        Preset::Paper => 2e-13,
    };
    let start = raw.time.start.unwrap_or(0.0);
    let end = raw.time.end.unwrap_or(default_end);
    if !start.is_finite() {
        return Err(ConfigError::invalid("time.start", "must be finite"));
    }
    if !(end.is_finite() && end > start) {
        return Err(ConfigError::invalid("time.end", format!("must exceed time.start = {start}, got {end}")));
    }
    let samples = count("time.samples", raw.time.samples.unwrap_or(DEFAULT_SAMPLES as i64), 2)?;
    let time = TimeWindow { start, end, samples };

    let a = &raw.analysis;
    let rhs_region = match &a.rhs_region {
        None => None,
        Some(RegionValue::Keyword(k)) if k == "auto" => None,
        Some(RegionValue::Keyword(k)) => {
            return Err(ConfigError::invalid(
                "analysis.rhs_region",
                format!("expected \"auto\" or [lo, hi], got \"{k}\""),
            ))
        }
        Some(RegionValue::Bounds([lo, hi])) => {
            if !(*lo >= 0.0 && hi > lo && *hi <= total) {
                return Err(ConfigError::invalid(
                    "analysis.rhs_region",
                    format!("[{lo}, {hi}] must be a non-empty interval inside [0, {total}]"),
                ));
            }
            Some(Interval::new(*lo, *hi).map_err(|e| ConfigError::invalid("analysis.rhs_region", e.to_string()))?)
        }
    };
    let entropy_resolution = count(
        "analysis.entropy_resolution",
        a.entropy_resolution
            .unwrap_or(tunnelbox::observables::DEFAULT_ENTROPY_RESOLUTION as i64),
        tunnelbox::observables::MIN_ENTROPY_RESOLUTION,
    )?;
    let degeneracy_ratio = positive(
        "analysis.degeneracy_ratio",
        a.degeneracy_ratio
            .unwrap_or(tunnelbox::analytics::DEFAULT_DEGENERACY_RATIO),
    )?;
    let threshold = non_negative("analysis.threshold", a.threshold.unwrap_or(DEFAULT_THRESHOLD))?;
    let pair = count("analysis.pair", a.pair.unwrap_or(1), 1)?;
    if 2 * pair > n_levels {
        return Err(ConfigError::invalid(
            "analysis.pair",
            format!("pair {pair} needs {} levels but only {n_levels} are solved", 2 * pair),
        ));
    }
    if let Some(positions) = &a.positions {
        if positions.is_empty() {
            return Err(ConfigError::invalid("analysis.positions", "must not be empty"));
        }
        for (i, &c) in positions.iter().enumerate() {
            if !(c.is_finite() && c > 0.0 && c + width < total) {
                return Err(ConfigError::invalid(
                    format!("analysis.positions[{i}]"),
                    format!("barrier at {c} does not fit in the box"),
                ));
            }
        }
    }

    let outputs = raw
        .outputs
        .unwrap_or_else(|| vec![OutputKind::RhsProb, OutputKind::Entropy, OutputKind::Variance]);
    let mut deduped = Vec::new();
    for o in outputs {
        if !deduped.contains(&o) {
            deduped.push(o);
        }
    }
    if deduped.contains(&OutputKind::Divergence) && start != 0.0 {
        return Err(ConfigError::invalid(
            "time.start",
            "the divergence output needs a window starting at t = 0",
        ));
    }

    let sweep = match raw.sweep {
        None => None,
        Some(s) => {
            if s.values.is_empty() {
                return Err(ConfigError::invalid("sweep.values", "must not be empty"));
            }
            for (i, &v) in s.values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ConfigError::invalid(format!("sweep.values[{i}]"), "must be finite"));
                }
            }
            Some(Sweep { axis: s.axis, values: s.values })
        }
    };

    Ok(ExperimentConfig {
        preset,
        geometry,
        packet,
        n_levels,
        time,
        rhs_region,
        entropy_resolution,
        degeneracy_ratio,
        threshold,
        image_mode: match a.image_mode.unwrap_or(ImageName::TwoTerm) {
            ImageName::TwoTerm => ImageMode::TwoTerm,
            ImageName::FullImages => ImageMode::FullImages,
        },
        metric: match a.metric.unwrap_or(MetricName::Variance) {
            MetricName::Variance => DivergenceMetric::Variance,
            MetricName::RmsWidth => DivergenceMetric::RmsWidth,
        },
        onset_convention: match a.onset_convention.unwrap_or(ConventionName::AsPrinted) {
            ConventionName::AsPrinted => OnsetConvention::AsPrinted,
            ConventionName::WithHbar => OnsetConvention::WithHbar,
        },
        positions: a.positions.clone(),
        pair,
        sweep,
        outputs: deduped,
    })
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.geometry.barrier_left(), 35.0);
        assert_eq!(c.geometry.total_length(), 73.0);
        assert_eq!(c.packet.center(), 11.0);
        assert_eq!(c.packet.width(), 3.0);
        assert_eq!(c.packet.momentum(), 0.0);
        assert_eq!(c.n_levels, 30);
        assert_eq!(c.preset, Preset::Natural);
        assert!(c.geometry.is_symmetric());
    }

    #[test]
    fn line_and_column_of_offsets() {
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
        assert_eq!(line_col("ab", 0), (1, 1));
    }
}
