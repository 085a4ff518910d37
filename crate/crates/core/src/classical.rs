//! Classical baseline: a rigid Gaussian density moving at constant speed in
//! the left chamber and reflected by the barrier wall.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::WellGeometry;
use crate::observables::{check_times, MomentMatrices};
use crate::packet::{PacketSpec, WaveField};
use crate::quadrature::GaussLegendre;
use crate::units::PhysicalConstants;

/// Image terms smaller than this (relative to the peak) end the image sum.
const IMAGE_CUTOFF: f64 = 1e-12;
/// Relative tolerance when comparing the classical and quantum packets.
const MATCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageMode {
    /// Direct Gaussian plus its mirror image about the barrier wall only.
    #[default]
    TwoTerm,
    /// Reflections about both walls (period `2a`), summed to convergence.
    FullImages,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPacket {
    center0: f64,
    width: f64,
    speed: f64,
    wall_right: f64,
    mode: ImageMode,
}

impl ClassicalPacket {
    pub fn new(center0: f64, width: f64, speed: f64, wall_right: f64, mode: ImageMode) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Packet(format!("width must be positive, got {width}")));
        }
        if !(wall_right.is_finite() && wall_right > 0.0) {
            return Err(Error::Packet(format!("chamber width must be positive, got {wall_right}")));
        }
        if !(center0.is_finite() && speed.is_finite()) {
            return Err(Error::NonFinite("classical packet"));
        }
        Ok(Self { center0, width, speed, wall_right, mode })
    }

    /// Same center and width as `spec`, speed `hbar k0 / m`, confined to the
    /// chamber left of the barrier.
    pub fn from_packet(
        spec: &PacketSpec,
        geometry: &WellGeometry,
        constants: &PhysicalConstants,
        mode: ImageMode,
    ) -> Result<Self> {
        Self::new(
            spec.center(),
            spec.width(),
            constants.velocity(spec.momentum()),
            geometry.barrier_left(),
            mode,
        )
    }

    pub fn center0(&self) -> f64 {
        self.center0
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn wall_left(&self) -> f64 {
        0.0
    }

    pub fn wall_right(&self) -> f64 {
        self.wall_right
    }

    pub fn mode(&self) -> ImageMode {
        self.mode
    }

    /// Wavenumber `m v / hbar` a matching quantum packet would carry.
    pub fn wavenumber(&self, constants: &PhysicalConstants) -> f64 {
        self.speed * constants.mass() / constants.hbar()
    }

    /// Errors unless `spec` has the same center, width and velocity.
    pub fn check_matches(
        &self,
        spec: &PacketSpec,
        geometry: &WellGeometry,
        constants: &PhysicalConstants,
    ) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= MATCH_TOLERANCE * a.abs().max(b.abs()).max(1e-300);
        let v = constants.velocity(spec.momentum());
        let checks = [
            ("center", self.center0, spec.center()),
            ("width", self.width, spec.width()),
            ("speed", self.speed, v),
            ("right wall", self.wall_right, geometry.barrier_left()),
        ];
        for (what, classical, quantum) in checks {
            if !(close(classical, quantum) || (classical == 0.0 && quantum == 0.0)) {
                return Err(Error::Mismatch(format!(
                    "classical {what} {classical} differs from the quantum packet's {quantum}"
                )));
            }
        }
        Ok(())
    }

    fn gaussian(&self, d: f64) -> f64 {
        (-d * d / (2.0 * self.width * self.width)).exp() / (2.0 * PI * self.width * self.width).sqrt()
    }

    fn density_unchecked(&self, x: f64, t: f64) -> f64 {
        if !(0.0..self.wall_right).contains(&x) {
            return 0.0;
        }
        let s = self.center0 + self.speed * t;
        let a = self.wall_right;
        match self.mode {
            ImageMode::TwoTerm => self.gaussian(x - s) + self.gaussian(x - (2.0 * a - s)),
            ImageMode::FullImages => {
                // Images of s and -s repeated with period 2a.
                let period = 2.0 * a;
                let peak = self.gaussian(0.0);
                let shifted = s - period * (s / period).round();
                let mut total = 0.0;
                for center in [shifted, -shifted] {
                    total += self.gaussian(x - center);
                    for j in 1.. {
                        let offset = period * j as f64;
                        let added = self.gaussian(x - center - offset) + self.gaussian(x - center + offset);
                        total += added;
                        if added < IMAGE_CUTOFF * peak {
                            break;
                        }
                    }
                }
                total
            }
        }
    }

    /// Chamber quadrature nodes: panels no wider than half a width.
    fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let rule = GaussLegendre::standard();
        let panels = (2.0 * self.wall_right / self.width).ceil().max(1.0) as usize;
        let h = self.wall_right / panels as f64;
        let mut xs = Vec::with_capacity(panels * rule.order());
        let mut ws = Vec::with_capacity(panels * rule.order());
        for p in 0..panels {
            let mid = h * (p as f64 + 0.5);
            for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                xs.push(mid + 0.5 * h * t);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }

    /// `(integral, mean, variance)` of the density over the chamber.
    pub fn moments(&self, t: f64) -> Result<(f64, f64, f64)> {
        check_time(t)?;
        let (xs, ws) = self.nodes();
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (&x, &w) in xs.iter().zip(&ws) {
            let p = w * self.density_unchecked(x, t);
            m0 += p;
            m1 += p * x;
            m2 += p * x * x;
        }
        if !(m0 > 0.0) {
            return Err(Error::Consistency(format!(
                "classical density has no mass in the chamber at t = {t}"
            )));
        }
        let mean = m1 / m0;
        Ok((m0, mean, (m2 / m0 - mean * mean).max(0.0)))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "classical density needs a finite t >= 0, got {t}"
        )));
    }
    Ok(())
}

/// `P_cl(x, t)`; zero outside `[0, a)`.
pub fn classical_density(packet: &ClassicalPacket, x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    if x.is_nan() {
        return Err(Error::NonFinite("position"));
    }
    Ok(packet.density_unchecked(x, t))
}

/// Variance of `P_cl(., t)` over the chamber, normalized by its integral.
pub fn classical_variance(packet: &ClassicalPacket, t: f64) -> Result<f64> {
    Ok(packet.moments(t)?.2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivergenceMetric {
    /// `|var_qm - var_cl|`.
    #[default]
    Variance,
    /// `|sqrt(var_qm) - sqrt(var_cl)|`.
    RmsWidth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceOutcome {
    Reached(f64),
    NotReached,
}

impl DivergenceOutcome {
    pub fn time(&self) -> Option<f64> {
        match self {
            DivergenceOutcome::Reached(t) => Some(*t),
            DivergenceOutcome::NotReached => None,
        }
    }
}

/// Quantum and classical variances side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceSeries {
    pub times: Vec<f64>,
    pub var_qm: Vec<f64>,
    pub var_cl: Vec<f64>,
    pub abs_diff: Vec<f64>,
    pub metric: DivergenceMetric,
}

impl DivergenceSeries {
    /// First time `abs_diff` reaches `threshold`, linearly interpolated.
    pub fn crossing(&self, threshold: f64) -> DivergenceOutcome {
        first_crossing(&self.times, &self.abs_diff, threshold)
    }
}

fn first_crossing(times: &[f64], values: &[f64], threshold: f64) -> DivergenceOutcome {
    for (i, (&t, &v)) in times.iter().zip(values).enumerate() {
        if v >= threshold {
            if i == 0 {
                return DivergenceOutcome::Reached(t);
            }
            let (t0, v0) = (times[i - 1], values[i - 1]);
            let frac = (threshold - v0) / (v - v0);
            return DivergenceOutcome::Reached(t0 + frac * (t - t0));
        }
    }
    DivergenceOutcome::NotReached
}

/// Variance difference series between `field` and `packet` on `times`.
pub fn divergence_series(
    field: &WaveField,
    packet: &ClassicalPacket,
    times: &[f64],
    metric: DivergenceMetric,
) -> Result<DivergenceSeries> {
    check_times(times)?;
    if let Some(&t) = times.first() {
        check_time(t)?;
    }
    if let Some(spec) = field.expansion().packet() {
        packet.check_matches(spec, field.geometry(), field.constants())?;
    }
    let moments = MomentMatrices::new(field.spectrum());
    let captured = field.captured_norm();
    let rows = times
        .par_iter()
        .map(|&t| {
            let sample = || -> Result<(f64, f64)> {
                let (_, var_qm) = moments.evaluate(&field.amplitudes(t), captured)?;
                Ok((var_qm, classical_variance(packet, t)?))
            };
            sample().map_err(|e| Error::AtTime { t, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut series = DivergenceSeries {
        times: times.to_vec(),
        var_qm: Vec::with_capacity(rows.len()),
        var_cl: Vec::with_capacity(rows.len()),
        abs_diff: Vec::with_capacity(rows.len()),
        metric,
    };
    for (q, c) in rows {
        series.var_qm.push(q);
        series.var_cl.push(c);
        series.abs_diff.push(match metric {
            DivergenceMetric::Variance => (q - c).abs(),
            DivergenceMetric::RmsWidth => (q.sqrt() - c.sqrt()).abs(),
        });
    }
    Ok(series)
}

/// First time the variance difference reaches `threshold`.
pub fn divergence_time(
    field: &WaveField,
    packet: &ClassicalPacket,
    times: &[f64],
    threshold: f64,
) -> Result<DivergenceOutcome> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    if times.first().is_some_and(|&t| t != 0.0) {
        return Err(Error::InvalidArgument("divergence time grid must start at t = 0".into()));
    }
    Ok(divergence_series(field, packet, times, DivergenceMetric::Variance)?.crossing(threshold))
}
