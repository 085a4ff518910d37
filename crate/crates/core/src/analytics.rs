//! Level splitting, tunneling-time estimates and near-degeneracy scans over
//! the barrier position.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::WellGeometry;
use crate::observables::{spatial_entropy_on, EntropyGrid, DEFAULT_ENTROPY_RESOLUTION};
use crate::packet::{PacketSpec, WaveField};
use crate::spectrum::{solve_spectrum, Eigenstate, Regime, Spectrum};
use crate::units::PhysicalConstants;

/// Default near-degeneracy threshold relative to the local mean spacing.
pub const DEFAULT_DEGENERACY_RATIO: f64 = 0.05;
/// Fraction of a time window used for the early-rise slope.
pub const EARLY_WINDOW_FRACTION: f64 = 0.1;
/// Gaps on each side entering the local mean spacing.
const LOCAL_GAPS_PER_SIDE: usize = 2;
/// Below this `q b` the factorized pair condition is not used.
const FACTORIZED_MIN_QB: f64 = 2.0;

/// `S0 = b sqrt(2 m V0)`.
pub fn instanton_action(geometry: &WellGeometry, constants: &PhysicalConstants) -> f64 {
    geometry.barrier_width() * (2.0 * constants.mass() * geometry.barrier_height()).sqrt()
}

/// `(4 E0 hbar / S0) exp(-S0 / hbar)`.
pub fn splitting_estimate(
    geometry: &WellGeometry,
    constants: &PhysicalConstants,
    pair_energy: f64,
) -> Result<f64> {
    let s0 = instanton_action(geometry, constants);
    if !(s0 > 0.0) {
        return Err(Error::InvalidArgument(
            "splitting estimate undefined for a transparent barrier (b sqrt(2 m V0) = 0)".into(),
        ));
    }
    if !pair_energy.is_finite() {
        return Err(Error::NonFinite("pair energy"));
    }
    let hbar = constants.hbar();
    Ok(4.0 * pair_energy * hbar / s0 * (-s0 / hbar).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingReport {
    /// 1-based pair number: pair `p` is levels `2p - 1` and `2p`.
    pub pair_index: usize,
    pub e_lower: f64,
    pub e_upper: f64,
    /// Splitting of the pair (see `pair_gap`).
    pub gap: f64,
    pub estimate_eq11: f64,
    pub instanton_action: f64,
}

/// Compares the exact splitting of pair `pair_index` with the instanton
/// estimate, taking `E0` as the pair mean.
pub fn splitting_report(spectrum: &Spectrum, pair_index: usize) -> Result<SplittingReport> {
    let (lower, upper) = pair_states(spectrum, pair_index)?;
    let (e_lower, e_upper) = (lower.energy(), upper.energy());
    let gap = pair_gap(spectrum, pair_index)?;
    let mean = 0.5 * (e_lower + e_upper);
    Ok(SplittingReport {
        pair_index,
        e_lower,
        e_upper,
        gap,
        estimate_eq11: splitting_estimate(spectrum.geometry(), spectrum.constants(), mean)?,
        instanton_action: instanton_action(spectrum.geometry(), spectrum.constants()),
    })
}

fn pair_states(spectrum: &Spectrum, pair_index: usize) -> Result<(&Eigenstate, &Eigenstate)> {
    if pair_index == 0 || 2 * pair_index > spectrum.len() {
        return Err(Error::InvalidArgument(format!(
            "pair {pair_index} needs levels {} and {} but the spectrum has {}",
            2 * pair_index.max(1) - 1,
            2 * pair_index.max(1),
            spectrum.len()
        )));
    }
    let s = spectrum.states();
    Ok((&s[2 * pair_index - 2], &s[2 * pair_index - 1]))
}

/// Energy splitting of levels `2p - 1` and `2p`.
///
/// For a symmetric box with an opaque barrier the two levels are the roots of
/// `g(k) = +- exp(-q b) h(k)` with `g, h = sin(k a) +- (k / q) cos(k a)`.
/// When the splitting is below what the two energies can resolve it is taken
/// from that factorized condition to first order around the root of `g`;
/// otherwise it is the plain energy difference.
pub fn pair_gap(spectrum: &Spectrum, pair_index: usize) -> Result<f64> {
    let (lower, upper) = pair_states(spectrum, pair_index)?;
    let direct = upper.energy() - lower.energy();
    let geometry = spectrum.geometry();
    let factorizable = geometry.is_symmetric()
        && lower.regime() == Regime::BelowBarrier
        && upper.regime() == Regime::BelowBarrier
        && upper.decay_or_wavenumber() * geometry.barrier_width() > FACTORIZED_MIN_QB;
    // The linearization error is O(eta a) relative, so it takes over only
    // where the energies themselves stop resolving the gap.
    if !factorizable || direct > 1e-6 * upper.energy() {
        return Ok(direct);
    }
    let pair = FactorizedPair::new(geometry, spectrum.constants());
    let k_mid = pair.root_near(0.5 * (lower.k() + upper.k()))?;
    let eta = pair.half_splitting(k_mid);
    let ks = spectrum.constants().kinetic_scale();
    Ok(ks * 2.0 * k_mid * 2.0 * eta.abs())
}

struct FactorizedPair {
    a: f64,
    b: f64,
    q0_sq: f64,
}

impl FactorizedPair {
    fn new(geometry: &WellGeometry, constants: &PhysicalConstants) -> Self {
        Self {
            a: geometry.barrier_left(),
            b: geometry.barrier_width(),
            q0_sq: geometry.barrier_height() / constants.kinetic_scale(),
        }
    }

    fn q(&self, k: f64) -> f64 {
        (self.q0_sq - k * k).sqrt()
    }

    fn g(&self, k: f64) -> f64 {
        let (s, c) = (k * self.a).sin_cos();
        s + k / self.q(k) * c
    }

    fn h(&self, k: f64) -> f64 {
        let (s, c) = (k * self.a).sin_cos();
        s - k / self.q(k) * c
    }

    fn g_prime(&self, k: f64) -> f64 {
        let q = self.q(k);
        let (s, c) = (k * self.a).sin_cos();
        self.a * c + (1.0 / q + k * k / (q * q * q)) * c - k / q * self.a * s
    }

    /// Root of `g` nearest `guess` (pairs sit within a fraction of `pi / a`
    /// of it).
    fn root_near(&self, guess: f64) -> Result<f64> {
        let mut half = 1e-9 * guess;
        let limit = 0.25 * PI / self.a;
        let (mut lo, mut hi) = loop {
            let (lo, hi) = (guess - half, (guess + half).min(self.q0_sq.sqrt() * (1.0 - 1e-15)));
            if self.g(lo).signum() != self.g(hi).signum() {
                break (lo, hi);
            }
            half *= 4.0;
            if half > limit {
                return Err(Error::Consistency(format!(
                    "no single-well root near k = {guess}"
                )));
            }
        };
        let g_lo = self.g(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.g(mid).signum() == g_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `exp(-q b) h / g'` at a root of `g`: each level sits this far from it.
    fn half_splitting(&self, k: f64) -> f64 {
        (-self.q(k) * self.b).exp() * self.h(k) / self.g_prime(k)
    }
}

/// How the third estimate treats `hbar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnsetConvention {
    /// `2 pi / (E_res - E_th)`, as the formula is usually quoted.
    #[default]
    AsPrinted,
    /// `2 pi hbar / (E_res - E_th)`, dimensionally a time.
    WithHbar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunnelingTimes {
    /// `pi hbar / (E_2 - E_1)`; infinite when the lowest pair is degenerate.
    pub oscillation: f64,
    /// `25 hbar / (E_res - E_th)`.
    pub quadratic_decay: f64,
    /// `2 pi / (E_res - E_th)` (or with `hbar`, see `OnsetConvention`).
    pub exponential_onset: f64,
    pub warnings: Vec<String>,
}

/// The three tunneling time scales.
pub fn tunneling_time_estimates(
    spectrum: &Spectrum,
    e_res: f64,
    e_th: f64,
    convention: OnsetConvention,
) -> Result<TunnelingTimes> {
    if spectrum.len() < 2 {
        return Err(Error::InvalidArgument("need at least two levels".into()));
    }
    if !(e_res.is_finite() && e_th.is_finite()) {
        return Err(Error::NonFinite("resonance or threshold energy"));
    }
    if !(e_res > e_th) {
        return Err(Error::InvalidArgument(format!(
            "resonance energy {e_res} must exceed threshold {e_th}"
        )));
    }
    let hbar = spectrum.constants().hbar();
    let mut warnings = Vec::new();
    let gap = pair_gap(spectrum, 1)?;
    let oscillation = if gap > spectrum.root_tolerance() {
        PI * hbar / gap
    } else {
        warnings.push(format!(
            "lowest pair degenerate within the root tolerance {:e}; oscillation time is infinite",
            spectrum.root_tolerance()
        ));
        f64::INFINITY
    };
    let width = e_res - e_th;
    let onset_scale = match convention {
        OnsetConvention::AsPrinted => 1.0,
        OnsetConvention::WithHbar => hbar,
    };
    Ok(TunnelingTimes {
        oscillation,
        quadratic_decay: 25.0 * hbar / width,
        exponential_onset: 2.0 * PI * onset_scale / width,
        warnings,
    })
}

/// Levels, gaps and flags at one barrier position.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionScan {
    pub position: f64,
    pub energies: Vec<f64>,
    /// `gaps[i] = E_{i+2} - E_{i+1}` (0-based `i`).
    pub gaps: Vec<f64>,
    /// `flags[i]` marks the pair behind `gaps[i]` as near-degenerate.
    pub flags: Vec<bool>,
}

impl PositionScan {
    pub fn flagged_pairs(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    /// Groups levels joined by flagged gaps and reports, per distinct level
    /// (cluster), whether it is a near-degenerate multiplet.
    pub fn cluster_pattern(&self) -> Vec<bool> {
        cluster_pattern(&self.flags)
    }
}

#[derive(Debug, Clone)]
pub struct DegeneracyScan {
    pub positions: Vec<f64>,
    pub degeneracy_ratio: f64,
    /// One entry per position, in order; solver failures stay local.
    pub results: Vec<Result<PositionScan>>,
}

impl DegeneracyScan {
    pub fn gap_profiles(&self) -> Vec<Option<&[f64]>> {
        self.results
            .iter()
            .map(|r| r.as_ref().ok().map(|s| s.gaps.as_slice()))
            .collect()
    }

    pub fn near_degenerate_flags(&self) -> Vec<Option<&[bool]>> {
        self.results
            .iter()
            .map(|r| r.as_ref().ok().map(|s| s.flags.as_slice()))
            .collect()
    }
}

/// Flags `gap[i] < ratio * mean(neighbouring gaps)`, the mean taken over up
/// to two gaps on each side (fewer at the ends).
pub fn flag_near_degenerate(gaps: &[f64], ratio: f64) -> Vec<bool> {
    (0..gaps.len())
        .map(|i| {
            let lo = i.saturating_sub(LOCAL_GAPS_PER_SIDE);
            let hi = (i + LOCAL_GAPS_PER_SIDE + 1).min(gaps.len());
            let neighbours: Vec<f64> = (lo..hi).filter(|&j| j != i).map(|j| gaps[j]).collect();
            if neighbours.is_empty() {
                return false;
            }
            let mean = neighbours.iter().sum::<f64>() / neighbours.len() as f64;
            gaps[i] < ratio * mean
        })
        .collect()
}

/// Per distinct level: `true` if it merges two or more levels.
pub fn cluster_pattern(flags: &[bool]) -> Vec<bool> {
    let mut clusters = Vec::new();
    let mut size = 1;
    for &f in flags {
        if f {
            size += 1;
        } else {
            clusters.push(size > 1);
            size = 1;
        }
    }
    clusters.push(size > 1);
    clusters
}

/// Number of mismatches between `pattern` and the best-aligned periodic
/// pattern that is `true` once every `period` entries.
pub fn periodic_defects(pattern: &[bool], period: usize) -> usize {
    if period == 0 {
        return pattern.len();
    }
    (0..period)
        .map(|phase| {
            pattern
                .iter()
                .enumerate()
                .filter(|&(i, &p)| p != (i % period == phase))
                .count()
        })
        .min()
        .unwrap_or(0)
}

/// Solves every position and flags near-degenerate consecutive pairs.
pub fn degeneracy_scan(
    base: &WellGeometry,
    constants: &PhysicalConstants,
    positions: &[f64],
    n_levels: usize,
    degeneracy_ratio: f64,
) -> DegeneracyScan {
    let results = positions
        .par_iter()
        .map(|&c| {
            let geometry = base.with_barrier_left(c)?;
            let spectrum = solve_spectrum(&geometry, constants, n_levels)?;
            let energies = spectrum.energies();
            let gaps: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
            let flags = flag_near_degenerate(&gaps, degeneracy_ratio);
            Ok(PositionScan { position: c, energies, gaps, flags })
        })
        .collect();
    DegeneracyScan {
        positions: positions.to_vec(),
        degeneracy_ratio,
        results,
    }
}

/// Barrier positions with left:right chamber ratios 1:1, 2:1, 3:1, 1:2, 1:3
/// and the midpoints between neighbouring ones, in increasing order.
pub fn commensurate_positions(base: &WellGeometry) -> Result<Vec<f64>> {
    let mut anchors = Vec::new();
    for ratio in [1.0 / 3.0, 0.5, 1.0, 2.0, 3.0] {
        anchors.push(base.with_width_ratio(ratio)?.barrier_left());
    }
    let mut positions = Vec::with_capacity(2 * anchors.len() - 1);
    for (i, &c) in anchors.iter().enumerate() {
        if i > 0 {
            positions.push(0.5 * (anchors[i - 1] + c));
        }
        positions.push(c);
    }
    Ok(positions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTrace {
    pub position: f64,
    pub times: Vec<f64>,
    pub entropy: Vec<f64>,
    pub captured_norm: f64,
}

impl EntropyTrace {
    pub fn early_slope(&self) -> Result<f64> {
        early_window_slope(&self.times, &self.entropy, EARLY_WINDOW_FRACTION)
    }
}

/// Full pipeline (solve, project, entropy) at every barrier position.
pub fn entropy_vs_position(
    base: &WellGeometry,
    constants: &PhysicalConstants,
    packet: &PacketSpec,
    positions: &[f64],
    times: &[f64],
    n_levels: usize,
) -> Vec<Result<EntropyTrace>> {
    positions
        .par_iter()
        .map(|&c| {
            let geometry = base.with_barrier_left(c)?;
            if packet.center() >= geometry.barrier_left() {
                return Err(Error::Packet(format!(
                    "packet center {} is not left of the barrier at {c}",
                    packet.center()
                )));
            }
            let spectrum = solve_spectrum(&geometry, constants, n_levels)?;
            let field = WaveField::from_packet(spectrum, packet)?;
            let grid = EntropyGrid::new(field.spectrum(), DEFAULT_ENTROPY_RESOLUTION)?;
            let entropy = times
                .iter()
                .map(|&t| spatial_entropy_on(&field, &grid, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(EntropyTrace {
                position: c,
                times: times.to_vec(),
                entropy,
                captured_norm: field.captured_norm(),
            })
        })
        .collect()
}

/// Least-squares `(slope, intercept)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "linear fit needs two or more paired samples".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Least-squares slope over the first `fraction` of the time window.
pub fn early_window_slope(times: &[f64], values: &[f64], fraction: f64) -> Result<f64> {
    let (&start, &end) = match (times.first(), times.last()) {
        (Some(s), Some(e)) => (s, e),
        _ => return Err(Error::InvalidArgument("empty time series".into())),
    };
    let cutoff = start + fraction * (end - start);
    let n = times.iter().take_while(|&&t| t <= cutoff * (1.0 + 1e-12)).count().max(2);
    linear_fit(&times[..n.min(times.len())], &values[..n.min(values.len())]).map(|(s, _)| s)
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("rank correlation needs two or more pairs".into()));
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::InvalidArgument("rank correlation of a constant series".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}
