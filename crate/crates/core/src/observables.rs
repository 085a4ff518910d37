//! Tunneling probability, spatial entropy and position moments over time.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{spectrum_scales, BasisTable};
use crate::error::{Error, Result};
use crate::geometry::{Interval, WellGeometry};
use crate::packet::WaveField;
use crate::quadrature::{GaussLegendre, NodeGrid, RegionScales};
use crate::spectrum::Spectrum;

/// Smallest accepted entropy resolution (panels across the box).
pub const MIN_ENTROPY_RESOLUTION: usize = 256;
/// Entropy resolution used by `time_series`.
pub const DEFAULT_ENTROPY_RESOLUTION: usize = 512;
/// Gauss-Legendre order of each entropy panel.
const ENTROPY_ORDER: usize = 8;
/// Largest imaginary part tolerated in a real quadratic form.
const IMAGINARY_TOLERANCE: f64 = 1e-8;

/// `M_mn = int_region psi_m psi_n dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionOverlapMatrix {
    region: Interval,
    size: usize,
    entries: Vec<f64>,
}

impl RegionOverlapMatrix {
    pub fn region(&self) -> Interval {
        self.region
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.entries[m * self.size + n]
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.entries[m * self.size..(m + 1) * self.size]
    }

    /// `sum_mn conj(a_m) a_n M_mn`.
    pub fn quadratic_form(&self, amplitudes: &[Complex64]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (m, am) in amplitudes.iter().enumerate() {
            let inner: Complex64 = self.row(m).iter().zip(amplitudes).map(|(&v, an)| an * v).sum();
            total += am.conj() * inner;
        }
        total
    }

    fn weighted(spectrum: &Spectrum, region: Interval, weight: impl Fn(f64) -> f64) -> Self {
        let size = spectrum.len();
        let mut entries = vec![0.0; size * size];
        if !region.is_empty() {
            let table = BasisTable::for_products(spectrum, region);
            for (i, (&x, &w)) in table.grid.xs.iter().zip(&table.grid.ws).enumerate() {
                let row = table.row(i);
                let w = w * weight(x);
                for m in 0..size {
                    let wm = w * row[m];
                    for n in m..size {
                        entries[m * size + n] += wm * row[n];
                    }
                }
            }
            for m in 0..size {
                for n in 0..m {
                    entries[m * size + n] = entries[n * size + m];
                }
            }
        }
        Self { region, size, entries }
    }
}

fn check_region(geometry: &WellGeometry, region: Interval) -> Result<Interval> {
    let l = geometry.total_length();
    let tol = 1e-12 * l;
    if region.lo < -tol || region.hi > l + tol {
        return Err(Error::OutOfDomain {
            x: if region.lo < -tol { region.lo } else { region.hi },
            length: l,
        });
    }
    Interval::new(region.lo.max(0.0), region.hi.min(l))
}

/// Overlap matrix of the spectrum's states on `region` (snapped to the
/// barrier edges; never integrated across one).
pub fn region_overlap(spectrum: &Spectrum, region: Interval) -> Result<RegionOverlapMatrix> {
    let region = check_region(spectrum.geometry(), region)?;
    Ok(RegionOverlapMatrix::weighted(spectrum, region, |_| 1.0))
}

/// `int_0^L x^power psi_m psi_n dx`.
pub fn moment_matrix(spectrum: &Spectrum, power: i32) -> RegionOverlapMatrix {
    RegionOverlapMatrix::weighted(spectrum, spectrum.geometry().full_box(), |x| x.powi(power))
}

/// Overlap matrices shared between runs on the same spectrum.
#[derive(Debug, Default)]
pub struct OverlapCache {
    entries: RwLock<HashMap<(u64, u64, u64), Arc<RegionOverlapMatrix>>>,
}

impl OverlapCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_compute(
        &self,
        spectrum: &Spectrum,
        region: Interval,
    ) -> Result<Arc<RegionOverlapMatrix>> {
        let key = (spectrum.id(), region.lo.to_bits(), region.hi.to_bits());
        if let Some(m) = self.entries.read().expect("overlap cache poisoned").get(&key) {
            return Ok(Arc::clone(m));
        }
        let matrix = Arc::new(region_overlap(spectrum, region)?);
        let mut entries = self.entries.write().expect("overlap cache poisoned");
        Ok(Arc::clone(entries.entry(key).or_insert(matrix)))
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("overlap cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn real_part(value: Complex64, what: &str) -> Result<f64> {
    if value.im.abs() > IMAGINARY_TOLERANCE {
        return Err(Error::Consistency(format!(
            "{what} has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

fn check_same_spectrum(field: &WaveField, overlap: &RegionOverlapMatrix) -> Result<()> {
    if overlap.len() != field.spectrum().len() {
        return Err(Error::Mismatch(format!(
            "overlap matrix has {} levels, field has {}",
            overlap.len(),
            field.spectrum().len()
        )));
    }
    Ok(())
}

/// Probability of finding the particle in the overlap's region at time `t`.
pub fn rhs_probability(field: &WaveField, overlap: &RegionOverlapMatrix, t: f64) -> Result<f64> {
    check_same_spectrum(field, overlap)?;
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    region_probability(&field.amplitudes(t), overlap, field.captured_norm())
}

fn region_probability(
    amplitudes: &[Complex64],
    overlap: &RegionOverlapMatrix,
    captured: f64,
) -> Result<f64> {
    let p = real_part(overlap.quadratic_form(amplitudes), "region probability")?;
    Ok(p.clamp(0.0, captured))
}

/// Nodes of the entropy quadrature with the basis tabulated on them.
#[derive(Debug, Clone)]
pub struct EntropyGrid {
    table: BasisTable,
    resolution: usize,
}

impl EntropyGrid {
    /// `resolution` panels of an 8-point rule spread over the box in
    /// proportion to piece length (at least one per piece); the barrier gets
    /// more if the density decays faster there than a panel can follow.
    pub fn new(spectrum: &Spectrum, resolution: usize) -> Result<Self> {
        if resolution < MIN_ENTROPY_RESOLUTION {
            return Err(Error::InvalidArgument(format!(
                "entropy resolution must be at least {MIN_ENTROPY_RESOLUTION}, got {resolution}"
            )));
        }
        let geometry = spectrum.geometry();
        let rule = GaussLegendre::new(ENTROPY_ORDER);
        let max_panel = geometry.total_length() / resolution as f64;
        let scales = RegionScales {
            outside: 0.0,
            barrier: spectrum_scales(spectrum, 2.0, 0.0).barrier,
        };
        let grid = NodeGrid::over(geometry, geometry.full_box(), scales, max_panel, &rule);
        Ok(Self {
            table: BasisTable::new(spectrum, grid),
            resolution,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn nodes(&self) -> &[f64] {
        &self.table.grid.xs
    }

    fn entropy(&self, amplitudes: &[Complex64]) -> Result<f64> {
        let mut total = 0.0;
        for (i, &w) in self.table.grid.ws.iter().enumerate() {
            let psi: Complex64 = amplitudes
                .iter()
                .zip(self.table.row(i))
                .map(|(a, &v)| a * v)
                .sum();
            let rho = psi.norm_sqr();
            if rho > 0.0 {
                total -= w * rho * rho.ln();
            }
        }
        if !total.is_finite() {
            return Err(Error::Consistency("entropy integrand is not finite".into()));
        }
        Ok(total)
    }
}

/// `-int_0^L rho ln rho dx` for an arbitrary density on the entropy grid.
pub fn density_entropy<F: Fn(f64) -> f64>(
    geometry: &WellGeometry,
    resolution: usize,
    density: F,
) -> Result<f64> {
    if resolution < MIN_ENTROPY_RESOLUTION {
        return Err(Error::InvalidArgument(format!(
            "entropy resolution must be at least {MIN_ENTROPY_RESOLUTION}, got {resolution}"
        )));
    }
    let rule = GaussLegendre::new(ENTROPY_ORDER);
    let max_panel = geometry.total_length() / resolution as f64;
    let scales = RegionScales { outside: 0.0, barrier: 0.0 };
    let grid = NodeGrid::over(geometry, geometry.full_box(), scales, max_panel, &rule);
    let total = grid.integrate(|x| {
        let rho = density(x);
        if rho > 0.0 {
            -rho * rho.ln()
        } else {
            0.0
        }
    });
    if !total.is_finite() {
        return Err(Error::Consistency("entropy integrand is not finite".into()));
    }
    Ok(total)
}

/// `-int_0^L rho ln rho dx` with `rho = |Psi(x, t)|^2` and `0 ln 0 = 0`.
pub fn spatial_entropy(field: &WaveField, t: f64, grid_resolution: usize) -> Result<f64> {
    let grid = EntropyGrid::new(field.spectrum(), grid_resolution)?;
    spatial_entropy_on(field, &grid, t)
}

/// As `spatial_entropy`, reusing a tabulated grid.
pub fn spatial_entropy_on(field: &WaveField, grid: &EntropyGrid, t: f64) -> Result<f64> {
    if grid.table.levels != field.spectrum().len() {
        return Err(Error::Mismatch("entropy grid built for another spectrum".into()));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    grid.entropy(&field.amplitudes(t))
}

/// Precomputed `x` and `x^2` matrices for the position moments.
#[derive(Debug, Clone)]
pub struct MomentMatrices {
    first: RegionOverlapMatrix,
    second: RegionOverlapMatrix,
}

impl MomentMatrices {
    pub fn new(spectrum: &Spectrum) -> Self {
        Self {
            first: moment_matrix(spectrum, 1),
            second: moment_matrix(spectrum, 2),
        }
    }

    pub(crate) fn evaluate(&self, amplitudes: &[Complex64], captured: f64) -> Result<(f64, f64)> {
        let mean = real_part(self.first.quadratic_form(amplitudes), "<x>")? / captured;
        let second = real_part(self.second.quadratic_form(amplitudes), "<x^2>")? / captured;
        Ok((mean, (second - mean * mean).max(0.0)))
    }
}

/// Mean and variance of `|Psi|^2`, normalized by the captured norm.
pub fn position_moments(field: &WaveField, t: f64) -> Result<(f64, f64)> {
    if !t.is_finite() {
        return Err(Error::NonFinite("time"));
    }
    MomentMatrices::new(field.spectrum()).evaluate(&field.amplitudes(t), field.captured_norm())
}

/// Samples of all four observables on a time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub rhs_prob: Vec<f64>,
    pub entropy: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub variance: Vec<f64>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Everything `time_series` needs that does not depend on `t`.
#[derive(Debug, Clone)]
pub struct SeriesPlan {
    overlap: Arc<RegionOverlapMatrix>,
    moments: MomentMatrices,
    entropy: EntropyGrid,
}

impl SeriesPlan {
    pub fn new(spectrum: &Spectrum, rhs_region: Interval, entropy_resolution: usize) -> Result<Self> {
        Ok(Self {
            overlap: Arc::new(region_overlap(spectrum, rhs_region)?),
            moments: MomentMatrices::new(spectrum),
            entropy: EntropyGrid::new(spectrum, entropy_resolution)?,
        })
    }

    /// As `new`, taking the region matrix from `cache`.
    pub fn with_cache(
        spectrum: &Spectrum,
        rhs_region: Interval,
        entropy_resolution: usize,
        cache: &OverlapCache,
    ) -> Result<Self> {
        Ok(Self {
            overlap: cache.get_or_compute(spectrum, rhs_region)?,
            moments: MomentMatrices::new(spectrum),
            entropy: EntropyGrid::new(spectrum, entropy_resolution)?,
        })
    }

    pub fn overlap(&self) -> &RegionOverlapMatrix {
        &self.overlap
    }

    pub fn evaluate(&self, field: &WaveField, times: &[f64]) -> Result<ObservableSeries> {
        check_same_spectrum(field, &self.overlap)?;
        check_times(times)?;
        let captured = field.captured_norm();
        let rows = times
            .par_iter()
            .map(|&t| {
                let amps = field.amplitudes(t);
                let sample = || -> Result<(f64, f64, f64, f64)> {
                    let p = region_probability(&amps, &self.overlap, captured)?;
                    let s = self.entropy.entropy(&amps)?;
                    let (mean, var) = self.moments.evaluate(&amps, captured)?;
                    Ok((p, s, mean, var))
                };
                sample().map_err(|e| Error::AtTime { t, source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut series = ObservableSeries {
            times: times.to_vec(),
            ..Default::default()
        };
        for (p, s, mean, var) in rows {
            series.rhs_prob.push(p);
            series.entropy.push(s);
            series.mean_x.push(mean);
            series.variance.push(var);
        }
        Ok(series)
    }
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("time grid"));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "time grid must be strictly increasing ({} followed by {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Evaluates all observables on `times` (strictly increasing).
pub fn time_series(field: &WaveField, times: &[f64], rhs_region: Interval) -> Result<ObservableSeries> {
    check_times(times)?;
    SeriesPlan::new(field.spectrum(), rhs_region, DEFAULT_ENTROPY_RESOLUTION)?.evaluate(field, times)
}

/// `n` uniform samples over `[start, end]` (inclusive).
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
