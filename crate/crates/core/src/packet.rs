//! Gaussian packet, its expansion in the bound states and the evolved field.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{spectrum_scales, BasisTable};
use crate::error::{Error, Result};
use crate::geometry::WellGeometry;
use crate::quadrature::{GaussLegendre, NodeGrid};
use crate::spectrum::Spectrum;
use crate::units::PhysicalConstants;

/// Below this captured norm the expansion is rejected.
pub const MIN_CAPTURED_NORM: f64 = 0.9;
/// Below this captured norm a truncation warning is attached.
pub const WARN_CAPTURED_NORM: f64 = 0.999;
/// Walls closer than this many widths to the center trigger a warning.
pub const WALL_CLEARANCE: f64 = 3.0;

/// `Psi(x, 0) = (2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / 4 sigma^2) exp(i k0 (x - x0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    center: f64,
    width: f64,
    momentum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PacketWarning {
    /// The center is within `WALL_CLEARANCE` widths of a hard wall, so the
    /// Gaussian is visibly cut off.
    WallProximity { wall: f64, distance: f64, width: f64 },
    /// The basis misses part of the packet norm.
    Truncation { captured: f64 },
}

impl fmt::Display for PacketWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PacketWarning::WallProximity { wall, distance, width } => write!(
                f,
                "packet center is {distance} from the wall at x = {wall} (less than {WALL_CLEARANCE} widths of {width}); the wall cuts into the Gaussian"
            ),
            PacketWarning::Truncation { captured } => write!(
                f,
                "basis captures {captured:.6} of the packet norm (below {WARN_CAPTURED_NORM}); consider more levels"
            ),
        }
    }
}

impl PacketSpec {
    pub fn new(center: f64, width: f64, momentum: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Packet(format!("width must be positive, got {width}")));
        }
        if !center.is_finite() {
            return Err(Error::NonFinite("packet center"));
        }
        if !momentum.is_finite() {
            return Err(Error::NonFinite("packet momentum"));
        }
        Ok(Self { center, width, momentum })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Carrier wavenumber `k0`.
    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    /// Checks that the center lies inside the box; returns the wall warnings.
    pub fn check_in(&self, geometry: &WellGeometry) -> Result<Vec<PacketWarning>> {
        let l = geometry.total_length();
        if !(self.center > 0.0 && self.center < l) {
            return Err(Error::Packet(format!(
                "center {} must lie strictly inside (0, {l})",
                self.center
            )));
        }
        let mut warnings = Vec::new();
        for (wall, distance) in [(0.0, self.center), (l, l - self.center)] {
            if distance < WALL_CLEARANCE * self.width {
                warnings.push(PacketWarning::WallProximity {
                    wall,
                    distance,
                    width: self.width,
                });
            }
        }
        Ok(warnings)
    }

    /// The (unnormalized-to-the-box) initial wavefunction.
    pub fn initial_value(&self, x: f64) -> Complex64 {
        let d = x - self.center;
        let amp = (2.0 * PI * self.width * self.width).powf(-0.25)
            * (-d * d / (4.0 * self.width * self.width)).exp();
        Complex64::from_polar(amp, self.momentum * d)
    }

    /// `|Psi(x0, 0)|^2 = (2 pi sigma^2)^(-1/2)`.
    pub fn peak_density(&self) -> f64 {
        (2.0 * PI * self.width * self.width).sqrt().recip()
    }
}

/// Coefficients `A_n` of a state in a given spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketExpansion {
    coefficients: Vec<Complex64>,
    captured_norm: f64,
    spectrum_id: u64,
    packet: Option<PacketSpec>,
    warnings: Vec<PacketWarning>,
}

impl PacketExpansion {
    /// Wraps explicit coefficients (e.g. a single eigenstate).
    pub fn from_coefficients(spectrum: &Spectrum, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != spectrum.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a spectrum of {} states",
                coefficients.len(),
                spectrum.len()
            )));
        }
        if coefficients.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite("expansion coefficient"));
        }
        let captured_norm: f64 = coefficients.iter().map(|a| a.norm_sqr()).sum();
        if !(captured_norm > 0.0 && captured_norm <= 1.0 + 1e-10) {
            return Err(Error::InvalidArgument(format!(
                "sum of |A_n|^2 must lie in (0, 1], got {captured_norm}"
            )));
        }
        Ok(Self {
            coefficients,
            captured_norm,
            spectrum_id: spectrum.id(),
            packet: None,
            warnings: Vec::new(),
        })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `sum |A_n|^2`.
    pub fn captured_norm(&self) -> f64 {
        self.captured_norm
    }

    pub fn spectrum_id(&self) -> u64 {
        self.spectrum_id
    }

    /// The packet this expansion was projected from, if any.
    pub fn packet(&self) -> Option<&PacketSpec> {
        self.packet.as_ref()
    }

    pub fn warnings(&self) -> &[PacketWarning] {
        &self.warnings
    }
}

/// `A_n = int_0^L psi_n(x) Psi(x, 0) dx`, piece by piece.
pub fn project_packet(spec: &PacketSpec, spectrum: &Spectrum) -> Result<PacketExpansion> {
    if spectrum.is_empty() {
        return Err(Error::InvalidArgument("cannot project onto an empty spectrum".into()));
    }
    let mut warnings = spec.check_in(spectrum.geometry())?;
    let coefficients = project_function(spectrum, spec.momentum.abs(), spec.width, |x| {
        spec.initial_value(x)
    });
    let captured_norm: f64 = coefficients.iter().map(|a| a.norm_sqr()).sum();
    if captured_norm < MIN_CAPTURED_NORM {
        return Err(Error::InsufficientBasis { captured: captured_norm });
    }
    if captured_norm > 1.0 + 1e-10 {
        return Err(Error::Consistency(format!(
            "captured norm {captured_norm} exceeds one; quadrature is not resolving the basis"
        )));
    }
    if captured_norm < WARN_CAPTURED_NORM {
        warnings.push(PacketWarning::Truncation { captured: captured_norm });
    }
    Ok(PacketExpansion {
        coefficients,
        captured_norm,
        spectrum_id: spectrum.id(),
        packet: Some(*spec),
        warnings,
    })
}

/// `int_0^L psi_n(x) f(x) dx` for every state. `wavenumber` and `length`
/// are the fastest oscillation and shortest feature of `f`, used to size
/// the panels.
pub fn project_function<F>(spectrum: &Spectrum, wavenumber: f64, length: f64, f: F) -> Vec<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let geometry = spectrum.geometry();
    let grid = NodeGrid::over(
        geometry,
        geometry.full_box(),
        spectrum_scales(spectrum, 1.0, wavenumber),
        length,
        GaussLegendre::standard(),
    );
    let table = BasisTable::new(spectrum, grid);
    let mut coefficients = vec![Complex64::new(0.0, 0.0); spectrum.len()];
    for (i, (&x, &w)) in table.grid.xs.iter().zip(&table.grid.ws).enumerate() {
        let g = f(x) * w;
        for (a, &psi) in coefficients.iter_mut().zip(table.row(i)) {
            *a += g * psi;
        }
    }
    coefficients
}

/// `Psi(x, t) = sum_n A_n psi_n(x) exp(-i E_n t / hbar)`.
#[derive(Debug, Clone)]
pub struct WaveField {
    spectrum: Spectrum,
    expansion: PacketExpansion,
}

impl WaveField {
    pub fn new(spectrum: Spectrum, expansion: PacketExpansion) -> Result<Self> {
        if expansion.spectrum_id != spectrum.id() {
            return Err(Error::Mismatch(
                "expansion was computed in a different spectrum".into(),
            ));
        }
        Ok(Self { spectrum, expansion })
    }

    /// Solves nothing: projects `spec` onto `spectrum` and wraps the result.
    pub fn from_packet(spectrum: Spectrum, spec: &PacketSpec) -> Result<Self> {
        let expansion = project_packet(spec, &spectrum)?;
        Ok(Self { spectrum, expansion })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn expansion(&self) -> &PacketExpansion {
        &self.expansion
    }

    pub fn constants(&self) -> &PhysicalConstants {
        self.spectrum.constants()
    }

    pub fn geometry(&self) -> &WellGeometry {
        self.spectrum.geometry()
    }

    pub fn captured_norm(&self) -> f64 {
        self.expansion.captured_norm
    }

    /// `sum |A_n|^2 E_n`; conserved by construction.
    pub fn energy_expectation(&self) -> f64 {
        self.expansion
            .coefficients
            .iter()
            .zip(self.spectrum.states())
            .map(|(a, s)| a.norm_sqr() * s.energy())
            .sum()
    }

    /// `A_n exp(-i E_n t / hbar)` for every level.
    pub fn amplitudes(&self, t: f64) -> Vec<Complex64> {
        let hbar = self.constants().hbar();
        self.expansion
            .coefficients
            .iter()
            .zip(self.spectrum.states())
            .map(|(a, s)| a * Complex64::from_polar(1.0, -s.energy() * t / hbar))
            .collect()
    }

    pub fn wavefunction_at(&self, x: f64, t: f64) -> Result<Complex64> {
        if !t.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        if !self.geometry().contains(x) {
            return Err(Error::OutOfDomain {
                x,
                length: self.geometry().total_length(),
            });
        }
        Ok(self.sum_at(&self.amplitudes(t), x))
    }

    fn sum_at(&self, amplitudes: &[Complex64], x: f64) -> Complex64 {
        amplitudes
            .iter()
            .zip(self.spectrum.states())
            .map(|(a, s)| a * s.value_unchecked(x))
            .sum()
    }

    /// `Psi(x, t)` on every point of `grid`.
    pub fn wavefunction_profile(&self, grid: &[f64], t: f64) -> Result<Vec<Complex64>> {
        if !t.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        if let Some(&x) = grid.iter().find(|&&x| !self.geometry().contains(x)) {
            return Err(Error::OutOfDomain {
                x,
                length: self.geometry().total_length(),
            });
        }
        let amplitudes = self.amplitudes(t);
        Ok(grid.par_iter().map(|&x| self.sum_at(&amplitudes, x)).collect())
    }

    /// `|Psi(x, t)|^2` on every point of `grid`.
    pub fn density_profile(&self, grid: &[f64], t: f64) -> Result<Vec<f64>> {
        Ok(self
            .wavefunction_profile(grid, t)?
            .into_iter()
            .map(|psi| psi.norm_sqr())
            .collect())
    }

    /// `int_0^L |Psi(x, t)|^2 dx` by direct quadrature.
    pub fn norm_at(&self, t: f64) -> Result<f64> {
        let grid = NodeGrid::over(
            self.geometry(),
            self.geometry().full_box(),
            spectrum_scales(&self.spectrum, 2.0, 0.0),
            f64::INFINITY,
            GaussLegendre::standard(),
        );
        Ok(self
            .density_profile(&grid.xs, t)?
            .iter()
            .zip(&grid.ws)
            .map(|(d, w)| d * w)
            .sum())
    }
}
