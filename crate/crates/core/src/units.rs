//! Physical constants and the two unit presets.
//!
//! The `natural` preset sets `hbar = 1` and `mass = 1/2`, so that
//! `hbar^2 / 2m = 1` and an energy equals the square of its wavenumber.
//!
//! The `paper` preset uses the electron in an eV / Angstrom / second system:
//! `hbar = 6.5821220e-16 eV s` and `m c^2 = 0.5109906 MeV`, with the mass
//! converted to `eV s^2 / A^2` through the speed of light. Lengths are then
//! in Angstrom, energies in eV and times in seconds.

use crate::error::{Error, Result};

/// Reduced Planck constant in eV s.
pub const HBAR_EV_S: f64 = 6.582_122_0e-16;
/// Electron rest energy in MeV.
pub const ELECTRON_REST_MEV: f64 = 0.510_990_6;
/// Speed of light in Angstrom per second.
pub const SPEED_OF_LIGHT_A_PER_S: f64 = 2.997_924_58e18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Natural,
    Paper,
}

impl Preset {
    pub fn constants(self) -> PhysicalConstants {
        match self {
            Preset::Natural => PhysicalConstants::natural(),
            Preset::Paper => PhysicalConstants::paper(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Natural => "natural",
            Preset::Paper => "paper",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "natural" => Ok(Preset::Natural),
            "paper" => Ok(Preset::Paper),
            other => Err(format!("unknown preset `{other}` (expected `natural` or `paper`)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    hbar: f64,
    mass: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::Constants(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Constants(format!("mass must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    pub fn natural() -> Self {
        Self { hbar: 1.0, mass: 0.5 }
    }

    pub fn paper() -> Self {
        let rest_ev = ELECTRON_REST_MEV * 1.0e6;
        let c2 = SPEED_OF_LIGHT_A_PER_S * SPEED_OF_LIGHT_A_PER_S;
        Self {
            hbar: HBAR_EV_S,
            mass: rest_ev / c2,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `hbar^2 / 2m`, the energy of a unit wavenumber.
    pub fn kinetic_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    pub fn wavenumber(&self, energy: f64) -> f64 {
        (energy / self.kinetic_scale()).sqrt()
    }

    pub fn energy(&self, wavenumber: f64) -> f64 {
        self.kinetic_scale() * wavenumber * wavenumber
    }

    /// Group velocity `hbar k / m` of a packet with carrier wavenumber `k`.
    pub fn velocity(&self, wavenumber: f64) -> f64 {
        self.hbar * wavenumber / self.mass
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_preset_has_unit_kinetic_scale() {
        let c = PhysicalConstants::natural();
        assert_eq!(c.kinetic_scale(), 1.0);
        assert_eq!(c.energy(3.0), 9.0);
    }

    #[test]
    fn paper_preset_matches_electron_in_ev_angstrom() {
        let c = PhysicalConstants::paper();
        assert_eq!(c.hbar(), 6.5821220e-16);
        // hbar^2 / 2m for the electron is 3.80998 eV A^2.
        assert!((c.kinetic_scale() - 3.80998).abs() < 1e-4);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(PhysicalConstants::new(0.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, -1.0).is_err());
        assert!(PhysicalConstants::new(f64::NAN, 1.0).is_err());
    }
}
