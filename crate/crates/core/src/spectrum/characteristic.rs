//! Characteristic (residual) functions whose zeros are the bound-state
//! energies, plus the oscillation count used to bracket them.
//!
//! Inside the barrier the Schrodinger equation reads `u'' = z u` with
//! `z = 2m (V0 - E) / hbar^2`. Its fundamental solutions are written through
//! `z` so that the same code covers the evanescent (`z > 0`), flat (`z = 0`)
//! and oscillatory (`z < 0`) regimes and stays continuous across `E = V0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::WellGeometry;
use crate::units::PhysicalConstants;

/// Above this `q b` the barrier propagator is divided by `cosh(q b)`.
pub(crate) const OVERFLOW_GUARD: f64 = 30.0;

/// Below this `|z| b^2` the sinhc/cosh series are used.
const SERIES_CUTOFF: f64 = 1e-8;

/// Which residual drives root refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Characteristic {
    /// Closed form for a barrier centered in the box, falling back to the
    /// transfer matrix for displaced barriers.
    #[default]
    Auto,
    /// Closed-form symmetric condition; only valid when the barrier is centered.
    ClosedForm,
    /// Hard-wall mismatch of the three-region transfer-matrix product.
    TransferMatrix,
}

/// Wavenumber outside the barrier and `z = q^2` inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LocalWaves {
    pub k: f64,
    pub z: f64,
}

impl LocalWaves {
    pub fn at_energy(geometry: &WellGeometry, constants: &PhysicalConstants, energy: f64) -> Self {
        let scale = constants.kinetic_scale();
        Self {
            k: (energy / scale).sqrt(),
            z: (geometry.barrier_height() - energy) / scale,
        }
    }

    pub fn at_wavenumber(geometry: &WellGeometry, constants: &PhysicalConstants, k: f64) -> Self {
        Self {
            k,
            z: geometry.barrier_height() / constants.kinetic_scale() - k * k,
        }
    }
}

/// Barrier propagator `[[C, S], [zS, C]]` across a width `w`, mapping
/// `(u, u')` at the entry to `(u, u')` at the exit.
///
/// For `q w > OVERFLOW_GUARD` all three entries are divided by `cosh(q w)`;
/// `scaled` records that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Propagator {
    pub c: f64,
    pub s: f64,
    pub zs: f64,
    pub scaled: bool,
    /// Evanescent barriers keep the split into growing and decaying parts,
    /// `C = grow + decay`, `S = (grow - decay) / q`, so that `u` and `u'/q`
    /// at the exit share the rounding of `u + u'/q`.
    hyperbolic: Option<Hyperbolic>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Hyperbolic {
    q: f64,
    grow: f64,
    decay: f64,
}

impl Propagator {
    pub fn new(z: f64, w: f64) -> Self {
        let plain = |c: f64, s: f64, zs: f64| Self { c, s, zs, scaled: false, hyperbolic: None };
        if w == 0.0 {
            return plain(1.0, 0.0, 0.0);
        }
        let zw2 = z * w * w;
        if zw2.abs() < SERIES_CUTOFF {
            let s = w * (1.0 + zw2 / 6.0 + zw2 * zw2 / 120.0);
            let c = 1.0 + zw2 / 2.0 + zw2 * zw2 / 24.0;
            return plain(c, s, z * s);
        }
        if z > 0.0 {
            let q = z.sqrt();
            let qw = q * w;
            let scaled = qw > OVERFLOW_GUARD;
            let (grow, decay) = if scaled {
                let e = (-2.0 * qw).exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            } else {
                (0.5 * qw.exp(), 0.5 * (-qw).exp())
            };
            let (c, sh) = if scaled { (1.0, qw.tanh()) } else { (qw.cosh(), qw.sinh()) };
            Self {
                c,
                s: sh / q,
                zs: q * sh,
                scaled,
                hyperbolic: Some(Hyperbolic { q, grow, decay }),
            }
        } else {
            let kappa = (-z).sqrt();
            let kw = kappa * w;
            let sn = kw.sin();
            plain(kw.cos(), sn / kappa, -kappa * sn)
        }
    }

    /// Same map with the overflow rescaling undone.
    pub(crate) fn unscale(self, factor: f64) -> Self {
        Self {
            c: self.c * factor,
            s: self.s * factor,
            zs: self.zs * factor,
            scaled: false,
            hyperbolic: self.hyperbolic.map(|h| Hyperbolic {
                grow: h.grow * factor,
                decay: h.decay * factor,
                ..h
            }),
        }
    }

    pub fn apply(&self, u: f64, du: f64) -> (f64, f64) {
        match self.hyperbolic {
            Some(Hyperbolic { q, grow, decay }) => {
                let b = du / q;
                let (sum, diff) = (grow * (u + b), decay * (u - b));
                (sum + diff, q * (sum - diff))
            }
            None => (self.c * u + self.s * du, self.zs * u + self.c * du),
        }
    }
}

fn check_energy(energy: f64) -> Result<()> {
    if energy.is_nan() {
        return Err(Error::NonFinite("energy"));
    }
    if !(energy > 0.0) || energy.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "characteristic residual needs a positive finite energy, got {energy}"
        )));
    }
    Ok(())
}

/// Residual of the symmetric closed-form condition
/// `cosh(qb) sin(2ka) + (k^2 - q^2)/(2qk) sinh(qb) cos(2ka) + (k^2 + q^2)/(2qk) sinh(qb)`,
/// continued through `z = q^2` for energies above the barrier.
pub(crate) fn closed_form_residual(geometry: &WellGeometry, waves: LocalWaves) -> f64 {
    let a = geometry.barrier_left();
    let LocalWaves { k, z } = waves;
    let p = Propagator::new(z, geometry.barrier_width());
    let (s2, c2) = (2.0 * k * a).sin_cos();
    p.c * s2 + (k * k - z) / (2.0 * k) * p.s * c2 + (k * k + z) / (2.0 * k) * p.s
}

/// Hard-wall mismatch `u(L)` of the solution started as `sin(k x)` at the
/// left wall, for any barrier position.
pub(crate) fn transfer_residual(geometry: &WellGeometry, waves: LocalWaves) -> f64 {
    let LocalWaves { k, z } = waves;
    let (u, du) = left_edge_state(geometry, k);
    let (u1, du1) = Propagator::new(z, geometry.barrier_width()).apply(u, du);
    let (sr, cr) = (k * geometry.right_half()).sin_cos();
    u1 * cr + du1 / k * sr
}

pub(crate) fn left_edge_state(geometry: &WellGeometry, k: f64) -> (f64, f64) {
    let (s, c) = (k * geometry.barrier_left()).sin_cos();
    (s, k * c)
}

pub(crate) fn residual(
    geometry: &WellGeometry,
    kind: Characteristic,
    waves: LocalWaves,
) -> f64 {
    match resolve_kind(geometry, kind) {
        Characteristic::ClosedForm => closed_form_residual(geometry, waves),
        _ => transfer_residual(geometry, waves),
    }
}

pub(crate) fn resolve_kind(geometry: &WellGeometry, kind: Characteristic) -> Characteristic {
    match kind {
        Characteristic::Auto if geometry.is_symmetric() => Characteristic::ClosedForm,
        Characteristic::Auto => Characteristic::TransferMatrix,
        other => other,
    }
}

/// Residual whose zeros are the eigenvalues.
///
/// `ClosedForm` requires a centered barrier. The two forms coincide
/// numerically when they both apply.
pub fn characteristic_value(
    geometry: &WellGeometry,
    constants: &PhysicalConstants,
    energy: f64,
    kind: Characteristic,
) -> Result<f64> {
    check_energy(energy)?;
    if kind == Characteristic::ClosedForm && !geometry.is_symmetric() {
        return Err(Error::InvalidArgument(
            "closed-form residual needs a centered barrier; use the transfer matrix".into(),
        ));
    }
    let waves = LocalWaves::at_energy(geometry, constants, energy);
    let r = residual(geometry, kind, waves);
    if r.is_nan() {
        return Err(Error::NonFinite("characteristic residual"));
    }
    Ok(r)
}

/// Even and odd factors of the symmetric condition: `u'` and `u` at the box
/// center for the solution started as `sin(k x)`. Each has simple zeros; the
/// union of their zeros is the spectrum.
pub fn parity_residuals(
    geometry: &WellGeometry,
    constants: &PhysicalConstants,
    energy: f64,
) -> Result<(f64, f64)> {
    check_energy(energy)?;
    if !geometry.is_symmetric() {
        return Err(Error::InvalidArgument(
            "parity factors need a centered barrier".into(),
        ));
    }
    let waves = LocalWaves::at_energy(geometry, constants, energy);
    let (u, du) = left_edge_state(geometry, waves.k);
    let (um, dum) = Propagator::new(waves.z, 0.5 * geometry.barrier_width()).apply(u, du);
    Ok((dum / waves.k, um))
}

/// Number of zeros of the solution started as `sin(k x)` on `(0, L]`.
///
/// By the oscillation theorem this equals the number of eigenvalues `<= E`,
/// so it is non-decreasing in the energy and jumps by one at each level.
pub(crate) fn level_count(geometry: &WellGeometry, waves: LocalWaves) -> usize {
    let LocalWaves { k, z } = waves;
    let c = geometry.barrier_left();
    let b = geometry.barrier_width();
    let (u, du) = left_edge_state(geometry, k);
    let mut count = phase_index(k * c, u).max(0) as usize;

    let (u1, du1) = Propagator::new(z, b).apply(u, du);
    if b > 0.0 {
        count += if z > 0.0 {
            usize::from(u != 0.0 && u1 != 0.0 && (u > 0.0) != (u1 > 0.0))
        } else if z < 0.0 {
            let kappa = (-z).sqrt();
            sinusoid_zeros(u, du / kappa, kappa * b, u1)
        } else {
            usize::from(du != 0.0 && {
                let s = -u / du;
                s > 0.0 && s <= b
            })
        };
    }
    // Nothing downstream reads the value at the wall, so the plain phase
    // decides; its sign would be a cancellation-prone product near pairs.
    count + sinusoid_zeros(u1, du1 / k, k * geometry.right_half(), 0.0)
}

/// `floor(theta / pi)`, corrected near multiples of `pi` so that it agrees
/// with the sign of `value = R sin(theta)` as actually computed.
fn phase_index(theta: f64, value: f64) -> i64 {
    let x = theta / PI;
    let mut m = x.floor();
    if value != 0.0 {
        let expected_positive = (m as i64).rem_euclid(2) == 0;
        if (value > 0.0) != expected_positive {
            m += if x - m > 0.5 { 1.0 } else { -1.0 };
        }
    }
    m as i64
}

/// Zeros on `(0, span]` (in phase units) of the sinusoid with value `u` and
/// scaled slope `v = u'/k` at the start. A nonzero `end` (the value at the
/// far side, as handed to the next region) makes the count agree with its
/// sign.
fn sinusoid_zeros(u: f64, v: f64, span: f64, end: f64) -> usize {
    // u = R sin(t + phi) with phi = atan2(u, v).
    let phi = u.atan2(v);
    let stop = phase_index(phi + span, end);
    let start = phase_index(phi, u);
    (stop - start).max(0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    #[test]
    fn free_box_residual_is_sine_of_kl() {
        let g = WellGeometry::symmetric(35.0, 3.0, 0.0).unwrap();
        for &e in &[0.01f64, 0.2, 1.7, 5.0] {
            let k: f64 = e.sqrt();
            for kind in [Characteristic::ClosedForm, Characteristic::TransferMatrix] {
                let r = characteristic_value(&g, &natural(), e, kind).unwrap();
                assert!((r - (k * 73.0).sin()).abs() < 1e-12, "{kind:?} {e}");
            }
        }
    }

    #[test]
    fn zero_width_barrier_reduces_to_sine() {
        let g = WellGeometry::symmetric(35.0, 0.0, 50.0).unwrap();
        let k = 7.0 * PI / 70.0;
        let r = characteristic_value(&g, &natural(), k * k, Characteristic::ClosedForm).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn closed_form_equals_transfer_matrix_when_centered() {
        let g = WellGeometry::symmetric(35.0, 3.0, 7.0).unwrap();
        for i in 1..200 {
            let e = 0.05 * i as f64;
            let a = characteristic_value(&g, &natural(), e, Characteristic::ClosedForm).unwrap();
            let b = characteristic_value(&g, &natural(), e, Characteristic::TransferMatrix).unwrap();
            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "E = {e}: {a} vs {b}");
        }
    }

    #[test]
    fn continuous_across_barrier_top() {
        let g = WellGeometry::symmetric(35.0, 3.0, 7.0).unwrap();
        for kind in [Characteristic::ClosedForm, Characteristic::TransferMatrix] {
            let lo = characteristic_value(&g, &natural(), 7.0 * (1.0 - 1e-9), kind).unwrap();
            let at = characteristic_value(&g, &natural(), 7.0, kind).unwrap();
            let hi = characteristic_value(&g, &natural(), 7.0 * (1.0 + 1e-9), kind).unwrap();
            assert!((lo - hi).abs() < 1e-6);
            assert!((lo - at).abs() < 1e-6);
        }
    }

    #[test]
    fn huge_barrier_does_not_overflow() {
        let g = WellGeometry::symmetric(35.0, 3.0, 5760.0).unwrap();
        let r = characteristic_value(&g, &PhysicalConstants::paper(), 1.0, Characteristic::Auto)
            .unwrap();
        assert!(r.is_finite());
        let g = WellGeometry::symmetric(35.0, 3.0, 1e9).unwrap();
        let r = characteristic_value(&g, &natural(), 0.5, Characteristic::Auto).unwrap();
        assert!(r.is_finite());
    }

    #[test]
    fn rejects_bad_energies_and_asymmetric_closed_form() {
        let g = WellGeometry::symmetric(35.0, 3.0, 7.0).unwrap();
        assert_eq!(
            characteristic_value(&g, &natural(), f64::NAN, Characteristic::Auto),
            Err(Error::NonFinite("energy"))
        );
        assert!(characteristic_value(&g, &natural(), -1.0, Characteristic::Auto).is_err());
        let shifted = g.with_barrier_left(20.0).unwrap();
        assert!(characteristic_value(&shifted, &natural(), 1.0, Characteristic::ClosedForm).is_err());
        assert!(characteristic_value(&shifted, &natural(), 1.0, Characteristic::TransferMatrix).is_ok());
    }

    #[test]
    fn level_count_matches_free_box() {
        let g = WellGeometry::symmetric(35.0, 3.0, 0.0).unwrap();
        for n in 1..40usize {
            let k_below = (n as f64 - 0.5) * PI / 73.0;
            let k_above = (n as f64 + 0.5) * PI / 73.0;
            let at = |k| level_count(&g, LocalWaves::at_wavenumber(&g, &natural(), k));
            assert_eq!(at(k_below), n - 1);
            assert_eq!(at(k_above), n);
        }
    }

    #[test]
    fn level_count_is_monotone_with_barrier() {
        for (v0, b) in [(7.0, 3.0), (360.0, 3.0), (5760.0, 0.1), (0.5, 1.0)] {
            let g = WellGeometry::symmetric(35.0, b, v0).unwrap();
            let mut last = 0;
            for i in 1..4000 {
                let k = i as f64 * 1e-3;
                let n = level_count(&g, LocalWaves::at_wavenumber(&g, &natural(), k));
                assert!(n >= last, "V0 = {v0}: count dropped at k = {k}");
                last = n;
            }
        }
    }
}
