//! Bound states of the infinite well with a square barrier.
//!
//! Roots are bracketed on a uniform wavenumber grid using the oscillation
//! count of the shooting solution, which increases by exactly one at every
//! eigenvalue. Brackets holding a single level with a sign change of the
//! residual are refined by bisection on the residual; clusters the grid
//! cannot separate are split by bisection on the count until they either
//! separate or shrink to adjacent floating-point values (pairs split below
//! machine precision by a thick barrier).

mod characteristic;
mod eigenstate;

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;

pub use characteristic::{characteristic_value, parity_residuals, Characteristic};
pub use eigenstate::{normalize_state, Eigenstate, Piece, Regime};

use crate::error::{Error, Result};
use crate::geometry::WellGeometry;
use crate::units::PhysicalConstants;
use characteristic::{level_count, residual, resolve_kind, LocalWaves};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Wavenumber step of the bracketing scan; `None` means `pi / (20 L)`.
    pub bracket_resolution: Option<f64>,
    /// Largest wavenumber scanned; `None` derives a bound that always holds
    /// the requested number of levels.
    pub k_max: Option<f64>,
    pub characteristic: Characteristic,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            bracket_resolution: None,
            k_max: None,
            characteristic: Characteristic::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    geometry: WellGeometry,
    constants: PhysicalConstants,
    states: Vec<Eigenstate>,
    bracket_resolution: f64,
    root_tolerance: f64,
    characteristic: Characteristic,
}

impl Spectrum {
    pub fn geometry(&self) -> &WellGeometry {
        &self.geometry
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn states(&self) -> &[Eigenstate] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(Eigenstate::energy).collect()
    }

    pub fn bracket_resolution(&self) -> f64 {
        self.bracket_resolution
    }

    /// Largest energy bracket left after refinement.
    pub fn root_tolerance(&self) -> f64 {
        self.root_tolerance
    }

    /// Residual that drove the refinement (`Auto` already resolved).
    pub fn characteristic(&self) -> Characteristic {
        self.characteristic
    }

    /// Keeps only the lowest `n` states.
    pub fn truncated(&self, n: usize) -> Self {
        let mut s = self.clone();
        s.states.truncate(n);
        s
    }

    /// Stable fingerprint of geometry, constants and energies.
    pub fn id(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for v in [
            self.geometry.total_length(),
            self.geometry.barrier_left(),
            self.geometry.barrier_width(),
            self.geometry.barrier_height(),
            self.constants.hbar(),
            self.constants.mass(),
        ] {
            v.to_bits().hash(&mut h);
        }
        for s in &self.states {
            s.energy().to_bits().hash(&mut h);
        }
        h.finish()
    }
}

/// The `n_levels` lowest bound states, normalized.
pub fn solve_spectrum(
    geometry: &WellGeometry,
    constants: &PhysicalConstants,
    n_levels: usize,
) -> Result<Spectrum> {
    solve_spectrum_with(geometry, constants, n_levels, &SolverOptions::default())
}

pub fn solve_spectrum_with(
    geometry: &WellGeometry,
    constants: &PhysicalConstants,
    n_levels: usize,
    options: &SolverOptions,
) -> Result<Spectrum> {
    if n_levels == 0 {
        return Err(Error::InvalidArgument("n_levels must be at least 1".into()));
    }
    if options.characteristic == Characteristic::ClosedForm && !geometry.is_symmetric() {
        return Err(Error::InvalidArgument(
            "closed-form characteristic needs a centered barrier".into(),
        ));
    }
    let length = geometry.total_length();
    let step = options.bracket_resolution.unwrap_or(PI / (20.0 * length));
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bracket_resolution must be positive, got {step}"
        )));
    }
    let kind = resolve_kind(geometry, options.characteristic);

    if geometry.is_free_box() {
        let states = (1..=n_levels)
            .into_par_iter()
            .map(|n| Eigenstate::free_box(n, geometry, constants).normalized())
            .collect::<Result<Vec<_>>>()?;
        return Ok(Spectrum {
            geometry: *geometry,
            constants: *constants,
            states,
            bracket_resolution: step,
            root_tolerance: 0.0,
            characteristic: kind,
        });
    }

    // H <= H_free + V0, so E_n <= V0 + E_n(free box).
    let k_bound = (geometry.barrier_height() / constants.kinetic_scale()
        + (n_levels as f64 * PI / length).powi(2))
    .sqrt()
        * (1.0 + 1e-9)
        + step;
    let k_max = options.k_max.unwrap_or(k_bound);

    let probe = |k: f64| {
        let waves = LocalWaves::at_wavenumber(geometry, constants, k);
        Probe {
            k,
            count: level_count(geometry, waves),
            residual: residual(geometry, kind, waves),
        }
    };

    // Scan for cells that hold levels.
    let mut cells = Vec::new();
    let mut last = Probe { k: 0.0, count: 0, residual: 0.0 };
    let mut j = 1usize;
    loop {
        let k = (j as f64 * step).min(k_max);
        let mut p = probe(k);
        p.count = p.count.max(last.count);
        if p.count > last.count {
            cells.push((last, p));
        }
        last = p;
        if last.count >= n_levels {
            break;
        }
        if k >= k_max {
            return Err(Error::ScanExhausted {
                found: last.count,
                requested: n_levels,
                k_max,
            });
        }
        j += 1;
    }

    let roots: Vec<Vec<Root>> = cells
        .par_iter()
        .map(|&(lo, hi)| {
            let mut out = Vec::new();
            isolate(&probe, lo, hi, n_levels, &mut out);
            out
        })
        .collect();
    let mut roots: Vec<Root> = roots.into_iter().flatten().collect();
    roots.sort_by_key(|r| r.index);
    debug_assert_eq!(roots.len(), n_levels, "{:?}", roots.iter().map(|r| (r.index, r.k)).collect::<Vec<_>>());

    // Unresolved clusters may come out an ulp out of order.
    for i in 1..roots.len() {
        if roots[i].k < roots[i - 1].k {
            roots[i].k = roots[i - 1].k;
        }
    }

    let root_tolerance = roots
        .iter()
        .map(|r| constants.energy(r.hi) - constants.energy(r.lo))
        .fold(0.0, f64::max);

    let states = roots
        .par_iter()
        .map(|r| Eigenstate::build(r.index, r.k, geometry, constants).normalized())
        .collect::<Result<Vec<_>>>()?;

    Ok(Spectrum {
        geometry: *geometry,
        constants: *constants,
        states,
        bracket_resolution: step,
        root_tolerance,
        characteristic: kind,
    })
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    k: f64,
    count: usize,
    residual: f64,
}

#[derive(Debug, Clone, Copy)]
struct Root {
    index: usize,
    k: f64,
    lo: f64,
    hi: f64,
}

/// Resolves the levels `lo.count + 1 ..= hi.count` (capped at `wanted`).
fn isolate<F: Fn(f64) -> Probe>(probe: &F, lo: Probe, hi: Probe, wanted: usize, out: &mut Vec<Root>) {
    if lo.count >= wanted || hi.count == lo.count {
        return;
    }
    let single = hi.count == lo.count + 1;
    let sign_change = lo.residual != 0.0
        && hi.residual != 0.0
        && (lo.residual > 0.0) != (hi.residual > 0.0);
    if single && sign_change {
        out.push(bisect_residual(probe, lo, hi));
        return;
    }
    let mid = 0.5 * (lo.k + hi.k);
    if mid <= lo.k || mid >= hi.k {
        // Adjacent floats: every level in the cluster sits here.
        for index in lo.count + 1..=hi.count.min(wanted) {
            out.push(Root { index, k: hi.k, lo: lo.k, hi: hi.k });
        }
        return;
    }
    let mut m = probe(mid);
    // Rounding near an unresolved pair can make the count wobble.
    m.count = m.count.clamp(lo.count, hi.count);
    isolate(probe, lo, m, wanted, out);
    isolate(probe, m, hi, wanted, out);
}

/// Bisection on the residual, cross-checked against the oscillation count.
///
/// Near a pair split below rounding the residual is a numerically
/// non-negative square and its computed sign is noise; once the two
/// disagree the count alone decides.
fn bisect_residual<F: Fn(f64) -> Probe>(probe: &F, mut lo: Probe, mut hi: Probe) -> Root {
    let index = hi.count;
    let mut trust_residual = true;
    loop {
        let mid = 0.5 * (lo.k + hi.k);
        if mid <= lo.k || mid >= hi.k {
            break;
        }
        let mut m = probe(mid);
        m.count = m.count.clamp(lo.count, hi.count);
        let left_by_count = m.count == hi.count;
        if trust_residual {
            if m.residual == 0.0 && m.count == hi.count {
                return Root { index, k: mid, lo: mid, hi: mid };
            }
            let left_by_residual = (m.residual > 0.0) != (lo.residual > 0.0);
            if left_by_residual != left_by_count {
                trust_residual = false;
            }
        }
        if left_by_count {
            hi = m;
        } else {
            lo = m;
        }
    }
    let k = if trust_residual && lo.residual.abs() <= hi.residual.abs() { lo.k } else { hi.k };
    Root { index, k, lo: lo.k, hi: hi.k }
}
