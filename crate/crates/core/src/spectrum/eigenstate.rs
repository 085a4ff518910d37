use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Interval, WellGeometry};
use crate::quadrature::{GaussLegendre, NodeGrid, RegionScales};
use crate::units::PhysicalConstants;

use super::characteristic::{left_edge_state, LocalWaves, Propagator};

/// Above this `q b` the barrier piece is built from both chambers at once,
/// so no exponentially growing factor is ever formed.
const TWO_SIDED_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// No barrier (zero width or height): closed-form box state.
    FreeBox,
    /// `E < V0`; `decay` holds `q = sqrt(2m (V0 - E)) / hbar`.
    BelowBarrier,
    /// `E = V0` to machine precision; the barrier piece is linear.
    AtBarrierTop,
    /// `E > V0`; `decay` holds the barrier wavenumber `kappa`.
    AboveBarrier,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::FreeBox => "free",
            Regime::BelowBarrier => "below",
            Regime::AtBarrierTop => "top",
            Regime::AboveBarrier => "above",
        }
    }
}

/// One of the three pieces of the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Piece {
    Left,
    Barrier,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BarrierShape {
    /// `p e^{-q (x - c)} + r e^{-q (c + b - x)}`.
    TwoSided { q: f64, p: f64, r: f64 },
    /// `u C(x - c) + du S(x - c)` with the unscaled propagator.
    Shooting { z: f64, u: f64, du: f64 },
}

/// A bound state: `alpha sin(k x)` left of the barrier, the barrier piece,
/// and `beta sin(k (L - x))` right of it, all times `norm_const`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenstate {
    index: usize,
    energy: f64,
    k: f64,
    decay: f64,
    regime: Regime,
    norm_const: f64,
    alpha: f64,
    beta: f64,
    barrier: BarrierShape,
    geometry: WellGeometry,
}

impl Eigenstate {
    /// Builds the (unnormalized, `norm_const = 1`) state at wavenumber `k`,
    /// which must be a root of the characteristic function.
    pub(crate) fn build(
        index: usize,
        k: f64,
        geometry: &WellGeometry,
        constants: &PhysicalConstants,
    ) -> Self {
        let waves = LocalWaves::at_wavenumber(geometry, constants, k);
        let energy = constants.energy(k);
        let c = geometry.barrier_left();
        let b = geometry.barrier_width();
        let r = geometry.right_half();
        let z = waves.z;
        let parity = if index % 2 == 1 { 1.0 } else { -1.0 };

        let regime = if geometry.is_free_box() {
            Regime::FreeBox
        } else if z > 0.0 {
            Regime::BelowBarrier
        } else if z < 0.0 {
            Regime::AboveBarrier
        } else {
            Regime::AtBarrierTop
        };
        let decay = z.abs().sqrt();

        let (mut alpha, mut beta, barrier);
        if z > 0.0 && decay * b > TWO_SIDED_THRESHOLD {
            let q = decay;
            let (sl, cl) = (k * c).sin_cos();
            let (sr, cr) = (k * r).sin_cos();
            let g_l = sl + k / q * cl;
            let h_l = sl - k / q * cl;
            let g_r = sr + k / q * cr;
            let h_r = sr - k / q * cr;
            let e = (-q * b).exp();
            alpha = 1.0;
            // The pair (alpha, beta) solves alpha h_l e = beta g_r and
            // beta h_r e = alpha g_l; use the better-conditioned equation.
            beta = if geometry.is_symmetric() {
                parity
            } else if g_r.abs() >= g_l.abs() {
                h_l * e / g_r
            } else {
                g_l / (h_r * e)
            };
            if beta.abs() > 1.0 {
                alpha /= beta.abs();
                beta = beta.signum();
            }
            barrier = BarrierShape::TwoSided {
                q,
                p: 0.5 * alpha * h_l,
                r: 0.5 * beta * h_r,
            };
        } else {
            let (u, du) = left_edge_state(geometry, k);
            let (u1, du1) = Propagator::new(z, b).apply(u, du);
            let (sr, cr) = (k * r).sin_cos();
            alpha = 1.0;
            beta = if geometry.is_symmetric() {
                parity
            } else {
                u1 * sr - du1 / k * cr
            };
            barrier = BarrierShape::Shooting { z, u, du };
        }

        Self {
            index,
            energy,
            k,
            decay,
            regime,
            norm_const: 1.0,
            alpha,
            beta,
            barrier,
            geometry: *geometry,
        }
    }

    /// Closed-form state `n` of a box with no barrier.
    pub(crate) fn free_box(index: usize, geometry: &WellGeometry, constants: &PhysicalConstants) -> Self {
        let k = index as f64 * PI / geometry.total_length();
        let mut s = Self::build(index, k, geometry, constants);
        s.regime = Regime::FreeBox;
        s
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `q` below the barrier top, `kappa` above it.
    pub fn decay_or_wavenumber(&self) -> f64 {
        self.decay
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn geometry(&self) -> &WellGeometry {
        &self.geometry
    }

    /// Amplitudes of `sin(k x)` on the left and `sin(k (L - x))` on the right,
    /// including the normalization.
    pub fn chamber_amplitudes(&self) -> (f64, f64) {
        (self.norm_const * self.alpha, self.norm_const * self.beta)
    }

    pub fn piece_of(&self, x: f64) -> Piece {
        if x <= self.geometry.barrier_left() {
            Piece::Left
        } else if x < self.geometry.barrier_right() {
            Piece::Barrier
        } else {
            Piece::Right
        }
    }

    /// `psi_n(x)`; exactly zero at both walls.
    pub fn value(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: f64) -> f64 {
        self.piece_value(self.piece_of(x), x)
    }

    /// Evaluates the analytic expression of one piece, also outside it.
    /// Used for two-sided continuity checks at the barrier edges.
    pub fn piece_value(&self, piece: Piece, x: f64) -> f64 {
        let raw = match piece {
            Piece::Left => self.alpha * (self.k * x).sin(),
            Piece::Right => self.beta * (self.k * (self.geometry.total_length() - x)).sin(),
            Piece::Barrier => {
                let c = self.geometry.barrier_left();
                match self.barrier {
                    BarrierShape::TwoSided { q, p, r } => {
                        let right = self.geometry.barrier_right();
                        p * (-q * (x - c)).exp() + r * (-q * (right - x)).exp()
                    }
                    BarrierShape::Shooting { z, u, du } => {
                        let prop = Propagator::unscaled(z, x - c);
                        self.alpha * (prop.c * u + prop.s * du)
                    }
                }
            }
        };
        self.norm_const * raw
    }

    /// `psi_n'(x)` from the analytic expression of `piece`.
    pub fn piece_derivative(&self, piece: Piece, x: f64) -> f64 {
        let k = self.k;
        let raw = match piece {
            Piece::Left => self.alpha * k * (k * x).cos(),
            Piece::Right => -self.beta * k * (k * (self.geometry.total_length() - x)).cos(),
            Piece::Barrier => {
                let c = self.geometry.barrier_left();
                match self.barrier {
                    BarrierShape::TwoSided { q, p, r } => {
                        let right = self.geometry.barrier_right();
                        -q * p * (-q * (x - c)).exp() + q * r * (-q * (right - x)).exp()
                    }
                    BarrierShape::Shooting { z, u, du } => {
                        let prop = Propagator::unscaled(z, x - c);
                        self.alpha * (prop.zs * u + prop.c * du)
                    }
                }
            }
        };
        self.norm_const * raw
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.piece_derivative(self.piece_of(x), x))
    }

    fn check(&self, x: f64) -> Result<()> {
        if x.is_nan() {
            return Err(Error::NonFinite("position"));
        }
        if !self.geometry.contains(x) {
            return Err(Error::OutOfDomain {
                x,
                length: self.geometry.total_length(),
            });
        }
        Ok(())
    }

    /// Spatial scales used to size quadrature panels for this state.
    pub(crate) fn scales(&self) -> RegionScales {
        RegionScales {
            outside: self.k,
            barrier: self.decay.max(self.k),
        }
    }

    /// Returns the state scaled so that `int_0^L psi^2 dx = 1`, integrating
    /// each piece separately with a composite Gauss-Legendre rule of the
    /// given order per panel.
    pub fn normalized_with(&self, rule: &GaussLegendre) -> Result<Self> {
        let mut raw = self.clone();
        raw.norm_const = 1.0;
        let grid = NodeGrid::over(
            &self.geometry,
            Interval::new_unchecked(0.0, self.geometry.total_length()),
            self.scales(),
            f64::INFINITY,
            rule,
        );
        let integral = grid.integrate(|x| raw.value_unchecked(x).powi(2));
        if !(integral.is_finite() && integral > 0.0) {
            return Err(Error::DegenerateState { index: self.index });
        }
        raw.norm_const = integral.sqrt().recip();
        Ok(raw)
    }

    pub fn normalized(&self) -> Result<Self> {
        self.normalized_with(GaussLegendre::standard())
    }
}

/// Normalizes `state` (its current constant is ignored).
pub fn normalize_state(state: &Eigenstate) -> Result<Eigenstate> {
    state.normalized()
}

impl Propagator {
    /// Propagator without the overflow rescaling; only used where `q w` is
    /// small or the barrier is oscillatory.
    pub(crate) fn unscaled(z: f64, w: f64) -> Self {
        let p = Propagator::new(z, w);
        if !p.scaled {
            return p;
        }
        p.unscale((z.sqrt() * w).cosh())
    }
}
