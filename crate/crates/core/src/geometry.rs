//! The box `[0, L]` with a square barrier of height `V0` on `[c, c + b]`.

use crate::error::{Error, Result};

/// Relative tolerance used to decide that the barrier sits in the middle of the box.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellGeometry {
    total_length: f64,
    barrier_left: f64,
    barrier_width: f64,
    barrier_height: f64,
}

impl WellGeometry {
    pub fn new(
        total_length: f64,
        barrier_left: f64,
        barrier_width: f64,
        barrier_height: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("total_length", total_length),
            ("barrier_left", barrier_left),
            ("barrier_width", barrier_width),
            ("barrier_height", barrier_height),
        ] {
            if !v.is_finite() {
                return Err(Error::Geometry(format!("{name} must be finite, got {v}")));
            }
        }
        if barrier_left <= 0.0 {
            return Err(Error::Geometry(format!(
                "barrier_left must be positive, got {barrier_left}"
            )));
        }
        if barrier_width < 0.0 {
            return Err(Error::Geometry(format!(
                "barrier_width must be non-negative, got {barrier_width}"
            )));
        }
        if barrier_height < 0.0 {
            return Err(Error::Geometry(format!(
                "barrier_height must be non-negative, got {barrier_height}"
            )));
        }
        if barrier_left + barrier_width >= total_length {
            return Err(Error::Geometry(format!(
                "barrier_left + barrier_width = {} must be below total_length = {total_length}",
                barrier_left + barrier_width
            )));
        }
        Ok(Self {
            total_length,
            barrier_left,
            barrier_width,
            barrier_height,
        })
    }

    /// Two chambers of width `half_width` separated by the barrier: `L = 2a + b`, `c = a`.
    pub fn symmetric(half_width: f64, barrier_width: f64, barrier_height: f64) -> Result<Self> {
        Self::new(
            2.0 * half_width + barrier_width,
            half_width,
            barrier_width,
            barrier_height,
        )
    }

    /// Same box and barrier, with the left chamber resized to `left : right = ratio`.
    pub fn with_width_ratio(&self, ratio: f64) -> Result<Self> {
        let free = self.total_length - self.barrier_width;
        self.with_barrier_left(free * ratio / (1.0 + ratio))
    }

    pub fn with_barrier_left(&self, barrier_left: f64) -> Result<Self> {
        Self::new(
            self.total_length,
            barrier_left,
            self.barrier_width,
            self.barrier_height,
        )
    }

    pub fn with_barrier_height(&self, barrier_height: f64) -> Result<Self> {
        Self::new(
            self.total_length,
            self.barrier_left,
            self.barrier_width,
            barrier_height,
        )
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn barrier_left(&self) -> f64 {
        self.barrier_left
    }

    pub fn barrier_right(&self) -> f64 {
        self.barrier_left + self.barrier_width
    }

    pub fn barrier_width(&self) -> f64 {
        self.barrier_width
    }

    pub fn barrier_height(&self) -> f64 {
        self.barrier_height
    }

    /// Width of the left chamber, `c`.
    pub fn left_half(&self) -> f64 {
        self.barrier_left
    }

    /// Width of the right chamber, `L - c - b`.
    pub fn right_half(&self) -> f64 {
        self.total_length - self.barrier_left - self.barrier_width
    }

    pub fn is_symmetric(&self) -> bool {
        (self.left_half() - self.right_half()).abs() <= SYMMETRY_TOL * self.total_length
    }

    /// No barrier at all: either zero width or zero height.
    pub fn is_free_box(&self) -> bool {
        self.barrier_width == 0.0 || self.barrier_height == 0.0
    }

    /// Mirror image `c -> L - b - c`.
    pub fn mirrored(&self) -> Self {
        Self {
            barrier_left: self.right_half(),
            ..*self
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (0.0..=self.total_length).contains(&x)
    }

    pub fn potential(&self, x: f64) -> f64 {
        if x >= self.barrier_left && x <= self.barrier_right() {
            self.barrier_height
        } else {
            0.0
        }
    }

    /// Region `[c + b, L]` to the right of the barrier.
    pub fn right_region(&self) -> Interval {
        Interval::new_unchecked(self.barrier_right(), self.total_length)
    }

    pub fn left_region(&self) -> Interval {
        Interval::new_unchecked(0.0, self.barrier_left)
    }

    pub fn barrier_region(&self) -> Interval {
        Interval::new_unchecked(self.barrier_left, self.barrier_right())
    }

    pub fn full_box(&self) -> Interval {
        Interval::new_unchecked(0.0, self.total_length)
    }

    /// Splits `interval` at the barrier edges so no piece straddles a discontinuity.
    ///
    /// Bounds within `1e-12 L` of an edge are snapped onto it.
    pub fn split_at_edges(&self, interval: Interval) -> Vec<Interval> {
        let snap = |x: f64| {
            let tol = 1e-12 * self.total_length;
            for edge in [0.0, self.barrier_left, self.barrier_right(), self.total_length] {
                if (x - edge).abs() <= tol {
                    return edge;
                }
            }
            x
        };
        let lo = snap(interval.lo);
        let hi = snap(interval.hi);
        let mut cuts = vec![lo];
        for edge in [self.barrier_left, self.barrier_right()] {
            if edge > lo && edge < hi {
                cuts.push(edge);
            }
        }
        cuts.push(hi);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| Interval::new_unchecked(w[0], w[1]))
            .collect()
    }
}

/// Closed interval `[lo, hi]` on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::NonFinite("interval bound"));
        }
        if hi < lo {
            return Err(Error::InvalidArgument(format!(
                "interval bounds are inverted: [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub(crate) fn new_unchecked(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_accessors() {
        let g = WellGeometry::symmetric(35.0, 3.0, 360.0).unwrap();
        assert_eq!(g.total_length(), 73.0);
        assert_eq!(g.left_half(), 35.0);
        assert_eq!(g.right_half(), 35.0);
        assert!(g.is_symmetric());
        assert!(!g.is_free_box());
    }

    #[test]
    fn rejects_barrier_past_the_wall() {
        assert!(WellGeometry::new(10.0, 8.0, 2.0, 1.0).is_err());
        assert!(WellGeometry::new(10.0, 0.0, 2.0, 1.0).is_err());
        assert!(WellGeometry::new(10.0, 2.0, -1.0, 1.0).is_err());
        assert!(WellGeometry::new(10.0, 2.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn width_ratio_places_barrier() {
        let g = WellGeometry::symmetric(35.0, 3.0, 360.0).unwrap();
        let g2 = g.with_width_ratio(2.0).unwrap();
        assert!((g2.left_half() - 2.0 * g2.right_half()).abs() < 1e-12);
        let m = g2.mirrored();
        assert!((m.right_half() - g2.left_half()).abs() < 1e-12);
    }

    #[test]
    fn split_never_straddles_edges() {
        let g = WellGeometry::symmetric(35.0, 3.0, 360.0).unwrap();
        let parts = g.split_at_edges(Interval::new(10.0, 60.0).unwrap());
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0].hi, 35.0);
        assert_eq!(parts[1].hi, 38.0);
        let snapped = g.split_at_edges(Interval::new(38.0 + 1e-14, 73.0).unwrap());
        assert_eq!(snapped.len(), 1);
        assert_eq!(snapped[0].lo, 38.0);
    }

    #[test]
    fn inverted_interval_is_an_error() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(1.0, 1.0).unwrap().is_empty());
    }
}
