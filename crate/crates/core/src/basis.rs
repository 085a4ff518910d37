//! Basis functions tabulated on a quadrature grid.

use crate::geometry::Interval;
use crate::quadrature::{GaussLegendre, NodeGrid, RegionScales};
use crate::spectrum::Spectrum;

/// `psi_n(x_i)` for every node of a grid, stored node-major.
#[derive(Debug, Clone)]
pub(crate) struct BasisTable {
    pub grid: NodeGrid,
    pub levels: usize,
    values: Vec<f64>,
}

impl BasisTable {
    pub fn new(spectrum: &Spectrum, grid: NodeGrid) -> Self {
        let levels = spectrum.len();
        let mut values = Vec::with_capacity(grid.len() * levels);
        for &x in &grid.xs {
            values.extend(spectrum.states().iter().map(|s| s.value_unchecked(x)));
        }
        Self { grid, levels, values }
    }

    /// Grid fine enough for products of any two basis functions on `region`.
    pub fn for_products(spectrum: &Spectrum, region: Interval) -> Self {
        let grid = NodeGrid::over(
            spectrum.geometry(),
            region,
            spectrum_scales(spectrum, 2.0, 0.0),
            f64::INFINITY,
            GaussLegendre::standard(),
        );
        Self::new(spectrum, grid)
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.values[node * self.levels..(node + 1) * self.levels]
    }
}

/// Fastest rates over all states, times `factor`, plus `extra` (for a
/// co-integrated function with its own wavenumber).
pub(crate) fn spectrum_scales(spectrum: &Spectrum, factor: f64, extra: f64) -> RegionScales {
    let mut scales = RegionScales { outside: 0.0, barrier: 0.0 };
    for s in spectrum.states() {
        let r = s.scales();
        scales.outside = scales.outside.max(r.outside);
        scales.barrier = scales.barrier.max(r.barrier);
    }
    RegionScales {
        outside: factor * scales.outside + extra,
        barrier: factor * scales.barrier + extra,
    }
}
