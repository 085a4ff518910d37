//! Shared fixtures for the benchmarks.

use tunnelbox::{solve_spectrum, PacketSpec, PhysicalConstants, WaveField, WellGeometry};

/// Symmetric box with half-width 35 and the given barrier.
pub fn geometry(barrier_width: f64, barrier_height: f64) -> WellGeometry {
    WellGeometry::symmetric(35.0, barrier_width, barrier_height).expect("valid geometry")
}

/// Default packet (x0 = 11, sigma = 3, at rest) expanded in `levels` states.
pub fn field(barrier_width: f64, barrier_height: f64, levels: usize) -> WaveField {
    let spectrum = solve_spectrum(
        &geometry(barrier_width, barrier_height),
        &PhysicalConstants::natural(),
        levels,
    )
    .expect("spectrum");
    WaveField::from_packet(spectrum, &PacketSpec::new(11.0, 3.0, 0.0).expect("packet")).expect("projection")
}
