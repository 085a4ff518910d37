//! Square barrier in an infinite well.
//!
//! Solves the bound states of a box `[0, L]` with a barrier of height `V0`
//! on `[c, c + b]`, expands a Gaussian packet in them and evolves it
//! exactly in time. On top of that it provides the tunneling probability
//! into the right chamber, the spatial entropy `-int rho ln rho`, position
//! moments, a reflecting classical baseline, level-splitting estimates and
//! near-degeneracy scans over the barrier position.

pub mod analytics;
mod basis;
pub mod classical;
pub mod error;
pub mod export;
pub mod geometry;
pub mod observables;
pub mod packet;
pub mod quadrature;
pub mod spectrum;
pub mod units;

pub use analytics::{
    degeneracy_scan, entropy_vs_position, instanton_action, pair_gap, splitting_estimate,
    splitting_report, tunneling_time_estimates, DegeneracyScan, EntropyTrace, OnsetConvention,
    PositionScan, SplittingReport, TunnelingTimes,
};
pub use classical::{
    classical_density, classical_variance, divergence_series, divergence_time, ClassicalPacket,
    DivergenceMetric, DivergenceOutcome, DivergenceSeries, ImageMode,
};

pub use error::{Error, Result};
pub use geometry::{Interval, WellGeometry};
pub use observables::{
    position_moments, region_overlap, rhs_probability, spatial_entropy, time_series,
    ObservableSeries, OverlapCache, RegionOverlapMatrix, SeriesPlan,
};
pub use packet::{project_function, project_packet, PacketExpansion, PacketSpec, PacketWarning, WaveField};
pub use spectrum::{
    characteristic_value, normalize_state, parity_residuals, solve_spectrum, solve_spectrum_with,
    Characteristic, Eigenstate, Piece, Regime, SolverOptions, Spectrum,
};
pub use units::{PhysicalConstants, Preset};
