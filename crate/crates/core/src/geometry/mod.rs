//! Forwarding decision regions and binomial point process distance laws.

mod circle;
mod distance;
mod point;
mod region;
mod topology;

pub use circle::{arc_inside_disk, disk_intersection_area};
pub use distance::{
    expected_nth_distance, nth_neighbor_ccdf, nth_neighbor_pdf, nth_neighbor_pdf_mass,
    nth_neighbor_quantile, EXPECTATION_TOL,
};
pub use point::Point2;
pub use region::{calibrate_sdr, LensRegion, Region, SectorRegion, BAND_MASS_TOL, MIN_ACCEPTANCE};
pub use topology::{sample_topology, sample_topology_with, Relay, SamplingOptions, Topology};
