//! Contention-based geographic forwarding toolkit.
//!
//! * [`pgf`]: probability generating functions of the contention-resolution
//!   interval (CRI) for splitting-tree and auction relay selection, together
//!   with Fourier-series inversion and moments.
//! * [`geometry`]: sectoral and convex-lens decision regions, equal-mass band
//!   partitions, binomial point process sampling and n-th neighbour distance
//!   laws.
//! * [`sim`]: slot-synchronous simulator of the collision channel running the
//!   splitting-tree and auction protocols.
//! * [`experiments`]: experiment tables that pair analytic series with
//!   Monte Carlo estimates and agreement diagnostics.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod pgf;
pub mod sim;
pub mod stats;

pub use error::{CgfError, Result};
