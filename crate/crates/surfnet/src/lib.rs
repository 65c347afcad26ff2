//! Mobility hotspot analysis via surface networks.
//!
//! The pipeline turns timestamped GPS fixes of a vehicle fleet into a time
//! series of graph indices:
//!
//! 1. [`ingest`]: parse raw trajectory CSVs, cut loaded trips into
//!    origin/destination points, drop trips leaving the study region, and
//!    bucket the surviving points into time windows.
//! 2. [`density`]: estimate a kernel-density surface per window on a regular
//!    grid (quartic kernel, configurable bandwidth).
//! 3. [`mesh`]: triangulate the grid into a TIN with ordered per-vertex
//!    neighbor rings.
//! 4. [`critical_points`]: classify every interior vertex as peak, pit, pass
//!    (with decomposition multiplicity) or regular from cyclic sign changes.
//! 5. [`critical_lines`]: assign four critical neighbors to each pass and
//!    trace ridgelines to peaks and course-lines to pits.
//! 6. [`surface_network`]: keep significant peaks, assemble the
//!    peak-ridgeline network, and count its structure.
//! 7. [`indices`]: compute the seven graph indices per window.
//!
//! [`pipeline`] orchestrates the whole run from a [`config::PipelineConfig`];
//! the `surfnet` binary wraps it with `run`, `sweep` and `chart` subcommands.

pub mod chart;
pub mod config;
pub mod critical_lines;
pub mod critical_points;
pub mod density;
pub mod error;
pub mod indices;
pub mod ingest;
pub mod mesh;
pub mod pipeline;
pub mod surface_network;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Result, SurfnetError};
