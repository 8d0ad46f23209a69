//! Short-range target tracking with two multi-zone infrared time-of-flight
//! sensors.
//!
//! * [`geometry`]: time-of-flight conversion and two-range triangulation.
//! * [`sensor_sim`]: a planar multi-zone sensor simulator with a noise model
//!   for dark and artificially lit rooms.
//! * [`tracker`]: minimum-reading triangulation and per-axis calibration.
//! * [`experiments`]: trial tables, precision/accuracy statistics, scatter
//!   plots and simulated replications of the four-position protocol.

pub mod error;
pub mod experiments;
pub mod geometry;
mod kvfile;
pub mod rng;
pub mod sensor_sim;
pub mod tracker;

pub use error::{Error, Result};
pub use geometry::{Baseline, Point2D, Side, TriangleRanges};
