//! GNSS-free localization of a spinning ground radar against overhead
//! occupancy imagery.
//!
//! The library covers the full chain: SE(2) geometry, k-strongest point
//! extraction from polar radar scans, occupancy-image raytracing, trimmed
//! point-to-point ICP for odometry and overhead registration, a
//! fixed-lag SE(2) smoother fusing both, a deterministic synthetic-world
//! simulator, and trajectory error metrics.
//!
//! Core math is generic over the scalar type ([`scalar::Real`], `f32` or
//! `f64`); the simulator, pipeline, and file formats are `f64`-concrete.

pub mod error;
mod linalg;
pub mod scalar;
pub mod evaluation;
pub mod geo;
pub mod io;
pub mod occupancy;
pub mod pipeline;
pub mod registration;
pub mod scan;
pub mod simulator;
pub mod smoother;
pub mod se2;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` aliases for the geometry types used throughout the pipeline.
pub type Pose2d = se2::Pose2<f64>;
pub type Twist2d = se2::Twist2<f64>;
pub type Point2d = se2::Point2<f64>;
