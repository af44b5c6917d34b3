//! WGS84-to-local conversion anchoring the metric map frame.
//!
//! Map frame convention: x east, y north, theta counterclockwise from +x.
//! A compass heading (degrees clockwise from north) converts as
//! `theta = pi/2 - heading`.

use serde::{Deserialize, Serialize};

use crate::se2::{normalize_angle, Point2};

/// Mean Earth radius used by the local tangent-plane conversion.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// A georeferenced anchor: WGS84 latitude/longitude with a heading in
/// degrees clockwise from north.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoReference {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub heading_deg: f64,
}

impl GeoReference {
    pub fn new(lat_deg: f64, lon_deg: f64, heading_deg: f64) -> Self {
        Self {
            lat_deg,
            lon_deg,
            heading_deg,
        }
    }

    /// Map-frame yaw of the heading: `pi/2 - heading`, normalized.
    pub fn theta(&self) -> f64 {
        heading_to_theta(self.heading_deg)
    }
}

/// Converts a compass heading (degrees clockwise from north) into map-frame
/// yaw (radians counterclockwise from east).
pub fn heading_to_theta(heading_deg: f64) -> f64 {
    normalize_angle(std::f64::consts::FRAC_PI_2 - heading_deg.to_radians())
}

/// Local tangent-plane (equirectangular) conversion of a WGS84 point into
/// meters relative to `origin`: east is +x, north is +y. Intended for
/// points within roughly 50 km of the origin.
pub fn geo_to_local(origin: &GeoReference, lat_deg: f64, lon_deg: f64) -> Point2<f64> {
    let dlat = (lat_deg - origin.lat_deg).to_radians();
    let dlon = (lon_deg - origin.lon_deg).to_radians();
    Point2::new(
        EARTH_RADIUS_M * origin.lat_deg.to_radians().cos() * dlon,
        EARTH_RADIUS_M * dlat,
    )
}
