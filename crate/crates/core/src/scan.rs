//! Polar radar scans and k-strongest point extraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{real, real_usize, Real};
use crate::se2::Point2;

/// An azimuth-by-range-bin intensity grid from a spinning radar.
///
/// Azimuth `i` points along angle `2*pi*i / azimuth_count` in the sensor
/// frame; range bin `j` spans `[j, j+1) * range_resolution` meters.
/// Intensities are non-negative and stored row-major by azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarScan<T> {
    azimuth_count: usize,
    range_bin_count: usize,
    pub range_resolution: T,
    pub timestamp: T,
    intensities: Vec<T>,
}

impl<T: Real> PolarScan<T> {
    pub fn new(
        azimuth_count: usize,
        range_bin_count: usize,
        range_resolution: T,
        timestamp: T,
        intensities: Vec<T>,
    ) -> Result<Self> {
        if intensities.len() != azimuth_count * range_bin_count {
            return Err(Error::DimensionMismatch(format!(
                "scan expects {}x{}={} intensities, got {}",
                azimuth_count,
                range_bin_count,
                azimuth_count * range_bin_count,
                intensities.len()
            )));
        }
        if range_resolution <= T::zero() || !range_resolution.is_finite() {
            return Err(Error::InvalidInput(
                "range_resolution must be positive and finite".into(),
            ));
        }
        if intensities.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidInput(
                "scan intensities must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            azimuth_count,
            range_bin_count,
            range_resolution,
            timestamp,
            intensities,
        })
    }

    pub fn zeros(
        azimuth_count: usize,
        range_bin_count: usize,
        range_resolution: T,
        timestamp: T,
    ) -> Self {
        Self {
            azimuth_count,
            range_bin_count,
            range_resolution,
            timestamp,
            intensities: vec![T::zero(); azimuth_count * range_bin_count],
        }
    }

    #[inline]
    pub fn azimuth_count(&self) -> usize {
        self.azimuth_count
    }

    #[inline]
    pub fn range_bin_count(&self) -> usize {
        self.range_bin_count
    }

    /// Angle of azimuth `i` in the sensor frame, radians in `[0, 2*pi)`.
    #[inline]
    pub fn azimuth_angle(&self, i: usize) -> T {
        real::<T>(2.0) * T::PI() * real_usize::<T>(i) / real_usize::<T>(self.azimuth_count)
    }

    /// Center range of bin `j` in meters.
    #[inline]
    pub fn bin_center_range(&self, j: usize) -> T {
        (real_usize::<T>(j) + real(0.5)) * self.range_resolution
    }

    #[inline]
    pub fn row(&self, azimuth: usize) -> &[T] {
        let start = azimuth * self.range_bin_count;
        &self.intensities[start..start + self.range_bin_count]
    }

    #[inline]
    pub fn row_mut(&mut self, azimuth: usize) -> &mut [T] {
        let start = azimuth * self.range_bin_count;
        &mut self.intensities[start..start + self.range_bin_count]
    }

    #[inline]
    pub fn intensities(&self) -> &[T] {
        &self.intensities
    }
}

/// Planar points in a sensor or patch frame, with optional per-point
/// intensities.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointCloud2<T> {
    points: Vec<Point2<T>>,
    intensities: Option<Vec<T>>,
}

impl<T: Real> PointCloud2<T> {
    pub fn new(points: Vec<Point2<T>>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("cloud contains non-finite point".into()));
        }
        Ok(Self {
            points,
            intensities: None,
        })
    }

    pub fn with_intensities(points: Vec<Point2<T>>, intensities: Vec<T>) -> Result<Self> {
        if intensities.len() != points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points but {} intensities",
                points.len(),
                intensities.len()
            )));
        }
        let mut cloud = Self::new(points)?;
        cloud.intensities = Some(intensities);
        Ok(cloud)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    #[inline]
    pub fn intensities(&self) -> Option<&[T]> {
        self.intensities.as_deref()
    }
}

/// Keeps the `k` highest-intensity bins per azimuth as a point cloud.
///
/// Zero-intensity bins are never returned, even when an azimuth has fewer
/// than `k` positive bins; intensity ties break toward the nearer bin.
/// Points are placed at bin centers and emitted in (azimuth ascending,
/// range ascending) order.
pub fn k_strongest<T: Real>(scan: &PolarScan<T>, k: usize) -> PointCloud2<T> {
    assert!(k >= 1, "k_strongest requires k >= 1");
    let mut points = Vec::new();
    let mut intensities = Vec::new();
    let mut candidates: Vec<(usize, T)> = Vec::with_capacity(scan.range_bin_count());
    for azimuth in 0..scan.azimuth_count() {
        let row = scan.row(azimuth);
        candidates.clear();
        candidates.extend(
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v > T::zero())
                .map(|(j, v)| (j, *v)),
        );
        if candidates.len() > k {
            // Total order: intensity descending, then bin ascending.
            candidates.select_nth_unstable_by(k - 1, |a, b| {
                b.1.partial_cmp(&a.1)
                    .expect("intensities validated finite")
                    .then(a.0.cmp(&b.0))
            });
            candidates.truncate(k);
        }
        candidates.sort_unstable_by_key(|(j, _)| *j);
        let angle = scan.azimuth_angle(azimuth);
        let (sin, cos) = angle.sin_cos();
        for (j, v) in &candidates {
            let r = scan.bin_center_range(*j);
            points.push(Point2::new(r * cos, r * sin));
            intensities.push(*v);
        }
    }
    PointCloud2 {
        points,
        intensities: Some(intensities),
    }
}
