//! Occupancy images standing in for overhead imagery: polar conversion,
//! raytraced point extraction, training losses, and patch fetching.
//!
//! Image convention: row 0 is the north edge, column 0 the west edge, and
//! the `origin` pose marks the image center in the map frame (x east,
//! y north). Images are axis-aligned; `origin.theta` is 0 by convention.

use crate::error::{Error, Result};
use crate::scalar::{real, real_usize, Real};
use crate::se2::{Point2, Pose2};

/// Reference parameters for deriving occupancy labels from lidar: returns
/// are kept inside this height band (meters, sensor frame, z up) and
/// thresholded on intensity. Recorded here for converting real data; the
/// simulator emits labels directly.
pub const LABEL_HEIGHT_BAND_M: (f64, f64) = (0.0, 3.0);
pub const LABEL_INTENSITY_THRESHOLD: f64 = 0.04;

/// Georeferenced grid of occupancy probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyImage<T> {
    width: usize,
    height: usize,
    pub meters_per_pixel: T,
    pub origin: Pose2<T>,
    values: Vec<T>,
}

impl<T: Real> OccupancyImage<T> {
    pub fn new(
        width: usize,
        height: usize,
        meters_per_pixel: T,
        origin: Pose2<T>,
        values: Vec<T>,
    ) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "image expects {}x{}={} values, got {}",
                width,
                height,
                width * height,
                values.len()
            )));
        }
        if meters_per_pixel <= T::zero() || !meters_per_pixel.is_finite() {
            return Err(Error::InvalidInput(
                "meters_per_pixel must be positive and finite".into(),
            ));
        }
        if values
            .iter()
            .any(|v| !v.is_finite() || *v < T::zero() || *v > T::one())
        {
            return Err(Error::InvalidInput(
                "occupancy values must lie in [0, 1]".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            meters_per_pixel,
            origin,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize, meters_per_pixel: T, origin: Pose2<T>) -> Self {
        Self {
            width,
            height,
            meters_per_pixel,
            origin,
            values: vec![T::zero(); width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> T {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, v: T) {
        self.values[row * self.width + col] = v;
    }

    /// Map coordinates of the center of pixel `(col, row)`.
    pub fn pixel_center(&self, col: usize, row: usize) -> Point2<T> {
        let half_w = (real_usize::<T>(self.width) - T::one()) / real(2.0);
        let half_h = (real_usize::<T>(self.height) - T::one()) / real(2.0);
        Point2::new(
            self.origin.x + (real_usize::<T>(col) - half_w) * self.meters_per_pixel,
            self.origin.y + (half_h - real_usize::<T>(row)) * self.meters_per_pixel,
        )
    }

    /// Fractional pixel coordinates `(col_f, row_f)` of a map point.
    #[inline]
    pub fn map_to_pixel(&self, p: Point2<T>) -> (T, T) {
        let half_w = (real_usize::<T>(self.width) - T::one()) / real(2.0);
        let half_h = (real_usize::<T>(self.height) - T::one()) / real(2.0);
        (
            (p.x - self.origin.x) / self.meters_per_pixel + half_w,
            half_h - (p.y - self.origin.y) / self.meters_per_pixel,
        )
    }

    /// Bilinear sample at fractional pixel coordinates; outside the grid
    /// the image is treated as zero occupancy.
    pub fn sample_pixel(&self, col_f: T, row_f: T) -> T {
        let x0 = col_f.floor();
        let y0 = row_f.floor();
        let fx = col_f - x0;
        let fy = row_f - y0;
        let (ix, iy) = (x0.to_isize().unwrap_or(isize::MIN), y0.to_isize().unwrap_or(isize::MIN));
        let at = |cx: isize, cy: isize| -> T {
            if cx < 0 || cy < 0 || cx >= self.width as isize || cy >= self.height as isize {
                T::zero()
            } else {
                self.get(cx as usize, cy as usize)
            }
        };
        let one = T::one();
        (one - fx) * (one - fy) * at(ix, iy)
            + fx * (one - fy) * at(ix + 1, iy)
            + (one - fx) * fy * at(ix, iy + 1)
            + fx * fy * at(ix + 1, iy + 1)
    }

    /// Bilinear sample at a map-frame point.
    #[inline]
    pub fn sample_map(&self, p: Point2<T>) -> T {
        let (cf, rf) = self.map_to_pixel(p);
        self.sample_pixel(cf, rf)
    }
}

/// Binary supervision pair for an occupancy prediction: lidar-derived
/// target and certainty mask, both `{0, 1}` grids.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyLabels {
    width: usize,
    height: usize,
    label: Vec<u8>,
    mask: Vec<u8>,
}

impl OccupancyLabels {
    pub fn new(width: usize, height: usize, label: Vec<u8>, mask: Vec<u8>) -> Result<Self> {
        if label.len() != width * height || mask.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "labels expect {} entries, got label={} mask={}",
                width * height,
                label.len(),
                mask.len()
            )));
        }
        if label.iter().chain(mask.iter()).any(|v| *v > 1) {
            return Err(Error::InvalidInput("label and mask must be binary".into()));
        }
        Ok(Self {
            width,
            height,
            label,
            mask,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn label(&self) -> &[u8] {
        &self.label
    }

    #[inline]
    pub fn mask(&self) -> &[u8] {
        &self.mask
    }
}

/// Range-azimuth resampling of a Cartesian occupancy image, centered on
/// the image center. Bin `j` of azimuth `i` holds the bilinear sample at
/// range `(j + 0.5) * range_resolution` along angle `2*pi*i / azimuth_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarOccupancyGrid<T> {
    azimuth_count: usize,
    range_bins: usize,
    pub range_resolution: T,
    /// Set when the requested range extended past the image bounds; the
    /// out-of-image samples are zero.
    pub clipped: bool,
    values: Vec<T>,
}

impl<T: Real> PolarOccupancyGrid<T> {
    #[inline]
    pub fn azimuth_count(&self) -> usize {
        self.azimuth_count
    }

    #[inline]
    pub fn range_bins(&self) -> usize {
        self.range_bins
    }

    #[inline]
    pub fn get(&self, azimuth: usize, bin: usize) -> T {
        self.values[azimuth * self.range_bins + bin]
    }

    #[inline]
    pub fn row(&self, azimuth: usize) -> &[T] {
        let start = azimuth * self.range_bins;
        &self.values[start..start + self.range_bins]
    }

    #[inline]
    pub fn azimuth_angle(&self, i: usize) -> T {
        real::<T>(2.0) * T::PI() * real_usize::<T>(i) / real_usize::<T>(self.azimuth_count)
    }

    #[cfg(test)]
    pub(crate) fn from_rows(rows: &[&[T]], range_resolution: T) -> Self {
        Self {
            azimuth_count: rows.len(),
            range_bins: rows[0].len(),
            range_resolution,
            clipped: false,
            values: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }
}

/// Resamples an occupancy image into a polar grid centered on the image
/// center, keeping the image's meters-per-pixel as the range resolution.
///
/// Rays should stay inside the image (`range_bins * meters_per_pixel`
/// at most half the image extent); samples past the bounds read as zero
/// and set the `clipped` flag.
pub fn to_polar<T: Real>(
    occ: &OccupancyImage<T>,
    azimuth_count: usize,
    range_bins: usize,
) -> PolarOccupancyGrid<T> {
    let res = occ.meters_per_pixel;
    let half_extent = real_usize::<T>(occ.width().min(occ.height())) / real(2.0) * res;
    let clipped = real_usize::<T>(range_bins) * res > half_extent;
    let half_w = (real_usize::<T>(occ.width()) - T::one()) / real(2.0);
    let half_h = (real_usize::<T>(occ.height()) - T::one()) / real(2.0);
    let mut values = Vec::with_capacity(azimuth_count * range_bins);
    for i in 0..azimuth_count {
        let angle =
            real::<T>(2.0) * T::PI() * real_usize::<T>(i) / real_usize::<T>(azimuth_count);
        let (s, c) = angle.sin_cos();
        for j in 0..range_bins {
            let r_px = real_usize::<T>(j) + real(0.5);
            values.push(occ.sample_pixel(half_w + r_px * c, half_h - r_px * s));
        }
    }
    PolarOccupancyGrid {
        azimuth_count,
        range_bins,
        range_resolution: res,
        clipped,
        values,
    }
}

/// Walks outward along each azimuth and emits the bin-center point of the
/// first bin whose value exceeds `tau_occ`; azimuths that never cross the
/// threshold contribute no point.
pub fn raytrace_points<T: Real>(grid: &PolarOccupancyGrid<T>, tau_occ: T) -> PointCloudFromGrid<T> {
    assert!(
        tau_occ > T::zero() && tau_occ < T::one(),
        "tau_occ must lie in (0, 1)"
    );
    let mut points = Vec::new();
    for i in 0..grid.azimuth_count() {
        let row = grid.row(i);
        if let Some(j) = row.iter().position(|v| *v > tau_occ) {
            let r = (real_usize::<T>(j) + real(0.5)) * grid.range_resolution;
            let (s, c) = grid.azimuth_angle(i).sin_cos();
            points.push(Point2::new(r * c, r * s));
        }
    }
    crate::scan::PointCloud2::new(points).expect("raytraced points are finite")
}

type PointCloudFromGrid<T> = crate::scan::PointCloud2<T>;

fn check_dims<T: Real>(pred: &OccupancyImage<T>, labels: &OccupancyLabels) -> Result<()> {
    if pred.width() != labels.width() || pred.height() != labels.height() {
        return Err(Error::DimensionMismatch(format!(
            "prediction {}x{} vs labels {}x{}",
            pred.width(),
            pred.height(),
            labels.width(),
            labels.height()
        )));
    }
    Ok(())
}

/// Clamp bound keeping `log` finite in the cross-entropy.
const BCE_EPSILON: f64 = 1e-7;

/// Masked binary cross entropy, summed (not averaged) over pixels:
/// `-sum M * [L*log(p) + (1-L)*log(1-p)]` with `p` clamped to
/// `[eps, 1-eps]`, `eps = 1e-7`.
pub fn masked_bce<T: Real>(pred: &OccupancyImage<T>, labels: &OccupancyLabels) -> Result<T> {
    check_dims(pred, labels)?;
    let eps = real::<T>(BCE_EPSILON);
    let one = T::one();
    let mut total = T::zero();
    for ((p, l), m) in pred
        .values()
        .iter()
        .zip(labels.label())
        .zip(labels.mask())
    {
        if *m == 0 {
            continue;
        }
        let p = p.max(eps).min(one - eps);
        let l = real::<T>(f64::from(*l));
        total += l * p.ln() + (one - l) * (one - p).ln();
    }
    Ok(-total)
}

/// Masked Dice loss `1 - 2*sum(M*p*L) / (sum(M*p) + sum(M*L))`; an all-zero
/// denominator (empty masked region) yields 0.
pub fn dice_loss<T: Real>(pred: &OccupancyImage<T>, labels: &OccupancyLabels) -> Result<T> {
    check_dims(pred, labels)?;
    let mut intersection = T::zero();
    let mut pred_sum = T::zero();
    let mut label_sum = T::zero();
    for ((p, l), m) in pred
        .values()
        .iter()
        .zip(labels.label())
        .zip(labels.mask())
    {
        if *m == 0 {
            continue;
        }
        let l = real::<T>(f64::from(*l));
        intersection += *p * l;
        pred_sum += *p;
        label_sum += l;
    }
    let denom = pred_sum + label_sum;
    if denom == T::zero() {
        return Ok(T::zero());
    }
    Ok(T::one() - real::<T>(2.0) * intersection / denom)
}

/// Weighted training loss: `masked_bce + lambda * dice_loss`.
pub fn combined_loss<T: Real>(
    pred: &OccupancyImage<T>,
    labels: &OccupancyLabels,
    lambda: T,
) -> Result<T> {
    Ok(masked_bce(pred, labels)? + lambda * dice_loss(pred, labels)?)
}

/// Extracts an axis-aligned square patch of the world raster centered at
/// `center`'s position (orientation is ignored; registration recovers
/// heading). Values are bilinearly resampled; regions outside the world
/// read as zero and set the returned flag.
pub fn fetch_patch<T: Real>(
    world: &OccupancyImage<T>,
    center: &Pose2<T>,
    size_px: usize,
    meters_per_pixel: T,
) -> (OccupancyImage<T>, bool) {
    let origin = Pose2::new(center.x, center.y, T::zero());
    let mut patch = OccupancyImage::zeros(size_px, size_px, meters_per_pixel, origin);
    let half = (real_usize::<T>(size_px) - T::one()) / real(2.0);
    let mut padded = false;
    let wf = world.width() as isize;
    let hf = world.height() as isize;
    for row in 0..size_px {
        for col in 0..size_px {
            let map_pt = Point2::new(
                center.x + (real_usize::<T>(col) - half) * meters_per_pixel,
                center.y + (half - real_usize::<T>(row)) * meters_per_pixel,
            );
            let (cf, rf) = world.map_to_pixel(map_pt);
            // Outside the pixel-center hull means the bilinear sample
            // involves padding.
            let (ci, ri) = (cf.floor(), rf.floor());
            let ci = ci.to_isize().unwrap_or(isize::MIN);
            let ri = ri.to_isize().unwrap_or(isize::MIN);
            if ci < 0 || ri < 0 || ci + 1 >= wf || ri + 1 >= hf {
                padded = true;
            }
            patch.set(col, row, world.sample_pixel(cf, rf));
        }
    }
    (patch, padded)
}
