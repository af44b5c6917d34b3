//! Trajectory error metrics: per-axis (lat/long) and yaw RMSE against a
//! georeferenced ground truth, plus error time series and histograms.
//!
//! Latitude error is the north-axis (y) error and longitude error the
//! east-axis (x) error, both in meters in the shared map frame; no
//! alignment transform is applied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se2::{normalize_angle, Pose2};

/// Uniform-bin histogram: `edges` has one more entry than `counts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub const HISTOGRAM_BINS: usize = 50;

impl Histogram {
    /// 50 uniform bins spanning `[-3 sigma, +3 sigma]` of the samples;
    /// values outside the span land in the end bins.
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let half = (3.0 * var.sqrt()).max(1e-12);
        let lo = -half;
        let width = 2.0 * half / HISTOGRAM_BINS as f64;
        let edges: Vec<f64> = (0..=HISTOGRAM_BINS)
            .map(|i| lo + width * i as f64)
            .collect();
        let mut counts = vec![0usize; HISTOGRAM_BINS];
        for v in samples {
            let bin = (((v - lo) / width).floor() as i64).clamp(0, HISTOGRAM_BINS as i64 - 1);
            counts[bin as usize] += 1;
        }
        Self { edges, counts }
    }
}

/// Error report for an estimated trajectory against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryErrorReport {
    pub n_samples: usize,
    /// Timestamps of the scored estimates.
    pub timestamps: Vec<f64>,
    /// Signed north-axis errors, meters.
    pub lat_errors_m: Vec<f64>,
    /// Signed east-axis errors, meters.
    pub long_errors_m: Vec<f64>,
    /// Signed shortest-arc yaw errors, degrees.
    pub yaw_errors_deg: Vec<f64>,
    pub rmse_translation_m: f64,
    pub rmse_lat_m: f64,
    pub rmse_long_m: f64,
    pub rmse_yaw_deg: f64,
    pub lat_histogram: Histogram,
    pub long_histogram: Histogram,
}

fn rmse(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Scores an estimated trajectory against ground truth.
///
/// Each estimate is associated with ground truth by timestamp: position
/// interpolates linearly, yaw along the shortest arc. Estimates outside
/// the ground-truth time span are skipped; no overlap at all is an error.
pub fn align_and_score(
    estimated: &[(f64, Pose2<f64>)],
    ground_truth: &[(f64, Pose2<f64>)],
) -> Result<TrajectoryErrorReport> {
    if ground_truth.is_empty() || estimated.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    for pair in ground_truth.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::NonMonotoneTimestamp {
                prev: pair[0].0,
                next: pair[1].0,
            });
        }
    }
    let t0 = ground_truth.first().unwrap().0;
    let t1 = ground_truth.last().unwrap().0;

    let mut timestamps = Vec::new();
    let mut lat = Vec::new();
    let mut long = Vec::new();
    let mut yaw = Vec::new();
    for (t, est) in estimated {
        if *t < t0 || *t > t1 {
            continue;
        }
        let gt = interpolate(ground_truth, *t);
        timestamps.push(*t);
        long.push(est.x - gt.x);
        lat.push(est.y - gt.y);
        yaw.push(normalize_angle(est.theta - gt.theta).to_degrees());
    }
    if timestamps.is_empty() {
        return Err(Error::EmptyOverlap);
    }

    let rmse_translation_m = (lat
        .iter()
        .zip(&long)
        .map(|(a, b)| a * a + b * b)
        .sum::<f64>()
        / lat.len() as f64)
        .sqrt();

    Ok(TrajectoryErrorReport {
        n_samples: timestamps.len(),
        rmse_lat_m: rmse(&lat),
        rmse_long_m: rmse(&long),
        rmse_yaw_deg: rmse(&yaw),
        rmse_translation_m,
        lat_histogram: Histogram::from_samples(&lat),
        long_histogram: Histogram::from_samples(&long),
        timestamps,
        lat_errors_m: lat,
        long_errors_m: long,
        yaw_errors_deg: yaw,
    })
}

fn interpolate(traj: &[(f64, Pose2<f64>)], t: f64) -> Pose2<f64> {
    let idx = traj.partition_point(|(ts, _)| *ts <= t);
    if idx == 0 {
        return traj[0].1;
    }
    if idx >= traj.len() {
        return traj.last().unwrap().1;
    }
    let (ta, pa) = traj[idx - 1];
    let (tb, pb) = traj[idx];
    let frac = (t - ta) / (tb - ta);
    Pose2::new(
        pa.x + frac * (pb.x - pa.x),
        pa.y + frac * (pb.y - pa.y),
        pa.theta + frac * normalize_angle(pb.theta - pa.theta),
    )
}
