//! Trimmed point-to-point ICP for scan-to-scan odometry and
//! radar-to-overhead registration, with fitness scoring and gating.
//!
//! Correspondences run source -> target through a uniform spatial hash
//! grid with cell size equal to the trim distance, so a 3x3 cell
//! neighborhood covers every candidate within trim. Everything here is
//! deterministic: identical inputs produce bit-identical results.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::{real, real_usize, Real};
use crate::scan::PointCloud2;
use crate::se2::{Point2, Pose2};

/// Optional wide-trim phase run before the fine phase to recover from
/// larger initialization errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarsePhase<T> {
    pub trim_distance: T,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpConfig<T> {
    /// Correspondences farther than this are discarded (meters).
    pub trim_distance: T,
    pub max_iterations: usize,
    /// Per-iteration translation delta below which iteration stops (meters).
    pub convergence_tol_trans: T,
    /// Per-iteration rotation delta below which iteration stops (radians).
    pub convergence_tol_rot: T,
    pub coarse: Option<CoarsePhase<T>>,
}

impl<T: Real> IcpConfig<T> {
    pub fn new(trim_distance: T) -> Self {
        assert!(trim_distance > T::zero(), "trim_distance must be positive");
        Self {
            trim_distance,
            max_iterations: 50,
            convergence_tol_trans: real(1e-4),
            convergence_tol_rot: real(1e-5),
            coarse: None,
        }
    }

    pub fn with_coarse(mut self, trim_distance: T, iterations: usize) -> Self {
        self.coarse = Some(CoarsePhase {
            trim_distance,
            iterations,
        });
        self
    }
}

/// Registration outcome. `transform` maps source-frame points into the
/// target frame; `fitness` is the fraction of target points with at least
/// one source correspondent within trim at the final pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpResult<T> {
    pub transform: Pose2<T>,
    pub fitness: T,
    pub inlier_count: usize,
    pub target_count: usize,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Accepts a registration iff it converged and its fitness reaches
/// `tau_fit` (inclusive boundary).
#[inline]
pub fn fitness_gate<T: Real>(result: &IcpResult<T>, tau_fit: T) -> bool {
    result.converged && result.fitness >= tau_fit
}

/// Closed-form least-squares rigid alignment of paired points: returns the
/// pose minimizing `sum |pose(a_i) - b_i|^2` (centroid shift plus the
/// rotation from the 2x2 cross-covariance).
pub fn rigid_align<T: Real>(pairs: &[(Point2<T>, Point2<T>)]) -> Pose2<T> {
    assert!(!pairs.is_empty(), "rigid_align requires at least one pair");
    let n = real_usize::<T>(pairs.len());
    let mut ca = Point2::zero();
    let mut cb = Point2::zero();
    for (a, b) in pairs {
        ca = ca + *a;
        cb = cb + *b;
    }
    ca = Point2::new(ca.x / n, ca.y / n);
    cb = Point2::new(cb.x / n, cb.y / n);
    let (mut sxx, mut sxy, mut syx, mut syy) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (a, b) in pairs {
        let da = *a - ca;
        let db = *b - cb;
        sxx += da.x * db.x;
        sxy += da.x * db.y;
        syx += da.y * db.x;
        syy += da.y * db.y;
    }
    let theta = (sxy - syx).atan2(sxx + syy);
    let (s, c) = theta.sin_cos();
    Pose2::new(
        cb.x - (c * ca.x - s * ca.y),
        cb.y - (s * ca.x + c * ca.y),
        theta,
    )
}

/// Mean squared distance of the pairs under `pose` applied to the first
/// element of each pair.
pub fn mean_squared_error<T: Real>(pairs: &[(Point2<T>, Point2<T>)], pose: &Pose2<T>) -> T {
    let mut sum = T::zero();
    for (a, b) in pairs {
        let d = pose.transform_point(*a) - *b;
        sum += d.dot(&d);
    }
    sum / real_usize(pairs.len())
}

/// Uniform grid over the target points with cell size = trim distance;
/// any point within trim of a query lies in the query's 3x3 neighborhood.
struct SpatialHash<'a, T> {
    cell: T,
    buckets: HashMap<(i64, i64), Vec<u32>>,
    points: &'a [Point2<T>],
}

impl<'a, T: Real> SpatialHash<'a, T> {
    fn build(points: &'a [Point2<T>], cell: T) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets
                .entry(Self::key(p, cell))
                .or_default()
                .push(i as u32);
        }
        Self {
            cell,
            buckets,
            points,
        }
    }

    #[inline]
    fn key(p: &Point2<T>, cell: T) -> (i64, i64) {
        (
            (p.x / cell).floor().to_i64().expect("finite coordinate"),
            (p.y / cell).floor().to_i64().expect("finite coordinate"),
        )
    }

    /// Nearest target index within `trim` of `q`, or None. Ties resolve to
    /// the first candidate met in the fixed cell/bucket scan order.
    fn nearest_within(&self, q: &Point2<T>, trim: T) -> Option<u32> {
        let (kx, ky) = Self::key(q, self.cell);
        let trim2 = trim * trim;
        let mut best: Option<(u32, T)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.buckets.get(&(kx + dx, ky + dy)) {
                    for &i in bucket {
                        let d = self.points[i as usize] - *q;
                        let d2 = d.dot(&d);
                        if d2 <= trim2 && best.map_or(true, |(_, b)| d2 < b) {
                            best = Some((i, d2));
                        }
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Trimmed point-to-point ICP from `source` onto `target`.
///
/// Each iteration matches every transformed source point to its nearest
/// target point, discards pairs farther than the phase's trim distance,
/// solves the closed-form rigid alignment over the surviving pairs, and
/// composes the update. A configured coarse phase runs first with its own
/// trim. Iteration stops when the per-iteration delta drops below the
/// convergence tolerances or the iteration budget is spent; fewer than two
/// trimmed pairs ends the run with `converged = false` at the last pose.
pub fn icp<T: Real>(
    source: &PointCloud2<T>,
    target: &PointCloud2<T>,
    initial_guess: &Pose2<T>,
    config: &IcpConfig<T>,
) -> Result<IcpResult<T>> {
    if source.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: source.len(),
        });
    }
    if target.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: target.len(),
        });
    }

    let mut pose = *initial_guess;
    let mut iterations_used = 0;
    let mut converged = false;
    let mut pairs: Vec<(Point2<T>, Point2<T>)> = Vec::with_capacity(source.len());

    let mut phases: Vec<(T, usize, bool)> = Vec::with_capacity(2);
    if let Some(c) = &config.coarse {
        phases.push((c.trim_distance, c.iterations, false));
    }
    phases.push((config.trim_distance, config.max_iterations, true));

    'phases: for &(trim, iterations, fine) in &phases {
        let hash = SpatialHash::build(target.points(), trim);
        for _ in 0..iterations {
            iterations_used += 1;
            pairs.clear();
            for s in source.points() {
                let sp = pose.transform_point(*s);
                if let Some(t) = hash.nearest_within(&sp, trim) {
                    pairs.push((sp, target.points()[t as usize]));
                }
            }
            if pairs.len() < 2 {
                converged = false;
                break 'phases;
            }
            let delta = rigid_align(&pairs);
            pose = delta.compose(&pose);
            if delta.translation().norm() < config.convergence_tol_trans
                && delta.theta.abs() < config.convergence_tol_rot
            {
                if fine {
                    converged = true;
                    break 'phases;
                }
                break;
            }
        }
    }

    // Fitness at the final pose with the fine trim: distinct target points
    // matched by at least one source point; duplicate matches must not
    // inflate the score.
    let fine_hash = SpatialHash::build(target.points(), config.trim_distance);
    let mut seen = vec![false; target.len()];
    for s in source.points() {
        let sp = pose.transform_point(*s);
        if let Some(t) = fine_hash.nearest_within(&sp, config.trim_distance) {
            seen[t as usize] = true;
        }
    }
    let inlier_count = seen.iter().filter(|s| **s).count();
    let fitness = real_usize::<T>(inlier_count) / real_usize(target.len());

    Ok(IcpResult {
        transform: pose,
        fitness,
        inlier_count,
        target_count: target.len(),
        iterations_used,
        converged,
    })
}
