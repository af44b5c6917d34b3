//! Synthetic world and radar-scan generator: ray-cast scans with noise,
//! clutter, occluders, and azimuth dropout; degraded overhead occupancy;
//! constant-speed trajectories. Everything is deterministic given a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::occupancy::OccupancyImage;
use crate::scan::PolarScan;
use crate::se2::{Point2, Pose2};

/// World rasters use half the satellite resolution so degradation and
/// re-sampling to 0.433 m/pixel stay well-posed.
pub const WORLD_METERS_PER_PIXEL: f64 = 0.2165;

/// Intensity deposited in the two bins adjacent to a return.
const RETURN_LEAKAGE: f64 = 0.35;

/// Hits at incidence shallower than this cosine return nothing.
const GRAZING_COS_CUTOFF: f64 = 0.2;

/// (angular offset, power) of the sub-rays one azimuth integrates: a
/// roughly Gaussian profile over the beam width, which also covers the
/// rotation during the dwell. Zero width degenerates to the center ray.
fn beam_sub_rays(beam_width_deg: f64) -> Vec<(f64, f64)> {
    if beam_width_deg <= 0.0 {
        return vec![(0.0, 1.0)];
    }
    let half_beam = beam_width_deg.to_radians() / 2.0;
    let n = 13usize;
    (0..n)
        .map(|i| {
            let frac = 2.0 * i as f64 / (n - 1) as f64 - 1.0;
            (half_beam * frac, (-1.2 * frac * frac).exp())
        })
        .collect()
}

/// Ground-truth environment: a binary occupancy raster centered on the
/// map origin.
#[derive(Debug, Clone)]
pub struct WorldMap {
    pub occupancy: OccupancyImage<f64>,
    pub preset: String,
    pub seed: u64,
}

impl WorldMap {
    /// Side length of the raster in meters.
    pub fn extent_m(&self) -> f64 {
        self.occupancy.width() as f64 * self.occupancy.meters_per_pixel
    }
}

/// Axis-aligned box obstacle moving linearly: center at time `t` is
/// `center + velocity * t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occluder {
    pub center: Point2<f64>,
    pub velocity: Point2<f64>,
    pub half_extent: Point2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarSimConfig {
    pub azimuth_count: usize,
    pub range_resolution: f64,
    pub max_range: f64,
    /// Horizontal beam width (degrees). Each azimuth integrates several
    /// weighted sub-rays across the beam, so oblique surfaces return
    /// multiple bins per azimuth the way a real spinning radar does.
    pub beam_width_deg: f64,
    /// Sigma of the Gaussian noise floor added (clamped at zero) to every
    /// bin; 0 disables.
    pub noise_floor_sigma: f64,
    /// Expected spurious detections per scan (Poisson); 0 disables.
    pub clutter_rate: f64,
    pub occluders: Vec<Occluder>,
    /// Per-azimuth probability of losing the whole azimuth.
    pub dropout_prob: f64,
}

impl Default for RadarSimConfig {
    fn default() -> Self {
        Self {
            azimuth_count: 400,
            range_resolution: 0.043,
            max_range: 140.0,
            beam_width_deg: 2.7,
            noise_floor_sigma: 0.0,
            clutter_rate: 0.0,
            occluders: Vec::new(),
            dropout_prob: 0.0,
        }
    }
}

impl RadarSimConfig {
    #[inline]
    pub fn range_bin_count(&self) -> usize {
        (self.max_range / self.range_resolution).floor() as usize
    }
}

/// Constant-speed piecewise-linear path sampled at the scan rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub waypoints: Vec<Point2<f64>>,
    pub speed: f64,
    pub scan_rate: f64,
}

fn fill_rect(img: &mut OccupancyImage<f64>, x0: f64, x1: f64, y0: f64, y1: f64, v: f64) {
    // Pixels whose centers fall inside the rectangle.
    for row in 0..img.height() {
        for col in 0..img.width() {
            let c = img.pixel_center(col, row);
            if c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1 {
                img.set(col, row, v);
            }
        }
    }
}

fn blank_world(extent_m: f64) -> OccupancyImage<f64> {
    let px = (extent_m / WORLD_METERS_PER_PIXEL).round() as usize;
    OccupancyImage::zeros(px, px, WORLD_METERS_PER_PIXEL, Pose2::identity())
}

/// Builds a deterministic world raster for `(preset, seed)`.
///
/// Presets: `empty`; `corridor` (two parallel walls 20 m apart);
/// `urban` (building-lined grid streets); `suburban` (sparse structures);
/// `marine` (a one-sided shoreline band).
pub fn build_world(preset: &str, seed: u64) -> Result<WorldMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x57_4f_52_4c_44); // world stream
    let occupancy = match preset {
        "empty" => blank_world(200.0),
        "corridor" => {
            let mut img = blank_world(240.0);
            // Two parallel walls, inner faces nominally 20 m apart, 160 m
            // long. Each face is a frontage of 3-8 m segments recessed up
            // to 1.2 m with finer sub-half-meter relief on top: a
            // perfectly flat pair is translationally self-similar and
            // unobservable for any scan matcher.
            for side in [1.0f64, -1.0] {
                // Smooth multi-scale undulation: recognizable structure
                // without step shadows that pop in and out between scans.
                let (a1, a2, a3) = (
                    rng.random_range(0.35..0.55),
                    rng.random_range(0.3..0.5),
                    rng.random_range(0.2..0.35),
                );
                let (w1, w2, w3) = (
                    rng.random_range(0.35..0.55),
                    rng.random_range(0.9..1.4),
                    rng.random_range(2.2..3.0),
                );
                let (p1, p2, p3) = (
                    rng.random_range(0.0..6.28),
                    rng.random_range(0.0..6.28),
                    rng.random_range(0.0..6.28),
                );
                let col0 = 0;
                let col1 = img.width();
                for col in col0..col1 {
                    let x = img.pixel_center(col, 0).x;
                    if !(-80.0..=80.0).contains(&x) {
                        continue;
                    }
                    let face = 10.0
                        + a1 * (w1 * x + p1).sin()
                        + a2 * (w2 * x + p2).sin()
                        + a3 * (w3 * x + p3).sin()
                        + a1
                        + a2
                        + a3;
                    for row in 0..img.height() {
                        let y = img.pixel_center(0, row).y;
                        let inside = if side > 0.0 {
                            y >= face && y <= 12.5
                        } else {
                            y <= -face && y >= -12.5
                        };
                        if inside {
                            img.set(col, row, 1.0);
                        }
                    }
                }
            }
            img
        }
        "marine" => {
            let mut img = blank_world(400.0);
            // Ragged shoreline band occupying one half-plane.
            let (a1, a2) = (
                rng.random_range(2.0..6.0),
                rng.random_range(1.0..3.0),
            );
            let (w1, w2) = (
                rng.random_range(0.02..0.05),
                rng.random_range(0.08..0.15),
            );
            for col in 0..img.width() {
                let x = img.pixel_center(col, 0).x;
                let shore = 30.0 + a1 * (w1 * x).sin() + a2 * (w2 * x + 1.3).cos();
                for row in 0..img.height() {
                    let y = img.pixel_center(0, row).y;
                    if y >= shore && y <= shore + 18.0 {
                        img.set(col, row, 1.0);
                    }
                }
            }
            img
        }
        "urban" => {
            let mut img = blank_world(360.0);
            // Street centerlines every 80 m; blocks are solid buildings
            // with per-block setbacks and occasional gaps.
            let centers = [-120.0, -40.0, 40.0, 120.0];
            let half_street = 8.0;
            let half_extent = img.extent_half();
            let block_edges: Vec<f64> = {
                let mut e = vec![-half_extent];
                for c in centers {
                    e.push(c - half_street);
                    e.push(c + half_street);
                }
                e.push(half_extent);
                e
            };
            // Blocks are the regions between street edges.
            for bx in 0..block_edges.len() / 2 {
                for by in 0..block_edges.len() / 2 {
                    let (x0, x1) = (block_edges[2 * bx], block_edges[2 * bx + 1]);
                    let (y0, y1) = (block_edges[2 * by], block_edges[2 * by + 1]);
                    if x1 - x0 < 4.0 || y1 - y0 < 4.0 {
                        continue;
                    }
                    let setback = rng.random_range(0.0..2.5);
                    fill_rect(
                        &mut img,
                        x0 + setback,
                        x1 - setback,
                        y0 + setback,
                        y1 - setback,
                        1.0,
                    );
                    // Carve a gap (driveway or alley) into one facade.
                    let gap_w = rng.random_range(3.0..6.0);
                    let gx = rng.random_range(x0 + 4.0..(x1 - 4.0).max(x0 + 4.1));
                    if rng.random_bool(0.6) {
                        fill_rect(&mut img, gx, gx + gap_w, y0, y0 + 6.0, 0.0);
                    } else {
                        fill_rect(&mut img, gx, gx + gap_w, y1 - 6.0, y1, 0.0);
                    }
                }
            }
            img
        }
        "suburban" => {
            let mut img = blank_world(360.0);
            // Houses on a loose 40 m grid with jitter, roads left clear
            // along the grid lines.
            let cells = (360.0 / 40.0) as i64;
            for gx in 0..cells {
                for gy in 0..cells {
                    if rng.random_bool(0.25) {
                        continue;
                    }
                    let cx = -180.0 + 40.0 * gx as f64 + 20.0 + rng.random_range(-4.0..4.0);
                    let cy = -180.0 + 40.0 * gy as f64 + 20.0 + rng.random_range(-4.0..4.0);
                    let hw = rng.random_range(4.0..7.5);
                    let hh = rng.random_range(4.0..7.5);
                    fill_rect(&mut img, cx - hw, cx + hw, cy - hh, cy + hh, 1.0);
                    // A tree or two near the house.
                    for _ in 0..rng.random_range(0..3) {
                        let tx = cx + rng.random_range(-14.0..14.0);
                        let ty = cy + rng.random_range(-14.0..14.0);
                        fill_rect(&mut img, tx - 0.4, tx + 0.4, ty - 0.4, ty + 0.4, 1.0);
                    }
                }
            }
            img
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(WorldMap {
        occupancy,
        preset: preset.to_string(),
        seed,
    })
}

impl OccupancyImage<f64> {
    fn extent_half(&self) -> f64 {
        self.width() as f64 * self.meters_per_pixel / 2.0
    }
}

/// Default drive for each preset, scaled to desk-size runs.
pub fn preset_trajectory(preset: &str) -> Result<TrajectorySpec> {
    // Arc points excluding the start angle (the caller supplies it),
    // sampled every ~3 degrees so piecewise-linear interpolation stays
    // close to a vehicle's smooth turning.
    let arc = |cx: f64, cy: f64, r: f64, a0: f64, a1: f64| -> Vec<Point2<f64>> {
        let steps = ((a1 - a0).abs().to_degrees() / 3.0).ceil() as usize;
        (1..=steps)
            .map(|i| {
                let a = a0 + (a1 - a0) * i as f64 / steps as f64;
                Point2::new(cx + r * a.cos(), cy + r * a.sin())
            })
            .collect()
    };
    use std::f64::consts::{FRAC_PI_2, PI};
    match preset {
        "empty" => Ok(TrajectorySpec {
            waypoints: vec![Point2::new(-50.0, 0.0), Point2::new(50.0, 0.0)],
            speed: 2.5,
            scan_rate: 4.0,
        }),
        "corridor" => {
            // Racetrack between the walls: straights at y = +-4 m joined
            // by 4 m radius half-turns.
            let mut wp = vec![Point2::new(-30.0, 4.0), Point2::new(30.0, 4.0)];
            wp.extend(arc(30.0, 0.0, 4.0, FRAC_PI_2, -FRAC_PI_2));
            wp.push(Point2::new(-30.0, -4.0));
            wp.extend(arc(-30.0, 0.0, 4.0, -FRAC_PI_2, -PI - FRAC_PI_2));
            Ok(TrajectorySpec {
                waypoints: wp,
                speed: 2.5,
                scan_rate: 4.0,
            })
        }
        "urban" => {
            // Loop around the central blocks on street centerlines
            // (-40, -40) -> (120, 120), corners rounded at 8 m.
            let (lo, hi, r) = (-40.0, 120.0, 8.0);
            let mut wp = vec![Point2::new(lo + r, lo)];
            wp.push(Point2::new(hi - r, lo));
            wp.extend(arc(hi - r, lo + r, r, -FRAC_PI_2, 0.0));
            wp.push(Point2::new(hi, hi - r));
            wp.extend(arc(hi - r, hi - r, r, 0.0, FRAC_PI_2));
            wp.push(Point2::new(lo + r, hi));
            wp.extend(arc(lo + r, hi - r, r, FRAC_PI_2, PI));
            wp.push(Point2::new(lo, lo + r));
            wp.extend(arc(lo + r, lo + r, r, PI, PI + FRAC_PI_2));
            Ok(TrajectorySpec {
                waypoints: wp,
                speed: 4.0,
                scan_rate: 4.0,
            })
        }
        "suburban" => Ok(TrajectorySpec {
            // Straight run along a road between house rows.
            waypoints: vec![Point2::new(-140.0, 0.0), Point2::new(140.0, 0.0)],
            speed: 4.0,
            scan_rate: 4.0,
        }),
        "marine" => Ok(TrajectorySpec {
            // Offshore pass parallel to the shoreline.
            waypoints: vec![Point2::new(-120.0, 0.0), Point2::new(120.0, 0.0)],
            speed: 3.0,
            scan_rate: 4.0,
        }),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// A ray-grid hit: exact entry distance into the first occupied cell and
/// the cosine of the incidence angle against that cell's entry face.
#[derive(Debug, Clone, Copy, PartialEq)]
struct RayHit {
    distance: f64,
    incidence_cos: f64,
}

/// Exact ray-vs-grid traversal from `start` along `angle`, or `None`
/// within `max_range`. Occupancy threshold is 0.5. The incidence cosine
/// comes from the axis of the cell boundary the ray entered through
/// (1 = head-on, 0 = grazing); a ray starting inside an occupied cell
/// reports head-on at distance 0.
fn cast_ray(
    img: &OccupancyImage<f64>,
    start: Point2<f64>,
    angle: f64,
    max_range: f64,
) -> Option<RayHit> {
    let mpp = img.meters_per_pixel;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let (sin, cos) = angle.sin_cos();
    // Pixel-edge coordinates: cell (col, row) spans [col, col+1) x [row, row+1).
    let half_w = w as f64 / 2.0;
    let half_h = h as f64 / 2.0;
    let px = (start.x - img.origin.x) / mpp + half_w;
    let py = (img.origin.y - start.y) / mpp + half_h;
    let dx = cos / mpp;
    let dy = -sin / mpp;

    let mut col = px.floor() as i64;
    let mut row = py.floor() as i64;
    let (step_x, mut t_max_x, t_delta_x) = if dx > 0.0 {
        (1i64, (col as f64 + 1.0 - px) / dx, 1.0 / dx)
    } else if dx < 0.0 {
        (-1i64, (col as f64 - px) / dx, -1.0 / dx)
    } else {
        (0i64, f64::INFINITY, f64::INFINITY)
    };
    let (step_y, mut t_max_y, t_delta_y) = if dy > 0.0 {
        (1i64, (row as f64 + 1.0 - py) / dy, 1.0 / dy)
    } else if dy < 0.0 {
        (-1i64, (row as f64 - py) / dy, -1.0 / dy)
    } else {
        (0i64, f64::INFINITY, f64::INFINITY)
    };

    let mut t_entry = 0.0;
    let mut incidence = 1.0;
    let mut was_inside = false;
    loop {
        let inside = col >= 0 && row >= 0 && col < w && row < h;
        if inside {
            was_inside = true;
            if img.get(col as usize, row as usize) >= 0.5 {
                return (t_entry <= max_range).then_some(RayHit {
                    distance: t_entry,
                    incidence_cos: incidence,
                });
            }
        } else if was_inside {
            return None; // left the raster for good
        }
        if t_max_x < t_max_y {
            t_entry = t_max_x;
            t_max_x += t_delta_x;
            col += step_x;
            incidence = cos.abs();
        } else {
            t_entry = t_max_y;
            t_max_y += t_delta_y;
            row += step_y;
            incidence = sin.abs();
        }
        if t_entry > max_range {
            return None;
        }
    }
}

/// Simulates one radar scan from `pose` at `timestamp`.
///
/// Each azimuth ray-casts through the world (with occluders rasterized
/// into a transient copy); the first hit deposits intensity 1.0 in the
/// bin containing the hit distance plus leakage into the adjacent bins.
/// Then, in order: Gaussian noise floor on every bin, Poisson clutter at
/// uniform positions, whole-azimuth dropout.
pub fn simulate_scan(
    world: &WorldMap,
    pose: &Pose2<f64>,
    config: &RadarSimConfig,
    seed: u64,
    timestamp: f64,
) -> PolarScan<f64> {
    let bins = config.range_bin_count();
    let mut scan = PolarScan::zeros(config.azimuth_count, bins, config.range_resolution, timestamp);

    let occ_storage;
    let occ = if config.occluders.is_empty() {
        &world.occupancy
    } else {
        let mut copy = world.occupancy.clone();
        for o in &config.occluders {
            let c = o.center + Point2::new(o.velocity.x * timestamp, o.velocity.y * timestamp);
            fill_rect(
                &mut copy,
                c.x - o.half_extent.x,
                c.x + o.half_extent.x,
                c.y - o.half_extent.y,
                c.y + o.half_extent.y,
                1.0,
            );
        }
        occ_storage = copy;
        &occ_storage
    };

    // Weighted sub-rays across the beam; the center carries full power.
    // Returns scale with the incidence cosine, and grazing hits reflect
    // specularly away without registering (they still occlude).
    let sub_rays = beam_sub_rays(config.beam_width_deg);
    for a in 0..config.azimuth_count {
        let angle = pose.theta + scan.azimuth_angle(a);
        for &(offset, power) in &sub_rays {
            if let Some(hit) =
                cast_ray(occ, pose.translation(), angle + offset, config.max_range)
            {
                if hit.incidence_cos < GRAZING_COS_CUTOFF {
                    continue;
                }
                let bin = (hit.distance / config.range_resolution).floor() as usize;
                let strength = power * hit.incidence_cos;
                if bin < bins {
                    let row = scan.row_mut(a);
                    row[bin] = row[bin].max(strength);
                    if bin > 0 {
                        row[bin - 1] = row[bin - 1].max(RETURN_LEAKAGE * strength);
                    }
                    if bin + 1 < bins {
                        row[bin + 1] = row[bin + 1].max(RETURN_LEAKAGE * strength);
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if config.noise_floor_sigma > 0.0 {
        let normal = Normal::new(0.0, config.noise_floor_sigma).expect("valid sigma");
        for a in 0..config.azimuth_count {
            for v in scan.row_mut(a) {
                *v += normal.sample(&mut rng).max(0.0);
            }
        }
    }
    if config.clutter_rate > 0.0 {
        let count = Poisson::new(config.clutter_rate)
            .expect("valid rate")
            .sample(&mut rng) as usize;
        for _ in 0..count {
            let a = rng.random_range(0..config.azimuth_count);
            let j = rng.random_range(0..bins);
            let intensity = rng.random_range(0.5..1.0);
            let row = scan.row_mut(a);
            row[j] = row[j].max(intensity);
        }
    }
    if config.dropout_prob > 0.0 {
        for a in 0..config.azimuth_count {
            if rng.random_bool(config.dropout_prob) {
                scan.row_mut(a).fill(0.0);
            }
        }
    }
    scan
}

/// Degradations applied to the ground-truth raster to emulate imperfect
/// overhead imagery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradeParams {
    pub blur_sigma_m: f64,
    pub dropout_region_count: usize,
    pub dropout_region_size_m: f64,
    pub occupancy_bias: f64,
}

impl Default for DegradeParams {
    fn default() -> Self {
        Self {
            blur_sigma_m: 0.0,
            dropout_region_count: 0,
            dropout_region_size_m: 0.0,
            occupancy_bias: 0.0,
        }
    }
}

/// Gaussian-blurred, regionally zeroed, bias-shifted copy of the world
/// raster, clamped to `[0, 1]`. Zero-strength parameters return an exact
/// copy.
pub fn degrade_overhead(world: &WorldMap, params: &DegradeParams, seed: u64) -> OccupancyImage<f64> {
    let mut img = world.occupancy.clone();
    let (w, h) = (img.width(), img.height());

    if params.blur_sigma_m > 0.0 {
        let sigma_px = params.blur_sigma_m / img.meters_per_pixel;
        let radius = (3.0 * sigma_px).ceil() as isize;
        let mut kernel: Vec<f64> = (-radius..=radius)
            .map(|i| (-(i as f64).powi(2) / (2.0 * sigma_px * sigma_px)).exp())
            .collect();
        let sum: f64 = kernel.iter().sum();
        for k in kernel.iter_mut() {
            *k /= sum;
        }
        // Separable blur with clamp-to-edge.
        let mut tmp = vec![0.0; w * h];
        for row in 0..h {
            for col in 0..w {
                let mut acc = 0.0;
                for (ki, k) in kernel.iter().enumerate() {
                    let c = (col as isize + ki as isize - radius).clamp(0, w as isize - 1);
                    acc += k * img.get(c as usize, row);
                }
                tmp[row * w + col] = acc;
            }
        }
        for row in 0..h {
            for col in 0..w {
                let mut acc = 0.0;
                for (ki, k) in kernel.iter().enumerate() {
                    let r = (row as isize + ki as isize - radius).clamp(0, h as isize - 1);
                    acc += k * tmp[r as usize * w + col];
                }
                img.set(col, row, acc.clamp(0.0, 1.0));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x44_45_47_52); // degrade stream
    let half = params.dropout_region_size_m / 2.0;
    for _ in 0..params.dropout_region_count {
        let ext = world.extent_m() / 2.0;
        let cx = rng.random_range(-ext..ext);
        let cy = rng.random_range(-ext..ext);
        fill_rect(&mut img, cx - half, cx + half, cy - half, cy + half, 0.0);
    }

    if params.occupancy_bias != 0.0 {
        for row in 0..h {
            for col in 0..w {
                img.set(col, row, (img.get(col, row) + params.occupancy_bias).clamp(0.0, 1.0));
            }
        }
    }
    img
}

/// Per-scan seed derivation (splitmix64 of the base seed and index), so
/// scan noise streams are independent and reproducible.
pub fn scan_seed(base: u64, index: usize) -> u64 {
    let mut z = base
        .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A complete synthetic dataset expressed in the localization map frame:
/// the trajectory starts at map `(0, 0)` (matching a georeferenced initial
/// guess there), with east/north axes shared with the world raster.
#[derive(Debug, Clone)]
pub struct SimDataset {
    /// Ground-truth world, still centered on the raster (builder frame).
    pub world: WorldMap,
    /// Ground truth in the map frame; `truth[0]` sits at the origin.
    pub truth: Vec<(f64, Pose2<f64>)>,
    pub scans: Vec<PolarScan<f64>>,
    /// Overhead raster with its origin pose expressed in the map frame.
    pub overhead: OccupancyImage<f64>,
    /// Initial-guess heading in degrees from north (map-frame start yaw).
    pub origin_heading_deg: f64,
}

/// Builds the world, samples the trajectory, simulates every scan with a
/// derived per-scan seed, and degrades the overhead raster. Outputs are
/// rebased so the first trajectory sample becomes the map origin.
pub fn simulate_dataset(
    preset: &str,
    seed: u64,
    spec: &TrajectorySpec,
    radar: &RadarSimConfig,
    degrade: &DegradeParams,
) -> Result<SimDataset> {
    let world = build_world(preset, seed)?;
    let truth_world = generate_trajectory(spec)?;
    let scans = truth_world
        .iter()
        .enumerate()
        .map(|(k, (t, pose))| simulate_scan(&world, pose, radar, scan_seed(seed, k), *t))
        .collect();
    let mut overhead = degrade_overhead(&world, degrade, seed);

    // Map frame: pure translation of the builder frame putting the first
    // pose at the origin (axes stay east/north).
    let start = truth_world[0].1.translation();
    let truth = truth_world
        .iter()
        .map(|(t, p)| (*t, Pose2::new(p.x - start.x, p.y - start.y, p.theta)))
        .collect();
    overhead.origin = Pose2::new(
        world.occupancy.origin.x - start.x,
        world.occupancy.origin.y - start.y,
        0.0,
    );
    let origin_heading_deg = 90.0 - truth_world[0].1.theta.to_degrees();
    Ok(SimDataset {
        world,
        truth,
        scans,
        overhead,
        origin_heading_deg,
    })
}

/// Samples the path at `scan_rate`, heading along the motion direction;
/// corner samples take the heading of the segment being entered.
pub fn generate_trajectory(spec: &TrajectorySpec) -> Result<Vec<(f64, Pose2<f64>)>> {
    if spec.waypoints.len() < 2 {
        return Err(Error::InvalidInput("trajectory needs >= 2 waypoints".into()));
    }
    if spec.speed <= 0.0 || spec.scan_rate <= 0.0 {
        return Err(Error::InvalidInput(
            "speed and scan_rate must be positive".into(),
        ));
    }
    let mut cumulative = vec![0.0];
    for pair in spec.waypoints.windows(2) {
        let seg = pair[1] - pair[0];
        let len = seg.norm();
        if len == 0.0 {
            return Err(Error::InvalidInput(
                "consecutive waypoints must be distinct".into(),
            ));
        }
        cumulative.push(cumulative.last().unwrap() + len);
    }
    let total = *cumulative.last().unwrap();
    let duration = total / spec.speed;
    let n_samples = (duration * spec.scan_rate + 1e-9).floor() as usize + 1;

    let mut out = Vec::with_capacity(n_samples);
    let mut seg = 0usize;
    for k in 0..n_samples {
        let t = k as f64 / spec.scan_rate;
        let s = (spec.speed * t).min(total);
        while seg + 2 < cumulative.len() && s >= cumulative[seg + 1] {
            seg += 1;
        }
        let a = spec.waypoints[seg];
        let b = spec.waypoints[seg + 1];
        let seg_len = cumulative[seg + 1] - cumulative[seg];
        let frac = (s - cumulative[seg]) / seg_len;
        let d = b - a;
        let pos = Point2::new(a.x + frac * d.x, a.y + frac * d.y);
        let heading = d.y.atan2(d.x);
        out.push((t, Pose2::new(pos.x, pos.y, heading)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::k_strongest;

    #[test]
    fn unknown_preset_errors() {
        assert!(matches!(
            build_world("atlantis", 0),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn empty_world_zero_scan() {
        let world = build_world("empty", 1).unwrap();
        assert!(world.occupancy.values().iter().all(|v| *v == 0.0));
        let scan = simulate_scan(
            &world,
            &Pose2::identity(),
            &RadarSimConfig::default(),
            7,
            0.0,
        );
        assert!(scan.intensities().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn corridor_world_walls_20m_apart() {
        let world = build_world("corridor", 3).unwrap();
        let img = &world.occupancy;
        // Two parallel walls with nominal inner faces at y = +-10: all
        // occupancy sits in the wall bands, the 20 m between them stays
        // free, and both walls run the full corridor length.
        for row in 0..img.height() {
            for col in 0..img.width() {
                if img.get(col, row) > 0.0 {
                    let p = img.pixel_center(col, row);
                    assert!(p.y.abs() >= 10.0 - 0.25 && p.y.abs() <= 12.75, "{p:?}");
                    assert!(p.x >= -80.5 && p.x <= 80.5);
                }
            }
        }
        for x in [-70.0, -30.0, 0.0, 30.0, 70.0] {
            for side in [1.0, -1.0] {
                let hit = (0..30)
                    .any(|i| img.sample_map(Point2::new(x, side * (10.0 + 0.1 * i as f64))) > 0.5);
                assert!(hit, "wall missing near x={x} side={side}");
            }
            assert_eq!(img.sample_map(Point2::new(x, 0.0)), 0.0);
        }
    }

    #[test]
    fn marine_world_confined_to_half_plane() {
        let world = build_world("marine", 11).unwrap();
        let img = &world.occupancy;
        for row in 0..img.height() {
            for col in 0..img.width() {
                if img.get(col, row) > 0.0 {
                    assert!(img.pixel_center(col, row).y >= 20.0);
                }
            }
        }
    }

    #[test]
    fn worlds_deterministic_per_seed() {
        let a = build_world("urban", 5).unwrap();
        let b = build_world("urban", 5).unwrap();
        let c = build_world("urban", 6).unwrap();
        assert_eq!(a.occupancy.values(), b.occupancy.values());
        assert_ne!(a.occupancy.values(), c.occupancy.values());
    }

    #[test]
    fn wall_dead_ahead_lands_in_expected_bin() {
        // World gridded at 0.2 m/pixel so the wall face sits exactly at
        // x = 10; the strongest bin on azimuth 0 must be floor(10/0.043).
        let mut img = OccupancyImage::zeros(500, 500, 0.2, Pose2::identity());
        fill_rect(&mut img, 10.0, 12.0, -5.0, 5.0, 1.0);
        let world = WorldMap {
            occupancy: img,
            preset: "test".into(),
            seed: 0,
        };
        let config = RadarSimConfig::default();
        let scan = simulate_scan(&world, &Pose2::identity(), &config, 1, 0.0);
        let row = scan.row(0);
        let strongest = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .unwrap()
            .0;
        assert_eq!(strongest, 232);
        assert_eq!(row[232], 1.0);
        assert_eq!(row[231], RETURN_LEAKAGE);
        assert_eq!(row[233], RETURN_LEAKAGE);
    }

    #[test]
    fn k_strongest_recovers_raycast_ranges() {
        // Closed room: every k=1 point lands within one bin of the exact
        // ray-cast distance of a sub-ray on its azimuth.
        let mut img = OccupancyImage::zeros(600, 600, 0.2165, Pose2::identity());
        fill_rect(&mut img, -30.0, 30.0, 20.0, 22.0, 1.0);
        fill_rect(&mut img, -30.0, 30.0, -22.0, -20.0, 1.0);
        fill_rect(&mut img, 28.0, 30.0, -22.0, 22.0, 1.0);
        fill_rect(&mut img, -30.0, -28.0, -22.0, 22.0, 1.0);
        let world = WorldMap {
            occupancy: img,
            preset: "room".into(),
            seed: 0,
        };
        let config = RadarSimConfig::default();
        let pose = Pose2::new(1.3, -2.1, 0.4);
        let scan = simulate_scan(&world, &pose, &config, 2, 0.0);
        let cloud = k_strongest(&scan, 1);
        // Grazing incidences return nothing; the rest of the room is seen.
        assert!(cloud.len() > 350, "{}", cloud.len());
        for p in cloud.points() {
            let azimuth = p.y.atan2(p.x).rem_euclid(std::f64::consts::TAU);
            let best = beam_sub_rays(config.beam_width_deg)
                .iter()
                .filter_map(|(off, _)| {
                    cast_ray(
                        &world.occupancy,
                        pose.translation(),
                        pose.theta + azimuth + off,
                        config.max_range,
                    )
                })
                .map(|hit| (p.norm() - hit.distance).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(
                best <= config.range_resolution,
                "point at range {} is {} from any sub-ray hit",
                p.norm(),
                best
            );
        }
    }

    #[test]
    fn scans_bit_identical_per_seed() {
        let world = build_world("urban", 9).unwrap();
        let config = RadarSimConfig {
            noise_floor_sigma: 0.03,
            clutter_rate: 20.0,
            dropout_prob: 0.02,
            ..Default::default()
        };
        let pose = Pose2::new(-40.0, -40.0, 0.3);
        let a = simulate_scan(&world, &pose, &config, 77, 1.5);
        let b = simulate_scan(&world, &pose, &config, 77, 1.5);
        assert_eq!(a, b);
        let c = simulate_scan(&world, &pose, &config, 78, 1.5);
        assert_ne!(a, c);
    }

    #[test]
    fn clutter_count_matches_poisson_mean() {
        let world = build_world("empty", 0).unwrap();
        let rate = 20.0;
        let config = RadarSimConfig {
            clutter_rate: rate,
            ..Default::default()
        };
        let n_scans = 300;
        let mut total = 0usize;
        for k in 0..n_scans {
            let scan = simulate_scan(&world, &Pose2::identity(), &config, 1000 + k, 0.0);
            total += scan.intensities().iter().filter(|v| **v > 0.0).count();
        }
        let mean = total as f64 / n_scans as f64;
        // Mean within 3 standard errors of the Poisson rate (collisions
        // at these densities are vanishingly rare).
        let se = (rate / n_scans as f64).sqrt();
        assert!(
            (mean - rate).abs() < 3.0 * se,
            "mean {mean} vs rate {rate} (se {se})"
        );
    }

    #[test]
    fn dropout_zeroes_whole_azimuths() {
        let world = build_world("corridor", 1).unwrap();
        let config = RadarSimConfig {
            dropout_prob: 0.5,
            ..Default::default()
        };
        let scan = simulate_scan(&world, &Pose2::new(0.0, 0.0, 0.0), &config, 5, 0.0);
        let zero_rows = (0..config.azimuth_count)
            .filter(|a| scan.row(*a).iter().all(|v| *v == 0.0))
            .count();
        // Wall returns exist on every azimuth pre-dropout, so zero rows
        // are dropped rows (plus azimuths pointing past the wall ends).
        assert!(zero_rows > 100 && zero_rows < 350, "{zero_rows}");
    }

    #[test]
    fn occluder_shadows_the_wall() {
        let mut img = OccupancyImage::zeros(500, 500, 0.2, Pose2::identity());
        fill_rect(&mut img, 20.0, 22.0, -10.0, 10.0, 1.0);
        let world = WorldMap {
            occupancy: img,
            preset: "test".into(),
            seed: 0,
        };
        let mut config = RadarSimConfig::default();
        config.occluders.push(Occluder {
            center: Point2::new(5.0, 0.0),
            velocity: Point2::new(0.0, 0.0),
            half_extent: Point2::new(1.0, 1.0),
        });
        let scan = simulate_scan(&world, &Pose2::identity(), &config, 3, 0.0);
        let strongest = scan
            .row(0)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .unwrap()
            .0;
        // First return now comes from the occluder near 4 m, not the wall.
        assert_eq!(strongest, (4.0_f64 / 0.043).floor() as usize);
    }

    #[test]
    fn degrade_zero_strength_is_identity() {
        let world = build_world("urban", 2).unwrap();
        let out = degrade_overhead(&world, &DegradeParams::default(), 9);
        assert_eq!(out.values(), world.occupancy.values());
    }

    #[test]
    fn degrade_full_dropout_zeroes_everything() {
        let world = build_world("corridor", 2).unwrap();
        let params = DegradeParams {
            dropout_region_count: 1,
            dropout_region_size_m: 10_000.0,
            ..Default::default()
        };
        let out = degrade_overhead(&world, &params, 9);
        assert!(out.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn blur_preserves_interior_mass() {
        // A blob far from borders: blurring must preserve total mass
        // within 1%.
        let mut img = OccupancyImage::zeros(400, 400, 0.25, Pose2::identity());
        fill_rect(&mut img, -5.0, 5.0, -4.0, 4.0, 1.0);
        let world = WorldMap {
            occupancy: img,
            preset: "blob".into(),
            seed: 0,
        };
        let before: f64 = world.occupancy.values().iter().sum();
        let params = DegradeParams {
            blur_sigma_m: 1.0,
            ..Default::default()
        };
        let out = degrade_overhead(&world, &params, 0);
        let after: f64 = out.values().iter().sum();
        assert!((after - before).abs() / before < 0.01, "{before} -> {after}");
    }

    #[test]
    fn trajectory_two_waypoints_spacing() {
        let spec = TrajectorySpec {
            waypoints: vec![Point2::new(0.0, 0.0), Point2::new(10.0, 0.0)],
            speed: 1.0,
            scan_rate: 1.0,
        };
        let traj = generate_trajectory(&spec).unwrap();
        assert_eq!(traj.len(), 11);
        for (k, (t, p)) in traj.iter().enumerate() {
            assert_eq!(*t, k as f64);
            assert!((p.x - k as f64).abs() < 1e-12);
            assert_eq!(p.theta, 0.0);
        }
    }

    #[test]
    fn trajectory_square_loop_headings() {
        let spec = TrajectorySpec {
            waypoints: vec![
                Point2::new(0.0, 0.0),
                Point2::new(10.0, 0.0),
                Point2::new(10.0, 10.0),
                Point2::new(0.0, 10.0),
                Point2::new(0.0, 0.0),
            ],
            speed: 1.0,
            scan_rate: 1.0,
        };
        let traj = generate_trajectory(&spec).unwrap();
        assert_eq!(traj.len(), 41);
        use std::f64::consts::{FRAC_PI_2, PI};
        assert_eq!(traj[0].1.theta, 0.0);
        assert!((traj[10].1.theta - FRAC_PI_2).abs() < 1e-12); // corner: new segment
        assert!((traj[20].1.theta - PI).abs() < 1e-12);
        assert!((traj[30].1.theta + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn trajectory_arc_length_consistency() {
        let spec = preset_trajectory("urban").unwrap();
        let traj = generate_trajectory(&spec).unwrap();
        // Distance covered between consecutive samples equals speed / rate
        // (up to the final partial step).
        let step = spec.speed / spec.scan_rate;
        let mut total = 0.0;
        for pair in traj.windows(2) {
            let d = (pair[1].1.translation() - pair[0].1.translation()).norm();
            total += d;
            assert!(d <= step + 1e-9);
        }
        let path: f64 = spec
            .waypoints
            .windows(2)
            .map(|p| (p[1] - p[0]).norm())
            .sum();
        assert!((total - (traj.len() - 1) as f64 * step).abs() < step + 1e-9);
        assert!(path >= 500.0, "urban loop should cover >= 500 m, got {path}");
        assert!((path / spec.speed * spec.scan_rate).floor() as usize + 1 == traj.len());
    }

    #[test]
    fn duplicate_waypoints_rejected() {
        let spec = TrajectorySpec {
            waypoints: vec![Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)],
            speed: 1.0,
            scan_rate: 1.0,
        };
        assert!(generate_trajectory(&spec).is_err());
    }
}
