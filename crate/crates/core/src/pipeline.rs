//! End-to-end localization: per scan, k-strongest filtering, scan-to-scan
//! odometry ICP, patch fetch and raytraced overhead registration, fitness
//! gating, and the sliding-window smoother update. Also the run
//! configuration (plain `key=value` files) and the reproducibility
//! manifest.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoReference;
use crate::occupancy::{fetch_patch, raytrace_points, to_polar, OccupancyImage};
use crate::registration::{fitness_gate, icp, IcpConfig, IcpResult};
use crate::scan::{k_strongest, PointCloud2, PolarScan};
use crate::se2::Pose2;
use crate::smoother::{FactorGraphWindow, NoiseModel, SmootherConfig};

/// System parameters. Defaults are the tuned values the localization runs
/// with; yaw sigmas are stored in degrees and converted at the point of
/// use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Odometry noise, x/y (meters).
    pub sigma_odom_xy: f64,
    /// Odometry noise, yaw (degrees).
    pub sigma_odom_yaw_deg: f64,
    /// Overhead-registration noise, x/y (meters).
    pub sigma_sat_xy: f64,
    /// Overhead-registration noise, yaw (degrees).
    pub sigma_sat_yaw_deg: f64,
    /// Trim distance for overhead ICP (meters).
    pub delta_sat: f64,
    /// Trim distance for scan-to-scan ICP (meters).
    pub delta_radar: f64,
    /// Fitness threshold gating overhead registrations.
    pub tau_fit: f64,
    /// k-strongest for odometry clouds.
    pub k_radar: usize,
    /// k-strongest for overhead-registration clouds.
    pub k_sat: usize,
    /// Occupancy threshold for raytraced point extraction.
    pub tau_occ: f64,
    /// Smoother window (seconds).
    pub window_duration: f64,
    /// Fetched patch side (pixels).
    pub patch_size_px: usize,
    /// Patch resolution (meters per pixel).
    pub meters_per_pixel: f64,
    /// Coarse ICP trim (pixels of the patch).
    pub coarse_trim_px: f64,
    /// Coarse ICP iteration count.
    pub coarse_iterations: usize,
    /// Georeferenced initial guess.
    pub origin: GeoReference,
    /// Diagnostic: first scan index of a forced unary blackout.
    pub unary_blackout_start: Option<usize>,
    /// Diagnostic: number of blacked-out scans.
    pub unary_blackout_count: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            sigma_odom_xy: 0.04,
            sigma_odom_yaw_deg: 0.1,
            sigma_sat_xy: 0.5,
            sigma_sat_yaw_deg: 4.5,
            delta_sat: 4.33,
            delta_radar: 4.0,
            tau_fit: 0.6,
            k_radar: 5,
            k_sat: 9,
            tau_occ: 0.6,
            window_duration: 10.0,
            patch_size_px: 640,
            meters_per_pixel: 0.433,
            coarse_trim_px: 50.0,
            coarse_iterations: 5,
            origin: GeoReference::new(0.0, 0.0, 90.0),
            unary_blackout_start: None,
            unary_blackout_count: 0,
        }
    }
}

/// Dataset-generation options carried in the same config file under
/// `sim_*` keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub preset: String,
    pub speed: f64,
    pub scan_rate: f64,
    pub max_range: f64,
    pub noise_floor_sigma: f64,
    pub clutter_rate: f64,
    pub dropout_prob: f64,
    pub blur_sigma_m: f64,
    pub dropout_region_count: usize,
    pub dropout_region_size_m: f64,
    pub occupancy_bias: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            preset: "corridor".into(),
            speed: 0.0, // 0 = use the preset default
            scan_rate: 0.0,
            max_range: 140.0,
            noise_floor_sigma: 0.0,
            clutter_rate: 0.0,
            dropout_prob: 0.0,
            blur_sigma_m: 0.0,
            dropout_region_count: 0,
            dropout_region_size_m: 0.0,
            occupancy_bias: 0.0,
        }
    }
}

/// Parses a `key=value` config file. Blank lines and `#` comments are
/// allowed; unknown keys are errors. Returns the config, the sim options,
/// and the keys the file overrode.
pub fn parse_config(text: &str) -> Result<(PipelineConfig, SimOptions, Vec<String>)> {
    let mut config = PipelineConfig::default();
    let mut sim = SimOptions::default();
    let mut overridden = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| Error::Config(format!("line {}: bad {what} '{value}'", lineno + 1));
        let f = || -> Result<f64> { value.parse().map_err(|_| bad("number")) };
        match key {
            "sigma_odom_xy" => config.sigma_odom_xy = f()?,
            "sigma_odom_yaw_deg" => config.sigma_odom_yaw_deg = f()?,
            "sigma_sat_xy" => config.sigma_sat_xy = f()?,
            "sigma_sat_yaw_deg" => config.sigma_sat_yaw_deg = f()?,
            "delta_sat" => config.delta_sat = f()?,
            "delta_radar" => config.delta_radar = f()?,
            "tau_fit" => config.tau_fit = f()?,
            "k_radar" => config.k_radar = value.parse().map_err(|_| bad("count"))?,
            "k_sat" => config.k_sat = value.parse().map_err(|_| bad("count"))?,
            "tau_occ" => config.tau_occ = f()?,
            "window_duration" => config.window_duration = f()?,
            "patch_size_px" => config.patch_size_px = value.parse().map_err(|_| bad("count"))?,
            "meters_per_pixel" => config.meters_per_pixel = f()?,
            "coarse_trim_px" => config.coarse_trim_px = f()?,
            "coarse_iterations" => {
                config.coarse_iterations = value.parse().map_err(|_| bad("count"))?
            }
            "origin_lat" => config.origin.lat_deg = f()?,
            "origin_lon" => config.origin.lon_deg = f()?,
            "origin_heading_deg" => config.origin.heading_deg = f()?,
            "unary_blackout_start" => {
                config.unary_blackout_start = Some(value.parse().map_err(|_| bad("count"))?)
            }
            "unary_blackout_count" => {
                config.unary_blackout_count = value.parse().map_err(|_| bad("count"))?
            }
            "sim_preset" => sim.preset = value.to_string(),
            "sim_speed" => sim.speed = f()?,
            "sim_scan_rate" => sim.scan_rate = f()?,
            "sim_max_range" => sim.max_range = f()?,
            "sim_noise_floor_sigma" => sim.noise_floor_sigma = f()?,
            "sim_clutter_rate" => sim.clutter_rate = f()?,
            "sim_dropout_prob" => sim.dropout_prob = f()?,
            "sim_blur_sigma_m" => sim.blur_sigma_m = f()?,
            "sim_dropout_region_count" => {
                sim.dropout_region_count = value.parse().map_err(|_| bad("count"))?
            }
            "sim_dropout_region_size_m" => sim.dropout_region_size_m = f()?,
            "sim_occupancy_bias" => sim.occupancy_bias = f()?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        overridden.push(key.to_string());
    }
    Ok((config, sim, overridden))
}

/// Flat snapshot of the configuration for the manifest; values use the
/// shortest round-trip float formatting.
pub fn config_snapshot(config: &PipelineConfig, sim: Option<&SimOptions>) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    let c = config;
    let entries: Vec<(&str, String)> = vec![
        ("sigma_odom_xy", c.sigma_odom_xy.to_string()),
        ("sigma_odom_yaw_deg", c.sigma_odom_yaw_deg.to_string()),
        ("sigma_sat_xy", c.sigma_sat_xy.to_string()),
        ("sigma_sat_yaw_deg", c.sigma_sat_yaw_deg.to_string()),
        ("delta_sat", c.delta_sat.to_string()),
        ("delta_radar", c.delta_radar.to_string()),
        ("tau_fit", c.tau_fit.to_string()),
        ("k_radar", c.k_radar.to_string()),
        ("k_sat", c.k_sat.to_string()),
        ("tau_occ", c.tau_occ.to_string()),
        ("window_duration", c.window_duration.to_string()),
        ("patch_size_px", c.patch_size_px.to_string()),
        ("meters_per_pixel", c.meters_per_pixel.to_string()),
        ("coarse_trim_px", c.coarse_trim_px.to_string()),
        ("coarse_iterations", c.coarse_iterations.to_string()),
        ("origin_lat", c.origin.lat_deg.to_string()),
        ("origin_lon", c.origin.lon_deg.to_string()),
        ("origin_heading_deg", c.origin.heading_deg.to_string()),
    ];
    for (k, v) in entries {
        map.insert(k.to_string(), v);
    }
    if let Some(s) = c.unary_blackout_start {
        map.insert("unary_blackout_start".into(), s.to_string());
        map.insert("unary_blackout_count".into(), c.unary_blackout_count.to_string());
    }
    if let Some(s) = sim {
        map.insert("sim_preset".into(), s.preset.clone());
        map.insert("sim_speed".into(), s.speed.to_string());
        map.insert("sim_scan_rate".into(), s.scan_rate.to_string());
        map.insert("sim_max_range".into(), s.max_range.to_string());
        map.insert("sim_noise_floor_sigma".into(), s.noise_floor_sigma.to_string());
        map.insert("sim_clutter_rate".into(), s.clutter_rate.to_string());
        map.insert("sim_dropout_prob".into(), s.dropout_prob.to_string());
        map.insert("sim_blur_sigma_m".into(), s.blur_sigma_m.to_string());
        map.insert(
            "sim_dropout_region_count".into(),
            s.dropout_region_count.to_string(),
        );
        map.insert(
            "sim_dropout_region_size_m".into(),
            s.dropout_region_size_m.to_string(),
        );
        map.insert("sim_occupancy_bias".into(), s.occupancy_bias.to_string());
    }
    map
}

/// Per-scan record in the run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanLog {
    pub index: usize,
    pub timestamp: f64,
    /// Odometry measurement fed to the graph (absent on the first scan).
    pub odometry: Option<[f64; 3]>,
    /// Odometry came from the constant-velocity fallback, not ICP.
    pub odometry_fallback: bool,
    /// Fitness of the overhead registration (absent during blackout).
    pub fitness: Option<f64>,
    /// Map-frame pose measured by the overhead registration, when gated in.
    pub unary: Option<[f64; 3]>,
    pub registration_converged: bool,
    pub gate_accepted: bool,
    pub blackout: bool,
    pub optimizer_iterations: usize,
    pub estimate: [f64; 3],
}

/// Everything needed to reproduce a run bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: BTreeMap<String, String>,
    pub overridden_keys: Vec<String>,
    pub seed: u64,
    pub input_hashes: BTreeMap<String, String>,
    pub scans: Vec<ScanLog>,
}

#[derive(Debug, Clone)]
pub struct LocalizationRun {
    /// Latest estimate after each scan.
    pub estimates: Vec<(f64, Pose2<f64>)>,
    pub manifest: RunManifest,
}

fn overhead_registration(
    live: &PointCloud2<f64>,
    overhead: &OccupancyImage<f64>,
    patch_center: &Pose2<f64>,
    predicted: &Pose2<f64>,
    azimuth_count: usize,
    scan_max_range: f64,
    config: &PipelineConfig,
    sat_icp: &IcpConfig<f64>,
) -> Option<IcpResult<f64>> {
    let (patch, _padded) = fetch_patch(
        overhead,
        patch_center,
        config.patch_size_px,
        config.meters_per_pixel,
    );
    let range_bins = (config.patch_size_px / 2)
        .min((scan_max_range / config.meters_per_pixel).floor() as usize);
    let polar = to_polar(&patch, azimuth_count, range_bins);
    let target = raytrace_points(&polar, config.tau_occ);
    let init = Pose2::new(
        predicted.x - patch_center.x,
        predicted.y - patch_center.y,
        predicted.theta,
    );
    icp(live, &target, &init, sat_icp).ok()
}

/// Runs the localization pipeline over a time-ordered scan stream.
///
/// Per scan: k-strongest clouds for odometry and registration; ICP against
/// the previous scan's cloud (identity init) for the odometry factor,
/// holding the previous relative motion when ICP fails or diverges; patch
/// fetch at the latest estimate, polar conversion, raytraced point
/// extraction, coarse-then-fine ICP; the fitness gate; then a window
/// advance and optimization. Deterministic: no randomness anywhere.
pub fn run_localization<I>(
    scans: I,
    overhead: &OccupancyImage<f64>,
    config: &PipelineConfig,
    seed: u64,
) -> Result<LocalizationRun>
where
    I: IntoIterator<Item = PolarScan<f64>>,
{
    let odo_noise = NoiseModel::new(
        config.sigma_odom_xy,
        config.sigma_odom_yaw_deg.to_radians(),
    );
    let sat_noise = NoiseModel::new(config.sigma_sat_xy, config.sigma_sat_yaw_deg.to_radians());
    let odo_icp = IcpConfig::new(config.delta_radar);
    let mut sat_icp = IcpConfig::new(config.delta_sat).with_coarse(
        config.coarse_trim_px * config.meters_per_pixel,
        config.coarse_iterations,
    );
    // The raytraced target is quantized at the patch resolution, so the
    // registration settles into a correspondence limit cycle well above
    // the millimeter default; stop once the step is small against the
    // pixel size.
    sat_icp.convergence_tol_trans = config.meters_per_pixel / 20.0;
    sat_icp.convergence_tol_rot = 2e-3;
    let origin_pose = Pose2::new(0.0, 0.0, config.origin.theta());
    let mut window = FactorGraphWindow::initialize(
        &config.origin,
        config.window_duration,
        SmootherConfig::default(),
    );

    let mut estimates = Vec::new();
    let mut logs = Vec::new();
    let mut prev_cloud: Option<PointCloud2<f64>> = None;
    let mut prev_relative = Pose2::identity();

    for (k, scan) in scans.into_iter().enumerate() {
        let t = scan.timestamp;
        let scan_max_range = scan.range_bin_count() as f64 * scan.range_resolution;
        let odo_cloud = k_strongest(&scan, config.k_radar);
        let sat_cloud = k_strongest(&scan, config.k_sat);

        // Warm start with the previous relative motion: ICP is most
        // accurate with a close initial guess, and consecutive scans a
        // quarter second apart move by much less than the scene's feature
        // scale.
        let (odometry, odometry_fallback) = if k == 0 {
            (None, false)
        } else {
            match prev_cloud
                .as_ref()
                .map(|prev| icp(&odo_cloud, prev, &prev_relative, &odo_icp))
            {
                Some(Ok(res)) if res.converged => {
                    prev_relative = res.transform;
                    (Some(res.transform), false)
                }
                _ => (Some(prev_relative), true),
            }
        };

        let last_estimate = window.latest().map_or(origin_pose, |(_, p)| p);
        let predicted = match &odometry {
            Some(m) => last_estimate.compose(m),
            None => last_estimate,
        };

        let blackout = config
            .unary_blackout_start
            .is_some_and(|s| k >= s && k < s + config.unary_blackout_count);
        let mut fitness = None;
        let mut registration_converged = false;
        let mut gate_accepted = false;
        let mut unary = None;
        if !blackout {
            if let Some(result) = overhead_registration(
                &sat_cloud,
                overhead,
                &last_estimate,
                &predicted,
                scan.azimuth_count(),
                scan_max_range,
                config,
                &sat_icp,
            ) {
                fitness = Some(result.fitness);
                registration_converged = result.converged;
                if fitness_gate(&result, config.tau_fit) {
                    gate_accepted = true;
                    let patch_origin = Pose2::from_translation(last_estimate.translation());
                    unary = Some((patch_origin.compose(&result.transform), sat_noise));
                }
            }
        }

        let unary_log = unary.as_ref().map(|(m, _)| [m.x, m.y, m.theta]);
        let report = window.advance(t, odometry.map(|m| (m, odo_noise)), unary)?;
        let estimate = window.latest().expect("state just added").1;
        estimates.push((t, estimate));
        logs.push(ScanLog {
            index: k,
            timestamp: t,
            odometry: odometry.map(|m| [m.x, m.y, m.theta]),
            odometry_fallback,
            fitness,
            unary: unary_log,
            registration_converged,
            gate_accepted,
            blackout,
            optimizer_iterations: report.iterations,
            estimate: [estimate.x, estimate.y, estimate.theta],
        });
        prev_cloud = Some(odo_cloud);
    }

    Ok(LocalizationRun {
        estimates,
        manifest: RunManifest {
            config: config_snapshot(config, None),
            overridden_keys: Vec::new(),
            seed,
            input_hashes: BTreeMap::new(),
            scans: logs,
        },
    })
}

/// Audits a manifest: every unary factor the graph accepted must carry a
/// fitness at or above `tau_fit`, and blackout scans must carry none.
pub fn audit_gating(manifest: &RunManifest) -> Result<()> {
    let tau_fit: f64 = manifest
        .config
        .get("tau_fit")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Config("manifest missing tau_fit".into()))?;
    for log in &manifest.scans {
        if log.gate_accepted {
            let f = log.fitness.ok_or_else(|| {
                Error::InvalidInput(format!("scan {}: accepted without fitness", log.index))
            })?;
            if f < tau_fit {
                return Err(Error::InvalidInput(format!(
                    "scan {}: unary accepted with fitness {} < {}",
                    log.index, f, tau_fit
                )));
            }
        }
        if log.blackout && (log.gate_accepted || log.fitness.is_some()) {
            return Err(Error::InvalidInput(format!(
                "scan {}: blackout scan produced a registration",
                log.index
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::align_and_score;
    use crate::simulator::{
        preset_trajectory, simulate_dataset, DegradeParams, RadarSimConfig,
    };

    fn dataset(
        preset: &str,
        seed: u64,
        radar: &RadarSimConfig,
    ) -> (Vec<PolarScan<f64>>, Vec<(f64, Pose2<f64>)>, OccupancyImage<f64>) {
        let spec = preset_trajectory(preset).unwrap();
        let data =
            simulate_dataset(preset, seed, &spec, radar, &DegradeParams::default()).unwrap();
        (data.scans, data.truth, data.overhead)
    }

    fn corridor_config() -> PipelineConfig {
        PipelineConfig {
            // Preset trajectories start heading east: 90 degrees from north.
            origin: GeoReference::new(0.0, 0.0, 90.0),
            ..Default::default()
        }
    }

    /// Measurement sigmas matched to the noise-free synthetic sensor, for
    /// quantization-limited runs (overrides are echoed in the manifest).
    fn corridor_matched_config() -> PipelineConfig {
        PipelineConfig {
            sigma_odom_xy: 0.06,
            sigma_odom_yaw_deg: 0.15,
            sigma_sat_xy: 0.045,
            sigma_sat_yaw_deg: 0.05,
            ..corridor_config()
        }
    }

    #[test]
    fn config_defaults_and_roundtrip() {
        let c = PipelineConfig::default();
        assert_eq!(c.sigma_odom_xy, 0.04);
        assert_eq!(c.sigma_odom_yaw_deg, 0.1);
        assert_eq!(c.sigma_sat_xy, 0.5);
        assert_eq!(c.sigma_sat_yaw_deg, 4.5);
        assert_eq!(c.delta_sat, 4.33);
        assert_eq!(c.delta_radar, 4.0);
        assert_eq!(c.tau_fit, 0.6);
        assert_eq!(c.k_radar, 5);
        assert_eq!(c.k_sat, 9);
        assert_eq!(c.tau_occ, 0.6);
        assert_eq!(c.window_duration, 10.0);
        assert_eq!(c.patch_size_px, 640);
        assert_eq!(c.meters_per_pixel, 0.433);
        assert_eq!(c.coarse_trim_px, 50.0);
        assert_eq!(c.coarse_iterations, 5);

        let text = "tau_fit = 0.7\nk_radar=12\n# comment\n\nsim_preset=urban\n";
        let (parsed, sim, overridden) = parse_config(text).unwrap();
        assert_eq!(parsed.tau_fit, 0.7);
        assert_eq!(parsed.k_radar, 12);
        assert_eq!(parsed.k_sat, 9);
        assert_eq!(sim.preset, "urban");
        assert_eq!(overridden, vec!["tau_fit", "k_radar", "sim_preset"]);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            parse_config("frobnicate=1\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(parse_config("tau_fit=maybe\n"), Err(Error::Config(_))));
        assert!(matches!(parse_config("tau_fit\n"), Err(Error::Config(_))));
    }

    #[test]
    fn first_scan_stays_at_initial_guess() {
        let radar = RadarSimConfig::default();
        let (scans, _, overhead) = dataset("corridor", 3, &radar);
        let run = run_localization(
            scans.into_iter().take(1),
            &overhead,
            &corridor_config(),
            3,
        )
        .unwrap();
        assert_eq!(run.estimates.len(), 1);
        let p = run.estimates[0].1;
        // Strong initial prior holds the first state at the guess.
        assert!(p.translation().norm() < 0.02, "{p:?}");
    }

    #[test]
    fn blackout_everywhere_reduces_to_dead_reckoning() {
        let radar = RadarSimConfig::default();
        let (scans, _, overhead) = dataset("corridor", 5, &radar);
        let scans: Vec<_> = scans.into_iter().take(12).collect();
        let mut config = corridor_config();
        config.unary_blackout_start = Some(0);
        config.unary_blackout_count = usize::MAX / 2;
        let run = run_localization(scans, &overhead, &config, 5).unwrap();

        // Dead reckoning: compose the logged odometry measurements.
        let mut pose = Pose2::new(0.0, 0.0, config.origin.theta());
        for (log, (_, est)) in run.manifest.scans.iter().zip(&run.estimates) {
            if let Some(m) = log.odometry {
                pose = pose.compose(&Pose2::new(m[0], m[1], m[2]));
            }
            assert!(log.blackout && !log.gate_accepted && log.fitness.is_none());
            assert!((est.x - pose.x).abs() < 1e-7, "{est:?} vs {pose:?}");
            assert!((est.y - pose.y).abs() < 1e-7);
        }
    }

    #[test]
    fn corridor_run_tracks_ground_truth() {
        let radar = RadarSimConfig::default();
        let (scans, truth, overhead) = dataset("corridor", 7, &radar);
        let n = 60; // straight segment only
        let scans: Vec<_> = scans.into_iter().take(n).collect();
        let truth = truth[..n].to_vec();
        let run = run_localization(scans, &overhead, &corridor_matched_config(), 7).unwrap();
        let report = align_and_score(&run.estimates, &truth).unwrap();
        assert!(
            report.rmse_translation_m < 0.086,
            "rmse {}",
            report.rmse_translation_m
        );
        assert!(report.rmse_yaw_deg < 0.2, "yaw rmse {}", report.rmse_yaw_deg);
        audit_gating(&run.manifest).unwrap();
    }

    #[test]
    fn deterministic_repeated_runs() {
        let radar = RadarSimConfig {
            noise_floor_sigma: 0.03,
            clutter_rate: 10.0,
            ..Default::default()
        };
        let (scans, _, overhead) = dataset("corridor", 11, &radar);
        let scans: Vec<_> = scans.into_iter().take(10).collect();
        let a = run_localization(scans.clone(), &overhead, &corridor_config(), 11).unwrap();
        let b = run_localization(scans, &overhead, &corridor_config(), 11).unwrap();
        assert_eq!(a.estimates, b.estimates);
        assert_eq!(a.manifest, b.manifest);
    }

    #[test]
    fn gating_audit_flags_violations() {
        let mut manifest = RunManifest {
            config: config_snapshot(&PipelineConfig::default(), None),
            overridden_keys: vec![],
            seed: 0,
            input_hashes: BTreeMap::new(),
            scans: vec![ScanLog {
                index: 0,
                timestamp: 0.0,
                odometry: None,
                odometry_fallback: false,
                fitness: Some(0.4),
                unary: None,
                registration_converged: true,
                gate_accepted: true,
                blackout: false,
                optimizer_iterations: 1,
                estimate: [0.0; 3],
            }],
        };
        assert!(audit_gating(&manifest).is_err());
        manifest.scans[0].fitness = Some(0.8);
        audit_gating(&manifest).unwrap();
    }
}
