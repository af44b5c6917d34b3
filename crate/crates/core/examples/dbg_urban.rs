// debug scratch: urban noise-realism run
use radarloc_core::evaluation::align_and_score;
use radarloc_core::geo::GeoReference;
use radarloc_core::pipeline::{run_localization, PipelineConfig};
use radarloc_core::simulator::{preset_trajectory, simulate_dataset, DegradeParams, RadarSimConfig};

fn main() {
    let t0 = std::time::Instant::now();
    let spec = preset_trajectory("urban").unwrap();
    let radar = RadarSimConfig {
        noise_floor_sigma: 0.03,
        clutter_rate: 20.0,
        dropout_prob: 0.01,
        ..Default::default()
    };
    let degrade = DegradeParams {
        blur_sigma_m: 0.5,
        dropout_region_count: 3,
        dropout_region_size_m: 12.0,
        occupancy_bias: -0.05,
    };
    let data = simulate_dataset("urban", 99, &spec, &radar, &degrade).unwrap();
    println!("scans={} path_start_heading={} sim={:.1}s", data.scans.len(), data.origin_heading_deg, t0.elapsed().as_secs_f64());
    let config = PipelineConfig { origin: GeoReference::new(0.0, 0.0, 90.0), ..Default::default() };
    let t1 = std::time::Instant::now();
    let run = run_localization(data.scans.clone(), &data.overhead, &config, 99).unwrap();
    println!("loc={:.1}s", t1.elapsed().as_secs_f64());
    let report = align_and_score(&run.estimates, &data.truth).unwrap();
    println!("rmse_pos={:.3} (lat {:.3} long {:.3}) yaw={:.2}d", report.rmse_translation_m, report.rmse_lat_m, report.rmse_long_m, report.rmse_yaw_deg);
    let n_acc = run.manifest.scans.iter().filter(|l| l.gate_accepted).count();
    let n_fb = run.manifest.scans.iter().filter(|l| l.odometry_fallback).count();
    println!("accepted={}/{} fallback={}", n_acc, run.manifest.scans.len(), n_fb);
    let mut worst: Vec<(f64, usize)> = report.lat_errors_m.iter().zip(&report.long_errors_m).enumerate()
        .map(|(i, (a, b))| ((a * a + b * b).sqrt(), i)).collect();
    worst.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("worst: {:?}", &worst[..6]);
}
