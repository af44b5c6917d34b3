// debug scratch: full corridor run RMSE
use radarloc_core::evaluation::align_and_score;
use radarloc_core::geo::GeoReference;
use radarloc_core::pipeline::{run_localization, PipelineConfig};
use radarloc_core::simulator::{preset_trajectory, simulate_dataset, DegradeParams, RadarSimConfig};

fn main() {
    let t0 = std::time::Instant::now();
    let spec = preset_trajectory("corridor").unwrap();
    let data = simulate_dataset("corridor", 7, &spec, &RadarSimConfig::default(), &DegradeParams::default()).unwrap();
    println!("scans={} sim_time={:.1}s", data.scans.len(), t0.elapsed().as_secs_f64());
    let config = PipelineConfig { origin: GeoReference::new(0.0, 0.0, 90.0), ..Default::default() };
    let t1 = std::time::Instant::now();
    let run = run_localization(data.scans, &data.overhead, &config, 7).unwrap();
    println!("loc_time={:.1}s", t1.elapsed().as_secs_f64());
    let report = align_and_score(&run.estimates, &data.truth).unwrap();
    println!("rmse_pos={:.4} rmse_lat={:.4} rmse_long={:.4} rmse_yaw={:.4}deg",
        report.rmse_translation_m, report.rmse_lat_m, report.rmse_long_m, report.rmse_yaw_deg);
    // worst errors over time
    let mut worst: Vec<(f64, usize)> = report.lat_errors_m.iter().zip(&report.long_errors_m).enumerate()
        .map(|(i, (a, b))| ((a * a + b * b).sqrt(), i)).collect();
    worst.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("worst: {:?}", &worst[..8.min(worst.len())]);
    let n_acc = run.manifest.scans.iter().filter(|l| l.gate_accepted).count();
    let n_fb = run.manifest.scans.iter().filter(|l| l.odometry_fallback).count();
    println!("accepted={}/{} odo_fallback={}", n_acc, run.manifest.scans.len(), n_fb);
}
