// debug scratch: config sweep across seeds
use radarloc_core::evaluation::align_and_score;
use radarloc_core::geo::GeoReference;
use radarloc_core::pipeline::{run_localization, PipelineConfig};
use radarloc_core::simulator::{preset_trajectory, simulate_dataset, DegradeParams, RadarSimConfig};

fn main() {
    let spec = preset_trajectory("corridor").unwrap();
    for seed in [7u64, 13, 42] {
        let data = simulate_dataset("corridor", seed, &spec, &RadarSimConfig::default(), &DegradeParams::default()).unwrap();
        for (tag, sx, sth, ox, oth) in [
            ("c", 0.05, 0.05, 0.05, 0.10),
            ("d", 0.04, 0.04, 0.05, 0.10),
            ("e", 0.045, 0.05, 0.06, 0.15),
        ] {
            let config = PipelineConfig {
                origin: GeoReference::new(0.0, 0.0, 90.0),
                sigma_odom_xy: ox,
                sigma_odom_yaw_deg: oth,
                sigma_sat_xy: sx,
                sigma_sat_yaw_deg: sth,
                ..Default::default()
            };
            let run = run_localization(data.scans.clone(), &data.overhead, &config, seed).unwrap();
            let report = align_and_score(&run.estimates, &data.truth).unwrap();
            println!("seed={seed:2} {tag}: rmse_pos={:.4} (lat {:.4} long {:.4}) yaw={:.3}d",
                report.rmse_translation_m, report.rmse_lat_m, report.rmse_long_m, report.rmse_yaw_deg);
        }
    }
}
