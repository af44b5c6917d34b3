// debug scratch: turn-region diagnostics
use radarloc_core::geo::GeoReference;
use radarloc_core::pipeline::{run_localization, PipelineConfig};
use radarloc_core::simulator::{preset_trajectory, simulate_dataset, DegradeParams, RadarSimConfig};

fn main() {
    let spec = preset_trajectory("corridor").unwrap();
    let data = simulate_dataset("corridor", 7, &spec, &RadarSimConfig::default(), &DegradeParams::default()).unwrap();
    let config = PipelineConfig { origin: GeoReference::new(0.0, 0.0, 90.0), ..Default::default() };
    let run = run_localization(data.scans, &data.overhead, &config, 7).unwrap();
    for log in run.manifest.scans.iter().skip(93).take(35) {
        let gt = data.truth[log.index].1;
        let e = &log.estimate;
        let odo = log.odometry.unwrap();
        let gt_prev = data.truth[log.index - 1].1;
        let true_rel = gt_prev.inverse().compose(&gt);
        println!("k={:3} est=({:+7.2},{:+7.2},{:+6.1}d) gt=({:+7.2},{:+7.2},{:+6.1}d) odo_th={:+5.1}d true_th={:+5.1}d fb={} fit={:5.3} acc={}",
            log.index, e[0], e[1], e[2].to_degrees(), gt.x, gt.y, gt.theta.to_degrees(),
            odo[2].to_degrees(), true_rel.theta.to_degrees(),
            log.odometry_fallback as u8,
            log.fitness.unwrap_or(-1.0), log.gate_accepted as u8);
    }
}
