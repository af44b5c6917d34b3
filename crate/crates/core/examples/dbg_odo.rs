// debug scratch: per-pair error vs beam width
use radarloc_core::registration::{icp, IcpConfig};
use radarloc_core::scan::k_strongest;
use radarloc_core::se2::Pose2;
use radarloc_core::simulator::{build_world, simulate_scan, RadarSimConfig};

fn main() {
    let world = build_world("corridor", 7).unwrap();
    let step = 0.625f64;
    for bw in [1.8f64, 2.4, 3.0, 4.0] {
        let radar = RadarSimConfig { beam_width_deg: bw, ..Default::default() };
        let cfg = IcpConfig::new(4.0);
        let n = 88;
        let (mut sum, mut worst, mut sq) = (0.0f64, 0.0f64, 0.0f64);
        for kk in 0..n {
            let x0 = -30.0 + kk as f64 * step;
            let p0 = Pose2::new(x0, 4.0, 0.0);
            let p1 = Pose2::new(x0 + step, 4.0, 0.0);
            let s0 = simulate_scan(&world, &p0, &radar, 1, 0.0);
            let s1 = simulate_scan(&world, &p1, &radar, 2, 0.25);
            let (c0, c1) = (k_strongest(&s0, 5), k_strongest(&s1, 5));
            let truth = p0.inverse().compose(&p1);
            let res = icp(&c1, &c0, &truth, &cfg).unwrap();
            let e = res.transform.x - truth.x;
            sum += e; sq += e * e;
            if e.abs() > worst.abs() { worst = e; }
        }
        println!("beam={:3.1} mean={:+.4} rms={:.4} worst={:+.4}", bw, sum / n as f64, (sq / n as f64).sqrt(), worst);
    }
}
