//! Measures the in-band restoration ratio (same-direction exits among rays
//! that actually reflect) of a cot schedule tower (dev tool).
//!
//! Usage: rowrestore <theta1> <eps1> <m_towers> <cot>...

use specular::geometry::{Direction, Point, Segment};
use specular::scene::{Scene, Tower};
use specular::tracer::{TraceIndex, DEFAULT_BOUNCE_CAP};

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().unwrap())
        .collect();
    let theta1 = args[0];
    let eps1 = args[1];
    let m = args[2] as usize;
    let cots = args[3..].to_vec();
    let pos_sum: f64 = cots.iter().map(|c| c.max(0.0)).sum();
    let tower = Tower {
        cots,
        origin: Point::new(0.0, pos_sum),
        scale: 1.0,
    };
    let q = 1.0 + 2.0 * eps1;
    let base = tower.segments();
    let mut segs: Vec<Segment> = Vec::with_capacity(base.len() * m);
    for j in 0..m {
        let dz = Point::new((j as f64 - m as f64 / 2.0) * q, 0.0);
        segs.extend(base.iter().map(|s| s.translate(dz)));
    }
    let scene = Scene::from_segments(segs);
    let index = TraceIndex::new(&scene);

    let n = 20_000;
    let span = m as f64 * q + 4.0;
    let mut agg_same = 0usize;
    let mut agg_hit = 0usize;
    for k in 0..10 {
        let theta = theta1 * (k as f64 + 0.5) / 10.0;
        let v = Direction::from_angle(theta + std::f64::consts::FRAC_PI_2);
        let perp = v.perp().unit();
        let (mut hit, mut same, mut degen) = (0usize, 0usize, 0usize);
        for i in 0..n {
            let off = span * ((i as f64 + 0.5) / n as f64 - 0.5);
            let path = index.trace(v, perp * off, DEFAULT_BOUNCE_CAP);
            if path.missed() {
                continue;
            }
            if path.degenerate || path.cap_exceeded {
                degen += 1;
                continue;
            }
            hit += 1;
            if (path.exit.v.unit() - v.unit()).norm() < 1e-9 {
                same += 1;
            }
        }
        println!(
            "theta={theta:.4} hit={hit} degen={degen} restore={:.4}",
            same as f64 / hit.max(1) as f64
        );
        agg_same += same;
        agg_hit += hit;
    }
    println!("band restore={:.4}", agg_same as f64 / agg_hit.max(1) as f64);
}
