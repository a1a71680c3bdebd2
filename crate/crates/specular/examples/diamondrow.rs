//! Prototype: a venetian cascade whose leaves are diamond triples instead of
//! single slats. Prints in-band restore (single tower and row) plus shadow
//! statistics over (θ₁, π) (dev tool).
//!
//! Usage: diamondrow <theta1> <eps1> <m_towers> <lambda> <cot>...
//! lambda extends the two catching segments (lower edge and middle) beyond
//! the diamond by that fraction of r at their upper-left ends.

use specular::geometry::{Direction, Point, Segment};
use specular::projection::{project_scene, symdiff_measure};
use specular::scene::{Scene, Tower};
use specular::tracer::{TraceIndex, DEFAULT_BOUNCE_CAP};

/// Replaces a slope −1 leaf spanning [x, x+w] with the three segments of the
/// diamond of radius w/2 occupying the same horizontal extent, vertically
/// centred on the leaf.
fn diamond_triple(leaf: &Segment, lambda: f64) -> [Segment; 3] {
    let w = leaf.q.x - leaf.p.x;
    let r = w / 2.0;
    let x1 = Point::new(leaf.p.x, leaf.p.y - r);
    let ext = Point::new(-lambda * r, lambda * r);
    let seg = |a: Point, b: Point| Segment::new(a, b);
    [
        seg(x1 + ext, x1 + Point::new(r, -r)),
        seg(x1 + Point::new(r, r), x1 + Point::new(2.0 * r, 0.0)),
        seg(
            x1 + Point::new(0.5 * r, 0.5 * r) + ext,
            x1 + Point::new(1.5 * r, -0.5 * r),
        ),
    ]
}

fn main() {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().unwrap())
        .collect();
    let theta1 = args[0];
    let eps1 = args[1];
    let m = args[2] as usize;
    let lambda = args[3];
    let cots = args[4..].to_vec();
    let pos_sum: f64 = cots
        .iter()
        .enumerate()
        .map(|(j, c)| c.max(0.0) * 0.5f64.powi(j as i32 + 1))
        .sum();
    let tower = Tower {
        cots,
        origin: Point::new(0.0, pos_sum),
        scale: 1.0,
    };
    let base: Vec<Segment> = tower
        .segments()
        .iter()
        .flat_map(|s| diamond_triple(s, lambda))
        .collect();

    // Shadow statistics of the single diamond tower over the out-band range.
    let single = Scene::from_segments(base.clone());
    let grid = 0.005;
    let mut vals = Vec::new();
    let mut th = theta1 + grid;
    while th < std::f64::consts::PI {
        vals.push(project_scene(&single, th).measure());
        th += grid;
    }
    let mean: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
    for thr in [0.42, 0.5, 0.6] {
        let bad = vals.iter().filter(|&&v| v > thr).count() as f64 * grid;
        println!("bad_out({thr})={bad:.4}");
    }
    println!("outband mean={mean:.4}");
    let mut sds = Vec::new();
    let mut th = grid;
    while th < theta1 {
        sds.push(symdiff_measure(&single, th, 1.0));
        th += grid;
    }
    for thr in [0.42, 0.5, 0.6] {
        let bad = sds.iter().filter(|&&v| v > thr).count() as f64 * grid;
        println!("bad_in({thr})={bad:.4}");
    }
    println!(
        "inband max symdiff={:.4}",
        sds.iter().cloned().fold(0.0, f64::max)
    );
    if m == 0 {
        return;
    }

    // Restore over a row of m towers.
    let q = 1.0 + 2.0 * eps1;
    let mut segs: Vec<Segment> = Vec::with_capacity(base.len() * m);
    for j in 0..m {
        let dz = Point::new((j as f64 - m as f64 / 2.0) * q, 0.0);
        segs.extend(base.iter().map(|s| s.translate(dz)));
    }
    let index = TraceIndex::new(&Scene::from_segments(segs));
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
