//! Dev helper: evaluate a venetian-blind cot schedule against the block
//! acceptance predicate without going through build_block.
//!
//! Usage: blocktune <theta1> <eps> <grid_step> <cot>...

use specular::block::tower_theta_test;
use specular::geometry::Point;
use specular::scene::Tower;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let theta1: f64 = args[0].parse().unwrap();
    let eps: f64 = args[1].parse().unwrap();
    let grid: f64 = args[2].parse().unwrap();
    let cots: Vec<f64> = args[3..].iter().map(|s| s.parse().unwrap()).collect();
    let tower = Tower {
        cots,
        origin: Point::new(0.0, 0.0),
        scale: 1.0,
    };

    let mut bad_in = 0usize;
    let mut n_in = 0usize;
    let mut bad_out: Vec<f64> = Vec::new();
    let mut n_out = 0usize;
    let mut max_sd = 0.0f64;
    let mut theta = grid;
    while theta < std::f64::consts::PI {
        let in_band = theta <= theta1;
        let (pass, hi) = tower_theta_test(&tower, theta, in_band, eps, 1.0);
        if in_band {
            n_in += 1;
            if pass {
                max_sd = max_sd.max(hi);
            } else {
                bad_in += 1;
            }
        } else {
            n_out += 1;
            if !pass {
                bad_out.push(theta);
            }
        }
        theta += grid;
    }
    println!(
        "bad_in={:.4} ({} of {})  bad_out={:.4} ({} of {})  max_sd={:.4}",
        bad_in as f64 * grid,
        bad_in,
        n_in,
        bad_out.len() as f64 * grid,
        bad_out.len(),
        n_out,
        max_sd
    );
    let mut runs: Vec<(f64, f64)> = Vec::new();
    for &t in &bad_out {
        match runs.last_mut() {
            Some(r) if t - r.1 < 1.5 * grid => r.1 = t,
            _ => runs.push((t, t)),
        }
    }
    for (a, b) in runs {
        println!("  bad ({a:.4}, {b:.4})");
    }
}
