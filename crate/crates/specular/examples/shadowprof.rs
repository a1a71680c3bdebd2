//! Prints mean/quantile out-band shadow of a cot schedule (dev tool).
use specular::geometry::Point;
use specular::projection::project_tower_bracket;
use specular::scene::Tower;

fn main() {
    let cots: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let tower = Tower { cots: cots.clone(), origin: Point::new(0.0, 0.0), scale: 1.0 };
    let cap = 1usize << cots.len().min(22);
    let mut vals = Vec::new();
    let mut crit = Vec::new();
    let th1 = 0.3141592653589793f64;
    let mut th = th1 + 0.002;
    while th < std::f64::consts::PI {
        let b = project_tower_bracket(&tower, th, cap);
        let m = 0.5 * (b.lower_measure() + b.upper_measure());
        vals.push(m);
        if th >= std::f64::consts::FRAC_PI_2 - th1 && th <= std::f64::consts::FRAC_PI_2 {
            crit.push(m);
        }
        th += 0.004;
    }
    vals.sort_by(|a, b| a.total_cmp(b));
    let mean: f64 = vals.iter().sum::<f64>() / vals.len() as f64;
    let q = |p: f64| vals[(p * vals.len() as f64) as usize];
    let cmean: f64 = crit.iter().sum::<f64>() / crit.len() as f64;
    println!("mean={mean:.4} med={:.4} q25={:.4} q75={:.4} critmean={cmean:.4}", q(0.5), q(0.25), q(0.75));
}
