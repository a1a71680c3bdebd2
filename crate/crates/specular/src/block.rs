//! Construction and verification of blocks S_{ρ,θ₁,ε}: finite families of
//! slope −1 segments whose shadows approximate the target interval [0, ρ]
//! for θ ∈ [0, θ₁] and are small for θ ∈ (θ₁, π).
//!
//! Blocks are generated as binary venetian-blind towers (see `scene::Tower`):
//! level j splits every segment in two, the second copy translated by
//! 2^{-j}(1, -c_j). The cot schedules below were tuned offline; correctness
//! rests solely on `verify_block`, which re-checks every candidate from
//! scratch on the θ grid.

use crate::geometry::{Point, Segment};
use crate::projection::{bad_angle_measure, project_tower_bracket, symdiff_measure,
                        tower_shadow_span_bound};
use crate::scene::{Scene, Tower};
use serde::Serialize;
use thiserror::Error;

/// Closed square with sides inclined at π/4 to the axes, described by its
/// left vertex and half-diagonal r.
#[derive(Debug, Clone, Copy)]
pub struct Diamond {
    pub x1: Point,
    pub r: f64,
}

impl Diamond {
    pub fn x2(&self) -> Point {
        self.x1 + Point::new(self.r, self.r)
    }
    pub fn x3(&self) -> Point {
        self.x1 + Point::new(self.r, -self.r)
    }
    pub fn x4(&self) -> Point {
        self.x1 + Point::new(2.0 * self.r, 0.0)
    }
    pub fn vertices(&self) -> [Point; 4] {
        [self.x1, self.x2(), self.x3(), self.x4()]
    }
}

/// The three slope −1 segments x1–x3, x2–x4 and the mid-segment joining the
/// midpoints of the horizontal diagonally-opposite edges. For θ < arctan(1/3)
/// their joint shadow equals the diamond's.
pub fn diamond_segments(d: &Diamond) -> [Segment; 3] {
    let m1 = (d.x1 + d.x2()) * 0.5;
    let m2 = (d.x3() + d.x4()) * 0.5;
    [
        Segment::new(d.x1, d.x3()),
        Segment::new(d.x2(), d.x4()),
        Segment::new(m1, m2),
    ]
}

/// Upper bound on arctan(1/3); block band edges must stay below it.
pub const THETA1_MAX: f64 = 0.321750554396642;

#[derive(Debug, Clone, Serialize)]
pub struct BlockSpec {
    pub rho: f64,
    pub theta1: f64,
    pub epsilon: f64,
    /// Maximum number of generator candidates to try.
    pub budget: usize,
}

#[derive(Debug, Error)]
pub enum BlockError {
    #[error("invalid block spec: {0}")]
    InvalidSpec(String),
    #[error("no candidate passed verification within the budget of {0}")]
    BudgetExhausted(usize),
}

impl BlockSpec {
    pub fn new(rho: f64, theta1: f64, epsilon: f64, budget: usize) -> Result<Self, BlockError> {
        if !(rho > 0.0) {
            return Err(BlockError::InvalidSpec(format!("rho must be > 0, got {rho}")));
        }
        if !(theta1 > 0.0 && theta1 < THETA1_MAX) {
            return Err(BlockError::InvalidSpec(format!(
                "theta1 must lie in (0, arctan(1/3) ≈ {THETA1_MAX}), got {theta1}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(BlockError::InvalidSpec(format!(
                "epsilon must lie in (0,1), got {epsilon}"
            )));
        }
        Ok(BlockSpec { rho, theta1, epsilon, budget })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockReport {
    /// Estimated measure of bad angles in [0, θ₁] (symdiff test).
    pub bad_in_estimate: f64,
    /// Estimated measure of bad angles in (θ₁, π) (shadow-measure test).
    pub bad_out_estimate: f64,
    /// Largest certified symdiff bound among accepted in-band angles.
    pub max_symdiff_accepted: f64,
    /// Whether the scene fits inside Q_{ε,ρ} = (−ρε, ρ(1+ε))².
    pub containment: bool,
    /// Certified upper bound on the scene diameter (bounding-box diagonal).
    pub diameter: f64,
    pub segment_count: u64,
    pub grid_step: f64,
    pub accepted: bool,
}

/// (measure inside [0, rho], measure outside) of a sorted disjoint list.
fn split_target(ivals: &[(f64, f64)], rho: f64) -> (f64, f64) {
    let mut inside = 0.0;
    let mut outside = 0.0;
    for &(a, b) in ivals {
        let ov = (b.min(rho) - a.max(0.0)).max(0.0);
        inside += ov;
        outside += (b - a) - ov;
    }
    (inside, outside)
}

/// Certified per-θ test for a tower-backed block. In-band the test is
/// Leb(Π_θ ⊖ [0,ρ]) ≤ tol, out-band Leb(Π_θ) ≤ tol. Returns (passes,
/// certified upper bound on the tested quantity when it passes).
///
/// Cost control: an O(L) span bound settles most far-from-threshold angles;
/// the rest escalate through shadow brackets of growing interval caps until
/// the lower/upper bounds separate from tol (the final cap is exact).
pub fn tower_theta_test(tower: &Tower, theta: f64, in_band: bool, tol: f64, rho: f64) -> (bool, f64) {
    let bound = tower_shadow_span_bound(tower, theta);
    if in_band {
        // The shadow measure is at most `bound`; if that cannot cover enough
        // of [0, ρ] the angle is bad regardless of placement.
        if rho - bound > tol {
            return (false, f64::INFINITY);
        }
    } else if bound <= tol {
        return (true, bound);
    }
    let l = tower.cots.len();
    let full = 1usize << l.min(26);
    let mut caps: Vec<usize> = [1usize << 12, 1 << 15, 1 << 18, 1 << 21]
        .into_iter()
        .filter(|&c| c < full)
        .collect();
    caps.push(full);
    for cap in caps {
        let br = project_tower_bracket(tower, theta, cap);
        let (lo, hi) = if in_band {
            let (in_lo, out_lo) = split_target(&br.lower, rho);
            let (in_hi, out_hi) = split_target(&br.upper, rho);
            (out_lo + rho - in_hi, out_hi + rho - in_lo)
        } else {
            (br.lower_measure(), br.upper_measure())
        };
        if hi <= tol {
            return (true, hi);
        }
        if lo > tol || br.exact {
            return (false, hi);
        }
    }
    unreachable!("final cap admits every interval");
}

/// Grid verification of a block scene against its spec. Tower-backed scenes
/// use the bracketed projector; plain segment lists fall back to exact
/// per-segment projection.
pub fn verify_block(scene: &Scene, spec: &BlockSpec, grid_step: f64) -> BlockReport {
    let tol = spec.epsilon * spec.rho;
    let mut max_sd = 0.0f64;
    let test = |theta: f64, in_band: bool, max_sd: &mut f64| -> bool {
        let (pass, hi) = match &scene.tower {
            Some(t) => tower_theta_test(t, theta, in_band, tol, spec.rho),
            None => {
                let v = if in_band {
                    symdiff_measure(scene, theta, spec.rho)
                } else {
                    crate::projection::project_scene(scene, theta).measure()
                };
                (v <= tol, v)
            }
        };
        if pass && in_band {
            *max_sd = max_sd.max(hi);
        }
        pass
    };
    let bad_in = bad_angle_measure((0.0, spec.theta1), grid_step, |th| {
        test(th, true, &mut max_sd)
    });
    let bad_out = bad_angle_measure((spec.theta1, std::f64::consts::PI), grid_step, |th| {
        test(th, false, &mut max_sd)
    });

    let (lo, hi) = match &scene.tower {
        Some(t) => t.bounding_box(),
        None => {
            let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
            let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
            for s in &scene.segments {
                for p in [s.p, s.q] {
                    lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                    hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
                }
            }
            (lo, hi)
        }
    };
    let (qa, qb) = (-spec.epsilon * spec.rho, spec.rho * (1.0 + spec.epsilon));
    let containment = !scene.is_empty()
        && lo.x > qa && lo.y > qa && hi.x < qb && hi.y < qb;
    let diameter = if scene.is_empty() { 0.0 } else { lo.dist(hi) };

    let accepted = bad_in.estimate <= spec.epsilon
        && bad_out.estimate <= spec.epsilon
        && containment
        && diameter < 3.0 * std::f64::consts::SQRT_2 * spec.rho;
    BlockReport {
        bad_in_estimate: bad_in.estimate,
        bad_out_estimate: bad_out.estimate,
        max_symdiff_accepted: max_sd,
        containment,
        diameter,
        segment_count: scene.segment_count(),
        grid_step,
        accepted,
    }
}

/// Cot schedules for the venetian generator, ordered shallow to deep. Each
/// candidate is screened by `verify_block`; build_block returns the first
/// one that passes at the requested ε. Deeper schedules track [0,1] over a
/// longer in-band window and push their out-of-band shadows lower, at the
/// price of more leaves. Values were found by an offline annealing search
/// over the surrogate objectives (in-band gap/overlap budget, out-of-band
/// span-bound coverage, Q-containment of leaf heights); no correctness claim
/// is attached to the search itself.
const SCHEDULES: &[&[f64]] = &[
    &[
        2.6456, 1.0627, 0.1506, -0.2013, -0.8094, -1.6593, -3.0049, -5.2483, -9.0596,
    ],
    &[
        2.6456, 1.0627, 0.1506, -0.2013, -0.6967, -1.3356, -2.2496, -3.6269, -5.7510, -9.0596,
    ],
    &[
        2.7314, 0.1791, 0.7698, 0.0099, -0.7431, -1.1187, -2.1105, -2.0869, -2.5333, -7.8055,
        -10.6630,
    ],
    DEEP_SCHEDULE,
];

/// The 2^20-leaf schedule behind the ε = 0.25 acceptance target.
const DEEP_SCHEDULE: &[f64] = &[
    -0.001, 2.6, 1.75, 1.18, 0.79, 0.5, 0.25, -0.0062, -0.2641, -0.5116, -0.7795, -1.0921,
    -1.4257, -1.8526, -2.3884, -3.0533, -4.1, -5.5, -7.6, -10.8,
];

/// Tower origin height placing the leaf heights inside Q: the worst leaf
/// dips below the origin by Σ 2^{-j}·max(c_j, 0) plus the leaf drop, which
/// must stay above −ε. Shadow measures are translation-invariant and the
/// in-band symdiff only trades slack between its two edges, so the lift is
/// free as long as the shadow stays within [0, 1] in-band.
fn origin_lift(cots: &[f64], epsilon: f64) -> f64 {
    let mut pos = 0.0;
    for (j, &c) in cots.iter().enumerate() {
        pos += 0.5f64.powi(j as i32 + 1) * c.max(0.0);
    }
    (pos + 0.5f64.powi(cots.len() as i32) - epsilon + 0.02).max(0.0)
}

/// Screening grid for the generator; the caller re-verifies at its own grid.
pub const BUILD_GRID: f64 = 2e-3;

/// Generate-and-verify search over the frozen schedule family. The first
/// candidate that passes `verify_block` at the screening grid wins; the
/// result for ρ ≠ 1 is exactly the unit block scaled by ρ.
pub fn build_block(spec: &BlockSpec) -> Result<Scene, BlockError> {
    // Re-validate so hand-rolled specs get the same errors as BlockSpec::new.
    let unit = BlockSpec::new(1.0, spec.theta1, spec.epsilon, spec.budget)?;
    if spec.budget == 0 {
        return Err(BlockError::BudgetExhausted(0));
    }
    for cots in SCHEDULES.iter().take(spec.budget) {
        let tower = Tower {
            cots: cots.to_vec(),
            origin: Point::new(0.0, origin_lift(cots, spec.epsilon)),
            scale: 1.0,
        };
        let scene = Scene::from_tower(tower);
        let report = verify_block(&scene, &unit, BUILD_GRID);
        if report.accepted {
            let mut out = scene.scale(spec.rho);
            out.meta.insert("kind".into(), "block".into());
            out.meta.insert("rho".into(), spec.rho.to_string());
            out.meta.insert("theta1".into(), spec.theta1.to_string());
            out.meta.insert("epsilon".into(), spec.epsilon.to_string());
            out.meta.insert("levels".into(), cots.len().to_string());
            return Ok(out);
        }
    }
    Err(BlockError::BudgetExhausted(spec.budget.min(SCHEDULES.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::project_scene;

    #[test]
    fn diamond_segments_unit_example() {
        let d = Diamond { x1: Point::new(0.0, 0.0), r: 1.0 };
        let segs = diamond_segments(&d);
        let ends: Vec<(f64, f64, f64, f64)> = segs
            .iter()
            .map(|s| (s.p.x, s.p.y, s.q.x, s.q.y))
            .collect();
        assert_eq!(ends[0], (0.0, 0.0, 1.0, -1.0));
        assert_eq!(ends[1], (1.0, 1.0, 2.0, 0.0));
        assert_eq!(ends[2], (0.5, 0.5, 1.5, -0.5));
        for s in &segs {
            assert!(((s.q.y - s.p.y) / (s.q.x - s.p.x) + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diamond_segments_scale_by_half() {
        let d = Diamond { x1: Point::new(0.0, 0.0), r: 0.5 };
        let segs = diamond_segments(&d);
        assert!((segs[2].p.x - 0.25).abs() < 1e-12);
        assert!((segs[2].q.y + 0.25).abs() < 1e-12);
    }

    // Shadow of the 3-segment family equals the diamond's (the convex span
    // of its vertex projections) for every θ below arctan(1/3).
    #[test]
    fn three_segments_shadow_diamond_below_critical_angle() {
        let d = Diamond { x1: Point::new(0.3, -0.1), r: 0.7 };
        let segs = diamond_segments(&d);
        let scene = Scene::from_segments(segs.to_vec());
        for i in 0..60 {
            let theta = THETA1_MAX * (i as f64 + 0.5) / 60.5;
            let shadow = project_scene(&scene, theta);
            let coords: Vec<f64> = d
                .vertices()
                .iter()
                .map(|&p| crate::projection::coord(p, theta))
                .collect();
            let lo = coords.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(shadow.intervals().len(), 1, "theta={theta}");
            let (a, b) = shadow.intervals()[0];
            assert!((a - lo).abs() < 1e-12 && (b - hi).abs() < 1e-12);
        }
        // Above the critical angle the equality genuinely breaks.
        let shadow = project_scene(&scene, 0.45);
        assert!(shadow.intervals().len() > 1);
    }

    #[test]
    fn spec_rejects_bad_parameters() {
        assert!(BlockSpec::new(1.0, 0.30, 1.0, 4).is_err());
        assert!(BlockSpec::new(1.0, 0.33, 0.2, 4).is_err());
        assert!(BlockSpec::new(0.0, 0.30, 0.2, 4).is_err());
    }

    #[test]
    fn lone_segment_fails_out_of_band() {
        let spec = BlockSpec::new(1.0, 0.30, 0.25, 4).unwrap();
        let scene = Scene::from_segments(vec![Segment::new(
            Point::new(0.0, 0.0),
            Point::new(1.0, -1.0),
        )]);
        let report = verify_block(&scene, &spec, 2e-3);
        // Near θ=0 the lone segment covers [0,1]; in the open band its
        // shadow stays close to full length, so the measure test fails a.e.
        assert!(!report.accepted);
        assert!(report.bad_out_estimate > 1.0);
    }

    #[test]
    fn empty_scene_fails_in_band() {
        let spec = BlockSpec::new(1.0, 0.30, 0.25, 4).unwrap();
        let report = verify_block(&Scene::from_segments(Vec::new()), &spec, 2e-3);
        assert!(!report.accepted);
        assert!((report.bad_in_estimate - 0.30).abs() < 2e-3 * 2.0);
    }
}
