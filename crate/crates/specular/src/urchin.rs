//! The sea-urchin assembly: N thin rectangles pointing at the origin, each
//! filled with a row of translated blocks, the whole rotated N ways. Rays
//! crossing the unit disc overwhelmingly meet some spike and leave it
//! parallel to how they came, slightly displaced.

use crate::block::THETA1_MAX;
use crate::geometry::{Point, Segment};
use crate::scene::Scene;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Clone, Serialize)]
pub struct UrchinParams {
    pub epsilon: f64,
    /// Number of spikes; divisible by 4 so the axes are symmetry axes.
    pub n: usize,
    pub r1: f64,
    pub rho: f64,
    pub eps1: f64,
    /// True when the paper-scale inequalities on ε₁ hold; false in the
    /// desk-scale relaxed mode.
    pub strict: bool,
}

#[derive(Debug, Error)]
pub enum UrchinError {
    #[error("infeasible urchin parameters: {0}")]
    Infeasible(String),
    #[error("block too wide for the spike rectangle (j* < 0)")]
    BlockTooWide,
}

/// Smallest ε₁ the frozen block schedules can actually verify; the solver
/// floors relaxed-mode ε₁ here so the pipeline stays runnable.
pub const EPS1_FLOOR: f64 = 0.42;

impl UrchinParams {
    pub fn theta1(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Spacing of the block row: side of Q_{ε₁,ρ}, equal to the inner chord.
    pub fn q(&self) -> f64 {
        self.rho * (1.0 + 2.0 * self.eps1)
    }

    /// Inner rectangle vertex a_k = r₁·e^{i(k−1/2)·2π/N}.
    pub fn a(&self, k: i64) -> Point {
        let ang = (k as f64 - 0.5) * self.theta1();
        Point::new(self.r1 * ang.cos(), self.r1 * ang.sin())
    }

    /// Both paper inequalities on ε₁ as (lhs, rhs) pairs, for reporting.
    pub fn strictness(&self) -> [(f64, f64); 2] {
        let n = self.n as f64;
        [
            (
                self.eps1 * self.rho * n * n / (PI * self.r1),
                self.epsilon / (16.0 * PI),
            ),
            (n * self.eps1, self.epsilon / (16.0 * n)),
        ]
    }

    /// Desk-scale relaxation: the strict ε₁ is far below what a finite block
    /// can be certified against, so floor it at [`EPS1_FLOOR`] (keeping the
    /// chord q fixed) and clear the strict flag.
    pub fn relaxed(&self) -> UrchinParams {
        if self.eps1 >= EPS1_FLOOR {
            return self.clone();
        }
        let q = self.q();
        UrchinParams {
            eps1: EPS1_FLOOR,
            rho: q / (1.0 + 2.0 * EPS1_FLOOR),
            strict: false,
            ..self.clone()
        }
    }
}

/// Chooses (N, r₁, ρ, ε₁) for a target ε. N is the smallest multiple of 4
/// with 2π/N < arctan(1/3) unless overridden; ρ follows from the chord
/// relation q = ρ(1+2ε₁) = 2r₁·sin(π/N); ε₁ is the largest value passing
/// both strictness inequalities. Apply [`UrchinParams::relaxed`] afterwards
/// if the block generator has to certify the result numerically.
pub fn solve_parameters(
    epsilon: f64,
    n_override: Option<usize>,
    r1_override: Option<f64>,
) -> Result<UrchinParams, UrchinError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(UrchinError::Infeasible(format!(
            "epsilon must lie in (0,1], got {epsilon}"
        )));
    }
    let n = match n_override {
        Some(n) => {
            if n % 4 != 0 || TAU / n as f64 >= THETA1_MAX {
                return Err(UrchinError::Infeasible(format!(
                    "N = {n} must be divisible by 4 with 2π/N < arctan(1/3)"
                )));
            }
            n
        }
        None => {
            let mut n = 4;
            while TAU / n as f64 >= THETA1_MAX {
                n += 4;
            }
            n
        }
    };
    let r1 = r1_override.unwrap_or(0.1);
    if !(r1 > 0.0 && r1 < 1.0) {
        return Err(UrchinError::Infeasible(format!(
            "r1 must lie in (0,1), got {r1}"
        )));
    }
    let q = 2.0 * r1 * (PI / n as f64).sin();
    let nf = n as f64;
    // Both bounds are monotone in ε₁ once ρ ≤ q is used on the left, so the
    // conservative closed forms below satisfy them with margin.
    let eps1 = (epsilon * r1 / (16.0 * nf * nf * q))
        .min(epsilon / (16.0 * nf * nf))
        .min(0.999)
        * 0.99;
    let rho = q / (1.0 + 2.0 * eps1);
    let p = UrchinParams {
        epsilon,
        n,
        r1,
        rho,
        eps1,
        strict: true,
    };
    let [(l1, r1_), (l2, r2_)] = p.strictness();
    debug_assert!(l1 < r1_ && l2 < r2_);
    Ok(p)
}

/// Rectangle M′_k: adjacent vertices a_k, a_{k+1}; the other two on the unit
/// circle, on the side away from the origin. Returned in the order
/// a_k, a_{k+1}, outer above a_{k+1}, outer above a_k.
pub fn rectangle_m(k: usize, p: &UrchinParams) -> [Point; 4] {
    assert!(k < p.n);
    let ak = p.a(k as i64);
    let ak1 = p.a(k as i64 + 1);
    // Long sides run radially through the mid-angle; not containing 0 picks
    // the outward direction.
    let ang = k as f64 * p.theta1();
    let d = Point::new(ang.cos(), ang.sin());
    // |a + t d| = 1 with |a| = r₁: t² + 2t(a·d) + r₁² − 1 = 0.
    let b = ak.dot(d);
    let t = -b + (b * b + 1.0 - p.r1 * p.r1).sqrt();
    [ak, ak1, ak1 + d * t, ak + d * t]
}

/// Length of the long side of M′_k (independent of k).
pub fn spike_length(p: &UrchinParams) -> f64 {
    let ak = p.a(0);
    let d = Point::new(1.0, 0.0);
    let b = ak.dot(d);
    -b + (b * b + 1.0 - p.r1 * p.r1).sqrt()
}

/// A built urchin: the scene plus per-segment provenance (spike index k,
/// translation index j).
#[derive(Debug, Clone)]
pub struct UrchinScene {
    pub scene: Scene,
    pub provenance: Vec<(usize, usize)>,
    pub params: UrchinParams,
    pub j_star: usize,
}

/// Fills spike 0 with j*+1 translated copies of the block, then rotates the
/// row to all N spikes. The block must be a verified S_{ρ,θ₁,ε₁} for the
/// parameters' ρ and θ₁ = 2π/N.
pub fn build_urchin(p: &UrchinParams, block: &Scene) -> Result<UrchinScene, UrchinError> {
    let q = p.q();
    let a0 = p.a(0);
    // T_j maps the lower-left corner (−ρε₁, −ρε₁) of Q to a₀ + (jq, 0), so
    // T_j(Q) is the axis square [a₀x + jq, a₀x + (j+1)q] × [a₀y, a₀y + q];
    // it sits inside M′₀ exactly when (j+1)q ≤ spike length.
    let len = spike_length(p);
    if q > len {
        return Err(UrchinError::BlockTooWide);
    }
    let j_star = (len / q).floor() as usize - 1;
    debug_assert!(j_star <= (p.n as f64 / (PI * p.r1)).ceil() as usize);

    let base = block.materialized();
    let corner = Point::new(-p.rho * p.eps1, -p.rho * p.eps1);
    let mut segments: Vec<Segment> = Vec::with_capacity(base.len() * (j_star + 1) * p.n);
    let mut provenance = Vec::with_capacity(segments.capacity());
    for k in 0..p.n {
        let ang = k as f64 * p.theta1();
        let (c, s) = (ang.cos(), ang.sin());
        let rot = |z: Point| Point::new(c * z.x - s * z.y, s * z.x + c * z.y);
        for j in 0..=j_star {
            let shift = a0 + Point::new(j as f64 * q, 0.0) - corner;
            for seg in &base {
                segments.push(Segment::new(rot(seg.p + shift), rot(seg.q + shift)));
                provenance.push((k, j));
            }
        }
    }
    let mut scene = Scene::from_segments(segments);
    scene.meta.insert("kind".into(), "urchin".into());
    scene.meta.insert("n".into(), p.n.to_string());
    // Orientation of spike 0; consumers that rotate the whole scene should
    // advance this so direction-to-spike matching stays correct.
    scene.meta.insert("theta0".into(), "0".into());
    scene.meta.insert("r1".into(), p.r1.to_string());
    scene.meta.insert("rho".into(), p.rho.to_string());
    scene.meta.insert("eps1".into(), p.eps1.to_string());
    scene.meta.insert("j_star".into(), j_star.to_string());
    Ok(UrchinScene {
        scene,
        provenance,
        params: p.clone(),
        j_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{build_block, BlockSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn default_n_is_twenty() {
        let p = solve_parameters(1.0, None, None).unwrap();
        assert_eq!(p.n, 20);
        assert!(p.strict);
        assert!(p.eps1 > 0.0);
        assert_abs_diff_eq!(p.q(), 2.0 * p.r1 * (PI / 20.0).sin(), epsilon = 1e-12);
    }

    #[test]
    fn n_sixteen_rejected() {
        assert!(solve_parameters(1.0, Some(16), None).is_err());
    }

    #[test]
    fn chord_relation_and_strict_inequalities() {
        let p = solve_parameters(1.0, Some(20), Some(0.1)).unwrap();
        assert_abs_diff_eq!(p.q(), 0.0312869, epsilon = 1e-6);
        for (lhs, rhs) in p.strictness() {
            assert!(lhs < rhs, "{lhs} !< {rhs}");
        }
    }

    #[test]
    fn relaxed_mode_floors_eps1() {
        let strict = solve_parameters(0.5, Some(20), Some(0.1)).unwrap();
        let p = strict.relaxed();
        assert!(!p.strict);
        assert_eq!(p.eps1, EPS1_FLOOR);
        assert_abs_diff_eq!(p.q(), strict.q(), epsilon = 1e-15);
        // Self-consistency of the relaxed construction, not the strict bound.
        let [(l1, r1), _] = p.strictness();
        assert!(l1 > r1, "relaxed mode should violate the strict bound");
    }

    #[test]
    fn rectangle_outer_vertices_on_circle() {
        let p = solve_parameters(1.0, Some(20), Some(0.1)).unwrap();
        for k in 0..p.n {
            let m = rectangle_m(k, &p);
            assert_abs_diff_eq!(m[2].norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m[3].norm(), 1.0, epsilon = 1e-12);
            // Width q, and a genuine rectangle.
            assert_abs_diff_eq!(m[0].dist(m[1]), p.q(), epsilon = 1e-12);
            assert_abs_diff_eq!(m[2].dist(m[3]), p.q(), epsilon = 1e-12);
            let u = m[1] - m[0];
            let v = m[3] - m[0];
            assert!(u.dot(v).abs() < 1e-12);
            // Disambiguation: 0 is outside (midpoint of inner edge is the
            // nearest point of the rectangle to the origin).
            assert!((m[0] + m[1]).norm() / 2.0 > p.r1 * 0.9);
        }
    }

    fn desk_params(eps1: f64) -> UrchinParams {
        let q = 2.0 * 0.1 * (PI / 20.0).sin();
        UrchinParams {
            epsilon: 1.0,
            n: 20,
            r1: 0.1,
            rho: q / (1.0 + 2.0 * eps1),
            eps1,
            strict: false,
        }
    }

    #[test]
    fn urchin_assembly_counts_and_containment() {
        let p = desk_params(0.6);
        let spec = BlockSpec::new(p.rho, p.theta1(), p.eps1, 8).unwrap();
        let block = build_block(&spec).unwrap();
        let u = build_urchin(&p, &block).unwrap();
        let per_block = block.segment_count();
        assert_eq!(
            u.scene.segment_count(),
            per_block * (u.j_star as u64 + 1) * 20
        );
        assert_eq!(u.provenance.len(), u.scene.segments.len());
        for s in &u.scene.segments {
            assert!(s.p.norm() <= 1.0 + 1e-9 && s.q.norm() <= 1.0 + 1e-9);
        }
        assert!(u.j_star <= (20.0 / (PI * 0.1)).ceil() as usize);
    }

    #[test]
    fn urchin_rotation_invariance() {
        let p = desk_params(0.6);
        let spec = BlockSpec::new(p.rho, p.theta1(), p.eps1, 8).unwrap();
        let block = build_block(&spec).unwrap();
        let u = build_urchin(&p, &block).unwrap();
        let rotated = u.scene.rotate(p.theta1());
        // Spikes are emitted in order k = 0..N, so rotating by θ₁ maps the
        // block for spike k index-for-index onto the block for spike k+1.
        let per_spike = u.scene.segments.len() / p.n;
        for (i, s) in rotated.segments.iter().enumerate() {
            let (k, t) = (i / per_spike, i % per_spike);
            let o = u.scene.segments[(k + 1) % p.n * per_spike + t];
            assert!(s.p.dist(o.p) < 1e-12 && s.q.dist(o.q) < 1e-12);
        }
    }

    #[test]
    fn translated_squares_tile_one_interval() {
        // The j-th square covers [a₀x + jq, a₀x + (j+1)q] on the x-axis;
        // their union is a single interval of length (j*+1)q.
        let p = desk_params(0.6);
        let q = p.q();
        let len = spike_length(&p);
        let j_star = (len / q).floor() as usize - 1;
        let mut cover = crate::interval::IntervalSet::empty();
        let a0 = p.a(0);
        for j in 0..=j_star {
            cover = cover.union(&crate::interval::IntervalSet::single(
                a0.x + j as f64 * q,
                a0.x + (j + 1) as f64 * q,
            ));
        }
        assert_eq!(cover.intervals().len(), 1);
        assert_abs_diff_eq!(
            cover.measure(),
            (j_star as f64 + 1.0) * q,
            epsilon = 1e-12
        );
    }
}
