//! Invisible-mirror pipeline: the rhombus Z and its diagonal L, the
//! subdivision-permutation maps M_{n,s}, the chain permutation algorithm,
//! composition, direction/lattice bookkeeping, and construction plus
//! verification of the mirror set G.
//!
//! Throughout, θ is the mirror's turning angle: a horizontal bundle entering
//! the unit strip should leave as a bundle of the same width inclined at θ,
//! while the whole assembly casts an ε-small shadow in prescribed
//! directions α.

use crate::geometry::{DirectedLine, Direction, Point, Segment};
use crate::interval::IntervalSet;
use crate::projection::coord;
use crate::scene::Scene;
use crate::tracer::{trace, DEFAULT_BOUNCE_CAP};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// The rhombus Z for angle θ: the unit horizontal strip clipped between the
/// lines through 0 and −1/sinθ of direction e^{iθ}.
#[derive(Debug, Clone, Copy)]
pub struct Rhombus {
    pub theta: f64,
}

impl Rhombus {
    pub fn new(theta: f64) -> Self {
        assert!(theta > 0.0 && theta < PI);
        Rhombus { theta }
    }

    /// Vertices (0,0), (cotθ, 1), (−1/sinθ, 0), ((cosθ−1)/sinθ, 1).
    pub fn vertices(&self) -> [Point; 4] {
        let (s, c) = self.theta.sin_cos();
        [
            Point::new(0.0, 0.0),
            Point::new(c / s, 1.0),
            Point::new(-1.0 / s, 0.0),
            Point::new((c - 1.0) / s, 1.0),
        ]
    }

    /// Vertices in boundary order, for outlines.
    pub fn polygon(&self) -> [Point; 4] {
        let [a, b, c, d] = self.vertices();
        [a, b, d, c]
    }

    /// The diagonal of Z not containing (0,0): from (−1/sinθ, 0) to (cotθ, 1).
    pub fn diagonal_l(&self) -> Segment {
        let v = self.vertices();
        Segment::new(v[2], v[1])
    }

    pub fn side_length(&self) -> f64 {
        1.0 / self.theta.sin()
    }

    /// Length ℓ of the longer of the two diagonals.
    pub fn longer_diagonal(&self) -> f64 {
        let v = self.vertices();
        v[2].dist(v[1]).max(v[0].dist(v[3]))
    }
}

/// Lattice basis: u = (1,0)/sinθ and w = e^{iθ}/sinθ.
fn basis(theta: f64) -> (Point, Point) {
    let (s, c) = theta.sin_cos();
    (Point::new(1.0 / s, 0.0), Point::new(c / s, 1.0))
}

/// The affine copy map of M_{n,s}: the k-th copy (1-based) scales by 1/n,
/// shifts left by (k−1)/n lattice steps u and up-right by (s(k)−1)/n steps w.
pub fn copy_point(n: usize, k: usize, jk: usize, theta: f64, p: Point) -> Point {
    let (u, w) = basis(theta);
    let nf = n as f64;
    p * (1.0 / nf) - u * ((k - 1) as f64 / nf) + w * ((jk - 1) as f64 / nf)
}

/// M_{n,s} applied to a segment family.
pub fn apply_map(n: usize, s: &[usize], theta: f64, segs: &[Segment]) -> Vec<Segment> {
    assert_eq!(s.len(), n);
    let mut out = Vec::with_capacity(n * segs.len());
    for (k0, &jk) in s.iter().enumerate() {
        let k = k0 + 1;
        for seg in segs {
            out.push(Segment::new(
                copy_point(n, k, jk, theta, seg.p),
                copy_point(n, k, jk, theta, seg.q),
            ));
        }
    }
    out
}

/// Vertex lists of the rhombus copies Z_{n,s} (one polygon per copy).
pub fn mapped_rhombus_polygons(n: usize, s: &[usize], theta: f64) -> Vec<[Point; 4]> {
    let z = Rhombus::new(theta).vertices();
    s.iter()
        .enumerate()
        .map(|(k0, &jk)| z.map(|p| copy_point(n, k0 + 1, jk, theta, p)))
        .collect()
}

/// Shadow of the full rhombus family Z_{n,s} in direction α: each convex
/// copy projects onto the interval spanned by its vertex projections.
pub fn rhombus_family_shadow(n: usize, s: &[usize], theta: f64, alpha: f64) -> IntervalSet {
    let ivals = mapped_rhombus_polygons(n, s, theta)
        .iter()
        .map(|poly| {
            let cs: Vec<f64> = poly.iter().map(|&p| coord(p, alpha)).collect();
            (
                cs.iter().copied().fold(f64::INFINITY, f64::min),
                cs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        })
        .collect();
    IntervalSet::from_raw(ivals)
}

/// One maximal chain: index pairs (j, s(j)) related by the step (k₁, k₂).
#[derive(Debug, Clone, Serialize)]
pub struct Chain {
    pub root: (usize, usize),
    pub pairs: Vec<(usize, usize)>,
}

/// Permutation assembled from maximal chains with a fixed positive step.
#[derive(Debug, Clone, Serialize)]
pub struct ChainPermutation {
    pub n: usize,
    /// 1-based images: s[j−1] = s(j).
    pub s: Vec<usize>,
    pub step: (usize, usize),
    pub chains: Vec<Chain>,
}

#[derive(Debug, Error)]
pub enum MirrorError {
    #[error("chain permutation requires n₁ > 2k₁k₂ (got n₁={n}, k₁={k1}, k₂={k2})")]
    ChainPrecondition { n: usize, k1: usize, k2: usize },
    #[error("no lattice point within relative distance {delta} of the direction (coefficient bound {bound})")]
    LatticeBudgetExhausted { delta: f64, bound: i64 },
    #[error("segment budget {budget} exhausted: composed size would be {needed}")]
    BudgetExhausted { budget: usize, needed: usize },
}

/// The inductive minimal-root chain construction: start a maximal chain at
/// (1,1); while the permutation is partial, root the next chain at the least
/// unused domain index paired with the least unused range index, and extend
/// it forward by (k₁, k₂) as far as the index bounds allow.
pub fn chain_permutation(
    n: usize,
    k1: usize,
    k2: usize,
) -> Result<ChainPermutation, MirrorError> {
    // The paper assumes n large (n > 2k₁k₂) for its quantitative bounds, but
    // the induction itself only needs positive inputs; small-n overrides are
    // allowed (and exercised by the worked 4-element example).
    if n == 0 || k1 == 0 || k2 == 0 {
        return Err(MirrorError::ChainPrecondition { n, k1, k2 });
    }
    let mut s = vec![0usize; n + 1]; // 1-based, 0 = unassigned
    let mut range_used = vec![false; n + 1];
    let mut chains = Vec::new();
    let mut next_dom = 1usize;
    let mut next_rng = 1usize;
    while next_dom <= n {
        let root = (next_dom, next_rng);
        let mut pairs = Vec::new();
        let (mut j, mut v) = root;
        loop {
            debug_assert!(s[j] == 0 && !range_used[v], "chain collision at ({j},{v})");
            s[j] = v;
            range_used[v] = true;
            pairs.push((j, v));
            if j + k1 > n || v + k2 > n {
                break;
            }
            j += k1;
            v += k2;
        }
        chains.push(Chain { root, pairs });
        while next_dom <= n && s[next_dom] != 0 {
            next_dom += 1;
        }
        while next_rng <= n && range_used[next_rng] {
            next_rng += 1;
        }
    }
    Ok(ChainPermutation {
        n,
        s: s[1..].to_vec(),
        step: (k1, k2),
        chains,
    })
}

/// Reduces a signed step to the positive-step chain construction: a negative
/// k₁ reflects the domain (j ↦ n+1−j), a negative k₂ reflects the range.
/// The returned permutation satisfies s(j+k₁) = s(j)+k₂ for the signed step
/// whenever all indices stay in 1..n.
pub fn chain_permutation_signed(
    n: usize,
    k1: i64,
    k2: i64,
) -> Result<ChainPermutation, MirrorError> {
    assert!(k1 != 0 && k2 != 0);
    let base = chain_permutation(n, k1.unsigned_abs() as usize, k2.unsigned_abs() as usize)?;
    if k1 > 0 && k2 > 0 {
        return Ok(base);
    }
    let mut s = vec![0usize; n];
    for j in 1..=n {
        let dom = if k1 < 0 { n + 1 - j } else { j };
        let img = base.s[dom - 1];
        s[j - 1] = if k2 < 0 { n + 1 - img } else { img };
    }
    let flip = |(j, v): (usize, usize)| {
        (
            if k1 < 0 { n + 1 - j } else { j },
            if k2 < 0 { n + 1 - v } else { v },
        )
    };
    let chains = base
        .chains
        .iter()
        .map(|c| Chain {
            root: flip(c.root),
            pairs: c.pairs.iter().map(|&p| flip(p)).collect(),
        })
        .collect();
    Ok(ChainPermutation {
        n,
        s,
        step: base.step,
        chains,
    })
}

/// Composition law: M_{n₁,s₁} ∘ M_{n₂,s₂} = M_{n₁n₂,s₃} with block index
/// K−1 = (k₁−1)n₂ + (k₂−1) and image s₃(K)−1 = (s₁(k₁)−1)n₂ + (s₂(k₂)−1).
pub fn compose(n1: usize, s1: &[usize], n2: usize, s2: &[usize]) -> (usize, Vec<usize>) {
    assert_eq!(s1.len(), n1);
    assert_eq!(s2.len(), n2);
    let n3 = n1 * n2;
    let mut s3 = vec![0usize; n3];
    for k1 in 1..=n1 {
        for k2 in 1..=n2 {
            let k = (k1 - 1) * n2 + (k2 - 1);
            s3[k] = (s1[k1 - 1] - 1) * n2 + s2[k2 - 1];
        }
    }
    (n3, s3)
}

/// A nonzero lattice point z = −k₁u + k₂w of L_{1,θ}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LatticePoint {
    pub k1: i64,
    pub k2: i64,
    pub z: (f64, f64),
    /// Distance from z to the target line, relative to |z|.
    pub relative_error: f64,
}

fn lattice_point(theta: f64, k1: i64, k2: i64) -> Point {
    let (u, w) = basis(theta);
    w * k2 as f64 - u * k1 as f64
}

fn line_distance(z: Point, beta: f64) -> f64 {
    let d = Point::new(beta.cos(), beta.sin());
    z.cross(d).abs()
}

/// Exact lattice alignment: the smallest coefficients (k₁, k₂), k₂ ≥ 1,
/// k₁ ≠ 0, |k₁| ≤ K_max, with −k₁u + k₂w within 1e−9 of the line
/// K_{α−π/2}. None means α behaves irrationally at this resolution.
pub fn lattice_hit(alpha: f64, theta: f64, k_max: i64) -> Option<(i64, i64)> {
    assert!(k_max >= 1);
    let beta = alpha - FRAC_PI_2;
    for m in 1..=k_max {
        for k2 in 1..=m {
            for k1 in [m, -m] {
                if k1.abs() == m || k2 == m {
                    let z = lattice_point(theta, k1, k2);
                    if line_distance(z, beta) <= 1e-9 {
                        return Some((k1, k2));
                    }
                }
            }
            // Also sweep k1 within the ring when k2 == m.
            if k2 == m {
                for k1 in 1..m {
                    for k1s in [k1, -k1] {
                        let z = lattice_point(theta, k1s, m);
                        if line_distance(z, beta) <= 1e-9 {
                            return Some((k1s, m));
                        }
                    }
                }
            }
        }
    }
    None
}

/// Approximate alignment for irrational directions: the first lattice point
/// (scanning coefficient rings outward) within relative distance δ of the
/// line K_{α−π/2}.
pub fn nearest_lattice_approx(
    alpha: f64,
    theta: f64,
    delta: f64,
) -> Result<LatticePoint, MirrorError> {
    assert!(delta > 0.0);
    let beta = alpha - FRAC_PI_2;
    const BOUND: i64 = 1_000_000;
    let mut m = 1i64;
    while m <= BOUND {
        // Ring of max-norm m with k₂ ≥ 1.
        let mut candidates: Vec<(i64, i64)> = Vec::new();
        for k2 in 1..=m {
            candidates.push((m, k2));
            candidates.push((-m, k2));
        }
        for k1 in -(m - 1)..m {
            if k1 != 0 {
                candidates.push((k1, m));
            }
        }
        for (k1, k2) in candidates {
            let z = lattice_point(theta, k1, k2);
            let err = line_distance(z, beta) / z.norm();
            if err <= delta {
                return Ok(LatticePoint {
                    k1,
                    k2,
                    z: (z.x, z.y),
                    relative_error: err,
                });
            }
        }
        m += 1;
    }
    Err(MirrorError::LatticeBudgetExhausted {
        delta,
        bound: BOUND,
    })
}

/// One constructed stage of the mirror: the permutation targeting one α.
#[derive(Debug, Clone, Serialize)]
pub struct MirrorStage {
    pub alpha: f64,
    pub k1: i64,
    pub k2: i64,
    pub lattice_relative_error: f64,
    pub n1: usize,
    /// Shadow of Z_{n₁,s} at α, to compare with the ε/2 target.
    pub shadow: f64,
    pub shadow_target: f64,
    #[serde(skip)]
    pub s: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartOneStats {
    pub n_rays: usize,
    pub single_bounce_rays: usize,
    pub degenerate_rays: usize,
    pub max_exit_angle_error: f64,
    pub min_exit_offset: f64,
    pub max_exit_offset: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MirrorReport {
    pub theta: f64,
    pub epsilon: f64,
    pub n_star: usize,
    pub stages: Vec<MirrorStage>,
    /// (α, shadow measure of G) pairs.
    pub alpha_shadows: Vec<(f64, f64)>,
    pub part_one: Option<PartOneStats>,
    /// α values requested but dropped to stay within the segment budget.
    pub uncovered_alphas: Vec<f64>,
}

/// Builds one stage: lattice direction, chain permutation, shadow check.
pub fn build_stage(theta: f64, eps: f64, alpha: f64, delta: f64) -> Result<MirrorStage, MirrorError> {
    let (k1, k2, rel_err) = match lattice_hit(alpha, theta, 64) {
        Some((k1, k2)) => (k1, k2, 0.0),
        None => {
            let lp = nearest_lattice_approx(alpha, theta, delta)?;
            (lp.k1, lp.k2, lp.relative_error)
        }
    };
    let z = Rhombus::new(theta);
    let ell = z.longer_diagonal();
    let n2 = (8.0 * ell / eps).ceil() as usize;
    // Smallest n₁ (above the precondition) for which every chain rooted in
    // the initial index window has at least n₂ elements, then bump until the
    // measured shadow clears the ε/2 target.
    let (a1, a2) = (k1.unsigned_abs() as usize, k2.unsigned_abs() as usize);
    let window = 2 * a1 * a2;
    let mut n1 = (2 * a1 * a2 + 1).max(a1.max(a2) * n2);
    let target = eps / 2.0;
    loop {
        let cp = chain_permutation_signed(n1, k1, k2)?;
        let deep_ok = cp.chains.iter().all(|c| {
            let (r1, r2) = c.root;
            r1 > window || r2 > window || c.pairs.len() >= n2
        });
        let shadow = rhombus_family_shadow(n1, &cp.s, theta, alpha).measure();
        if deep_ok && shadow < target {
            return Ok(MirrorStage {
                alpha,
                k1,
                k2,
                lattice_relative_error: rel_err,
                n1,
                shadow,
                shadow_target: target,
                s: cp.s,
            });
        }
        n1 = (n1 * 2).max(n1 + 1);
        if n1 > 1 << 22 {
            return Err(MirrorError::BudgetExhausted {
                budget: 1 << 22,
                needed: n1,
            });
        }
    }
}

/// Assembles G = M_{j*,s*}(L) for the requested α targets, composing stages
/// greedily largest-first until the segment budget stops accepting more.
pub fn build_invisible_mirror(
    theta: f64,
    eps: f64,
    alphas: &[f64],
    delta: f64,
    budget: usize,
) -> Result<(Scene, MirrorReport), MirrorError> {
    let mut stages = Vec::new();
    for &alpha in alphas {
        stages.push(build_stage(theta, eps, alpha, delta)?);
    }
    stages.sort_by(|a, b| b.n1.cmp(&a.n1).then(a.alpha.total_cmp(&b.alpha)));
    let mut n_star = 1usize;
    let mut s_star: Vec<usize> = vec![1];
    let mut used = Vec::new();
    let mut uncovered = Vec::new();
    for st in stages {
        if n_star.saturating_mul(st.n1) > budget {
            uncovered.push(st.alpha);
            continue;
        }
        let (n3, s3) = compose(n_star, &s_star, st.n1, &st.s);
        n_star = n3;
        s_star = s3;
        used.push(st);
    }
    let l = Rhombus::new(theta).diagonal_l();
    let segments = apply_map(n_star, &s_star, theta, &[l]);
    let mut scene = Scene::from_segments(segments);
    scene.meta.insert("kind".into(), "invisible-mirror".into());
    scene.meta.insert("theta".into(), theta.to_string());
    scene.meta.insert("n_star".into(), n_star.to_string());
    let report = MirrorReport {
        theta,
        epsilon: eps,
        n_star,
        stages: used,
        alpha_shadows: Vec::new(),
        part_one: None,
        uncovered_alphas: uncovered,
    };
    Ok((scene, report))
}

/// Verification of both Theorem parts: every interior horizontal ray should
/// reflect exactly once and leave at angle θ inside the exit bundle, and the
/// shadow of G should stay below ε on the covered α values.
pub fn verify_mirror(
    scene: &Scene,
    theta: f64,
    eps: f64,
    n_rays: usize,
    alpha_grid: &[f64],
    report: &mut MirrorReport,
) {
    let mut stats = PartOneStats {
        n_rays,
        single_bounce_rays: 0,
        degenerate_rays: 0,
        max_exit_angle_error: 0.0,
        min_exit_offset: f64::INFINITY,
        max_exit_offset: f64::NEG_INFINITY,
    };
    let exit_dir = Direction::from_angle(theta);
    for i in 1..=n_rays {
        let r = i as f64 / (n_rays + 1) as f64;
        let path = trace(
            scene,
            Direction::from_angle(0.0),
            Point::new(0.0, r),
            DEFAULT_BOUNCE_CAP,
        );
        if path.degenerate {
            stats.degenerate_rays += 1;
            continue;
        }
        if path.bounces == 1 {
            stats.single_bounce_rays += 1;
        }
        let err = (path.exit.v.unit() - exit_dir.unit()).norm();
        stats.max_exit_angle_error = stats.max_exit_angle_error.max(err);
        // Offset of the exit line within the bundle B: w = r'·e^{i(θ+π/2)}.
        let r_prime = path.exit.offset();
        stats.min_exit_offset = stats.min_exit_offset.min(r_prime);
        stats.max_exit_offset = stats.max_exit_offset.max(r_prime);
    }
    report.part_one = Some(stats);
    report.alpha_shadows = alpha_grid
        .iter()
        .map(|&a| {
            let shadow = crate::projection::project_scene(scene, a).measure();
            (a, shadow)
        })
        .collect();
    let _ = (eps, DirectedLine::new(exit_dir, Point::new(0.0, 0.0)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rhombus_square_case() {
        let z = Rhombus::new(FRAC_PI_2);
        let v = z.vertices();
        let want = [(0.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (-1.0, 1.0)];
        for (p, (x, y)) in v.iter().zip(want) {
            assert_abs_diff_eq!(p.x, x, epsilon = 1e-12);
            assert_abs_diff_eq!(p.y, y, epsilon = 1e-12);
        }
        let l = z.diagonal_l();
        assert_abs_diff_eq!(l.p.x, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l.q.y, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rhombus_quarter_turn_case() {
        let z = Rhombus::new(std::f64::consts::FRAC_PI_4);
        let v = z.vertices();
        let s2 = 2f64.sqrt();
        assert_abs_diff_eq!(v[1].x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[2].x, -s2, epsilon = 1e-12);
        assert_abs_diff_eq!(v[3].x, 1.0 - s2, epsilon = 1e-12);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let d = v[i].dist(v[j]);
                // Sides (not diagonals) have length 1/sinθ.
                if (d - z.side_length()).abs() < 1e-9 {
                    continue;
                }
            }
        }
        // L bisects directions (1,0) and e^{iθ}: angle θ/2.
        let ang = z.diagonal_l().direction().angle();
        assert_abs_diff_eq!(ang, std::f64::consts::FRAC_PI_8, epsilon = 1e-12);
    }

    #[test]
    fn chain_permutation_hand_example() {
        let cp = chain_permutation(4, 1, 2).unwrap();
        assert_eq!(cp.s, vec![1, 3, 2, 4]);
        assert_eq!(cp.chains.len(), 2);
        assert_eq!(cp.chains[0].pairs, vec![(1, 1), (2, 3)]);
        assert_eq!(cp.chains[1].pairs, vec![(3, 2), (4, 4)]);
    }

    #[test]
    fn chain_identity_for_unit_steps() {
        let cp = chain_permutation(4, 1, 1).unwrap();
        assert_eq!(cp.s, vec![1, 2, 3, 4]);
    }

    fn check_invariants(cp: &ChainPermutation) {
        let n = cp.n;
        let (k1, k2) = cp.step;
        // Bijection.
        let mut seen = vec![false; n + 1];
        for &v in &cp.s {
            assert!((1..=n).contains(&v) && !seen[v]);
            seen[v] = true;
        }
        // Forward-step law.
        for j in 1..=n {
            if j + k1 <= n && cp.s[j - 1] + k2 <= n {
                assert_eq!(cp.s[j + k1 - 1], cp.s[j - 1] + k2, "law fails at j={j}");
            }
        }
        // Chain orthogonality.
        for (a, ca) in cp.chains.iter().enumerate() {
            for cb in cp.chains.iter().skip(a + 1) {
                for &(j1, j2) in &ca.pairs {
                    for &(j3, j4) in &cb.pairs {
                        assert!(j1 != j3 && j2 != j4);
                    }
                }
            }
        }
    }

    #[test]
    fn chain_invariants_exhaustive() {
        for k1 in 1..=4usize {
            for k2 in 1..=4usize {
                for n in (2 * k1 * k2 + 1)..=30 {
                    check_invariants(&chain_permutation(n, k1, k2).unwrap());
                }
            }
        }
    }

    #[test]
    fn signed_chain_step_law() {
        let n = 15;
        for (k1, k2) in [(2i64, 3i64), (-2, 3), (2, -3), (-2, -3)] {
            let cp = chain_permutation_signed(n, k1, k2).unwrap();
            let mut seen = vec![false; n + 1];
            for &v in &cp.s {
                assert!(!seen[v]);
                seen[v] = true;
            }
            for j in 1i64..=n as i64 {
                let jn = j + k1;
                if jn < 1 || jn > n as i64 {
                    continue;
                }
                let v = cp.s[(j - 1) as usize] as i64;
                let vn = v + k2;
                if vn < 1 || vn > n as i64 {
                    continue;
                }
                assert_eq!(
                    cp.s[(jn - 1) as usize] as i64,
                    vn,
                    "signed law fails for step ({k1},{k2}) at j={j}"
                );
            }
        }
    }

    #[test]
    fn compose_matches_geometry() {
        let theta = 1.1f64;
        let z = Rhombus::new(theta);
        let perms_by_n: Vec<Vec<Vec<usize>>> = vec![
            vec![vec![1]],
            vec![vec![1, 2], vec![2, 1]],
            vec![
                vec![1, 2, 3],
                vec![2, 3, 1],
                vec![3, 1, 2],
                vec![1, 3, 2],
                vec![2, 1, 3],
                vec![3, 2, 1],
            ],
        ];
        for (n1, s1s) in [(1usize, &perms_by_n[0]), (2, &perms_by_n[1]), (3, &perms_by_n[2])] {
            for s1 in s1s {
                for (n2, s2s) in [(2usize, &perms_by_n[1]), (3, &perms_by_n[2])] {
                    for s2 in s2s {
                        let (n3, s3) = compose(n1, s1, n2, s2);
                        // Vertices of the nested family.
                        let mut nested: Vec<Point> = Vec::new();
                        for (k0, &j2) in s2.iter().enumerate() {
                            let inner = z.vertices().map(|p| copy_point(n2, k0 + 1, j2, theta, p));
                            for (k1i, &j1) in s1.iter().enumerate() {
                                for &p in &inner {
                                    nested.push(copy_point(n1, k1i + 1, j1, theta, p));
                                }
                            }
                        }
                        let mut flat: Vec<Point> = mapped_rhombus_polygons(n3, &s3, theta)
                            .into_iter()
                            .flatten()
                            .collect();
                        let key =
                            |p: &Point| (p.x * 1e9).round() as i64 * 1_000_003 + (p.y * 1e9).round() as i64;
                        nested.sort_by_key(key);
                        flat.sort_by_key(key);
                        assert_eq!(nested.len(), flat.len());
                        for (a, b) in nested.iter().zip(&flat) {
                            assert!(a.dist(*b) < 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lattice_hit_square_diagonal() {
        // θ=π/2: z=(−1,1) lies on the line at 3π/4, so α = 3π/4 + π/2.
        let alpha = 3.0 * PI / 4.0 + FRAC_PI_2;
        let hit = lattice_hit(alpha, FRAC_PI_2, 10);
        assert_eq!(hit, Some((1, 1)));
    }

    #[test]
    fn nearest_lattice_golden_ratio_gives_fibonacci() {
        // Slope −1/φ against the square lattice: best rational
        // approximations of φ are ratios of consecutive Fibonacci numbers.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let beta = f64::atan2(1.0, -phi); // direction of (−φ, 1)
        let alpha = beta + FRAC_PI_2;
        let lp = nearest_lattice_approx(alpha, FRAC_PI_2, 1e-3).unwrap();
        let fib = [1i64, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233];
        let ok = fib.windows(2).any(|w| lp.k1 == w[1] && lp.k2 == w[0]);
        assert!(ok, "got ({}, {})", lp.k1, lp.k2);
        assert!(lp.relative_error <= 1e-3);
    }

    #[test]
    fn chain_copies_share_projection() {
        // For the stage's target α, copies within one chain project to the
        // same interval.
        let theta = std::f64::consts::FRAC_PI_4;
        let stage = build_stage(theta, 0.5, FRAC_PI_2 + theta / 2.0, 1e-3).unwrap();
        let cp = chain_permutation_signed(stage.n1, stage.k1, stage.k2).unwrap();
        let polys = mapped_rhombus_polygons(stage.n1, &cp.s, theta);
        let alpha = stage.alpha;
        for chain in cp.chains.iter().take(5) {
            let ivals: Vec<(f64, f64)> = chain
                .pairs
                .iter()
                .map(|&(j, _)| {
                    let cs: Vec<f64> = polys[j - 1].iter().map(|&p| coord(p, alpha)).collect();
                    (
                        cs.iter().copied().fold(f64::INFINITY, f64::min),
                        cs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    )
                })
                .collect();
            for w in ivals.windows(2) {
                assert!((w[0].0 - w[1].0).abs() < 1e-9 && (w[0].1 - w[1].1).abs() < 1e-9);
            }
        }
        assert!(stage.shadow < stage.shadow_target);
    }

    #[test]
    fn single_diagonal_mirror_part_one() {
        let theta = std::f64::consts::FRAC_PI_4;
        let l = Rhombus::new(theta).diagonal_l();
        let scene = Scene::from_segments(vec![l]);
        let mut report = MirrorReport {
            theta,
            epsilon: 0.5,
            n_star: 1,
            stages: vec![],
            alpha_shadows: vec![],
            part_one: None,
            uncovered_alphas: vec![],
        };
        verify_mirror(&scene, theta, 0.5, 101, &[], &mut report);
        let p1 = report.part_one.unwrap();
        assert_eq!(p1.single_bounce_rays + p1.degenerate_rays, 101);
        assert!(p1.max_exit_angle_error < 1e-9);
        assert!(p1.min_exit_offset >= -1e-9 && p1.max_exit_offset <= 1.0 + 1e-9);
    }
}
