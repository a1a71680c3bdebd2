//! Orthogonal projections Π_θ of scenes onto K_θ, shadow measures,
//! symmetric-difference measures against the target interval, and
//! bad-angle-set estimates over θ ranges.

use crate::geometry::Point;
use crate::interval::{IntervalSet, MERGE_GAP};
use crate::scene::{Scene, Tower};

/// Coordinate on K_θ of a point p: p·(cos θ, sin θ).
pub fn coord(p: Point, theta: f64) -> f64 {
    p.x * theta.cos() + p.y * theta.sin()
}

/// Projection of a scene at angle θ as a normalized IntervalSet. Each
/// segment maps to one interval (possibly degenerate). Tower-backed scenes
/// use the recursive projector with an effectively unbounded cap.
pub fn project_scene(scene: &Scene, theta: f64) -> IntervalSet {
    if let Some(t) = &scene.tower {
        let (ivals, _over) = project_tower(t, theta, usize::MAX);
        return IntervalSet::from_raw(ivals);
    }
    let (c, s) = (theta.cos(), theta.sin());
    let raw = scene
        .segments
        .iter()
        .map(|seg| {
            let a = seg.p.x * c + seg.p.y * s;
            let b = seg.q.x * c + seg.q.y * s;
            (a.min(b), a.max(b))
        })
        .collect();
    IntervalSet::from_raw(raw)
}

/// Projection of a tower scene computed bottom-up along the binary
/// structure: the level-j shadow is the union of the level-(j+1) shadow with
/// its own translate. Runs in time proportional to the interval counts that
/// actually arise instead of the 2^L leaf count.
///
/// When the interval list exceeds `cap`, the smallest gaps are closed; the
/// accumulated closed-gap total is returned so callers can treat the result
/// as an upper bound with known slack (`over`).
pub fn project_tower(tower: &Tower, theta: f64, cap: usize) -> (Vec<(f64, f64)>, f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let base = coord(tower.origin, theta);
    let w = tower.leaf_extent() * (c - s);
    let mut cur: Vec<(f64, f64)> = vec![(base + w.min(0.0), base + w.max(0.0))];
    let mut over = 0.0;
    let l = tower.cots.len();
    let mut buf: Vec<(f64, f64)> = Vec::new();
    for j in (1..=l).rev() {
        let e = tower.scale * 0.5f64.powi(j as i32);
        let a = e * (c - tower.cots[j - 1] * s);
        // Merge cur with cur shifted by a (both sorted and disjoint).
        buf.clear();
        buf.reserve(cur.len() * 2);
        let (mut i1, mut i2) = (0usize, 0usize);
        let push = |buf: &mut Vec<(f64, f64)>, iv: (f64, f64)| match buf.last_mut() {
            Some(last) if iv.0 <= last.1 + MERGE_GAP => last.1 = last.1.max(iv.1),
            _ => buf.push(iv),
        };
        while i1 < cur.len() || i2 < cur.len() {
            let take_first = if i1 == cur.len() {
                false
            } else if i2 == cur.len() {
                true
            } else {
                cur[i1].0 <= cur[i2].0 + a
            };
            if take_first {
                push(&mut buf, cur[i1]);
                i1 += 1;
            } else {
                push(&mut buf, (cur[i2].0 + a, cur[i2].1 + a));
                i2 += 1;
            }
        }
        std::mem::swap(&mut cur, &mut buf);
        // Slack already incurred can be duplicated by the union with the
        // shifted copy, so it compounds at most twofold per level.
        over *= 2.0;
        if cur.len() > cap {
            over += close_smallest_gaps(&mut cur, cap);
        }
    }
    (cur, over)
}

/// Inner (lower ⊆ true ⊆ upper) and outer approximations of a tower shadow,
/// both kept to at most `cap` intervals per level: the outer set closes the
/// smallest gaps, the inner set drops the shortest intervals. Subset
/// relations survive union-with-translate, so the bracket is rigorous at the
/// top. `exact` is set when no truncation ever fired (lower = upper = true).
pub struct ShadowBracket {
    pub lower: Vec<(f64, f64)>,
    pub upper: Vec<(f64, f64)>,
    pub exact: bool,
}

impl ShadowBracket {
    pub fn lower_measure(&self) -> f64 {
        self.lower.iter().map(|(a, b)| b - a).sum()
    }
    pub fn upper_measure(&self) -> f64 {
        self.upper.iter().map(|(a, b)| b - a).sum()
    }
}

fn merge_shifted(cur: &[(f64, f64)], a: f64, buf: &mut Vec<(f64, f64)>) {
    buf.clear();
    buf.reserve(cur.len() * 2);
    let (mut i1, mut i2) = (0usize, 0usize);
    let push = |buf: &mut Vec<(f64, f64)>, iv: (f64, f64)| match buf.last_mut() {
        Some(last) if iv.0 <= last.1 + MERGE_GAP => last.1 = last.1.max(iv.1),
        _ => buf.push(iv),
    };
    while i1 < cur.len() || i2 < cur.len() {
        let take_first = if i1 == cur.len() {
            false
        } else if i2 == cur.len() {
            true
        } else {
            cur[i1].0 <= cur[i2].0 + a
        };
        if take_first {
            push(buf, cur[i1]);
            i1 += 1;
        } else {
            push(buf, (cur[i2].0 + a, cur[i2].1 + a));
            i2 += 1;
        }
    }
}

/// Cheap rigorous upper bound on the tower's shadow measure at `theta`.
/// The shadow is a union of 2^{i-1} translates of the level-i subtree
/// shadow, and the latter fits inside one interval whose length is the sum
/// of the remaining projected shift lengths plus the leaf shadow; minimize
/// the product over the split level i.
pub fn tower_shadow_span_bound(tower: &Tower, theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    let l = tower.cots.len();
    let leaf = tower.leaf_extent() * (c - s).abs();
    // suffix[i] = span of the subtree rooted below level i (1-based levels).
    let mut span = leaf;
    let mut best = f64::INFINITY;
    let mut copies = (1u64 << l) as f64;
    for j in (1..=l).rev() {
        let e = tower.scale * 0.5f64.powi(j as i32);
        span += (e * (c - tower.cots[j - 1] * s)).abs();
        copies /= 2.0;
        best = best.min(copies * span);
    }
    best
}

pub fn project_tower_bracket(tower: &Tower, theta: f64, cap: usize) -> ShadowBracket {
    let (c, s) = (theta.cos(), theta.sin());
    let base = coord(tower.origin, theta);
    let w = tower.leaf_extent() * (c - s);
    let leaf = vec![(base + w.min(0.0), base + w.max(0.0))];
    let mut lower = leaf.clone();
    let mut upper = leaf;
    let mut exact = true;
    let mut buf: Vec<(f64, f64)> = Vec::new();
    for j in (1..=tower.cots.len()).rev() {
        let e = tower.scale * 0.5f64.powi(j as i32);
        let a = e * (c - tower.cots[j - 1] * s);
        merge_shifted(&upper, a, &mut buf);
        std::mem::swap(&mut upper, &mut buf);
        if upper.len() > cap {
            close_smallest_gaps(&mut upper, cap);
            exact = false;
        }
        if exact {
            lower.clone_from(&upper);
        } else {
            merge_shifted(&lower, a, &mut buf);
            std::mem::swap(&mut lower, &mut buf);
            if lower.len() > cap {
                drop_shortest_intervals(&mut lower, cap);
            }
        }
    }
    ShadowBracket {
        lower,
        upper,
        exact,
    }
}

/// Removes the shortest intervals until at most `cap` remain (inner
/// approximation).
fn drop_shortest_intervals(ivals: &mut Vec<(f64, f64)>, cap: usize) {
    let k = ivals.len() - cap;
    let mut lens: Vec<(f64, usize)> = ivals
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (b - a, i))
        .collect();
    let (low, nth, _) = lens.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
    let mut drop = vec![false; ivals.len()];
    for &(_, i) in low.iter().chain(std::iter::once(&*nth)) {
        drop[i] = true;
    }
    let mut idx = 0;
    ivals.retain(|_| {
        let keep = !drop[idx];
        idx += 1;
        keep
    });
}

/// Closes the smallest inter-interval gaps until at most `cap` intervals
/// remain; returns the total measure added by the closures.
fn close_smallest_gaps(ivals: &mut Vec<(f64, f64)>, cap: usize) -> f64 {
    let k = ivals.len() - cap;
    let mut gaps: Vec<(f64, usize)> = ivals
        .windows(2)
        .enumerate()
        .map(|(i, w)| (w[1].0 - w[0].1, i))
        .collect();
    let (low, nth, _) = gaps.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
    let mut close = vec![false; ivals.len() - 1];
    let mut closed = 0.0;
    for &(g, i) in low.iter().chain(std::iter::once(&*nth)) {
        close[i] = true;
        closed += g;
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(cap);
    out.push(ivals[0]);
    for (i, &iv) in ivals.iter().enumerate().skip(1) {
        if close[i - 1] {
            let last = out.last_mut().unwrap();
            last.1 = last.1.max(iv.1);
        } else {
            out.push(iv);
        }
    }
    *ivals = out;
    closed
}

/// Leb(Π_θ(scene) ⊖ [0, ρ]).
pub fn symdiff_measure(scene: &Scene, theta: f64, rho: f64) -> f64 {
    let shadow = project_scene(scene, theta);
    shadow.symdiff(&IntervalSet::single(0.0, rho)).measure()
}

#[derive(Debug, Clone)]
pub struct BadAngleEstimate {
    pub estimate: f64,
    pub bad_list: Vec<f64>,
    pub grid_step: f64,
}

/// Grid sweep of a per-θ predicate over [θ_a, θ_b]; the estimate is
/// grid_step × (number of failing grid angles) — grid-resolution-limited.
pub fn bad_angle_measure<F>(
    range: (f64, f64),
    grid_step: f64,
    mut predicate: F,
) -> BadAngleEstimate
where
    F: FnMut(f64) -> bool,
{
    let (a, b) = range;
    assert!(a < b && grid_step > 0.0);
    assert!(grid_step <= (b - a) / 100.0, "grid too coarse for the range");
    let mut bad_list = Vec::new();
    let mut theta = a + grid_step;
    while theta < b {
        if !predicate(theta) {
            bad_list.push(theta);
        }
        theta += grid_step;
    }
    BadAngleEstimate {
        estimate: grid_step * bad_list.len() as f64,
        bad_list,
        grid_step,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Segment;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn seg(x1: f64, y1: f64, x2: f64, y2: f64) -> Segment {
        Segment::new(Point::new(x1, y1), Point::new(x2, y2))
    }

    #[test]
    fn slope_minus_one_segment_shadows() {
        let sc = Scene::from_segments(vec![seg(0.0, 0.0, 1.0, -1.0)]);
        let p = project_scene(&sc, 0.0);
        assert_eq!(p.intervals(), &[(0.0, 1.0)]);
        // Projection direction parallel to the segment: degenerate point.
        let p = project_scene(&sc, FRAC_PI_4);
        assert!(p.measure() < 1e-12);
    }

    #[test]
    fn tower_projector_matches_leaf_projection() {
        let t = Tower {
            cots: vec![0.4, -1.2, 2.3, -0.05, 0.9],
            origin: Point::new(-0.3, 0.2),
            scale: 0.8,
        };
        let lazy = Scene {
            segments: Vec::new(),
            meta: Default::default(),
            tower: Some(t.clone()),
        };
        let explicit = Scene::from_segments(t.segments());
        for i in 0..40 {
            let theta = 1e-3 + PI * (i as f64) / 40.0;
            let a = project_scene(&lazy, theta);
            let b = project_scene(&explicit, theta);
            assert!(
                (a.measure() - b.measure()).abs() < 1e-12,
                "theta={theta}: {} vs {}",
                a.measure(),
                b.measure()
            );
        }
    }

    #[test]
    fn capped_projection_is_upper_bound_with_tracked_slack() {
        let t = Tower {
            cots: vec![0.1, 0.3, -0.2, 0.7, -1.1, 1.9, -0.6, 0.25],
            origin: Point::new(0.0, 0.0),
            scale: 1.0,
        };
        for i in 1..30 {
            let theta = PI * (i as f64) / 30.0;
            let (exact, _) = project_tower(&t, theta, usize::MAX);
            let exact_m: f64 = exact.iter().map(|(a, b)| b - a).sum();
            let (capped, over) = project_tower(&t, theta, 8);
            let capped_m: f64 = capped.iter().map(|(a, b)| b - a).sum();
            assert!(capped.len() <= 8);
            assert!(capped_m >= exact_m - 1e-12);
            assert!((capped_m - exact_m) <= over + 1e-12);
        }
    }

    #[test]
    fn symdiff_measure_examples() {
        let sc = Scene::from_segments(vec![seg(0.0, 0.0, 2.0, 0.0)]);
        assert!((symdiff_measure(&sc, 0.0, 2.0)).abs() < 1e-12);
        let empty_shadow = Scene::from_segments(vec![seg(0.0, 0.0, 0.0, 1.0)]);
        // At θ=0 a vertical segment projects to a point.
        assert!((symdiff_measure(&empty_shadow, 0.0, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_angle_measure_counts_grid_failures() {
        let est = bad_angle_measure((0.0, 1.0), 1e-3, |t| t < 0.5);
        assert!((est.estimate - 0.5).abs() < 3e-3);
        assert!(est.bad_list.iter().all(|&t| t >= 0.5));
    }

    #[test]
    fn projection_additive_over_scene_union() {
        let a = Scene::from_segments(vec![seg(0.0, 0.0, 1.0, -1.0)]);
        let b = Scene::from_segments(vec![seg(0.3, 0.5, 0.9, -0.1)]);
        let mut both = a.segments.clone();
        both.extend(b.segments.clone());
        let ab = Scene::from_segments(both);
        for i in 0..20 {
            let theta = 0.05 + (i as f64) * 0.15;
            let u = project_scene(&a, theta).union(&project_scene(&b, theta));
            let direct = project_scene(&ab, theta);
            assert!((u.measure() - direct.measure()).abs() < 1e-12);
        }
    }
}
