//! Specular ray transport: full path tracing through a scene and bundle
//! transport for families of parallel mirrors.

use crate::geometry::{
    ray_segment_hit, reflect_direction, DirectedLine, Direction, Hit, HitKind, Point, Segment,
    EPS_GEOM,
};
use crate::interval::IntervalSet;
use crate::scene::Scene;

/// Default reflection cap for `trace`.
pub const DEFAULT_BOUNCE_CAP: usize = 10_000;

/// Outcome of tracing one directed line through a scene.
#[derive(Debug, Clone)]
pub struct RayPath {
    pub entry: DirectedLine,
    /// Reflection points, in order of traversal.
    pub points: Vec<Point>,
    /// Index (into the materialized segment list) of the mirror hit at each
    /// reflection point.
    pub seg_hits: Vec<usize>,
    /// Exit line in canonical (foot-of-perpendicular) form. When the path is
    /// degenerate or capped this is the line of the last free run.
    pub exit: DirectedLine,
    pub bounces: usize,
    /// True when some hit landed within EPS_GEOM of a segment endpoint; the
    /// reflection there is not well defined and the path is truncated.
    pub degenerate: bool,
    /// True when the bounce cap was reached (numerical pathology; the scenes
    /// of interest do not trap rays).
    pub cap_exceeded: bool,
}

impl RayPath {
    pub fn missed(&self) -> bool {
        self.bounces == 0 && !self.degenerate
    }
}

/// Segments per leaf bounding box in [`TraceIndex`]. Generator order is
/// spatially coherent for the scenes built here, so plain consecutive chunks
/// prune well without a full tree.
const CHUNK: usize = 64;
/// Leaf boxes per coarse box; two levels keep the per-ray box scan sublinear
/// even for multi-million-segment scenes.
const SUPER: usize = 64;

#[derive(Clone, Copy)]
struct Aabb {
    lo: Point,
    hi: Point,
}

impl Aabb {
    fn empty() -> Self {
        Aabb {
            lo: Point::new(f64::INFINITY, f64::INFINITY),
            hi: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn add(&mut self, p: Point) {
        self.lo = Point::new(self.lo.x.min(p.x), self.lo.y.min(p.y));
        self.hi = Point::new(self.hi.x.max(p.x), self.hi.y.max(p.y));
    }

    fn merge(&mut self, o: Aabb) {
        self.add(o.lo);
        self.add(o.hi);
    }

    /// Entry parameter of the ray against the inflated box, or None on miss.
    /// ±inf from the divisions handles axis-parallel rays.
    fn ray_enter(&self, origin: Point, inv: Point) -> Option<f64> {
        let (tx1, tx2) = (
            (self.lo.x - EPS_GEOM - origin.x) * inv.x,
            (self.hi.x + EPS_GEOM - origin.x) * inv.x,
        );
        let (ty1, ty2) = (
            (self.lo.y - EPS_GEOM - origin.y) * inv.y,
            (self.hi.y + EPS_GEOM - origin.y) * inv.y,
        );
        let tmin = tx1.min(tx2).max(ty1.min(ty2));
        let tmax = tx1.max(tx2).min(ty1.max(ty2));
        (tmax >= tmin.max(0.0)).then_some(tmin)
    }
}

/// Materialized scene with a two-level grid of bounding boxes for nearest-hit
/// queries. Build once per scene when tracing many rays.
pub struct TraceIndex {
    segments: Vec<Segment>,
    boxes: Vec<Aabb>,
    super_boxes: Vec<Aabb>,
    radius: f64,
}

impl TraceIndex {
    pub fn new(scene: &Scene) -> Self {
        let segments = scene.materialized();
        let mut radius = 0.0f64;
        let boxes: Vec<Aabb> = segments
            .chunks(CHUNK)
            .map(|c| {
                let mut b = Aabb::empty();
                for s in c {
                    for p in [s.p, s.q] {
                        b.add(p);
                        radius = radius.max(p.norm());
                    }
                }
                b
            })
            .collect();
        let super_boxes = boxes
            .chunks(SUPER)
            .map(|c| {
                let mut b = Aabb::empty();
                for x in c {
                    b.merge(*x);
                }
                b
            })
            .collect();
        TraceIndex {
            segments,
            boxes,
            super_boxes,
            radius,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn nearest_hit(&self, origin: Point, v: Direction) -> Option<(usize, Hit)> {
        let d = v.unit();
        let inv = Point::new(1.0 / d.x, 1.0 / d.y);
        let mut best: Option<(usize, Hit)> = None;
        for (si, sb) in self.super_boxes.iter().enumerate() {
            match sb.ray_enter(origin, inv) {
                Some(t) if best.as_ref().map_or(true, |(_, b)| t <= b.t) => {}
                _ => continue,
            }
            let cb = si * SUPER;
            for (cj, bx) in self.boxes[cb..(cb + SUPER).min(self.boxes.len())].iter().enumerate() {
                match bx.ray_enter(origin, inv) {
                    Some(t) if best.as_ref().map_or(true, |(_, b)| t <= b.t) => {}
                    _ => continue,
                }
                let base = (cb + cj) * CHUNK;
                for (i, s) in self.segments[base..(base + CHUNK).min(self.segments.len())]
                    .iter()
                    .enumerate()
                {
                    if let Some(h) = ray_segment_hit(origin, v, *s) {
                        if best.as_ref().map_or(true, |(_, b)| h.t < b.t) {
                            best = Some((base + i, h));
                        }
                    }
                }
            }
        }
        best
    }

    /// Traces the full line Γ_{v,w}: the ray arrives from t = −∞ travelling
    /// along +v, reflects specularly at each mirror met, and the exit line is
    /// re-canonicalized. Mirrors hit at an endpoint flag the path degenerate
    /// and stop the trace there.
    pub fn trace(&self, v: Direction, w: Point, cap: usize) -> RayPath {
        assert!(cap >= 1);
        let entry = DirectedLine::new(v, w);

        // Back the start point out beyond the scene so the first hit search
        // only needs positive parameters.
        let back = 2.0 * self.radius.max(entry.w.norm()) + 1.0;
        let mut origin = entry.w - entry.v.unit() * back;
        let mut dir = entry.v;

        let mut points = Vec::new();
        let mut seg_hits = Vec::new();
        let mut degenerate = false;
        let mut cap_exceeded = false;
        while let Some((i, hit)) = self.nearest_hit(origin, dir) {
            if hit.kind == HitKind::Endpoint {
                degenerate = true;
                points.push(hit.point);
                seg_hits.push(i);
                break;
            }
            dir = reflect_direction(dir, self.segments[i].direction());
            // Step off the mirror so the next search does not re-hit it at t≈0.
            origin = hit.point + dir.unit() * EPS_GEOM;
            points.push(hit.point);
            seg_hits.push(i);
            if points.len() >= cap {
                cap_exceeded = true;
                break;
            }
        }

        let last = points.last().copied().unwrap_or(entry.w);
        RayPath {
            entry,
            exit: DirectedLine::new(dir, last),
            bounces: points.len(),
            points,
            seg_hits,
            degenerate,
            cap_exceeded,
        }
    }
}

/// One-shot convenience wrapper around [`TraceIndex::trace`].
pub fn trace(scene: &Scene, v: Direction, w: Point, cap: usize) -> RayPath {
    TraceIndex::new(scene).trace(v, w, cap)
}

/// Result of transporting a parallel bundle through a family of parallel
/// slope −1 mirrors: exits split by direction into the unchanged family B₂
/// and the reflected family B₃.
#[derive(Debug, Clone)]
pub struct BundleTransportResult {
    pub b2_set: IntervalSet,
    pub b3_set: IntervalSet,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    /// Exit direction of the reflected family, e^{i(π−θ)}.
    pub reflected_direction: Direction,
    pub degenerate_rays: usize,
    /// Rays whose exit direction was neither of the two admissible ones;
    /// nonzero means the scene violates the parallel-mirror hypothesis.
    pub mixed_rays: usize,
}

/// Discretizes the bundle {(v, w): v = e^{i(θ+π/2)}, offset(w) ∈ B₁} into
/// `n_rays` midpoint offsets, traces each, and bins exits by direction.
/// Measures are ray-weighted quadrature: each ray carries b₁/n_rays.
pub fn bundle_transport(
    scene: &Scene,
    theta: f64,
    b1_set: &IntervalSet,
    n_rays: usize,
) -> BundleTransportResult {
    assert!(n_rays >= 1000);
    let v = Direction::from_angle(theta + std::f64::consts::FRAC_PI_2);
    let reflected = Direction::from_angle(std::f64::consts::PI - theta);
    let b1 = b1_set.measure();
    let weight = b1 / n_rays as f64;
    let perp = v.perp().unit();

    // Spread rays across the intervals of B₁ proportionally to length, with
    // midpoint offsets inside each interval's allocation.
    let mut offsets = Vec::with_capacity(n_rays);
    let mut assigned = 0usize;
    let ivals = b1_set.intervals();
    for (i, &(a, b)) in ivals.iter().enumerate() {
        let share = if i + 1 == ivals.len() {
            n_rays - assigned
        } else {
            (((b - a) / b1) * n_rays as f64).round() as usize
        };
        let share = share.min(n_rays - assigned);
        for k in 0..share {
            offsets.push(a + (b - a) * (k as f64 + 0.5) / share as f64);
        }
        assigned += share;
    }

    let mut b2_hits: Vec<f64> = Vec::new();
    let mut b3_hits: Vec<f64> = Vec::new();
    let mut degenerate_rays = 0usize;
    let mut mixed_rays = 0usize;
    let index = TraceIndex::new(scene);
    for &r in &offsets {
        let path = index.trace(v, perp * r, DEFAULT_BOUNCE_CAP);
        if path.degenerate || path.cap_exceeded {
            degenerate_rays += 1;
            continue;
        }
        let out = path.exit.v.unit();
        if (out - v.unit()).norm() < 1e-9 {
            b2_hits.push(path.exit.offset());
        } else if (out - reflected.unit()).norm() < 1e-9 {
            b3_hits.push(path.exit.offset());
        } else {
            mixed_rays += 1;
        }
    }

    let half = weight / 2.0;
    let set_of = |hits: &[f64]| {
        IntervalSet::from_raw(hits.iter().map(|&c| (c - half, c + half)).collect())
    };
    BundleTransportResult {
        b2_set: set_of(&b2_hits),
        b3_set: set_of(&b3_hits),
        b1,
        b2: weight * b2_hits.len() as f64,
        b3: weight * b3_hits.len() as f64,
        reflected_direction: reflected,
        degenerate_rays,
        mixed_rays,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn seg(px: f64, py: f64, qx: f64, qy: f64) -> Segment {
        Segment::new(Point::new(px, py), Point::new(qx, qy))
    }

    #[test]
    fn empty_scene_exit_equals_entry() {
        let scene = Scene::from_segments(vec![]);
        let v = Direction::from_angle(0.7);
        let w = Point::new(0.3, -1.1);
        let path = trace(&scene, v, w, 100);
        assert_eq!(path.bounces, 0);
        assert!(!path.degenerate);
        let entry = DirectedLine::new(v, w);
        assert_abs_diff_eq!(path.exit.v.angle(), entry.v.angle(), epsilon = 1e-12);
        assert_abs_diff_eq!(path.exit.w.dist(entry.w), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_diagonal_mirror_turns_horizontal_ray_up() {
        // Diagonal L of the rhombus Z at θ = π/4: from (−1/sin θ, 0) to
        // (cot θ, 1); a horizontal ray at height 0.5 exits at angle π/4.
        let th = std::f64::consts::FRAC_PI_4;
        let l = seg(-1.0 / th.sin(), 0.0, 1.0 / th.tan(), 1.0);
        let scene = Scene::from_segments(vec![l]);
        let path = trace(&scene, Direction::from_angle(0.0), Point::new(0.0, 0.5), 100);
        assert_eq!(path.bounces, 1);
        assert_abs_diff_eq!(path.exit.v.angle(), th, epsilon = 1e-9);
    }

    #[test]
    fn trace_is_time_reversible() {
        let scene = Scene::from_segments(vec![
            seg(0.0, 0.0, 1.0, -1.0),
            seg(0.2, 0.9, 1.2, -0.1),
            seg(-0.5, 0.3, 0.4, 1.2),
        ]);
        let v = Direction::from_angle(1.1);
        let w = Point::new(0.05, -0.1);
        let fwd = trace(&scene, v, w, 100);
        assert!(!fwd.degenerate);
        let back = trace(&scene, fwd.exit.v.opposite(), fwd.exit.w, 100);
        assert_eq!(back.bounces, fwd.bounces);
        let rev_entry = DirectedLine::new(v.opposite(), w);
        assert_abs_diff_eq!(
            back.exit.v.angle(),
            rev_entry.v.angle(),
            epsilon = 1e-9
        );
        assert!(back.exit.w.dist(rev_entry.w) < 1e-9);
    }

    #[test]
    fn endpoint_hit_flags_degenerate() {
        let scene = Scene::from_segments(vec![seg(1.0, 0.0, 1.0, 1.0)]);
        let path = trace(&scene, Direction::from_angle(0.0), Point::new(0.0, 0.0), 100);
        assert!(path.degenerate);
    }

    #[test]
    fn bounce_cap_reported() {
        // A right-angle corner reflects a horizontal ray twice; with cap 1
        // the trace stops after the first bounce and reports the cap.
        let scene = Scene::from_segments(vec![seg(1.0, -1.0, 1.0, 1.0), seg(-1.0, 1.0, 1.0, 1.0)]);
        let full = trace(&scene, Direction::from_angle(0.9), Point::new(0.0, 0.0), 100);
        assert_eq!(full.bounces, 2);
        let capped = trace(&scene, Direction::from_angle(0.9), Point::new(0.0, 0.0), 1);
        assert!(capped.cap_exceeded);
        assert_eq!(capped.bounces, 1);
    }

    #[test]
    fn bundle_no_mirrors_passes_through() {
        let scene = Scene::from_segments(vec![]);
        let b1 = IntervalSet::single(0.0, 1.0);
        let r = bundle_transport(&scene, 0.2, &b1, 1000);
        assert_abs_diff_eq!(r.b2, r.b1, epsilon = 1e-12);
        assert_eq!(r.b3, 0.0);
        assert!(r.b3_set.is_empty());
    }

    #[test]
    fn bundle_full_mirror_reflects_everything() {
        // One slope −1 mirror long enough to intercept the whole unit-width
        // bundle inclined at θ = 0.3.
        let th = 0.3f64;
        let scene = Scene::from_segments(vec![seg(-4.0, 4.0, 4.0, -4.0)]);
        let b1 = IntervalSet::single(0.0, 1.0);
        let r = bundle_transport(&scene, th, &b1, 1000);
        assert_eq!(r.b2, 0.0);
        assert_abs_diff_eq!(r.b3, r.b1, epsilon = 1e-12);
        assert_eq!(r.mixed_rays, 0);
    }

    #[test]
    fn bundle_conservation_staggered_mirrors() {
        let th = 0.25f64;
        let scene = Scene::from_segments(vec![
            seg(0.0, 0.0, 0.6, -0.6),
            seg(0.3, 0.8, 1.1, 0.0),
        ]);
        let b1 = IntervalSet::single(-0.2, 1.3);
        let n = 4000;
        let r = bundle_transport(&scene, th, &b1, n);
        assert!(
            (r.b2 + r.b3 - r.b1).abs() <= 2.0 * r.b1 / n as f64,
            "b2+b3={} vs b1={}",
            r.b2 + r.b3,
            r.b1
        );
    }
}
