//! Exact 2D primitives: points, unit directions, segments, directed lines,
//! ray-segment intersection and specular reflection.

use serde::{Deserialize, Serialize};

/// Single geometric tolerance (scene units) used for hit classification,
/// endpoint detection and perpendicularity checks.
pub const EPS_GEOM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product (signed area of the parallelogram).
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl std::ops::Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// A unit direction, kept as the angle together with its cached unit vector.
#[derive(Debug, Clone, Copy)]
pub struct Direction {
    theta: f64,
    unit: Point,
}

impl Direction {
    /// Direction at angle `theta`, normalized into [0, 2π).
    pub fn from_angle(theta: f64) -> Self {
        let t = theta.rem_euclid(std::f64::consts::TAU);
        Direction {
            theta: t,
            unit: Point::new(t.cos(), t.sin()),
        }
    }

    /// Direction of a (nonzero) vector.
    pub fn from_vector(v: Point) -> Self {
        Direction::from_angle(v.y.atan2(v.x))
    }

    pub fn angle(self) -> f64 {
        self.theta
    }

    pub fn unit(self) -> Point {
        self.unit
    }

    pub fn opposite(self) -> Direction {
        Direction::from_angle(self.theta + std::f64::consts::PI)
    }

    /// Perpendicular direction (rotated +π/2).
    pub fn perp(self) -> Direction {
        Direction::from_angle(self.theta + std::f64::consts::FRAC_PI_2)
    }
}

/// Closed line segment with distinct endpoints; the atomic mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub p: Point,
    pub q: Point,
}

impl Segment {
    pub fn new(p: Point, q: Point) -> Self {
        assert!(p.dist(q) > 0.0, "degenerate segment");
        Segment { p, q }
    }

    pub fn length(self) -> f64 {
        self.p.dist(self.q)
    }

    pub fn direction(self) -> Direction {
        Direction::from_vector(self.q - self.p)
    }

    pub fn midpoint(self) -> Point {
        (self.p + self.q) * 0.5
    }

    pub fn translate(self, dz: Point) -> Segment {
        Segment::new(self.p + dz, self.q + dz)
    }

    pub fn scale(self, k: f64) -> Segment {
        Segment::new(self.p * k, self.q * k)
    }

    /// Rotation about the origin by `phi`.
    pub fn rotate(self, phi: f64) -> Segment {
        let (s, c) = phi.sin_cos();
        let rot = |p: Point| Point::new(c * p.x - s * p.y, s * p.x + c * p.y);
        Segment::new(rot(self.p), rot(self.q))
    }
}

/// Directed line Γ_{v,w}(t) = t v + w with w ⊥ v (foot of perpendicular).
#[derive(Debug, Clone, Copy)]
pub struct DirectedLine {
    pub v: Direction,
    pub w: Point,
}

impl DirectedLine {
    /// Canonicalizes `w` by removing its component along `v`.
    pub fn new(v: Direction, w: Point) -> Self {
        let u = v.unit();
        let w = w - u * w.dot(u);
        DirectedLine { v, w }
    }

    pub fn at(self, t: f64) -> Point {
        self.w + self.v.unit() * t
    }

    /// Signed perpendicular offset r with w = r * v.perp().
    pub fn offset(self) -> f64 {
        self.w.dot(self.v.perp().unit())
    }
}

/// Specular reflection of a travel direction `v` off a mirror of direction `m`:
/// 2(v·m)m − v.
pub fn reflect_direction(v: Direction, m: Direction) -> Direction {
    let vu = v.unit();
    let mu = m.unit();
    let d = vu.dot(mu);
    Direction::from_vector(mu * (2.0 * d) - vu)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitKind {
    Interior,
    Endpoint,
}

#[derive(Debug, Clone, Copy)]
pub struct Hit {
    pub t: f64,
    pub point: Point,
    pub kind: HitKind,
}

/// First intersection of the ray origin + t v (t > EPS_GEOM) with a closed
/// segment. Hits within EPS_GEOM of an endpoint are tagged `Endpoint` so the
/// caller can flag the ray as degenerate instead of picking a reflection.
pub fn ray_segment_hit(origin: Point, v: Direction, s: Segment) -> Option<Hit> {
    let d = v.unit();
    let e = s.q - s.p;
    let denom = d.cross(e);
    let ps = s.p - origin;
    if denom.abs() < EPS_GEOM * e.norm() {
        // Ray parallel to the segment: collinear overlap handled as the
        // nearest endpoint ahead of the origin, otherwise a miss.
        if ps.cross(d).abs() > EPS_GEOM {
            return None;
        }
        let t1 = ps.dot(d);
        let t2 = (s.q - origin).dot(d);
        let t = match (t1 > EPS_GEOM, t2 > EPS_GEOM) {
            (true, true) => t1.min(t2),
            (true, false) => t1,
            (false, true) => t2,
            (false, false) => return None,
        };
        return Some(Hit {
            t,
            point: origin + d * t,
            kind: HitKind::Endpoint,
        });
    }
    // Solve origin + t d = p + u e.
    let t = ps.cross(e) / denom;
    let u = ps.cross(d) / denom;
    if t <= EPS_GEOM || !(-EPS_GEOM..=1.0 + EPS_GEOM).contains(&u) {
        return None;
    }
    let point = origin + d * t;
    let kind = if point.dist(s.p) < EPS_GEOM || point.dist(s.q) < EPS_GEOM {
        HitKind::Endpoint
    } else {
        HitKind::Interior
    };
    Some(Hit { t, point, kind })
}
