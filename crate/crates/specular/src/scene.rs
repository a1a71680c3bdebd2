//! Scene: a finite ordered collection of mirror segments plus metadata.
//!
//! Large venetian-blind blocks are generated as binary "towers" (see
//! `block`); a Scene built from a tower keeps the generator alongside the
//! segment list so projection sweeps can use the recursive structure instead
//! of touching every leaf segment.

use crate::geometry::{Point, Segment};
use std::collections::BTreeMap;

/// Binary venetian-blind tower: level j (1-based) splits every segment in
/// two, the second copy translated by 2^{-j}·(1, -c_j)·scale. Leaves are
/// slope -1 segments of horizontal extent 2^{-L}·scale anchored at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    pub cots: Vec<f64>,
    pub origin: Point,
    pub scale: f64,
}

impl Tower {
    pub fn leaf_count(&self) -> u64 {
        1u64 << self.cots.len()
    }

    /// Horizontal extent of one leaf segment.
    pub fn leaf_extent(&self) -> f64 {
        self.scale * 0.5f64.powi(self.cots.len() as i32)
    }

    /// Materializes all leaf segments (2^L of them) in generator order.
    pub fn segments(&self) -> Vec<Segment> {
        let mut pos = vec![self.origin];
        for (j, &c) in self.cots.iter().enumerate() {
            let e = self.scale * 0.5f64.powi(j as i32 + 1);
            let step = Point::new(e, -e * c);
            let shifted: Vec<Point> = pos.iter().map(|&p| p + step).collect();
            pos.extend(shifted);
        }
        let w = self.leaf_extent();
        pos.into_iter()
            .map(|p| Segment::new(p, p + Point::new(w, -w)))
            .collect()
    }

    /// Axis-aligned bounding box of the leaf set, (min, max) corners.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.origin;
        let mut hi = self.origin;
        // Each level contributes its step to exactly one corner.
        for (j, &c) in self.cots.iter().enumerate() {
            let e = self.scale * 0.5f64.powi(j as i32 + 1);
            hi.x += e;
            if c >= 0.0 {
                lo.y -= e * c;
            } else {
                hi.y -= e * c;
            }
        }
        let w = self.leaf_extent();
        hi.x += w;
        lo.y -= w;
        (lo, hi)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Scene {
    pub segments: Vec<Segment>,
    pub meta: BTreeMap<String, String>,
    /// Present when the scene is exactly the leaf set of a tower.
    pub tower: Option<Tower>,
}

/// Above this leaf count a tower scene stays lazy (segments not stored).
const MATERIALIZE_LIMIT: u64 = 1 << 21;

impl Scene {
    pub fn from_segments(segments: Vec<Segment>) -> Self {
        Scene {
            segments,
            meta: BTreeMap::new(),
            tower: None,
        }
    }

    pub fn from_tower(tower: Tower) -> Self {
        let segments = if tower.leaf_count() <= MATERIALIZE_LIMIT {
            tower.segments()
        } else {
            Vec::new()
        };
        Scene {
            segments,
            meta: BTreeMap::new(),
            tower: Some(tower),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.segment_count() == 0
    }

    pub fn segment_count(&self) -> u64 {
        match &self.tower {
            Some(t) => t.leaf_count(),
            None => self.segments.len() as u64,
        }
    }

    /// Explicit segment list; materializes a lazy tower scene on demand.
    pub fn materialized(&self) -> Vec<Segment> {
        if self.segments.is_empty() {
            if let Some(t) = &self.tower {
                return t.segments();
            }
        }
        self.segments.clone()
    }

    pub fn translate(&self, dz: Point) -> Scene {
        Scene {
            segments: self.segments.iter().map(|s| s.translate(dz)).collect(),
            meta: self.meta.clone(),
            tower: self.tower.as_ref().map(|t| Tower {
                cots: t.cots.clone(),
                origin: t.origin + dz,
                scale: t.scale,
            }),
        }
    }

    pub fn scale(&self, k: f64) -> Scene {
        assert!(k > 0.0);
        Scene {
            segments: self.segments.iter().map(|s| s.scale(k)).collect(),
            meta: self.meta.clone(),
            tower: self.tower.as_ref().map(|t| Tower {
                cots: t.cots.clone(),
                origin: t.origin * k,
                scale: t.scale * k,
            }),
        }
    }

    /// Rotation about the origin; drops the tower structure (leaves stop
    /// being slope -1, so the fast projector no longer applies).
    pub fn rotate(&self, phi: f64) -> Scene {
        Scene {
            segments: self
                .materialized()
                .iter()
                .map(|s| s.rotate(phi))
                .collect(),
            meta: self.meta.clone(),
            tower: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tower_segments_match_recurrence() {
        let t = Tower {
            cots: vec![0.5, -1.0],
            origin: Point::new(0.0, 0.0),
            scale: 1.0,
        };
        let segs = t.segments();
        assert_eq!(segs.len(), 4);
        // positions: 0, (1/2, -1/4), (1/4, 1/4), (3/4, 0)
        let xs: Vec<(f64, f64)> = segs.iter().map(|s| (s.p.x, s.p.y)).collect();
        assert!(xs.contains(&(0.0, 0.0)));
        assert!(xs.contains(&(0.5, -0.25)));
        assert!(xs.contains(&(0.25, 0.25)));
        assert!(xs.contains(&(0.75, 0.0)));
    }

    #[test]
    fn tower_bbox_contains_all_leaves() {
        let t = Tower {
            cots: vec![0.3, -0.8, 2.0, -0.1],
            origin: Point::new(0.1, -0.2),
            scale: 0.7,
        };
        let (lo, hi) = t.bounding_box();
        for s in t.segments() {
            for p in [s.p, s.q] {
                assert!(p.x >= lo.x - 1e-12 && p.x <= hi.x + 1e-12);
                assert!(p.y >= lo.y - 1e-12 && p.y <= hi.y + 1e-12);
            }
        }
    }
}
