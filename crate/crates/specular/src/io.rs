//! Scene file format and SVG rendering.
//!
//! Scene files are plain text: a `specular-scene v1` header, optional
//! `# key value` metadata lines, then one `segment x1 y1 x2 y2` line per
//! mirror. Coordinates use Rust's shortest round-trip float formatting, so
//! a read of a written file reproduces every coordinate bit-exactly.

use crate::geometry::{Point, Segment};
use crate::scene::Scene;
use crate::tracer::RayPath;
use std::fmt::Write as _;
use thiserror::Error;

pub const SCENE_HEADER: &str = "specular-scene v1";

#[derive(Debug, Error)]
pub enum SceneFileError {
    #[error("line 1: expected header `{SCENE_HEADER}`, found `{0}`")]
    VersionMismatch(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub fn write_scene(scene: &Scene) -> String {
    let mut out = String::new();
    out.push_str(SCENE_HEADER);
    out.push('\n');
    for (k, v) in &scene.meta {
        let _ = writeln!(out, "# {k} {v}");
    }
    for s in scene.materialized() {
        let _ = writeln!(out, "segment {} {} {} {}", s.p.x, s.p.y, s.q.x, s.q.y);
    }
    out
}

pub fn read_scene(text: &str) -> Result<Scene, SceneFileError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim_end() == SCENE_HEADER => {}
        Some((_, l)) => return Err(SceneFileError::VersionMismatch(l.to_string())),
        None => return Err(SceneFileError::VersionMismatch(String::new())),
    }
    let mut scene = Scene::default();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.trim().splitn(2, ' ');
            if let Some(k) = it.next() {
                scene
                    .meta
                    .insert(k.to_string(), it.next().unwrap_or("").to_string());
            }
            continue;
        }
        let mut it = line.split_whitespace();
        if it.next() != Some("segment") {
            return Err(SceneFileError::Parse {
                line: lineno,
                msg: format!("expected `segment`, found `{line}`"),
            });
        }
        let mut coord = |name: &str| -> Result<f64, SceneFileError> {
            it.next()
                .ok_or_else(|| SceneFileError::Parse {
                    line: lineno,
                    msg: format!("missing coordinate {name}"),
                })?
                .parse()
                .map_err(|e| SceneFileError::Parse {
                    line: lineno,
                    msg: format!("bad coordinate {name}: {e}"),
                })
        };
        let (x1, y1, x2, y2) = (coord("x1")?, coord("y1")?, coord("x2")?, coord("y2")?);
        scene
            .segments
            .push(Segment::new(Point::new(x1, y1), Point::new(x2, y2)));
    }
    Ok(scene)
}

/// Extra geometry drawn alongside the mirrors: ray paths as polylines and
/// bold polygon outlines (used for the rhombus families). When outlines are
/// present the mirrors are drawn dotted, matching the mirror-figure styling.
#[derive(Debug, Default)]
pub struct SvgOverlay {
    pub paths: Vec<RayPath>,
    pub outlines: Vec<Vec<Point>>,
}

pub fn render_svg(scene: &Scene, overlay: &SvgOverlay) -> String {
    let segments = scene.materialized();
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: Point| {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    };
    for s in &segments {
        grow(s.p);
        grow(s.q);
    }
    for path in &overlay.paths {
        for &p in &path.points {
            grow(p);
        }
    }
    for poly in &overlay.outlines {
        for &p in poly {
            grow(p);
        }
    }
    if segments.is_empty() && overlay.paths.is_empty() && overlay.outlines.is_empty() {
        lo = Point::new(0.0, 0.0);
        hi = Point::new(1.0, 1.0);
    }
    let pad = 0.05 * (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
    let (x0, y0) = (lo.x - pad, lo.y - pad);
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let sw = 0.002 * w.max(h);

    // SVG y grows downward; flip so the figures read in scene orientation.
    let fy = |y: f64| y0 + h - (y - y0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0} {y0} {w} {h}\">"
    );
    let dash = if overlay.outlines.is_empty() {
        String::new()
    } else {
        format!(" stroke-dasharray=\"{} {}\"", 2.0 * sw, 2.0 * sw)
    };
    for s in &segments {
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"{sw}\"{dash}/>",
            s.p.x,
            fy(s.p.y),
            s.q.x,
            fy(s.q.y)
        );
    }
    for poly in &overlay.outlines {
        let pts: Vec<String> = poly.iter().map(|p| format!("{},{}", p.x, fy(p.y))).collect();
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\"/>",
            pts.join(" "),
            2.5 * sw
        );
    }
    for path in &overlay.paths {
        let mut pts = vec![path.entry.at(-0.25 * (w + h))];
        pts.extend_from_slice(&path.points);
        let last = path.points.last().copied().unwrap_or(path.exit.w);
        pts.push(last + path.exit.v.unit() * (0.25 * (w + h)));
        let joined: Vec<String> = pts.iter().map(|p| format!("{},{}", p.x, fy(p.y))).collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"red\" stroke-width=\"{sw}\"/>",
            joined.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_scene_is_header_only() {
        let text = write_scene(&Scene::default());
        assert_eq!(text, format!("{SCENE_HEADER}\n"));
        assert!(read_scene(&text).unwrap().is_empty());
    }

    #[test]
    fn round_trip_is_bit_exact_and_order_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let segs: Vec<Segment> = (0..500)
            .map(|_| {
                Segment::new(
                    Point::new(rng.gen::<f64>() * 3.0 - 1.5, rng.gen::<f64>()),
                    Point::new(rng.gen::<f64>() + 2.0, rng.gen::<f64>() * 1e-7),
                )
            })
            .collect();
        let mut scene = Scene::from_segments(segs.clone());
        scene.meta.insert("kind".into(), "test scene".into());
        let back = read_scene(&write_scene(&scene)).unwrap();
        assert_eq!(back.segments.len(), segs.len());
        for (a, b) in back.segments.iter().zip(&segs) {
            assert_eq!(a.p.x.to_bits(), b.p.x.to_bits());
            assert_eq!(a.p.y.to_bits(), b.p.y.to_bits());
            assert_eq!(a.q.x.to_bits(), b.q.x.to_bits());
            assert_eq!(a.q.y.to_bits(), b.q.y.to_bits());
        }
        assert_eq!(back.meta.get("kind").map(String::as_str), Some("test scene"));
    }

    #[test]
    fn version_mismatch_and_parse_errors() {
        assert!(matches!(
            read_scene("specular-scene v2\n"),
            Err(SceneFileError::VersionMismatch(_))
        ));
        let bad = format!("{SCENE_HEADER}\nsegment 0 0 1\n");
        match read_scene(&bad) {
            Err(SceneFileError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn svg_is_deterministic_and_well_formed() {
        let scene = Scene::from_segments(vec![Segment::new(
            Point::new(0.0, 0.0),
            Point::new(1.0, -1.0),
        )]);
        let a = render_svg(&scene, &SvgOverlay::default());
        let b = render_svg(&scene, &SvgOverlay::default());
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<line").count(), 1);
        let empty = render_svg(&Scene::default(), &SvgOverlay::default());
        assert!(empty.contains("</svg>"));
    }
}
