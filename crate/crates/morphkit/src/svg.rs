//! SVG figures: morph strips and labeled shape grids.

use std::fmt::Write;

use morphkit_core::Point;

const CELL: f64 = 160.0;
const PAD: f64 = 12.0;
const LABEL: f64 = 18.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn bounds(points: &[Point]) -> (Point, Point) {
    points.iter().fold(
        (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}

/// One `<polygon>` centered in the cell at `(ox, oy)`; y points up in shape
/// coordinates and down in SVG.
fn polygon(out: &mut String, points: &[Point], scale: f64, ox: f64, oy: f64) {
    let (lo, hi) = bounds(points);
    let c = Point::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y));
    let coords: Vec<String> = points
        .iter()
        .map(|p| format!("{:.3},{:.3}", ox + CELL / 2.0 + (p.x - c.x) * scale, oy + CELL / 2.0 - (p.y - c.y) * scale))
        .collect();
    writeln!(out, r#"  <polygon points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, coords.join(" ")).unwrap();
}

/// Common scale fitting every shape into a cell, so sizes stay comparable.
fn common_scale(shapes: &[&[Point]]) -> f64 {
    let extent = shapes
        .iter()
        .map(|s| {
            let (lo, hi) = bounds(s);
            (hi.x - lo.x).max(hi.y - lo.y)
        })
        .fold(0.0, f64::max);
    if extent > 0.0 {
        (CELL - 2.0 * PAD) / extent
    } else {
        1.0
    }
}

fn header(out: &mut String, w: f64, h: f64) {
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(out, r#"  <rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
}

/// Shapes left to right at one scale.
pub fn morph_strip(shapes: &[Vec<Point>]) -> String {
    let refs: Vec<&[Point]> = shapes.iter().map(|s| s.as_slice()).collect();
    let scale = common_scale(&refs);
    let mut out = String::new();
    header(&mut out, CELL * shapes.len() as f64, CELL);
    for (i, s) in shapes.iter().enumerate() {
        polygon(&mut out, s, scale, CELL * i as f64, 0.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Labeled shapes in a near-square grid under a title.
pub fn labeled_grid(title: &str, entries: &[(String, Vec<Point>)]) -> String {
    let cols = (entries.len() as f64).sqrt().ceil().max(1.0) as usize;
    let rows = entries.len().div_ceil(cols).max(1);
    let refs: Vec<&[Point]> = entries.iter().map(|e| e.1.as_slice()).collect();
    let scale = common_scale(&refs);
    let (w, h) = (CELL * cols as f64, LABEL + (CELL + LABEL) * rows as f64);
    let mut out = String::new();
    header(&mut out, w, h);
    writeln!(out, r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, w / 2.0, LABEL - 4.0, escape(title)).unwrap();
    for (k, (label, pts)) in entries.iter().enumerate() {
        let (ox, oy) = (CELL * (k % cols) as f64, LABEL + (CELL + LABEL) * (k / cols) as f64);
        writeln!(out, r#"  <g class="shape">"#).unwrap();
        polygon(&mut out, pts, scale, ox, oy);
        writeln!(
            out,
            r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            ox + CELL / 2.0,
            oy + CELL + LABEL - 5.0,
            escape(label)
        )
        .unwrap();
        out.push_str("  </g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(s: f64) -> Vec<Point> {
        vec![Point::new(0.0, 0.0), Point::new(s, 0.0), Point::new(s, s), Point::new(0.0, s)]
    }

    #[test]
    fn strip_keeps_relative_size() {
        let svg = morph_strip(&[square(1.0), square(2.0)]);
        assert_eq!(svg.matches("<polygon").count(), 2);
        // The larger square spans the cell minus padding; the smaller half of it.
        assert!(svg.contains("308.000,12.000"));
        assert!(svg.contains("114.000,46.000"));
    }

    #[test]
    fn grid_is_well_formed() {
        let entries: Vec<(String, Vec<Point>)> = (0..5).map(|i| (format!("c<{i}>"), square(1.0 + i as f64))).collect();
        let svg = labeled_grid("linear & karcher", &entries);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<g class=\"shape\">").count(), 5);
        assert_eq!(svg.matches("<g ").count(), svg.matches("</g>").count());
        assert!(svg.contains("c&lt;3&gt;"));
        assert!(svg.contains("linear &amp; karcher"));
    }
}
