use alloc::vec::Vec;

use crate::geometry::{self, Point};
use crate::outline::Outline;
use crate::{Error, Result};

/// Index of the extreme point along y (`top` picks the maximum). Ties go to
/// the point closest to the mean x.
fn extreme(points: &[Point], top: bool, mean_x: f64) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        let b = points[best];
        let better = if top { p.y > b.y } else { p.y < b.y };
        let tie = p.y == b.y && (p.x - mean_x).abs() < (b.x - mean_x).abs();
        if better || tie {
            best = i;
        }
    }
    best
}

/// Makes the outline mirror-symmetric about a vertical axis.
///
/// The outline is split at its topmost and bottommost points; the shorter
/// half (by arc length) is kept and reflected across the vertical line through
/// the mean x of the two split points.
pub fn symmetrize_vertical(outline: &Outline) -> Result<Outline> {
    let pts = outline.points();
    let n = pts.len();
    let mean_x = geometry::centroid(pts).x;
    let top = extreme(pts, true, mean_x);
    let bottom = extreme(pts, false, mean_x);
    if top == bottom || pts[top] == pts[bottom] {
        return Err(Error::DegenerateSplit);
    }

    let arc = |from: usize, to: usize| -> Vec<Point> {
        let len = (to + n - from) % n + 1;
        (0..len).map(|k| pts[(from + k) % n]).collect()
    };
    let forward = arc(top, bottom);
    let mut backward = arc(bottom, top);
    backward.reverse();
    let half = if geometry::polyline_length(&backward) < geometry::polyline_length(&forward) {
        backward
    } else {
        forward
    };

    let axis = 0.5 * (pts[top].x + pts[bottom].x);
    let mirror = |p: Point| Point::new(2.0 * axis - p.x, p.y);
    let last = half.len() - 1;
    let mut points = half.clone();
    if mirror(half[last]) != half[last] {
        points.push(mirror(half[last]));
    }
    for p in half[1..last].iter().rev() {
        points.push(mirror(*p));
    }
    if mirror(half[0]) != half[0] {
        points.push(mirror(half[0]));
    }
    Ok(Outline::new(outline.id.clone(), points)?.with_label(outline.label.clone()))
}
