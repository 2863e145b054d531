//! Marching squares on a grayscale raster.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{self, Point};
use crate::outline::Outline;
use crate::{Error, Result};

/// Row-major grayscale image. Row 0 is the top row of the picture.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::EmptyImage);
        }
        Ok(Raster { width, height, data })
    }

    /// A raster whose pixel `(col, row)` is `f(col, row)`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(col, row));
            }
        }
        Raster::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Intensities rescaled to [0, 1]; `None` for a constant image.
    fn normalized(&self) -> Option<Vec<f64>> {
        let (lo, hi) = self
            .data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        let span = hi - lo;
        Some(self.data.iter().map(|v| (v - lo) / span).collect())
    }
}

const NONE: usize = usize::MAX;

/// Cell-edge bookkeeping. Horizontal edges join `(col, row)`–`(col+1, row)`,
/// vertical edges join `(col, row)`–`(col, row+1)`.
struct EdgeGrid {
    width: usize,
    height: usize,
}

impl EdgeGrid {
    fn horizontal(&self, col: usize, row: usize) -> usize {
        row * (self.width - 1) + col
    }

    fn vertical(&self, col: usize, row: usize) -> usize {
        (self.width - 1) * self.height + row * self.width + col
    }

    fn count(&self) -> usize {
        (self.width - 1) * self.height + self.width * (self.height - 1)
    }
}

/// Extracts the longest closed iso-contour of the min-max normalized image at
/// `threshold`.
///
/// Crossing points are linearly interpolated along cell edges and chained
/// into polylines. Saddle cells are resolved with the cell-center average.
/// Output coordinates are in pixel units with the y axis pointing up
/// (`y = height - 1 - row`).
pub fn extract_contour(image: &Raster, threshold: f64) -> Result<Outline> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    let (w, h) = (image.width, image.height);
    let values = image.normalized().ok_or(Error::NoContour)?;
    if w < 2 || h < 2 {
        return Err(Error::NoContour);
    }
    let at = |c: usize, r: usize| values[r * w + c];
    let inside = |v: f64| v > threshold;
    let grid = EdgeGrid { width: w, height: h };

    // Crossing point per edge, in (col, row) coordinates.
    let mut crossing = vec![Point::new(f64::NAN, f64::NAN); grid.count()];
    let lerp = |va: f64, vb: f64| (threshold - va) / (vb - va);
    for r in 0..h {
        for c in 0..w {
            let v = at(c, r);
            if c + 1 < w {
                let vr = at(c + 1, r);
                if inside(v) != inside(vr) {
                    crossing[grid.horizontal(c, r)] = Point::new(c as f64 + lerp(v, vr), r as f64);
                }
            }
            if r + 1 < h {
                let vd = at(c, r + 1);
                if inside(v) != inside(vd) {
                    crossing[grid.vertical(c, r)] = Point::new(c as f64, r as f64 + lerp(v, vd));
                }
            }
        }
    }

    // Each crossed edge belongs to at most two cells, hence two segments.
    let mut links = vec![[NONE; 2]; grid.count()];
    let mut link = |a: usize, b: usize| {
        for (from, to) in [(a, b), (b, a)] {
            let slot = &mut links[from];
            if slot[0] == NONE {
                slot[0] = to;
            } else {
                slot[1] = to;
            }
        }
    };
    for r in 0..h - 1 {
        for c in 0..w - 1 {
            let corners = [at(c, r), at(c + 1, r), at(c + 1, r + 1), at(c, r + 1)];
            let top = grid.horizontal(c, r);
            let right = grid.vertical(c + 1, r);
            let bottom = grid.horizontal(c, r + 1);
            let left = grid.vertical(c, r);
            let crossed: Vec<usize> = [top, right, bottom, left]
                .into_iter()
                .filter(|&e| !crossing[e].x.is_nan())
                .collect();
            match crossed.len() {
                2 => link(crossed[0], crossed[1]),
                4 => {
                    let center = corners.iter().sum::<f64>() / 4.0;
                    if inside(center) == inside(corners[0]) {
                        // Top-left and bottom-right joined through the center.
                        link(top, right);
                        link(bottom, left);
                    } else {
                        link(top, left);
                        link(bottom, right);
                    }
                }
                _ => {}
            }
        }
    }

    let mut visited = vec![false; grid.count()];
    let mut best: Option<(f64, Vec<Point>)> = None;
    let mut saw_open = false;
    let to_output = |p: Point| Point::new(p.x, (h - 1) as f64 - p.y);

    // Open chains start at edges with a single link (image border).
    for start in 0..grid.count() {
        if visited[start] || crossing[start].x.is_nan() {
            continue;
        }
        let degree = links[start].iter().filter(|&&l| l != NONE).count();
        if degree == 1 {
            saw_open = true;
            walk(start, &links, &mut visited);
        }
    }
    for start in 0..grid.count() {
        if visited[start] || crossing[start].x.is_nan() || links[start][0] == NONE {
            continue;
        }
        let (chain, closed) = walk(start, &links, &mut visited);
        if !closed {
            saw_open = true;
            continue;
        }
        let points: Vec<Point> = chain.iter().map(|&e| to_output(crossing[e])).collect();
        let length = geometry::perimeter(&points);
        if best.as_ref().map_or(true, |(l, _)| length > *l) {
            best = Some((length, points));
        }
    }

    match best {
        Some((_, points)) => Outline::new("contour", points),
        None if saw_open => Err(Error::OpenContourOnly),
        None => Err(Error::NoContour),
    }
}

/// Follows links from `start` until the chain ends or loops back. Returns the
/// visited edges and whether the chain closed.
fn walk(start: usize, links: &[[usize; 2]], visited: &mut [bool]) -> (Vec<usize>, bool) {
    let mut chain = vec![start];
    visited[start] = true;
    let mut prev = NONE;
    let mut current = start;
    loop {
        let next = links[current].iter().copied().find(|&l| l != NONE && l != prev && !visited[l]);
        match next {
            Some(n) => {
                visited[n] = true;
                chain.push(n);
                prev = current;
                current = n;
            }
            None => {
                let closes = chain.len() > 2 && links[current].contains(&start);
                return (chain, closes);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    /// Disk rendered with 8×8 supersampled pixel coverage.
    fn disk(size: usize, radius: f64) -> Raster {
        let c = (size as f64 - 1.0) / 2.0;
        Raster::from_fn(size, size, |col, row| {
            let mut hits = 0;
            for sy in 0..8 {
                for sx in 0..8 {
                    let x = col as f64 - 0.5 + (sx as f64 + 0.5) / 8.0;
                    let y = row as f64 - 0.5 + (sy as f64 + 0.5) / 8.0;
                    if (x - c) * (x - c) + (y - c) * (y - c) <= radius * radius {
                        hits += 1;
                    }
                }
            }
            hits as f64 / 64.0
        })
        .unwrap()
    }

    fn perimeter_error(radius: f64) -> f64 {
        let size = (2.0 * radius) as usize + 24;
        let outline = extract_contour(&disk(size, radius), 0.5).unwrap();
        (outline.perimeter() - 2.0 * PI * radius).abs() / (2.0 * PI * radius)
    }

    #[test]
    fn disk_perimeter_within_three_percent() {
        let raster = disk(64, 20.0);
        let outline = extract_contour(&raster, 0.5).unwrap();
        let truth = 2.0 * PI * 20.0;
        assert!((outline.perimeter() - truth).abs() / truth < 0.03);
    }

    #[test]
    fn perimeter_error_shrinks_with_radius() {
        let e10 = perimeter_error(10.0);
        let e20 = perimeter_error(20.0);
        let e40 = perimeter_error(40.0);
        assert!(e10 > e20 && e20 > e40, "{e10} {e20} {e40}");
    }

    #[test]
    fn uniform_image_has_no_contour() {
        let raster = Raster::new(16, 16, vec![0.0; 256]).unwrap();
        assert_eq!(extract_contour(&raster, 0.5), Err(Error::NoContour));
    }

    #[test]
    fn small_square_area() {
        let raster = Raster::from_fn(8, 8, |c, r| {
            if (2..6).contains(&c) && (2..6).contains(&r) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let outline = extract_contour(&raster, 0.5).unwrap();
        let area = outline.signed_area().abs();
        // Pixel count oracle: 16 pixels.
        assert!((area - 16.0).abs() / 16.0 < 0.10, "area {area}");
    }

    #[test]
    fn border_touching_region_is_open() {
        // Left half bright: the iso-line runs top to bottom and never closes.
        let raster = Raster::from_fn(10, 10, |c, _| if c < 5 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(extract_contour(&raster, 0.5), Err(Error::OpenContourOnly));
    }

    #[test]
    fn picks_longest_of_several_contours() {
        let raster = Raster::from_fn(40, 20, |c, r| {
            let big = (3..15).contains(&c) && (3..15).contains(&r);
            let speck = (25..27).contains(&c) && (5..7).contains(&r);
            if big || speck {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let outline = extract_contour(&raster, 0.5).unwrap();
        assert!(outline.perimeter() > 40.0);
    }

    #[test]
    fn saddle_cells_do_not_break_chaining() {
        // Checkerboard corner contact between two blocks.
        let raster = Raster::from_fn(12, 12, |c, r| {
            let a = (2..5).contains(&c) && (2..5).contains(&r);
            let b = (5..8).contains(&c) && (5..8).contains(&r);
            if a || b {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let outline = extract_contour(&raster, 0.5).unwrap();
        assert!(outline.len() >= 8);
        assert!(outline.validate().is_ok());
    }

    #[test]
    fn rejects_bad_threshold() {
        let raster = disk(16, 5.0);
        assert_eq!(extract_contour(&raster, 1.0), Err(Error::InvalidThreshold(1.0)));
    }
}
