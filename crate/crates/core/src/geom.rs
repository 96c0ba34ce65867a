//! Small planar geometry kit shared by every module.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector on the ground plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point2, s: f64) -> Point2 {
        Point2::new(self.x + (o.x - self.x) * s, self.y + (o.y - self.y) * s)
    }

    /// Unit vector in the same direction, `None` for the zero vector.
    pub fn normalized(self) -> Option<Point2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(Point2::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    pub fn with_altitude(self, h: f64) -> Point3 {
        Point3::new(self.x, self.y, h)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// A position in the 3D workspace; `h` is the altitude above ground.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, h: f64) -> Self {
        Point3 { x, y, h }
    }

    pub fn ground(self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn dist(self, o: Point3) -> f64 {
        let (dx, dy, dh) = (self.x - o.x, self.y - o.y, self.h - o.h);
        (dx * dx + dy * dy + dh * dh).sqrt()
    }

    pub fn lerp(self, o: Point3, s: f64) -> Point3 {
        Point3::new(
            self.x + (o.x - self.x) * s,
            self.y + (o.y - self.y) * s,
            self.h + (o.h - self.h) * s,
        )
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Rect {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    /// Closed containment: the boundary is inside.
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn inflate(&self, d: f64) -> Rect {
        Rect::new(self.x_min - d, self.y_min - d, self.x_max + d, self.y_max + d)
    }

    /// Closed rectangles share at least one point.
    pub fn intersects(&self, o: &Rect) -> bool {
        self.x_min <= o.x_max && o.x_min <= self.x_max && self.y_min <= o.y_max && o.y_min <= self.y_max
    }

    pub fn closest_point(&self, p: Point2) -> Point2 {
        Point2::new(
            p.x.clamp(self.x_min, self.x_max),
            p.y.clamp(self.y_min, self.y_max),
        )
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn distance(&self, p: Point2) -> f64 {
        p.dist(self.closest_point(p))
    }

    /// Liang-Barsky clip of the segment `p + s (q - p)`, `s` in [0, 1],
    /// against the closed rectangle. Returns the parameter interval inside.
    pub fn clip_segment(&self, p: Point2, q: Point2) -> Option<(f64, f64)> {
        let d = q - p;
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        let checks = [
            (-d.x, p.x - self.x_min),
            (d.x, self.x_max - p.x),
            (-d.y, p.y - self.y_min),
            (d.y, self.y_max - p.y),
        ];
        for (den, num) in checks {
            if den == 0.0 {
                if num < 0.0 {
                    return None;
                }
            } else {
                let r = num / den;
                if den < 0.0 {
                    lo = lo.max(r);
                } else {
                    hi = hi.min(r);
                }
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// Uniform tiling of a `[0, L1] x [0, L2]` rectangle by `nx * ny` cells.
///
/// The nominal cell size is rounded so the cells tile the rectangle exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GroundGrid {
    pub fn new(extent: [f64; 2], cell_size: f64) -> Self {
        let nx = ((extent[0] / cell_size).round() as usize).max(1);
        let ny = ((extent[1] / cell_size).round() as usize).max(1);
        GroundGrid {
            nx,
            ny,
            dx: extent[0] / nx as f64,
            dy: extent[1] / ny as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Row-major index: `j * nx + i`, row `j` along y.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn center(&self, i: usize, j: usize) -> Point2 {
        Point2::new((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dy)
    }

    pub fn center_of(&self, idx: usize) -> Point2 {
        self.center(idx % self.nx, idx / self.nx)
    }

    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn y_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy
    }

    /// Inclusive range of column indices whose centers lie in `[lo, hi]`.
    pub fn columns_between(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        span_between(lo, hi, self.dx, self.nx)
    }

    /// Inclusive range of row indices whose centers lie in `[lo, hi]`.
    pub fn rows_between(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        span_between(lo, hi, self.dy, self.ny)
    }
}

fn span_between(lo: f64, hi: f64, d: f64, n: usize) -> Option<(usize, usize)> {
    if hi < lo || n == 0 {
        return None;
    }
    // center_k = (k + 0.5) d
    let first = ((lo / d - 0.5).ceil().max(0.0)) as usize;
    let last_f = (hi / d - 0.5).floor();
    if last_f < 0.0 {
        return None;
    }
    let last = (last_f as usize).min(n - 1);
    (first <= last).then_some((first, last))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_segment_through_center() {
        let r = Rect::new(1.0, 1.0, 2.0, 2.0);
        let (a, b) = r.clip_segment(Point2::new(0.0, 1.5), Point2::new(3.0, 1.5)).unwrap();
        assert!((a - 1.0 / 3.0).abs() < 1e-12);
        assert!((b - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn clip_segment_grazing_edge_is_inside() {
        let r = Rect::new(1.0, 1.0, 2.0, 2.0);
        let hit = r.clip_segment(Point2::new(0.0, 2.0), Point2::new(3.0, 2.0));
        assert!(hit.is_some());
        let miss = r.clip_segment(Point2::new(0.0, 2.0 + 1e-9), Point2::new(3.0, 2.0 + 1e-9));
        assert!(miss.is_none());
    }

    #[test]
    fn span_between_matches_brute_force() {
        let g = GroundGrid::new([10.0, 7.0], 0.3);
        for &(lo, hi) in &[(0.0, 10.0), (1.234, 5.5), (3.0, 3.1), (-1.0, 0.1), (9.99, 12.0)] {
            let brute: Vec<usize> = (0..g.nx)
                .filter(|&i| g.x_center(i) >= lo && g.x_center(i) <= hi)
                .collect();
            match g.columns_between(lo, hi) {
                None => assert!(brute.is_empty()),
                Some((a, b)) => assert_eq!(brute, (a..=b).collect::<Vec<_>>()),
            }
        }
    }

    #[test]
    fn grid_tiles_extent_exactly() {
        let g = GroundGrid::new([10.3, 4.1], 0.25);
        assert!((g.nx as f64 * g.dx - 10.3).abs() < 1e-12);
        assert!((g.ny as f64 * g.dy - 4.1).abs() < 1e-12);
    }
}
