//! Basic 2D texel-space geometry: points, boxes, and the rigid pose applied
//! to charts before packing.
//!
//! Coordinates are continuous texels with y growing downward, so "top" means
//! smaller y throughout the crate.

use serde::{Deserialize, Serialize};

/// A 2D point in texel coordinates. Serializes as `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

/// Axis-aligned bounding box; `min <= max` componentwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn from_points<'a, I: IntoIterator<Item = &'a Point>>(points: I) -> Self {
        let mut it = points.into_iter();
        let first = *it.next().expect("empty point set has no bounding box");
        let mut b = Aabb { min: first, max: first };
        for p in it {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        b
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p.x >= self.min.x - tol
            && p.x <= self.max.x + tol
            && p.y >= self.min.y - tol
            && p.y <= self.max.y + tol
    }
}

/// Rotation by a multiple of 90 degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u32 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    pub fn from_degrees(deg: u32) -> Option<Rotation> {
        match deg {
            0 => Some(Rotation::R0),
            90 => Some(Rotation::R90),
            180 => Some(Rotation::R180),
            270 => Some(Rotation::R270),
            _ => None,
        }
    }

    /// One quarter turn: (x, y) -> (-y, x).
    pub fn apply(self, p: Point) -> Point {
        match self {
            Rotation::R0 => p,
            Rotation::R90 => Point::new(-p.y, p.x),
            Rotation::R180 => Point::new(-p.x, -p.y),
            Rotation::R270 => Point::new(p.y, -p.x),
        }
    }
}

/// The rigid pose a chart is put into before packing: optional free-angle
/// pre-rotation, a quarter-turn, and axis reflections, in that order.
///
/// After the pose the chart is re-anchored so its bounding box starts at the
/// origin; `Placement::translation` is then the atlas position of that corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub prerotation: f64,
    pub rotation: Rotation,
    pub reflect_x: bool,
    pub reflect_y: bool,
}

impl Pose {
    pub fn identity() -> Self {
        Pose { prerotation: 0.0, rotation: Rotation::R0, reflect_x: false, reflect_y: false }
    }

    pub fn apply(&self, p: Point) -> Point {
        let mut q = rotate(p, self.prerotation);
        q = self.rotation.apply(q);
        if self.reflect_x {
            q.x = -q.x;
        }
        if self.reflect_y {
            q.y = -q.y;
        }
        q
    }
}

/// Rotate about the origin by `angle` radians (y-down frame).
pub fn rotate(p: Point, angle: f64) -> Point {
    if angle == 0.0 {
        return p;
    }
    let (s, c) = angle.sin_cos();
    Point::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

/// Pose every vertex and re-anchor the result so the bounding box corner sits
/// at the origin. Returns the anchored vertices and the posed extents.
pub fn pose_anchored(vertices: &[Point], pose: &Pose) -> (Vec<Point>, f64, f64) {
    let posed: Vec<Point> = vertices.iter().map(|&v| pose.apply(v)).collect();
    let bb = Aabb::from_points(&posed);
    let anchored = posed
        .iter()
        .map(|p| Point::new(p.x - bb.min.x, p.y - bb.min.y))
        .collect();
    (anchored, bb.width(), bb.height())
}

/// Signed area of a triangle (positive when wound counter-clockwise in the
/// y-down frame's orientation convention).
pub fn triangle_area_signed(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Reduced fraction in (0, 1], used for per-chart final scales.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "fraction denominator must be positive");
        let g = gcd(num.max(1), den);
        Fraction { num: num / g, den: den / g }
    }

    pub fn one() -> Self {
        Fraction { num: 1, den: 1 }
    }

    /// Product of two fractions, reduced with 128-bit intermediates.
    pub fn mul(self, other: Fraction) -> Fraction {
        let n = self.num as u128 * other.num as u128;
        let d = self.den as u128 * other.den as u128;
        let g = gcd128(n.max(1), d);
        Fraction { num: (n / g) as u64, den: (d / g) as u64 }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aabb_from_points() {
        let pts = [Point::new(1.0, 2.0), Point::new(5.0, 2.0), Point::new(3.0, 7.0)];
        let bb = Aabb::from_points(&pts);
        assert_eq!(bb.min, Point::new(1.0, 2.0));
        assert_eq!(bb.max, Point::new(5.0, 7.0));
    }

    #[test]
    fn aabb_translation_equivariance() {
        let pts = [Point::new(0.0, 0.0), Point::new(8.0, 0.0), Point::new(0.0, 8.0)];
        let shifted: Vec<Point> = pts.iter().map(|p| Point::new(p.x + 10.0, p.y + 10.0)).collect();
        let a = Aabb::from_points(&pts);
        let b = Aabb::from_points(&shifted);
        assert_eq!(b.min, Point::new(a.min.x + 10.0, a.min.y + 10.0));
        assert_eq!(b.max, Point::new(a.max.x + 10.0, a.max.y + 10.0));
    }

    #[test]
    fn quarter_turn_swaps_extents() {
        let pts = [Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 4.0)];
        let pose = Pose { rotation: Rotation::R90, ..Pose::identity() };
        let (anchored, w, h) = pose_anchored(&pts, &pose);
        assert_eq!((w, h), (4.0, 10.0));
        let bb = Aabb::from_points(&anchored);
        assert_eq!(bb.min, Point::new(0.0, 0.0));
    }

    #[test]
    fn fraction_reduces() {
        let f = Fraction::new(40, 64);
        assert_eq!((f.num, f.den), (5, 8));
        let p = Fraction::new(1, 2).mul(Fraction::new(2, 3));
        assert_eq!((p.num, p.den), (1, 3));
    }
}
