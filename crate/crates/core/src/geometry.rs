//! Planar geometry primitives.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T: Scalar = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dist_sq(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Self) -> T {
        self.dist_sq(other).sqrt()
    }

    /// Bearing of `other` as seen from `self`, in (−π, π].
    pub fn bearing_to(&self, other: &Self) -> T {
        wrap_angle((other.y - self.y).atan2(other.x - self.x))
    }
}

/// A 3-D position; `z` is carried along but ignored by planar reasoning.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3<T: Scalar = f64> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn planar(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let mut w = a % two_pi;
    if w <= -pi {
        w = w + two_pi;
    } else if w > pi {
        w = w - two_pi;
    }
    w
}

/// Absolute angular difference in [0, π].
pub fn angle_diff<T: Scalar>(a: T, b: T) -> T {
    wrap_angle(a - b).abs()
}

/// A planar pose; `heading` is kept in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose<T: Scalar = f64> {
    pub x: T,
    pub y: T,
    pub heading: T,
}

impl<T: Scalar> Pose<T> {
    pub fn new(x: T, y: T, heading: T) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
        }
    }

    pub fn position(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }
}

/// Axis-aligned rectangle `[min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect<T: Scalar = f64> {
    pub min: Point2<T>,
    pub max: Point2<T>,
}

impl<T: Scalar> Rect<T> {
    pub fn new(min: Point2<T>, max: Point2<T>) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> T {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> T {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2<T> {
        let two = T::one() + T::one();
        Point2::new(
            (self.min.x + self.max.x) / two,
            (self.min.y + self.max.y) / two,
        )
    }

    /// Half-open containment, matching how cells are assigned to regions.
    pub fn contains(&self, p: &Point2<T>) -> bool {
        p.x >= self.min.x && p.x < self.max.x && p.y >= self.min.y && p.y < self.max.y
    }

    /// Radius of the smallest circle enclosing the rectangle.
    pub fn circumradius(&self) -> T {
        let two = T::one() + T::one();
        (self.width() * self.width() + self.height() * self.height()).sqrt() / two
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > T::zero() && self.height() > T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_keeps_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-9);
        assert!((wrap_angle(0.5 - 4.0 * PI) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn angle_diff_is_symmetric_across_the_seam() {
        let d = angle_diff(PI - 0.1, -PI + 0.1);
        assert!((d - 0.2).abs() < 1e-12);
    }

    #[test]
    fn circumradius_of_square() {
        let r = Rect::new(Point2::new(0.0, 0.0), Point2::new(4.0, 4.0));
        assert!((r.circumradius() - 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.center(), Point2::new(2.0, 2.0));
    }

    #[test]
    fn f32_points_work() {
        let a = Point2::<f32>::new(0.0, 0.0);
        let b = Point2::<f32>::new(3.0, 4.0);
        assert_eq!(a.dist(&b), 5.0);
    }
}
