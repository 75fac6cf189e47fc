//! Planar rigid-body primitives.
//!
//! All angles are radians. Headings and rotations are kept wrapped to
//! `(-π, π]`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Wraps an angle to `(-π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Signed difference `a - b`, wrapped to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

/// A point (or free vector) in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing at `angle`.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn distance_squared(self, other: Point2) -> f64 {
        (self - other).norm_squared()
    }

    /// Angle to the x-axis.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// Rotates `p` counter-clockwise by `angle` about the origin.
pub fn rotate(p: Point2, angle: f64) -> Point2 {
    let (s, c) = angle.sin_cos();
    Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

/// A rigid roto-translation `p ↦ R(rotation)·p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Transform2 {
    pub translation: Point2,
    rotation: f64,
}

impl Transform2 {
    pub const IDENTITY: Transform2 = Transform2 {
        translation: Point2::ORIGIN,
        rotation: 0.0,
    };

    pub fn new(translation: Point2, rotation: f64) -> Self {
        Self {
            translation,
            rotation: normalize_angle(rotation),
        }
    }

    pub fn from_xyt(x: f64, y: f64, theta: f64) -> Self {
        Self::new(Point2::new(x, y), theta)
    }

    /// Rotation in `(-π, π]`.
    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        rotate(p, self.rotation) + self.translation
    }

    pub fn inverse(&self) -> Transform2 {
        Transform2::new(-rotate(self.translation, -self.rotation), -self.rotation)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Transform2) -> Transform2 {
        Transform2::new(self.apply(other.translation), self.rotation + other.rotation)
    }
}

/// Applies `t` to `p`.
pub fn apply_transform(t: &Transform2, p: Point2) -> Point2 {
    t.apply(p)
}

/// A robot pose in a world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// The pose as the transform from its local frame to the world frame.
    pub fn as_transform(&self) -> Transform2 {
        Transform2::new(self.position(), self.theta)
    }

    /// Moves by `motion` expressed in this pose's own frame.
    pub fn compose(&self, motion: &Transform2) -> Pose2 {
        let t = self.as_transform().compose(motion);
        Pose2::new(t.translation.x, t.translation.y, t.rotation())
    }

    /// Transform taking `self` to `other`, expressed in `self`'s frame.
    ///
    /// Equivalently, the map from `other`'s local coordinates into
    /// `self`'s local coordinates.
    pub fn relative(&self, other: &Pose2) -> Transform2 {
        Transform2::new(
            rotate(other.position() - self.position(), -self.theta),
            angle_diff(other.theta, self.theta),
        )
    }
}
