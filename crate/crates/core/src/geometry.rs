//! Planar geometry for two-sensor time-of-flight triangulation.
//!
//! All lengths are millimeters. The triangle is formed by sensor one, sensor
//! two and the target: side `A` is the range reported by sensor one, side `B`
//! the range reported by sensor two and side `C` the baseline between the two
//! sensors. The law of cosines gives the bearing of the target from sensor one,
//! measured from the sensor-one to sensor-two direction:
//!
//! ```text
//! theta = acos((A^2 + C^2 - B^2) / (2 A C))
//! target = s1 + A (cos(theta) u + sin(theta) n)
//! ```
//!
//! where `u` is the unit baseline direction and `n` its normal on the chosen
//! side. With `s1 -> s2` along `+x` and the left side selected this is
//! `x2 = x1 + A cos(theta)`, `y2 = y1 + A sin(theta)`.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s (exact by definition of the metre).
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Relative slack allowed on the law-of-cosines argument before a triple is
/// rejected as degenerate. Values within the slack are clamped to `[-1, 1]`.
pub const COLLINEAR_TOLERANCE: f64 = 1e-9;

/// A planar position in millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance_to(&self, other: Point2D) -> f64 {
        (*self - other).norm()
    }

    pub fn dot(&self, other: Point2D) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is
    /// counter-clockwise from `self`.
    pub fn cross(&self, other: Point2D) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Unit vector at `angle` radians from `+x`.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    /// Rotated a quarter turn counter-clockwise.
    pub fn perp(&self) -> Self {
        Self::new(-self.y, self.x)
    }
}

impl Add for Point2D {
    type Output = Point2D;
    fn add(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Point2D;
    fn sub(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, k: f64) -> Point2D {
        Point2D::new(self.x * k, self.y * k)
    }
}

/// Which side of the directed line from sensor one to sensor two the target is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Counter-clockwise of the sensor-one to sensor-two direction.
    Left,
    /// Clockwise of the sensor-one to sensor-two direction.
    Right,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    /// Side of the directed line `from -> to` that `p` lies on, or `None` if collinear.
    pub fn of(p: Point2D, from: Point2D, to: Point2D) -> Option<Side> {
        let c = (to - from).cross(p - from);
        if c > 0.0 {
            Some(Side::Left)
        } else if c < 0.0 {
            Some(Side::Right)
        } else {
            None
        }
    }
}

/// The two sensor positions. Their separation is the triangle side `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    s1: Point2D,
    s2: Point2D,
}

impl Baseline {
    pub fn new(s1: Point2D, s2: Point2D) -> Result<Self> {
        if !s1.is_finite() || !s2.is_finite() {
            return Err(Error::invalid("baseline endpoints must be finite"));
        }
        if s1.distance_to(s2) <= 0.0 {
            return Err(Error::invalid("baseline sensors must not coincide"));
        }
        Ok(Self { s1, s2 })
    }

    pub fn s1(&self) -> Point2D {
        self.s1
    }

    pub fn s2(&self) -> Point2D {
        self.s2
    }

    pub fn length(&self) -> f64 {
        self.s1.distance_to(self.s2)
    }

    fn direction(&self) -> Point2D {
        (self.s2 - self.s1) * (1.0 / self.length())
    }
}

/// Ranges from sensor one (`a`) and sensor two (`b`) to the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleRanges {
    a: f64,
    b: f64,
}

impl TriangleRanges {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b <= 0.0 {
            return Err(Error::invalid(format!(
                "ranges must be positive and finite, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Converts a round-trip time of flight in seconds to a one-way distance in mm.
pub fn distance_from_time(t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(format!(
            "time of flight must be finite and non-negative, got {t}"
        )));
    }
    Ok(t * SPEED_OF_LIGHT_M_PER_S * 1000.0 / 2.0)
}

/// Cosine of the bearing angle at sensor one, clamped to `[-1, 1]` when the
/// triple is collinear within [`COLLINEAR_TOLERANCE`].
fn bearing_cosine(a: f64, b: f64, c: f64) -> Result<f64> {
    let cos_arg = (a * a + c * c - b * b) / (2.0 * a * c);
    if !cos_arg.is_finite() || cos_arg.abs() > 1.0 + COLLINEAR_TOLERANCE {
        return Err(Error::DegenerateTriangle { cos_arg });
    }
    Ok(cos_arg.clamp(-1.0, 1.0))
}

/// Angle in radians between the baseline and the line from sensor one to the target.
pub fn bearing_angle(ranges: TriangleRanges, baseline: &Baseline) -> Result<f64> {
    bearing_cosine(ranges.a, ranges.b, baseline.length()).map(f64::acos)
}

/// Locates the target from its ranges to the two sensors.
pub fn triangulate(ranges: TriangleRanges, baseline: &Baseline, side: Side) -> Result<Point2D> {
    let cos_t = bearing_cosine(ranges.a, ranges.b, baseline.length())?;
    // sin(acos(c)), factored to keep precision near c = +-1
    let sin_t = ((1.0 - cos_t) * (1.0 + cos_t)).sqrt();
    let u = baseline.direction();
    let n = u.perp() * side.sign();
    Ok(baseline.s1 + (u * cos_t + n * sin_t) * ranges.a)
}

/// Exact ranges from each sensor to `target`.
pub fn forward_distances(target: Point2D, baseline: &Baseline) -> Result<TriangleRanges> {
    if !target.is_finite() {
        return Err(Error::invalid("target must be finite"));
    }
    let a = target.distance_to(baseline.s1);
    let b = target.distance_to(baseline.s2);
    if a == 0.0 || b == 0.0 {
        return Err(Error::invalid("target coincides with a sensor"));
    }
    TriangleRanges::new(a, b)
}
