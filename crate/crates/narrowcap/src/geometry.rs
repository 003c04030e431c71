//! Domains, traps and the conformal map between the unit-disk exterior and
//! the ellipse exterior.
//!
//! The enclosing region is one of three shapes (unit disk, axis-aligned
//! rectangle, axis-aligned ellipse). The trap is an ellipse of semi-axes
//! `eps*a >= eps*b`, centered at `xi` and rotated by `phi`. All values are
//! immutable after construction; every operation here is a pure function.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x1 - s * self.x2, s * self.x1 + c * self.x2)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 - rhs.x1, self.x2 - rhs.x2)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x1 * rhs, self.x2 * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x1, -self.x2)
    }
}

/// Symmetric 2x2 matrix, stored as its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub const ZERO: SymMat2 = SymMat2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMat2 { xx, xy, yy }
    }

    pub fn diag(xx: f64, yy: f64) -> Self {
        SymMat2 { xx, xy: 0.0, yy }
    }

    pub fn identity_scaled(s: f64) -> Self {
        SymMat2::diag(s, s)
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy
    }

    pub fn mul_vec(self, v: Point2) -> Point2 {
        Point2::new(self.xx * v.x1 + self.xy * v.x2, self.xy * v.x1 + self.yy * v.x2)
    }

    /// v^T M v.
    pub fn quad_form(self, v: Point2) -> f64 {
        v.dot(self.mul_vec(v))
    }

    /// Trace(A B) for symmetric A, B.
    pub fn trace_product(self, other: SymMat2) -> f64 {
        self.xx * other.xx + self.yy * other.yy + 2.0 * self.xy * other.xy
    }

    /// R(angle) * M * R(-angle).
    pub fn rotated(self, angle: f64) -> SymMat2 {
        let (s, c) = angle.sin_cos();
        let m11 = c * c * self.xx - 2.0 * c * s * self.xy + s * s * self.yy;
        let m12 = c * s * (self.xx - self.yy) + (c * c - s * s) * self.xy;
        let m22 = s * s * self.xx + 2.0 * c * s * self.xy + c * c * self.yy;
        SymMat2::new(m11, m12, m22)
    }
}

impl Add for SymMat2 {
    type Output = SymMat2;
    fn add(self, rhs: SymMat2) -> SymMat2 {
        SymMat2::new(self.xx + rhs.xx, self.xy + rhs.xy, self.yy + rhs.yy)
    }
}

impl Mul<f64> for SymMat2 {
    type Output = SymMat2;
    fn mul(self, rhs: f64) -> SymMat2 {
        SymMat2::new(self.xx * rhs, self.xy * rhs, self.yy * rhs)
    }
}

/// The enclosing region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainSpec {
    /// Disk of radius 1 centered at the origin.
    UnitDisk,
    /// `[0, l] x [0, d]`.
    Rectangle { l: f64, d: f64 },
    /// `(x1/a)^2 + (x2/b)^2 <= 1` with `a >= b > 0`.
    Ellipse { a: f64, b: f64 },
}

impl DomainSpec {
    pub fn rectangle(l: f64, d: f64) -> Result<Self> {
        if !(l > 0.0 && d > 0.0 && l.is_finite() && d.is_finite()) {
            return Err(Error::InvalidDomain(format!("rectangle sides must be positive, got {l} x {d}")));
        }
        Ok(DomainSpec::Rectangle { l, d })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a >= b && b > 0.0 && a.is_finite()) {
            return Err(Error::InvalidDomain(format!("ellipse needs a >= b > 0, got ({a}, {b})")));
        }
        Ok(DomainSpec::Ellipse { a, b })
    }

    pub fn area(&self) -> f64 {
        match *self {
            DomainSpec::UnitDisk => PI,
            DomainSpec::Rectangle { l, d } => l * d,
            DomainSpec::Ellipse { a, b } => PI * a * b,
        }
    }

    /// Strict interior test.
    pub fn contains(&self, x: Point2) -> bool {
        match *self {
            DomainSpec::UnitDisk => x.norm_sq() < 1.0,
            DomainSpec::Rectangle { l, d } => x.x1 > 0.0 && x.x1 < l && x.x2 > 0.0 && x.x2 < d,
            DomainSpec::Ellipse { a, b } => {
                let u = x.x1 / a;
                let v = x.x2 / b;
                u * u + v * v < 1.0
            }
        }
    }

    /// Interior-or-boundary test (Monte Carlo walkers may start on the
    /// reflecting boundary).
    pub fn contains_closed(&self, x: Point2) -> bool {
        const EDGE: f64 = 1e-12;
        match *self {
            DomainSpec::UnitDisk => x.norm_sq() <= 1.0 + EDGE,
            DomainSpec::Rectangle { l, d } => {
                x.x1 >= -EDGE && x.x1 <= l + EDGE && x.x2 >= -EDGE && x.x2 <= d + EDGE
            }
            DomainSpec::Ellipse { a, b } => {
                let u = x.x1 / a;
                let v = x.x2 / b;
                u * u + v * v <= 1.0 + EDGE
            }
        }
    }

    /// Distance from an interior point to the boundary.
    pub fn boundary_distance(&self, x: Point2) -> f64 {
        match *self {
            DomainSpec::UnitDisk => 1.0 - x.norm(),
            DomainSpec::Rectangle { l, d } => x.x1.min(l - x.x1).min(x.x2).min(d - x.x2),
            DomainSpec::Ellipse { a, b } => ellipse_boundary_distance(a, b, x),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            DomainSpec::UnitDisk => 2.0,
            DomainSpec::Rectangle { l, d } => l.hypot(d),
            DomainSpec::Ellipse { a, .. } => 2.0 * a,
        }
    }

    /// A point well inside the domain, used as a quadrature/bisection anchor.
    pub fn interior_anchor(&self) -> Point2 {
        match *self {
            DomainSpec::UnitDisk | DomainSpec::Ellipse { .. } => Point2::ZERO,
            DomainSpec::Rectangle { l, d } => Point2::new(0.5 * l, 0.5 * d),
        }
    }
}

/// Distance from an interior point of the ellipse `(x/a)^2 + (y/b)^2 = 1`
/// to its boundary. Uses the standard single-root formulation of the
/// point-to-ellipse problem; axis points are handled separately because the
/// generic root degenerates there.
fn ellipse_boundary_distance(a: f64, b: f64, p: Point2) -> f64 {
    let x = p.x1.abs();
    let y = p.x2.abs();
    if a == b {
        return a - p.norm();
    }
    let fsq = a * a - b * b;
    if y == 0.0 {
        // On the major axis the nearest boundary point is off-axis once the
        // point lies inside the evolute extent fsq/a.
        if x >= fsq / a {
            return a - x;
        }
        let c = a * x / fsq;
        let s_sq = 1.0 - c * c;
        return ((a * c - x).powi(2) + b * b * s_sq).sqrt();
    }
    if x == 0.0 {
        return b - y;
    }
    // Largest root t* of (a x/(t+a^2))^2 + (b y/(t+b^2))^2 = 1; the nearest
    // boundary point is (a^2 x/(t*+a^2), b^2 y/(t*+b^2)).
    let f = |t: f64| {
        let u = a * x / (t + a * a);
        let v = b * y / (t + b * b);
        u * u + v * v - 1.0
    };
    let mut lo = -b * b + b * y; // f(lo) >= 0
    let mut hi = lo.abs().max(a * (x + y) + a * a);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let bx = a * a * x / (t + a * a);
    let by = b * b * y / (t + b * b);
    (bx - x).hypot(by - y)
}

/// An elliptical trap `xi + eps e^{i phi} A` where `A` has semi-axes
/// `a >= b >= 0`. The orientation is stored reduced mod pi: every formula
/// downstream depends on `phi` only through `cos 2phi` and `sin 2phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec {
    pub center: Point2,
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    phi: f64,
}

impl TrapSpec {
    pub fn new(center: Point2, a: f64, b: f64, epsilon: f64, phi: f64) -> Result<Self> {
        if !(a >= b && b >= 0.0 && a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidTrap(format!("need a >= b >= 0 with a > 0, got ({a}, {b})")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidTrap(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(center.is_finite() && phi.is_finite()) {
            return Err(Error::InvalidTrap("non-finite center or angle".into()));
        }
        Ok(TrapSpec { center, a, b, epsilon, phi: phi.rem_euclid(PI) })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        TrapSpec { phi: phi.rem_euclid(PI), ..*self }
    }

    pub fn is_slit(&self) -> bool {
        self.b == 0.0
    }

    /// True iff `x` lies in the closed trap. Slits (b = 0) have zero measure
    /// and always return false.
    pub fn contains(&self, x: Point2) -> bool {
        if self.b == 0.0 {
            return false;
        }
        let y = (x - self.center).rotate(-self.phi) * (1.0 / self.epsilon);
        let u = y.x1 / self.a;
        let v = y.x2 / self.b;
        u * u + v * v <= 1.0
    }

    /// Requires the trap to sit strictly inside the domain.
    pub fn validate_in(&self, domain: &DomainSpec) -> Result<()> {
        if !domain.contains(self.center) {
            return Err(Error::InvalidTrap("trap center lies outside the domain".into()));
        }
        let dist = domain.boundary_distance(self.center);
        if self.epsilon * self.a >= dist {
            return Err(Error::InvalidTrap(format!(
                "trap extent eps*a = {} reaches the boundary (distance {dist})",
                self.epsilon * self.a
            )));
        }
        Ok(())
    }
}

/// Joukowski parameters `alpha = (a+b)/2`, `beta = (a-b)/2` of a trap with
/// semi-axes `a >= b >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseFrame {
    pub alpha: f64,
    pub beta: f64,
}

impl EllipseFrame {
    pub fn from_axes(a: f64, b: f64) -> Self {
        EllipseFrame { alpha: 0.5 * (a + b), beta: 0.5 * (a - b) }
    }
}

/// `y = alpha z + beta / z`, mapping the exterior of the unit disk onto the
/// exterior of the ellipse with semi-axes `(a, b)`; `|z| = 1` traces the
/// ellipse boundary `(a cos t, b sin t)`.
pub fn joukowski(z: Complex64, frame: &EllipseFrame) -> Result<Complex64> {
    if z.norm() < 1.0 - 1e-12 {
        return Err(Error::OutOfRegion(format!("joukowski requires |z| >= 1, got {}", z.norm())));
    }
    Ok(frame.alpha * z + frame.beta / z)
}

/// Inverse of [`joukowski`]: the branch `z = (y + sqrt(y^2 - 4 alpha beta)) / (2 alpha)`
/// with `|z| >= 1`. Points strictly inside the ellipse have no exterior
/// preimage and are rejected.
pub fn inverse_joukowski(y: Complex64, frame: &EllipseFrame) -> Result<Complex64> {
    let alpha = frame.alpha;
    let beta = frame.beta;
    let disc = (y * y - 4.0 * alpha * beta).sqrt();
    // Pick the sign that avoids cancellation, then recover the other root
    // from z+ z- = beta/alpha.
    let big = if (y + disc).norm() >= (y - disc).norm() { y + disc } else { y - disc };
    let z1 = big / (2.0 * alpha);
    let z = if z1.norm() >= 1.0 {
        z1
    } else if z1.norm() > 0.0 {
        Complex64::new(beta / alpha, 0.0) / z1
    } else {
        z1
    };
    if z.norm() < 1.0 - 1e-9 {
        return Err(Error::OutOfRegion(format!(
            "point {y} lies inside the ellipse; no exterior preimage (|z| = {})",
            z.norm()
        )));
    }
    Ok(z)
}
