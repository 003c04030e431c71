//! Neumann Green's function for the elliptical domain
//! `(x1/a)^2 + (x2/b)^2 <= 1`, `a > b`, as an image series in elliptic
//! coordinates `x1 = f cosh(xi) cos(eta)`, `x2 = f sinh(xi) sin(eta)` with
//! `f = sqrt(a^2 - b^2)`.
//!
//! The series ratio is `gamma^2`, `gamma = (a-b)/(a+b)`, so a handful of
//! terms suffice for moderate aspect ratios. The eight image factors are
//! reconstructed from the separated-variables solution on the coordinate
//! strip (Neumann wall at `xi = xi_b`, source plus mirror source at
//! `(xi0, eta0)` and `(-xi0, -eta0)` to enforce evenness across the focal
//! segment); at coincidence they reduce exactly to the seven constants of
//! the published self-interaction series, which pins down the transcription.
//!
//! Points exactly at the foci sit on a removable coordinate singularity and
//! lose accuracy; every interior point off the two foci is fine.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point2};
use crate::greens::SeriesControl;

/// Elliptic coordinates of a point, `xi >= 0`, `eta` in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticCoords {
    pub xi: f64,
    pub eta: f64,
}

/// Invert `x1 = f cosh(xi) cos(eta)`, `x2 = f sinh(xi) sin(eta)` by solving
/// the quadratic `f^2 p^2 + mu p - x2^2 = 0` (with `mu = |x|^2 - f^2`) for
/// `p = sin^2(eta)`, then recovering `xi` from `cosh^2(xi) = 1 + p + mu/f^2`.
/// The quadrant of `eta` follows the signs of `(x1, x2)`.
pub fn to_elliptic(a: f64, b: f64, p: Point2) -> EllipticCoords {
    let fsq = a * a - b * b;
    let mu = p.norm_sq() - fsq;
    let s = 4.0 * fsq * p.x2 * p.x2;
    let sq = (mu * mu + s).sqrt();
    // positive root of f^2 t^2 + mu t - x2^2, written to avoid cancellation
    let sin2 = if mu >= 0.0 {
        if s == 0.0 { 0.0 } else { s / (mu + sq) / (2.0 * fsq) }
    } else {
        (sq - mu) / (2.0 * fsq)
    };
    let sin2 = sin2.clamp(0.0, 1.0);
    let cosh_sq_m1 = (sin2 + mu / fsq).max(0.0);
    let xi = cosh_sq_m1.sqrt().asinh();

    let eta_star = sin2.sqrt().asin();
    let eta = if p.x1 >= 0.0 && p.x2 >= 0.0 {
        eta_star
    } else if p.x1 < 0.0 && p.x2 >= 0.0 {
        PI - eta_star
    } else if p.x1 <= 0.0 {
        PI + eta_star
    } else {
        2.0 * PI - eta_star
    };
    EllipticCoords { xi, eta }
}

pub fn from_elliptic(a: f64, b: f64, c: EllipticCoords) -> Point2 {
    let f = (a * a - b * b).sqrt();
    Point2::new(f * c.xi.cosh() * c.eta.cos(), f * c.xi.sinh() * c.eta.sin())
}

fn check(a: f64, b: f64, p: Point2, what: &str) -> Result<()> {
    if !(a > b && b > 0.0) {
        return Err(Error::InvalidDomain(format!(
            "ellipse series needs a > b > 0, got ({a}, {b}); a = b belongs to the disk path"
        )));
    }
    if !(DomainSpec::Ellipse { a, b }).contains_closed(p) {
        return Err(Error::OutOfRegion(format!("{what} ({}, {}) outside the ellipse", p.x1, p.x2)));
    }
    Ok(())
}

#[inline]
fn log_abs_one_minus(w: Complex64) -> f64 {
    (Complex64::new(1.0, 0.0) - w).norm().ln()
}

/// Green's function `G(x; y)` for `x != y`.
pub fn g(a: f64, b: f64, x: Point2, y: Point2, ctl: &SeriesControl) -> Result<f64> {
    check(a, b, x, "point")?;
    check(a, b, y, "source")?;
    if (x - y).norm() == 0.0 {
        return Err(Error::SingularKernel);
    }
    let area = PI * a * b;
    let gamma = (a - b) / (a + b);
    let xb = -0.5 * gamma.ln();

    let cx = to_elliptic(a, b, x);
    let cy = to_elliptic(a, b, y);
    let dxi = cx.xi - cy.xi;
    let sxi = cx.xi + cy.xi;
    let deta = cx.eta - cy.eta;
    let seta = cx.eta + cy.eta;

    let zc = |re: f64, im: f64| Complex64::new(re, im).exp();
    let zs = [
        zc(-dxi.abs(), deta),
        zc(dxi.abs() - 4.0 * xb, deta),
        zc(sxi - 2.0 * xb, deta),
        zc(-sxi - 2.0 * xb, deta),
        zc(sxi - 4.0 * xb, seta),
        zc(-sxi, seta),
        zc(dxi.abs() - 2.0 * xb, seta),
        zc(-dxi.abs() - 2.0 * xb, seta),
    ];

    let log_sum = image_log_sum(&zs, gamma, ctl)?;
    Ok((x.norm_sq() + y.norm_sq()) / (4.0 * area) - 3.0 * (a * a + b * b) / (16.0 * area)
        - gamma.ln() / (4.0 * PI)
        - cx.xi.max(cy.xi) / (2.0 * PI)
        - log_sum / (2.0 * PI))
}

/// Self-interaction `R(y; y)`.
pub fn r_self(a: f64, b: f64, y: Point2, ctl: &SeriesControl) -> Result<f64> {
    check(a, b, y, "source")?;
    let area = PI * a * b;
    let gamma = (a - b) / (a + b);
    let cy = to_elliptic(a, b, y);
    let (xi0, eta0) = (cy.xi, cy.eta);

    let e2 = (2.0 * xi0).exp();
    let rot = Complex64::new(0.0, 2.0 * eta0).exp();
    let zs0 = [
        Complex64::new(gamma * gamma, 0.0),
        Complex64::new(gamma * e2, 0.0),
        Complex64::new(gamma / e2, 0.0),
        gamma * gamma * e2 * rot,
        rot / e2,
        gamma * rot,
        gamma * rot,
    ];

    let mut log_sum = image_log_sum(&zs0, gamma, ctl)?;
    // the j = 1 factor at coincidence contributes log(1 - gamma^{2n}) for n >= 1
    let mut g2n = 1.0;
    for n in 1..=ctl.n_max {
        g2n *= gamma * gamma;
        let term = (1.0 - g2n).ln();
        log_sum += term;
        if term.abs() < ctl.tol {
            break;
        }
        if n == ctl.n_max {
            return Err(Error::NonConvergence { n_max: ctl.n_max, last_term: term });
        }
    }

    let ch = xi0.cosh();
    let cs = eta0.cos();
    Ok(y.norm_sq() / (2.0 * area) - 3.0 * (a * a + b * b) / (16.0 * area)
        + (a + b).ln() / (2.0 * PI)
        - xi0 / (2.0 * PI)
        + (ch * ch - cs * cs).ln() / (4.0 * PI)
        - log_sum / (2.0 * PI))
}

/// Two-point regular part `R(x; y) = G + (1/2pi) log|x - y|`; at coincidence
/// this is routed to [`r_self`].
pub fn r(a: f64, b: f64, x: Point2, y: Point2, ctl: &SeriesControl) -> Result<f64> {
    let dist = (x - y).norm();
    if dist == 0.0 {
        r_self(a, b, y, ctl)
    } else {
        Ok(g(a, b, x, y, ctl)? + dist.ln() / (2.0 * PI))
    }
}

fn image_log_sum(zs: &[Complex64], gamma: f64, ctl: &SeriesControl) -> Result<f64> {
    let ratio = gamma * gamma;
    if ratio > 0.999 {
        return Err(Error::NonConvergence { n_max: 0, last_term: ratio });
    }
    let mut sum = zs.iter().map(|&z| log_abs_one_minus(z)).sum::<f64>();
    let mut g2n = 1.0;
    for n in 1..=ctl.n_max {
        g2n *= ratio;
        let mut term = 0.0;
        for &z in zs {
            term += log_abs_one_minus(g2n * z);
        }
        sum += term;
        if term.abs() < ctl.tol && g2n < 1e-8 {
            return Ok(sum);
        }
        if n == ctl.n_max {
            return Err(Error::NonConvergence { n_max: ctl.n_max, last_term: term });
        }
    }
    Ok(sum)
}
