//! Closed-form Neumann Green's function for the unit disk,
//!
//! ```text
//! G(x; xi) = -(1/2pi) log|x - xi| + R(x; xi),
//! R(x; xi) = -(1/2pi) [ (1/2) log(1 + |x|^2 |xi|^2 - 2 x.xi) - (|xi|^2 + |x|^2)/2 + 3/4 ],
//! ```
//!
//! together with the source-gradient and source-Hessian expressions the
//! expansion needs. A radius-`rho` disk is handled by rescaling:
//! `G_rho(x; xi) = G_1(x/rho; xi/rho)` and
//! `R_rho(x; xi) = R_1(x/rho; xi/rho) + log(rho)/(2 pi)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Point2, SymMat2};

#[inline]
fn kernel_den(x: Point2, xi: Point2) -> f64 {
    1.0 + x.norm_sq() * xi.norm_sq() - 2.0 * x.dot(xi)
}

/// Regular part `R(x; xi)`; finite for all pairs in the closed disk.
pub fn r(x: Point2, xi: Point2) -> f64 {
    let den = kernel_den(x, xi);
    -(0.5 * den.ln() - 0.5 * (xi.norm_sq() + x.norm_sq()) + 0.75) / (2.0 * PI)
}

/// Self-interaction `R(xi; xi) = -(1/2pi)[log(1 - |xi|^2) - |xi|^2 + 3/4]`.
pub fn r_self(xi: Point2) -> Result<f64> {
    let rsq = xi.norm_sq();
    if rsq >= 1.0 {
        return Err(Error::OutOfRegion("source must lie strictly inside the unit disk".into()));
    }
    Ok(-((1.0 - rsq).ln() - rsq + 0.75) / (2.0 * PI))
}

/// Green's function `G(x; xi)` for `x != xi`.
pub fn g(x: Point2, xi: Point2) -> Result<f64> {
    let dist = (x - xi).norm();
    if dist == 0.0 {
        return Err(Error::SingularKernel);
    }
    Ok(-dist.ln() / (2.0 * PI) + r(x, xi))
}

/// Source gradient of the regular part, `grad_xi R(x; xi)`.
pub fn grad_r_xi(x: Point2, xi: Point2) -> Point2 {
    let den = kernel_den(x, xi);
    -((xi * x.norm_sq() - x) * (1.0 / den) - xi) * (1.0 / (2.0 * PI))
}

/// Gradient and Hessian of `R(x; .)` evaluated at the coincidence point:
/// `grad = (1/2pi) (2 - |xi|^2)/(1 - |xi|^2) xi`, and the Hessian assembled
/// from `R11 + R22 = 1/pi`, `R11 - R22 = (xi1^2 - xi2^2)/(pi (1-|xi|^2)^2)`,
/// `R12 = xi1 xi2 / (pi (1-|xi|^2)^2)`.
pub fn self_derivatives(xi: Point2) -> Result<(Point2, SymMat2)> {
    let rsq = xi.norm_sq();
    if rsq >= 1.0 {
        return Err(Error::OutOfRegion("source must lie strictly inside the unit disk".into()));
    }
    let grad = xi * ((2.0 - rsq) / (1.0 - rsq) / (2.0 * PI));
    let denom = PI * (1.0 - rsq) * (1.0 - rsq);
    let diff = (xi.x1 * xi.x1 - xi.x2 * xi.x2) / denom;
    let r12 = xi.x1 * xi.x2 / denom;
    let trace = 1.0 / PI;
    let hess = SymMat2::new(0.5 * (trace + diff), r12, 0.5 * (trace - diff));
    Ok((grad, hess))
}

/// Analytic source gradient and source Hessian of `G(x; xi)` for `x != xi`.
pub fn g_derivatives(x: Point2, xi: Point2) -> Result<(Point2, SymMat2)> {
    let d = x - xi;
    let dsq = d.norm_sq();
    if dsq == 0.0 {
        return Err(Error::SingularKernel);
    }
    let grad = d * (1.0 / (2.0 * PI * dsq)) + grad_r_xi(x, xi);

    // Kernel part: grad_xi of -(1/2pi) log|x-xi| is (x-xi)/(2pi |x-xi|^2);
    // differentiating once more in xi gives (2 d_i d_j - delta_ij |d|^2)/|d|^4.
    let kf = 1.0 / (2.0 * PI * dsq * dsq);
    let kernel = SymMat2::new(
        kf * (2.0 * d.x1 * d.x1 - dsq),
        kf * 2.0 * d.x1 * d.x2,
        kf * (2.0 * d.x2 * d.x2 - dsq),
    );

    let den = kernel_den(x, xi);
    let xsq = x.norm_sq();
    let w1 = xsq * xi.x1 - x.x1;
    let w2 = xsq * xi.x2 - x.x2;
    let r11 = -((xsq * den - 2.0 * w1 * w1) / (den * den) - 1.0) / (2.0 * PI);
    let r22 = -((xsq * den - 2.0 * w2 * w2) / (den * den) - 1.0) / (2.0 * PI);
    let r12 = w1 * w2 / (PI * den * den);

    Ok((grad, kernel + SymMat2::new(r11, r12, r22)))
}

// ---- radius-rho disk via rescaling -------------------------------------

pub fn scaled_r(rho: f64, x: Point2, xi: Point2) -> f64 {
    r(x * (1.0 / rho), xi * (1.0 / rho)) + rho.ln() / (2.0 * PI)
}

pub fn scaled_r_self(rho: f64, xi: Point2) -> Result<f64> {
    Ok(r_self(xi * (1.0 / rho))? + rho.ln() / (2.0 * PI))
}

pub fn scaled_g(rho: f64, x: Point2, xi: Point2) -> Result<f64> {
    g(x * (1.0 / rho), xi * (1.0 / rho))
}

pub fn scaled_self_derivatives(rho: f64, xi: Point2) -> Result<(Point2, SymMat2)> {
    let (grad, hess) = self_derivatives(xi * (1.0 / rho))?;
    Ok((grad * (1.0 / rho), hess * (1.0 / (rho * rho))))
}

pub fn scaled_g_derivatives(rho: f64, x: Point2, xi: Point2) -> Result<(Point2, SymMat2)> {
    let (grad, hess) = g_derivatives(x * (1.0 / rho), xi * (1.0 / rho))?;
    Ok((grad * (1.0 / rho), hess * (1.0 / (rho * rho))))
}
