//! Central finite differences used to extract Green's-function derivatives
//! on domains where only series evaluations are available. Both the gradient
//! and the Hessian stencils are O(h^2).

use crate::error::Result;
use crate::geometry::{Point2, SymMat2};

/// Gradient and Hessian of a scalar field at `p` with step `h`.
pub fn grad_hess<F>(f: F, p: Point2, h: f64) -> Result<(Point2, SymMat2)>
where
    F: Fn(Point2) -> Result<f64>,
{
    let e1 = Point2::new(h, 0.0);
    let e2 = Point2::new(0.0, h);
    let f0 = f(p)?;
    let fp1 = f(p + e1)?;
    let fm1 = f(p - e1)?;
    let fp2 = f(p + e2)?;
    let fm2 = f(p - e2)?;
    let fpp = f(p + e1 + e2)?;
    let fpm = f(p + e1 - e2)?;
    let fmp = f(p - e1 + e2)?;
    let fmm = f(p - e1 - e2)?;

    let grad = Point2::new((fp1 - fm1) / (2.0 * h), (fp2 - fm2) / (2.0 * h));
    let hess = SymMat2::new(
        (fp1 - 2.0 * f0 + fm1) / (h * h),
        (fpp - fpm - fmp + fmm) / (4.0 * h * h),
        (fp2 - 2.0 * f0 + fm2) / (h * h),
    );
    Ok((grad, hess))
}

/// Source gradient `grad_xi R(xi; xi)` and source Hessian
/// `grad^2_xi R(x; xi)|_{x = xi}` of a two-point regular part, obtained by
/// differencing the source argument while the field point stays pinned at
/// `xi`. The center evaluation `r_pair(xi, xi)` must be regular (the regular
/// part is smooth at coincidence).
pub fn self_derivatives<F>(r_pair: F, xi: Point2, h: f64) -> Result<(Point2, SymMat2)>
where
    F: Fn(Point2, Point2) -> Result<f64>,
{
    grad_hess(|p| r_pair(xi, p), xi, h)
}
