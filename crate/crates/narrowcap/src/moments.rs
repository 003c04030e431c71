//! Shape constants of the trap: logarithmic capacitance, the gauge
//! `nu(eps) = -1/log(eps d_c)`, the quadrupole and moment polarization
//! matrices, and the scalar constants `d_2c` and `chi_2` entering the
//! second-order expansion.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{EllipseFrame, Point2, SymMat2, TrapSpec};

/// All eps-expansion constants determined by the trap shape and orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapMoments {
    /// Logarithmic capacitance, `(a + b)/2` for an ellipse.
    pub d_c: f64,
    /// `nu = -1/log(eps d_c)`.
    pub nu: f64,
    /// Quadrupole matrix (symmetric, traceless).
    pub q: SymMat2,
    /// Moment polarization matrix `M = -alpha^2 I + Q`.
    pub m: SymMat2,
}

impl TrapMoments {
    pub fn for_trap(trap: &TrapSpec) -> Result<TrapMoments> {
        let d_c = log_capacitance(trap.a, trap.b);
        let nu = gauge_nu(trap.epsilon, d_c)?;
        Ok(TrapMoments {
            d_c,
            nu,
            q: quadrupole(trap.a, trap.b, trap.phi()),
            m: moment_matrix(trap.a, trap.b, trap.phi()),
        })
    }
}

/// Traceless symmetric matrix built from the Hessian of the regular part,
/// `[[B11, B12], [B12, -B11]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BMatrix {
    pub b11: f64,
    pub b12: f64,
}

/// Logarithmic capacitance of an ellipse with semi-axes `a >= b >= 0`.
pub fn log_capacitance(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// `nu(eps) = -1/log(eps d_c)`; valid only while the rescaled trap is small,
/// `0 < eps d_c < 1`.
pub fn gauge_nu(epsilon: f64, d_c: f64) -> Result<f64> {
    let x = epsilon * d_c;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::GaugeInvalid { value: x });
    }
    Ok(-1.0 / x.ln())
}

/// Quadrupole matrix `Q = -(a^2 - b^2)/4 [[cos 2phi, sin 2phi], [sin 2phi, -cos 2phi]]`.
pub fn quadrupole(a: f64, b: f64, phi: f64) -> SymMat2 {
    let c = -(a * a - b * b) / 4.0;
    let (s2, c2) = (2.0 * phi).sin_cos();
    SymMat2::new(c * c2, c * s2, -c * c2)
}

/// Moment polarization matrix `M = -alpha^2 I + Q`; at `phi = 0` this equals
/// `-alpha diag(a, b)`.
pub fn moment_matrix(a: f64, b: f64, phi: f64) -> SymMat2 {
    let alpha = EllipseFrame::from_axes(a, b).alpha;
    SymMat2::identity_scaled(-alpha * alpha) + quadrupole(a, b, phi)
}

/// Projection of the (source) Hessian of R onto the frame rotated by `phi`:
/// `B11 = [(R11 - R22) cos 2phi + 2 R12 sin 2phi] / 4` and
/// `B12 = [2 R12 cos 2phi - (R11 - R22) sin 2phi] / 4`.
pub fn b_matrix(hess_r_self: SymMat2, phi: f64) -> BMatrix {
    let diff = hess_r_self.xx - hess_r_self.yy;
    let (s2, c2) = (2.0 * phi).sin_cos();
    BMatrix {
        b11: 0.25 * (diff * c2 + 2.0 * hess_r_self.xy * s2),
        b12: 0.25 * (2.0 * hess_r_self.xy * c2 - diff * s2),
    }
}

/// Far-field constant of the second-order inner problem,
/// `d_2c = (alpha^2 + beta^2)/4 + 4 pi S nu alpha beta B11` with `S nu = |Omega|/(2 pi)`.
pub fn d2c_constant(a: f64, b: f64, s_nu: f64, b11: f64) -> f64 {
    let frame = EllipseFrame::from_axes(a, b);
    0.25 * (frame.alpha * frame.alpha + frame.beta * frame.beta)
        + 4.0 * PI * s_nu * frame.alpha * frame.beta * b11
}

/// The constant `chi_2` of the principal result:
/// `chi_2 = -|Omega| (Trace(Q Hess R) + 2 pi alpha^2 |a|^2 - 2 pi a . Q a) + (a^2 + b^2)/8`
/// where `a = grad_xi R(xi; xi)`.
pub fn chi2_constant(
    area: f64,
    q: SymMat2,
    hess_r_self: SymMat2,
    grad_r_self: Point2,
    a: f64,
    b: f64,
) -> f64 {
    let alpha = EllipseFrame::from_axes(a, b).alpha;
    let trace_qh = q.trace_product(hess_r_self);
    let grad_sq = grad_r_self.norm_sq();
    let aqa = q.quad_form(grad_r_self);
    -area * (trace_qh + 2.0 * PI * alpha * alpha * grad_sq - 2.0 * PI * aqa)
        + (a * a + b * b) / 8.0
}
