//! Two-term small-trap expansion of the MFPT and GMFPT, closed-form disk
//! specializations, and the trap-orientation optimizer.
//!
//! With `nu = -1/log(eps d_c)` and `S = |Omega|/(2 pi nu)`, the expansion
//! reads
//!
//! ```text
//! u(x) = [u0(x) + eps^2 u2(x)] / D,    tau = [tau0 + eps^2 tau2] / D,
//! tau0 = (|Omega|/2pi) [1/nu + 2 pi R(xi; xi)],
//! tau2 = (pi a b/|Omega|) tau0 + (a^2+b^2)/4
//!        - |Omega| [Trace(Q Hess R) + pi (a+b)^2/2 |grad R|^2 - 2 pi grad R . Q grad R].
//! ```
//!
//! All orientation dependence enters through `cos 2phi`, `sin 2phi`; the
//! optimizer works with the vector `p` whose direction in that plane selects
//! the GMFPT-minimizing angle.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point2, TrapSpec};
use crate::greens::{self, GreensBundle, SelfGreens, SeriesControl};
use crate::moments::{chi2_constant, TrapMoments};

/// Two-term GMFPT expansion. `tau0` and `tau2` are stored before division by
/// the diffusivity; `tau = (tau0 + eps^2 tau2)/D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionResult {
    pub tau0: f64,
    pub tau2: f64,
    pub tau: f64,
    pub nu: f64,
    /// Strength constant `S = |Omega|/(2 pi nu)`.
    pub s: f64,
    /// Set when `eps * max(a,b)` exceeds a quarter of the distance from the
    /// trap center to the boundary: the expansion is being extrapolated.
    pub extrapolated: bool,
}

/// Two-term MFPT at a point. The outer expansion does not vanish on the trap
/// boundary (only the matched composite does), so no such constraint is
/// asserted here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMfpt {
    pub u0: f64,
    pub u2: f64,
    pub u: f64,
    pub extrapolated: bool,
}

/// Orientation data at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationSample {
    pub xi: Point2,
    pub p: Point2,
    /// Minimizing angle in `[0, pi)`; 0 by convention when degenerate.
    pub phi_star: f64,
    pub tau2_at_phi_star: f64,
    /// `|p|` below tie tolerance: every angle is optimal.
    pub degenerate: bool,
}

/// A grid point of [`orientation_field`]; failed points are kept, not
/// dropped.
#[derive(Debug, Clone)]
pub struct FieldPoint {
    pub xi: Point2,
    pub sample: Result<OrientationSample>,
}

/// Exact MFPT for a circular trap of radius `eps` at the center of the unit
/// disk, `u(r) = (1/2D) [-r^2/2 + log(r/eps) + eps^2/2]`.
pub fn exact_radial_u(r: f64, epsilon: f64, diffusivity: f64) -> Result<f64> {
    if !(epsilon..=1.0).contains(&r) {
        return Err(Error::OutOfRegion(format!("need eps <= r <= 1, got r = {r}")));
    }
    Ok((-0.5 * r * r + (r / epsilon).ln() + 0.5 * epsilon * epsilon) / (2.0 * diffusivity))
}

/// Exact GMFPT for the same configuration,
/// `tau = (1/(8 D (1-eps^2))) [-3 + 4 eps^2 - eps^4 - 4 log eps]` (not truncated).
pub fn exact_radial_gmfpt(epsilon: f64, diffusivity: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < eps < 1, got {epsilon}")));
    }
    let e2 = epsilon * epsilon;
    Ok((-3.0 + 4.0 * e2 - e2 * e2 - 4.0 * epsilon.ln()) / (8.0 * diffusivity * (1.0 - e2)))
}

/// MFPT for an elliptical trap centered at the origin of the unit disk with
/// `phi = 0` (rotate `theta` for other orientations).
pub fn centered_ellipse_u(
    r: f64,
    theta: f64,
    a: f64,
    b: f64,
    epsilon: f64,
    diffusivity: f64,
) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let nu = crate::moments::gauge_nu(epsilon, crate::moments::log_capacitance(a, b))?;
    let r2 = r * r;
    let aniso = (a * a + b * b) - (a * a - b * b) * (r2 + 1.0 / r2) * (2.0 * theta).cos();
    Ok((r.ln() - 0.5 * r2 + 1.0 / nu + 0.25 * epsilon * epsilon * aniso) / (2.0 * diffusivity))
}

/// GMFPT for the centered elliptical trap,
/// `tau = (1/8D) [-3 + 4/nu + eps^2 (2(a^2+b^2) - 3ab + 4ab/nu)]`;
/// independent of orientation by central symmetry, so no angle argument.
pub fn centered_ellipse_gmfpt(a: f64, b: f64, epsilon: f64, diffusivity: f64) -> Result<f64> {
    let nu = crate::moments::gauge_nu(epsilon, crate::moments::log_capacitance(a, b))?;
    let e2 = epsilon * epsilon;
    let corr = 2.0 * (a * a + b * b) - 3.0 * a * b + 4.0 * a * b / nu;
    Ok((-3.0 + 4.0 / nu + e2 * corr) / (8.0 * diffusivity))
}

fn validity_flag(domain: &DomainSpec, trap: &TrapSpec) -> Result<bool> {
    trap.validate_in(domain)?;
    let dist = domain.boundary_distance(trap.center);
    Ok(!(trap.epsilon * trap.a.max(trap.b) < 0.25 * dist))
}

/// Two-term GMFPT on any supported domain from precomputed self-interaction
/// data at the trap center.
pub fn tau_general(
    domain: &DomainSpec,
    trap: &TrapSpec,
    diffusivity: f64,
    sg: &SelfGreens,
) -> Result<ExpansionResult> {
    let extrapolated = validity_flag(domain, trap)?;
    let mom = TrapMoments::for_trap(trap)?;
    let area = domain.area();
    let (a, b) = (trap.a, trap.b);

    let tau0 = area / (2.0 * PI) * (1.0 / mom.nu + 2.0 * PI * sg.r_self);
    let apb = a + b;
    let bracket = mom.q.trace_product(sg.hess) + PI * 0.5 * apb * apb * sg.grad.norm_sq()
        - 2.0 * PI * mom.q.quad_form(sg.grad);
    let tau2 = PI * a * b / area * tau0 + 0.25 * (a * a + b * b) - area * bracket;

    let eps2 = trap.epsilon * trap.epsilon;
    Ok(ExpansionResult {
        tau0,
        tau2,
        tau: (tau0 + eps2 * tau2) / diffusivity,
        nu: mom.nu,
        s: area / (2.0 * PI * mom.nu),
        extrapolated,
    })
}

/// Closed-form disk GMFPT (unit disk, trap at `xi`):
/// `tau0 = (1/2)[1/nu - log(1-|xi|^2) + |xi|^2 - 3/4]` plus the quoted
/// second-order bracket.
pub fn disk_tau(
    xi: Point2,
    a: f64,
    b: f64,
    phi: f64,
    epsilon: f64,
    diffusivity: f64,
) -> Result<ExpansionResult> {
    let trap = TrapSpec::new(xi, a, b, epsilon, phi)?;
    let extrapolated = validity_flag(&DomainSpec::UnitDisk, &trap)?;
    let mom = TrapMoments::for_trap(&trap)?;

    let r2 = xi.norm_sq();
    let one_m = 1.0 - r2;
    let tau0 = 0.5 * (1.0 / mom.nu - one_m.ln() + r2 - 0.75);

    let apb2 = (a + b) * (a + b);
    let ratio = (2.0 - r2) / one_m;
    let w = (2.0 - (2.0 - r2) * (2.0 - r2)) / (2.0 * one_m * one_m);
    let (s2, c2) = (2.0 * trap.phi()).sin_cos();
    let orient = (xi.x1 * xi.x1 - xi.x2 * xi.x2) * c2 + 2.0 * xi.x1 * xi.x2 * s2;
    let tau2 = a * b * tau0 + 0.25 * (a * a + b * b) - apb2 / 8.0 * ratio * ratio * r2
        + 0.25 * (a * a - b * b) * w * orient;

    let eps2 = epsilon * epsilon;
    Ok(ExpansionResult {
        tau0,
        tau2,
        tau: (tau0 + eps2 * tau2) / diffusivity,
        nu: mom.nu,
        s: PI / (2.0 * PI * mom.nu),
        extrapolated,
    })
}

/// `g(r) = (2 - (2-r^2)^2) / (2 (1-r^2)^2) * r^2`: the radial profile of the
/// orientation term in the disk. Negative for `r < r_c = sqrt(2 - sqrt 2)`,
/// zero at `r_c`, positive beyond.
pub fn g_of_r(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("need 0 <= r < 1, got {r}")));
    }
    let r2 = r * r;
    let one_m = 1.0 - r2;
    Ok((2.0 - (2.0 - r2) * (2.0 - r2)) / (2.0 * one_m * one_m) * r2)
}

/// Correction `u2(0)` to the MFPT from the disk center for a trap centered
/// at `xi = r e^{i theta}` with orientation `phi`.
pub fn u2_origin_disk(r: f64, theta: f64, phi: f64, a: f64, b: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < r < 1 (formula has 1/r^2), got {r}")));
    }
    let r2 = r * r;
    let one_m = 1.0 - r2;
    Ok((a * a + b * b) / 8.0 - (a + b) * (a + b) / 8.0 * (2.0 - r2) / (one_m * one_m)
        + (a * a - b * b) / 8.0 * (2.0 * r2 * r2 - 1.0) / (r2 * one_m * one_m)
            * (2.0 * (phi - theta)).cos())
}

/// Two-term MFPT at a field point `x` from a precomputed Green's bundle at
/// `(x; xi)`. The outer expansion is singular at the trap; `x` must stay at
/// least `2 eps a` away from the center.
pub fn u_point_general(
    x: Point2,
    domain: &DomainSpec,
    trap: &TrapSpec,
    diffusivity: f64,
    bundle: &GreensBundle,
) -> Result<PointMfpt> {
    let extrapolated = validity_flag(domain, trap)?;
    if (x - trap.center).norm() < 2.0 * trap.epsilon * trap.a {
        return Err(Error::OutOfRegion(
            "field point too close to the trap for the outer expansion".into(),
        ));
    }
    let mom = TrapMoments::for_trap(trap)?;
    let area = domain.area();
    let sg = &bundle.self_greens;

    let u0 = -area * (bundle.g - sg.r_self) + area / (2.0 * PI * mom.nu);
    let chi2 = chi2_constant(area, mom.q, sg.hess, sg.grad, trap.a, trap.b);
    let u2 = area
        * (0.5 * mom.q.trace_product(bundle.hess_g)
            - 2.0 * PI * sg.grad.dot(mom.m.mul_vec(bundle.grad_g)))
        + chi2;

    let eps2 = trap.epsilon * trap.epsilon;
    Ok(PointMfpt { u0, u2, u: (u0 + eps2 * u2) / diffusivity, extrapolated })
}

/// Orientation vector
/// `p = [R11 - R22 - 2 pi (R1^2 - R2^2), 2 R12 - 4 pi R1 R2]`
/// built from the self-interaction derivatives at the trap center.
pub fn p_vector(grad_r_self: Point2, hess_r_self: crate::geometry::SymMat2) -> Point2 {
    let g = grad_r_self;
    Point2::new(
        hess_r_self.xx - hess_r_self.yy - 2.0 * PI * (g.x1 * g.x1 - g.x2 * g.x2),
        2.0 * hess_r_self.xy - 4.0 * PI * g.x1 * g.x2,
    )
}

/// Tie tolerance below which the orientation is considered degenerate.
pub const P_TIE_TOL: f64 = 1e-12;

/// Angle minimizing `p . [cos 2phi, sin 2phi]`, mapped into `[0, pi)`.
/// Degenerate `p` returns 0 with the flag set, keeping field plots stable.
pub fn optimal_phi(p: Point2) -> (f64, bool) {
    if p.norm() < P_TIE_TOL {
        return (0.0, true);
    }
    let phi = 0.5 * (-p.x2).atan2(-p.x1);
    (phi.rem_euclid(PI), false)
}

/// Per-point orientation data over a grid: `p`, the minimizing angle, and
/// the GMFPT correction at that angle. Failed points carry their error.
pub fn orientation_field(
    domain: &DomainSpec,
    grid: &[Point2],
    a: f64,
    b: f64,
    epsilon: f64,
    diffusivity: f64,
    ctl: &SeriesControl,
) -> Vec<FieldPoint> {
    let eval = |&xi: &Point2| -> FieldPoint {
        let sample = orientation_sample(domain, xi, a, b, epsilon, diffusivity, ctl);
        FieldPoint { xi, sample }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        grid.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().map(eval).collect()
    }
}

/// Sequential twin of [`orientation_field`]; same output bit for bit.
pub fn orientation_field_seq(
    domain: &DomainSpec,
    grid: &[Point2],
    a: f64,
    b: f64,
    epsilon: f64,
    diffusivity: f64,
    ctl: &SeriesControl,
) -> Vec<FieldPoint> {
    grid.iter()
        .map(|&xi| FieldPoint {
            xi,
            sample: orientation_sample(domain, xi, a, b, epsilon, diffusivity, ctl),
        })
        .collect()
}

fn orientation_sample(
    domain: &DomainSpec,
    xi: Point2,
    a: f64,
    b: f64,
    epsilon: f64,
    diffusivity: f64,
    ctl: &SeriesControl,
) -> Result<OrientationSample> {
    let sg = greens::self_greens(domain, xi, ctl)?;
    let p = p_vector(sg.grad, sg.hess);
    let (phi_star, degenerate) = optimal_phi(p);
    let trap = TrapSpec::new(xi, a, b, epsilon, phi_star)?;
    let exp = tau_general(domain, &trap, diffusivity, &sg)?;
    Ok(OrientationSample { xi, p, phi_star, tau2_at_phi_star: exp.tau2, degenerate })
}

/// GMFPT in the slit limit `b -> 0`, assembled through the orientation
/// vector route:
/// `tau2 = a^2/4 - (pi a^2 |Omega|/2) |grad R|^2 + (a^2 |Omega|/4) p . [cos 2phi, sin 2phi]`
/// with `d_c = a/2`. Agrees with [`tau_general`] at `b = 0` exactly (the
/// general formula is uniformly valid in the limit); the two assemblies are
/// cross-checked in tests.
pub fn slit_tau(
    domain: &DomainSpec,
    xi: Point2,
    a: f64,
    phi: f64,
    epsilon: f64,
    diffusivity: f64,
    ctl: &SeriesControl,
) -> Result<ExpansionResult> {
    let trap = TrapSpec::new(xi, a, 0.0, epsilon, phi)?;
    let extrapolated = validity_flag(domain, &trap)?;
    let mom = TrapMoments::for_trap(&trap)?;
    let area = domain.area();
    let sg = greens::self_greens(domain, xi, ctl)?;

    let tau0 = area / (2.0 * PI) * (1.0 / mom.nu + 2.0 * PI * sg.r_self);
    let p = p_vector(sg.grad, sg.hess);
    let (s2, c2) = (2.0 * trap.phi()).sin_cos();
    let a2 = a * a;
    let tau2 = 0.25 * a2 - 0.5 * PI * a2 * area * sg.grad.norm_sq()
        + 0.25 * a2 * area * (p.x1 * c2 + p.x2 * s2);

    let eps2 = epsilon * epsilon;
    Ok(ExpansionResult {
        tau0,
        tau2,
        tau: (tau0 + eps2 * tau2) / diffusivity,
        nu: mom.nu,
        s: area / (2.0 * PI * mom.nu),
        extrapolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::greens_bundle;

    const R_C: f64 = 0.76536686473017945; // sqrt(2 - sqrt 2)

    #[test]
    fn exact_radial_point_values() {
        assert_eq!(exact_radial_u(0.1, 0.1, 1.0).unwrap(), 0.0);
        let u1 = exact_radial_u(1.0, 0.1, 1.0).unwrap();
        assert!((u1 - 0.5 * (-0.5 + 10.0f64.ln() + 0.005)).abs() < 1e-15);
        let u_half_d = exact_radial_u(1.0, 0.1, 2.0).unwrap();
        assert!((u_half_d - 0.5 * u1).abs() < 1e-15);
        assert!(exact_radial_u(0.05, 0.1, 1.0).is_err());
    }

    #[test]
    fn exact_radial_gmfpt_values() {
        let tau = exact_radial_gmfpt(0.1, 1.0).unwrap();
        assert!((tau - 0.7891718).abs() < 1e-7);
        // two-term truncation error is O(eps^4)
        let eps: f64 = 0.01;
        let truncated = (-3.0 - 4.0 * eps.ln() + eps * eps * (1.0 - 4.0 * eps.ln())) / 8.0;
        assert!((exact_radial_gmfpt(eps, 1.0).unwrap() - truncated).abs() < 1e-7);
        // stays finite toward eps -> 1
        assert!(exact_radial_gmfpt(0.999999, 1.0).unwrap().is_finite());
    }

    #[test]
    fn centered_ellipse_u_reduces_to_radial() {
        let (eps, r) = (0.01, 0.5);
        let exact = exact_radial_u(r, eps, 1.0).unwrap();
        let expanded = centered_ellipse_u(r, 0.3, 1.0, 1.0, eps, 1.0).unwrap();
        assert!((exact - expanded).abs() < 1e-7);
    }

    #[test]
    fn centered_ellipse_u_angle_structure() {
        let (a, b, eps, r) = (3.0, 1.0, 0.01, 0.5);
        let vals: Vec<f64> = [0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]
            .iter()
            .map(|&t| centered_ellipse_u(r, t, a, b, eps, 1.0).unwrap())
            .collect();
        let mean = vals.iter().sum::<f64>() / 4.0;
        let isotropic = centered_ellipse_u(r, PI / 4.0, a, b, eps, 1.0).unwrap();
        assert!((mean - isotropic).abs() < 1e-14, "cos 2theta must average out");
        // u is larger along the minor axis for a > b
        assert!(vals[2] > vals[0]);
    }

    #[test]
    fn centered_gmfpt_matches_radial_truncation() {
        let eps: f64 = 0.05;
        let via_ellipse = centered_ellipse_gmfpt(1.0, 1.0, eps, 1.0).unwrap();
        let truncated = (-3.0 - 4.0 * eps.ln() + eps * eps * (1.0 - 4.0 * eps.ln())) / 8.0;
        assert!((via_ellipse - truncated).abs() < 1e-14);
    }

    #[test]
    fn tau_general_centered_circular_benchmark() {
        let trap = TrapSpec::new(Point2::ZERO, 1.0, 1.0, 0.01, 0.0).unwrap();
        let sg = greens::self_greens(&DomainSpec::UnitDisk, Point2::ZERO, &SeriesControl::default())
            .unwrap();
        let res = tau_general(&DomainSpec::UnitDisk, &trap, 1.0, &sg).unwrap();
        assert!((res.tau0 - 1.9275851).abs() < 1e-6);
        assert!((res.tau - 1.9278279).abs() < 1e-6);
        assert!((2.0 * PI * res.s * res.nu - PI).abs() < 1e-12);
        assert!(!res.extrapolated);
    }

    #[test]
    fn tau_general_matches_centered_formula() {
        let ctl = SeriesControl::default();
        for (a, b, eps) in [(2.0, 1.0, 0.05), (3.0, 1.0, 0.03), (1.0, 0.4, 0.02)] {
            let trap = TrapSpec::new(Point2::ZERO, a, b, eps, 0.0).unwrap();
            let sg = greens::self_greens(&DomainSpec::UnitDisk, Point2::ZERO, &ctl).unwrap();
            let gen = tau_general(&DomainSpec::UnitDisk, &trap, 1.0, &sg).unwrap();
            let closed = centered_ellipse_gmfpt(a, b, eps, 1.0).unwrap();
            assert!((gen.tau - closed).abs() < 1e-12 * closed.abs());
        }
    }

    #[test]
    fn tau_general_equals_eq18_assembly() {
        // tau2 assembled as (pi a b/|O|) tau0 + (a^2+b^2)/8 + chi2 must agree
        // with the expanded bracket to 1e-12.
        let ctl = SeriesControl::default();
        let domain = DomainSpec::UnitDisk;
        let trap = TrapSpec::new(Point2::new(0.3, 0.4), 3.0, 1.0, 0.03, PI / 6.0).unwrap();
        let sg = greens::self_greens(&domain, trap.center, &ctl).unwrap();
        let res = tau_general(&domain, &trap, 1.0, &sg).unwrap();
        let mom = TrapMoments::for_trap(&trap).unwrap();
        let chi2 = chi2_constant(domain.area(), mom.q, sg.hess, sg.grad, trap.a, trap.b);
        let tau2_18 = PI * trap.a * trap.b / domain.area() * res.tau0
            + (trap.a * trap.a + trap.b * trap.b) / 8.0
            + chi2;
        assert!((res.tau2 - tau2_18).abs() < 1e-12 * res.tau2.abs().max(1.0));
    }

    #[test]
    fn disk_tau_agrees_with_general_pipeline() {
        let ctl = SeriesControl::default();
        let xi = Point2::new(0.3, 0.4);
        let trap = TrapSpec::new(xi, 3.0, 1.0, 0.03, PI / 6.0).unwrap();
        let sg = greens::self_greens(&DomainSpec::UnitDisk, xi, &ctl).unwrap();
        let gen = tau_general(&DomainSpec::UnitDisk, &trap, 1.0, &sg).unwrap();
        let closed = disk_tau(xi, 3.0, 1.0, PI / 6.0, 0.03, 1.0).unwrap();
        assert!((gen.tau - closed.tau).abs() < 1e-12 * closed.tau);
        assert!((gen.tau0 - closed.tau0).abs() < 1e-12);
        assert!((gen.tau2 - closed.tau2).abs() < 1e-12 * closed.tau2.abs());
    }

    #[test]
    fn disk_tau_rotation_covariance() {
        let (a, b, eps, phi) = (3.0, 1.0, 0.02, 0.7);
        let r = 0.55;
        let base = disk_tau(Point2::new(r, 0.0), a, b, phi, eps, 1.0).unwrap();
        for delta in [0.3f64, 1.1, 2.6] {
            let xi = Point2::new(r * delta.cos(), r * delta.sin());
            let rot = disk_tau(xi, a, b, phi + delta, eps, 1.0).unwrap();
            assert!((base.tau - rot.tau).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_tau_centered_orientation_free() {
        let t0 = disk_tau(Point2::ZERO, 3.0, 1.0, 0.0, 0.02, 1.0).unwrap();
        let t1 = disk_tau(Point2::ZERO, 3.0, 1.0, 1.2, 0.02, 1.0).unwrap();
        assert_eq!(t0.tau, t1.tau);
        let closed = centered_ellipse_gmfpt(3.0, 1.0, 0.02, 1.0).unwrap();
        assert!((t0.tau - closed).abs() < 1e-13);
    }

    #[test]
    fn g_profile() {
        assert_eq!(g_of_r(0.0).unwrap(), 0.0);
        assert!(g_of_r(R_C).unwrap().abs() < 1e-12);
        assert!((g_of_r(0.5).unwrap() - -0.2361111).abs() < 1e-7);
        assert!(g_of_r(0.5).unwrap() < 0.0);
        assert!(g_of_r(0.9).unwrap() > 0.0);
        assert!(g_of_r(1.0).is_err());
    }

    #[test]
    fn disk_tau_orientation_sign_flips_across_rc() {
        let (a, b, eps) = (3.0, 1.0, 0.01);
        // radial minus tangential orientation along the x-axis
        for (r, radial_best) in [(0.5, true), (0.9, false)] {
            let rad = disk_tau(Point2::new(r, 0.0), a, b, 0.0, eps, 1.0).unwrap();
            let tan = disk_tau(Point2::new(r, 0.0), a, b, PI / 2.0, eps, 1.0).unwrap();
            assert_eq!(rad.tau2 < tan.tau2, radial_best, "r = {r}");
        }
    }

    #[test]
    fn u2_origin_values() {
        // orientation coefficient flips sign at r = 2^(-1/4)
        let rc = 2.0f64.powf(-0.25);
        let (a, b) = (3.0, 1.0);
        let below = u2_origin_disk(rc - 0.02, 0.0, 0.0, a, b).unwrap()
            - u2_origin_disk(rc - 0.02, 0.0, PI / 2.0, a, b).unwrap();
        let above = u2_origin_disk(rc + 0.02, 0.0, 0.0, a, b).unwrap()
            - u2_origin_disk(rc + 0.02, 0.0, PI / 2.0, a, b).unwrap();
        assert!(below < 0.0 && above > 0.0);

        // circular trap has no orientation dependence
        let c0 = u2_origin_disk(0.5, 0.2, 0.0, 2.0, 2.0).unwrap();
        let c1 = u2_origin_disk(0.5, 0.2, 1.0, 2.0, 2.0).unwrap();
        assert_eq!(c0, c1);

        // only phi - theta matters
        let d0 = u2_origin_disk(0.5, 0.2, 0.9, a, b).unwrap();
        let d1 = u2_origin_disk(0.5, 0.2 + 0.4, 0.9 + 0.4, a, b).unwrap();
        assert!((d0 - d1).abs() < 1e-14);

        assert!(u2_origin_disk(0.0, 0.0, 0.0, a, b).is_err());
    }

    #[test]
    fn u_point_reduces_to_origin_formula() {
        let ctl = SeriesControl::default();
        let domain = DomainSpec::UnitDisk;
        let (r, theta, phi, a, b, eps) = (0.55f64, 0.7f64, 0.4, 3.0, 1.0, 0.01);
        let xi = Point2::new(r * theta.cos(), r * theta.sin());
        let trap = TrapSpec::new(xi, a, b, eps, phi).unwrap();
        let bundle = greens_bundle(&domain, Point2::ZERO, xi, &ctl).unwrap();
        let res = u_point_general(Point2::ZERO, &domain, &trap, 1.0, &bundle).unwrap();
        let closed = u2_origin_disk(r, theta, phi, a, b).unwrap();
        assert!((res.u2 - closed).abs() < 1e-10, "u2 {} vs closed {closed}", res.u2);
    }

    #[test]
    fn u_point_circular_trap_is_orientation_free() {
        let ctl = SeriesControl::default();
        let domain = DomainSpec::UnitDisk;
        let xi = Point2::new(0.3, 0.4);
        let bundle = greens_bundle(&domain, Point2::new(-0.2, -0.4), xi, &ctl).unwrap();
        let mut values = Vec::new();
        for k in 0..8 {
            let trap = TrapSpec::new(xi, 1.5, 1.5, 0.02, k as f64 * PI / 8.0).unwrap();
            let res =
                u_point_general(Point2::new(-0.2, -0.4), &domain, &trap, 1.0, &bundle).unwrap();
            values.push(res.u2);
        }
        for v in &values {
            assert!((v - values[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn u_point_rejects_near_trap_evaluation() {
        let ctl = SeriesControl::default();
        let domain = DomainSpec::UnitDisk;
        let xi = Point2::new(0.3, 0.4);
        let trap = TrapSpec::new(xi, 3.0, 1.0, 0.05, 0.0).unwrap();
        let x = xi + Point2::new(0.2, 0.0);
        let bundle = greens_bundle(&domain, x, xi, &ctl).unwrap();
        assert!(u_point_general(x, &domain, &trap, 1.0, &bundle).is_err());
    }

    #[test]
    fn p_vector_on_disk_axis() {
        let (grad, hess) = crate::greens::disk::self_derivatives(Point2::new(0.5, 0.0)).unwrap();
        let p = p_vector(grad, hess);
        assert!(p.x2.abs() < 1e-15, "p must align with the axis");
        // g(0.5) < 0 means radial orientation minimizes; p = (g(r)/pi, 0)
        assert!(p.x1 < 0.0);
        assert!((p.x1 - g_of_r(0.5).unwrap() / PI).abs() < 1e-13);
        let (phi, degen) = optimal_phi(p);
        assert!(!degen);
        assert!(phi.abs() < 1e-12, "radial minimizer on the x-axis is phi = 0");
    }

    #[test]
    fn p_vector_critical_point_reduction() {
        let hess = crate::geometry::SymMat2::new(0.8, 0.1, 0.3);
        let p = p_vector(Point2::ZERO, hess);
        assert!((p.x1 - 0.5).abs() < 1e-15 && (p.x2 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn optimal_phi_examples() {
        let (phi, d) = optimal_phi(Point2::new(1.0, 0.0));
        assert!(!d && (phi - PI / 2.0).abs() < 1e-15);
        let (phi, d) = optimal_phi(Point2::new(0.0, -1.0));
        assert!(!d && (phi - PI / 4.0).abs() < 1e-15);
        let (phi, d) = optimal_phi(Point2::ZERO);
        assert!(d && phi == 0.0);
    }

    #[test]
    fn orientation_term_is_pure_second_harmonic() {
        // A 3-point fit at phi = 0, pi/4, pi/2 reproduces tau2 at 16 other
        // angles to 1e-12.
        let xi = Point2::new(0.42, -0.17);
        let (a, b, eps) = (2.5, 0.8, 0.02);
        let t = |phi: f64| disk_tau(xi, a, b, phi, eps, 1.0).unwrap().tau2;
        let (t0, t45, t90) = (t(0.0), t(PI / 4.0), t(PI / 2.0));
        let mean = 0.5 * (t0 + t90);
        let ac = 0.5 * (t0 - t90);
        let as_ = t45 - mean;
        for k in 0..16 {
            let phi = 0.1 + k as f64 * PI / 16.0;
            let model = mean + ac * (2.0 * phi).cos() + as_ * (2.0 * phi).sin();
            assert!((t(phi) - model).abs() < 1e-12);
        }
    }

    #[test]
    fn slit_tau_matches_general_formula_at_b_zero() {
        let ctl = SeriesControl::default();
        let domain = DomainSpec::Rectangle { l: 1.0, d: 0.8 };
        let xi = Point2::new(0.3, 0.4);
        let (a, phi, eps) = (1.0, PI / 6.0, 0.2);
        let slit = slit_tau(&domain, xi, a, phi, eps, 1.0, &ctl).unwrap();
        let trap = TrapSpec::new(xi, a, 0.0, eps, phi).unwrap();
        let sg = greens::self_greens(&domain, xi, &ctl).unwrap();
        let gen = tau_general(&domain, &trap, 1.0, &sg).unwrap();
        assert!((slit.tau2 - gen.tau2).abs() < 1e-14 * gen.tau2.abs().max(1.0));
        assert!((slit.tau - gen.tau).abs() < 1e-14 * gen.tau);
    }

    #[test]
    fn slit_limit_is_smooth_in_b() {
        let ctl = SeriesControl::default();
        let domain = DomainSpec::Rectangle { l: 1.0, d: 0.8 };
        let xi = Point2::new(0.3, 0.4);
        let (a, phi, eps) = (1.0, PI / 6.0, 0.2);
        let sg = greens::self_greens(&domain, xi, &ctl).unwrap();
        let tiny = TrapSpec::new(xi, a, 1e-8, eps, phi).unwrap();
        let at_tiny = tau_general(&domain, &tiny, 1.0, &sg).unwrap();
        let at_zero = slit_tau(&domain, xi, a, phi, eps, 1.0, &ctl).unwrap();
        assert!((at_tiny.tau - at_zero.tau).abs() < 1e-7);
    }

    #[test]
    fn circular_trap_ends_of_b_sweep_lose_orientation() {
        let ctl = SeriesControl::default();
        let domain = DomainSpec::Rectangle { l: 1.0, d: 0.8 };
        let xi = Point2::new(0.3, 0.4);
        let sg = greens::self_greens(&domain, xi, &ctl).unwrap();
        let mk = |phi: f64| {
            let trap = TrapSpec::new(xi, 1.0, 1.0, 0.2, phi).unwrap();
            tau_general(&domain, &trap, 1.0, &sg).unwrap().tau2
        };
        assert!((mk(PI / 2.0) - mk(PI / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn times_scale_inversely_with_diffusivity() {
        let res1 = disk_tau(Point2::new(0.2, 0.1), 2.0, 1.0, 0.3, 0.02, 1.0).unwrap();
        let res2 = disk_tau(Point2::new(0.2, 0.1), 2.0, 1.0, 0.3, 0.02, 2.0).unwrap();
        assert!((res1.tau - 2.0 * res2.tau).abs() < 1e-14);
    }

    #[test]
    fn tau_decreases_as_capacitance_grows() {
        let ctl = SeriesControl::default();
        let domains = [
            DomainSpec::UnitDisk,
            DomainSpec::Rectangle { l: 1.0, d: 0.8 },
            DomainSpec::Ellipse { a: 1.5, b: 1.0 },
        ];
        for domain in domains {
            let xi = domain.interior_anchor() + Point2::new(0.1, 0.05);
            let sg = greens::self_greens(&domain, xi, &ctl).unwrap();
            let mut last = f64::INFINITY;
            for scale in [1.0, 1.3, 1.7] {
                let trap = TrapSpec::new(xi, scale, scale, 0.01, 0.0).unwrap();
                let tau = tau_general(&domain, &trap, 1.0, &sg).unwrap().tau;
                assert!(tau < last, "tau must decrease with d_c on {domain:?}");
                last = tau;
            }
        }
    }

    #[test]
    fn extrapolation_flag_raised_outside_validity() {
        let xi = Point2::new(0.9, 0.0);
        // eps a = 0.06 vs dist/4 = 0.025: flagged but not an error
        let res = disk_tau(xi, 3.0, 1.0, 0.0, 0.02, 1.0).unwrap();
        assert!(res.extrapolated);
        let ok = disk_tau(Point2::ZERO, 3.0, 1.0, 0.0, 0.02, 1.0).unwrap();
        assert!(!ok.extrapolated);
    }
}
