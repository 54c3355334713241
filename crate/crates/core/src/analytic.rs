//! Closed-form focal kernels, peak-field curves and resolution profiles for
//! long cylindrical apertures, plus direct-integration fallbacks.
//!
//! Normalized units: with the aperture treated as a continuous sheet of
//! dipoles on a cylinder of radius `a`, a conjugate-phase (CP) field is
//! reported as `(1/4) ∫∫ A dφ dl` and a time-reversal (TR) field as
//! `(a/4) ∫∫ A² dφ dl`, where `A = |ê · (p̂ − (R̂·p̂) R̂)| / R` is the
//! element-to-focus amplitude. These equal the physical fields divided by
//! `R_e w_m a/λ²` and `D_r R_e/λ²` up to the element density.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{CylinderSpec, Polarization};
use crate::quad::{integrate_2d, Quadrature};
use crate::specfun::{self, SpecFunError};
use crate::vector::{dot, norm, sub, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("focal offset {offset} m outside the aperture span (limit {limit} m)")]
    OutOfSpan { offset: f64, limit: f64 },
    #[error("negative argument {0}")]
    Negative(f64),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

fn check_axis(zf: f64, spec: &CylinderSpec) -> Result<(), AnalyticError> {
    let limit = 0.5 * spec.length_l;
    if zf.abs() < limit {
        Ok(())
    } else {
        Err(AnalyticError::OutOfSpan { offset: zf, limit })
    }
}

fn check_radial(r: f64, spec: &CylinderSpec) -> Result<(), AnalyticError> {
    if r.abs() < spec.radius_a {
        Ok(())
    } else {
        Err(AnalyticError::OutOfSpan {
            offset: r,
            limit: spec.radius_a,
        })
    }
}

/// Isotropic point-focus kernel `sinc(kr)`.
pub fn kernel_point(k_r: f64) -> f64 {
    specfun::sinc(k_r)
}

/// Time-reversal kernel of a Hertzian dipole at polar angle `theta` from the
/// dipole axis: `sinc(kr) sin²ϑ − (j₁(kr)/kr)(3 sin²ϑ − 2)`.
pub fn kernel_dipole(k_r: f64, theta: f64) -> f64 {
    let s2 = theta.sin().powi(2);
    specfun::sinc(k_r) * s2 - specfun::spherical_j1_over_x(k_r) * (3.0 * s2 - 2.0)
}

/// Angles from the axis to the far and near rims seen from an axial focus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryAngles {
    pub phi_plus: f64,
    pub phi_minus: f64,
}

impl GeometryAngles {
    pub fn new(zf: f64, spec: &CylinderSpec) -> Result<Self, AnalyticError> {
        check_axis(zf, spec)?;
        let h = 0.5 * spec.length_l;
        Ok(Self {
            phi_plus: spec.radius_a.atan2(h + zf),
            phi_minus: spec.radius_a.atan2(h - zf),
        })
    }
}

/// Axial CP field of an axially polarized aperture, `(π/2)(cos φ₊ + cos φ₋)`.
pub fn ez_cp_axis(zf: f64, spec: &CylinderSpec) -> Result<f64, AnalyticError> {
    let g = GeometryAngles::new(zf, spec)?;
    Ok(FRAC_PI_2 * (g.phi_plus.cos() + g.phi_minus.cos()))
}

/// Transverse CP field on the axis, `2 − sin φ₊ − sin φ₋`.
pub fn ex_cp_axis(zf: f64, spec: &CylinderSpec) -> Result<f64, AnalyticError> {
    let g = GeometryAngles::new(zf, spec)?;
    Ok(2.0 - g.phi_plus.sin() - g.phi_minus.sin())
}

fn span_difference(
    zf: f64,
    spec: &CylinderSpec,
    f: impl Fn(f64, f64) -> f64,
) -> Result<f64, AnalyticError> {
    check_axis(zf, spec)?;
    let h = 0.5 * spec.length_l;
    Ok(f(h - zf, spec.radius_a) - f(-h - zf, spec.radius_a))
}

/// Antiderivatives in the axial offset `u = l - z_f` of the TR axis fields.
fn cross_pol_tr_antiderivative(u: f64, a: f64) -> f64 {
    let q = a * a + u * u;
    PI * a * u * (u * u - a * a) / (32.0 * q * q) + PI / 32.0 * (u / a).atan()
}

fn co_pol_tr_antiderivative(u: f64, a: f64) -> f64 {
    let q = a * a + u * u;
    u * a * PI * (5.0 * a * a + 3.0 * u * u) / (16.0 * q * q) + 3.0 * PI / 16.0 * (u / a).atan()
}

fn transverse_x_tr_antiderivative(u: f64, a: f64) -> f64 {
    let q = a * a + u * u;
    PI / 128.0 * (41.0 * (u / a).atan() - (17.0 * a.powi(3) * u + 23.0 * a * u.powi(3)) / (q * q))
}

fn transverse_y_tr_antiderivative(u: f64, a: f64) -> f64 {
    let q = a * a + u * u;
    PI / 128.0 * ((5.0 * a.powi(3) * u + 3.0 * a * u.powi(3)) / (q * q) + 3.0 * (u / a).atan())
}

fn transverse_z_tr_antiderivative(u: f64, a: f64) -> f64 {
    cross_pol_tr_antiderivative(u, a)
}

/// Axial TR field of an axially polarized aperture.
pub fn ez_tr_axis(zf: f64, spec: &CylinderSpec) -> Result<f64, AnalyticError> {
    span_difference(zf, spec, co_pol_tr_antiderivative)
}

/// Transverse TR field on the axis.
pub fn ex_tr_axis(zf: f64, spec: &CylinderSpec) -> Result<f64, AnalyticError> {
    span_difference(zf, spec, cross_pol_tr_antiderivative)
}

/// Axial CP field for a focus at `(xf, 0, 0)`:
/// `L [K(−16a x_f/Δ₋)/√Δ₋ + K(16a x_f/Δ₊)/√Δ₊]`, `Δ± = L² + 4(x_f ± a)²`,
/// with `K` in the parameter convention. Each of the two terms alone equals
/// half of the exact azimuthal integral.
pub fn ez_cp_radial(xf: f64, spec: &CylinderSpec) -> Result<f64, AnalyticError> {
    check_radial(xf, spec)?;
    let (a, l) = (spec.radius_a, spec.length_l);
    let dm = l * l + 4.0 * (xf - a).powi(2);
    let dp = l * l + 4.0 * (xf + a).powi(2);
    let km = specfun::complete_elliptic_k(-16.0 * a * xf / dm)?;
    let kp = specfun::complete_elliptic_k(16.0 * a * xf / dp)?;
    Ok(l * (km / dm.sqrt() + kp / dp.sqrt()))
}

/// The same expression with the `L/2` prefactor as printed in the source
/// derivation; kept for the convention check.
pub fn ez_cp_radial_printed(xf: f64, spec: &CylinderSpec) -> Result<f64, AnalyticError> {
    Ok(0.5 * ez_cp_radial(xf, spec)?)
}

/// Transverse CP field for a focus on the x-axis in the long-aperture limit.
pub fn ex_cp_radial_x(xf: f64, spec: &CylinderSpec) -> Result<f64, AnalyticError> {
    check_radial(xf, spec)?;
    Ok(2.0)
}

/// Transverse CP field for a focus at `(0, yf, 0)`:
/// `(1/(2y)) (2a + 2y − 2|a − y| + √(L² + 4(y−a)²) − √(L² + 4(y+a)²))`,
/// rearranged to `2 − 8a / (√(L² + 4(y−a)²) + √(L² + 4(y+a)²))` inside the
/// cylinder to avoid cancellation at small `y`.
pub fn ex_cp_radial_y(yf: f64, spec: &CylinderSpec) -> Result<f64, AnalyticError> {
    check_radial(yf, spec)?;
    let (a, l) = (spec.radius_a, spec.length_l);
    let sm = (l * l + 4.0 * (yf - a).powi(2)).sqrt();
    let sp = (l * l + 4.0 * (yf + a).powi(2)).sqrt();
    Ok(2.0 - 8.0 * a / (sm + sp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    EzLong,
    EzTrans,
    ExLong,
    ExTransX,
    ExTransY,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 5] = [
        ProfileKind::EzLong,
        ProfileKind::EzTrans,
        ProfileKind::ExLong,
        ProfileKind::ExTransX,
        ProfileKind::ExTransY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::EzLong => "ez_long",
            ProfileKind::EzTrans => "ez_trans",
            ProfileKind::ExLong => "ex_long",
            ProfileKind::ExTransX => "ex_trans_x",
            ProfileKind::ExTransY => "ex_trans_y",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Cut axis (0 = x, 1 = y, 2 = z) and target field component.
    pub fn axis_and_component(self) -> (usize, usize) {
        match self {
            ProfileKind::EzLong => (2, 2),
            ProfileKind::EzTrans => (0, 2),
            ProfileKind::ExLong => (2, 0),
            ProfileKind::ExTransX => (0, 0),
            ProfileKind::ExTransY => (1, 0),
        }
    }
}

/// Normalized CP focal profile versus displacement `delta` (m) from an
/// axial focus. Profiles are even in `delta`.
pub fn resolution_profile(
    kind: ProfileKind,
    delta: f64,
    k: f64,
    spec: &CylinderSpec,
) -> Result<f64, AnalyticError> {
    let x = k * delta.abs();
    Ok(match kind {
        ProfileKind::EzLong => {
            let s = (1.0 + 4.0 * spec.radius_a.powi(2) / spec.length_l.powi(2)).sqrt();
            PI / s * specfun::sinc(x / s)
        }
        ProfileKind::EzTrans => PI * specfun::sinc(x),
        ProfileKind::ExLong => 2.0 * specfun::struve_h(-1, x)?,
        ProfileKind::ExTransX => {
            if x < 1e-8 {
                2.0
            } else {
                PI * specfun::struve_h(0, x)? / x
            }
        }
        ProfileKind::ExTransY => {
            if x < 1e-8 {
                2.0
            } else {
                2.0 * specfun::sine_integral(x) / x
            }
        }
    })
}

/// Sampled analytic profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisProfile {
    pub axis: char,
    pub offsets: Vec<f64>,
    pub values: Vec<f64>,
    /// Value at zero offset, used to normalize plots.
    pub normalization: f64,
}

pub fn sample_profile(
    kind: ProfileKind,
    offsets: &[f64],
    k: f64,
    spec: &CylinderSpec,
) -> Result<AxisProfile, AnalyticError> {
    let values = offsets
        .iter()
        .map(|&d| resolution_profile(kind, d, k, spec))
        .collect::<Result<Vec<_>, _>>()?;
    let (axis, _) = kind.axis_and_component();
    Ok(AxisProfile {
        axis: ['x', 'y', 'z'][axis],
        offsets: offsets.to_vec(),
        values,
        normalization: resolution_profile(kind, 0.0, k, spec)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    X,
    Y,
    Z,
}

impl Component {
    pub fn unit(self) -> Vec3 {
        match self {
            Component::X => [1.0, 0.0, 0.0],
            Component::Y => [0.0, 1.0, 0.0],
            Component::Z => [0.0, 0.0, 1.0],
        }
    }
}

/// CP field components of an x-polarized aperture at an axial focus.
pub fn transverse_pol_cp(
    component: Component,
    zf: f64,
    spec: &CylinderSpec,
) -> Result<f64, AnalyticError> {
    check_axis(zf, spec)?;
    let a = spec.radius_a;
    let h = 0.5 * spec.length_l;
    let up = h - zf;
    let um = -h - zf;
    let rp = a.hypot(up);
    let rm = a.hypot(um);
    Ok(match component {
        Component::X => {
            PI / 4.0 * (2.0 * (up / a).asinh() - 2.0 * (um / a).asinh() - up / rp + um / rm)
        }
        Component::Y => 0.5 * (up / rp - um / rm),
        Component::Z => 2.0 - a * (1.0 / rp + 1.0 / rm),
    })
}

/// TR field components of an x-polarized aperture at an axial focus.
pub fn transverse_pol_tr(
    component: Component,
    zf: f64,
    spec: &CylinderSpec,
) -> Result<f64, AnalyticError> {
    span_difference(
        zf,
        spec,
        match component {
            Component::X => transverse_x_tr_antiderivative,
            Component::Y => transverse_y_tr_antiderivative,
            Component::Z => transverse_z_tr_antiderivative,
        },
    )
}

/// Long-aperture limits in normalized units.
pub mod constants {
    use std::f64::consts::PI;

    pub const EZ_CP: f64 = PI;
    pub const EX_CP: f64 = 2.0;
    pub const EZ_TR: f64 = 3.0 * PI * PI / 16.0;
    pub const EX_TR: f64 = PI * PI / 32.0;
    pub const CP_RATIO: f64 = PI / 2.0;
    pub const TR_RATIO: f64 = 6.0;
    pub const TRANSVERSE_CP_Y: f64 = 1.0;
    pub const TRANSVERSE_CP_Z: f64 = 2.0;
    /// Limit of the x-polarized TR co-polar field implied by its closed form.
    pub const TRANSVERSE_TR_X: f64 = 41.0 * PI * PI / 128.0;
    /// Competing value with a 108 denominator; rejected by direct integration.
    pub const TRANSVERSE_TR_X_ALT: f64 = 41.0 * PI * PI / 108.0;
    pub const TRANSVERSE_TR_Y: f64 = 3.0 * PI * PI / 128.0;
    pub const TRANSVERSE_TR_Y_ALT: f64 = 3.0 * PI * PI / 108.0;
    pub const TRANSVERSE_TR_Z: f64 = PI * PI / 32.0;

    /// `(name, expression, value)` for reports.
    pub fn table() -> Vec<(&'static str, &'static str, f64)> {
        vec![
            ("ez_cp", "pi", EZ_CP),
            ("ex_cp", "2", EX_CP),
            ("ez_tr", "3*pi^2/16", EZ_TR),
            ("ex_tr", "pi^2/32", EX_TR),
            ("cp_ratio", "pi/2", CP_RATIO),
            ("tr_ratio", "6", TR_RATIO),
            ("transverse_cp_y", "1", TRANSVERSE_CP_Y),
            ("transverse_cp_z", "2", TRANSVERSE_CP_Z),
            ("transverse_tr_x", "41*pi^2/128", TRANSVERSE_TR_X),
            ("transverse_tr_y", "3*pi^2/128", TRANSVERSE_TR_Y),
            ("transverse_tr_z", "pi^2/32", TRANSVERSE_TR_Z),
        ]
    }
}

/// Element-to-focus amplitude `|ê · (p̂ − (R̂·p̂)R̂)| / R`.
fn amplitude(focus: Vec3, src: Vec3, p: Vec3, e: Vec3) -> f64 {
    let d = sub(focus, src);
    let r = norm(d);
    let pr = dot(d, p) / (r * r);
    (dot(e, p) - pr * dot(d, e)).abs() / r
}

fn cylinder_breaks(focus: Vec3) -> (Vec<f64>, Vec<f64>) {
    let mut phi: Vec<f64> = (1..8).map(|i| i as f64 * PI / 4.0).collect();
    if focus[0] != 0.0 || focus[1] != 0.0 {
        let t = focus[1].atan2(focus[0]).rem_euclid(2.0 * PI);
        phi.push(t);
        phi.push((t + PI).rem_euclid(2.0 * PI));
    }
    (phi, vec![focus[2]])
}

fn aperture_integral(
    focus: Vec3,
    polarization: Polarization,
    e_hat: Vec3,
    spec: &CylinderSpec,
    power: i32,
    rel_tol: f64,
) -> Quadrature {
    let a = spec.radius_a;
    let h = 0.5 * spec.length_l;
    let (phi_breaks, l_breaks) = cylinder_breaks(focus);
    let f = |phi: f64, l: f64| {
        let src = [a * phi.cos(), a * phi.sin(), l];
        amplitude(focus, src, polarization.direction(phi), e_hat).powi(power)
    };
    let mut q = integrate_2d(
        f,
        (0.0, 2.0 * PI),
        &phi_breaks,
        (-h, h),
        &l_breaks,
        1e-13,
        rel_tol,
    );
    let factor = if power == 1 { 0.25 } else { 0.25 * a };
    q.value *= factor;
    q.abs_error *= factor;
    q
}

/// Direct integration of the normalized CP field.
pub fn cp_quadrature(
    focus: Vec3,
    polarization: Polarization,
    e_hat: Vec3,
    spec: &CylinderSpec,
) -> Quadrature {
    aperture_integral(focus, polarization, e_hat, spec, 1, 1e-10)
}

/// Direct integration of the normalized TR field.
pub fn tr_quadrature(
    focus: Vec3,
    polarization: Polarization,
    e_hat: Vec3,
    spec: &CylinderSpec,
) -> Quadrature {
    aperture_integral(focus, polarization, e_hat, spec, 2, 1e-10)
}

/// Settles which long-aperture constant the x-polarized TR co-polar field
/// approaches by integrating the TR amplitude directly at `L = 1000 a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantResolution {
    pub quantity: &'static str,
    pub oracle_value: f64,
    pub oracle_abs_error: f64,
    pub length_over_radius: f64,
    pub closed_form_value: f64,
    pub candidate_128: f64,
    pub candidate_108: f64,
    pub rel_dev_128: f64,
    pub rel_dev_108: f64,
    pub selected: &'static str,
}

pub fn resolve_transverse_tr_x() -> ConstantResolution {
    let ratio = 1000.0;
    let spec = CylinderSpec {
        radius_a: 1.0,
        length_l: ratio,
    };
    let q = tr_quadrature([0.0; 3], Polarization::Transverse, [1.0, 0.0, 0.0], &spec);
    let closed = transverse_pol_tr(Component::X, 0.0, &spec).unwrap_or(f64::NAN);
    let d128 = (q.value - constants::TRANSVERSE_TR_X).abs() / constants::TRANSVERSE_TR_X;
    let d108 = (q.value - constants::TRANSVERSE_TR_X_ALT).abs() / constants::TRANSVERSE_TR_X_ALT;
    ConstantResolution {
        quantity: "transverse_tr_x asymptote",
        oracle_value: q.value,
        oracle_abs_error: q.abs_error,
        length_over_radius: ratio,
        closed_form_value: closed,
        candidate_128: constants::TRANSVERSE_TR_X,
        candidate_108: constants::TRANSVERSE_TR_X_ALT,
        rel_dev_128: d128,
        rel_dev_108: d108,
        selected: if d128 <= d108 {
            "41*pi^2/128"
        } else {
            "41*pi^2/108"
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cyl(a: f64, l: f64) -> CylinderSpec {
        CylinderSpec::new(a, l).unwrap()
    }

    #[test]
    fn kernel_limits() {
        assert_eq!(kernel_point(0.0), 1.0);
        for th in [0.0, 0.4, FRAC_PI_2] {
            assert!((kernel_dipole(0.0, th) - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn axis_curves() {
        let long = cyl(1.0, 1000.0);
        assert!((ez_cp_axis(0.0, &long).unwrap() - PI).abs() < 1e-4 * PI);
        let short = cyl(1.0, 2.0);
        assert!((ez_cp_axis(0.0, &short).unwrap() - PI / 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(
            ez_cp_axis(0.3, &short).unwrap(),
            ez_cp_axis(-0.3, &short).unwrap()
        );
        assert!(ez_cp_axis(1.0, &short).is_err());
        let r = ez_tr_axis(0.0, &long).unwrap() / ex_tr_axis(0.0, &long).unwrap();
        assert!((r - 6.0).abs() < 1e-3);
    }

    #[test]
    fn axis_curves_match_quadrature() {
        let spec = cyl(1.0, 7.0);
        let z = [0.0, 0.0, 1.3];
        let x = [1.0, 0.0, 0.0];
        let zh = [0.0, 0.0, 1.0];
        let cases = [
            (
                ez_cp_axis(1.3, &spec).unwrap(),
                cp_quadrature(z, Polarization::Axial, zh, &spec).value,
            ),
            (
                ex_cp_axis(1.3, &spec).unwrap(),
                cp_quadrature(z, Polarization::Axial, x, &spec).value,
            ),
            (
                ez_tr_axis(1.3, &spec).unwrap(),
                tr_quadrature(z, Polarization::Axial, zh, &spec).value,
            ),
            (
                ex_tr_axis(1.3, &spec).unwrap(),
                tr_quadrature(z, Polarization::Axial, x, &spec).value,
            ),
        ];
        for (i, (closed, quad)) in cases.iter().enumerate() {
            assert!(
                (closed - quad).abs() < 1e-8 * quad.abs(),
                "case {i}: {closed} vs {quad}"
            );
        }
    }

    #[test]
    fn radial_elliptic_form_matches_quadrature() {
        let spec = cyl(1.0, 10.0);
        assert!(
            (ez_cp_radial(0.0, &spec).unwrap() - ez_cp_axis(0.0, &spec).unwrap()).abs() < 1e-13
        );
        for xf in [0.3, 0.5, 0.8] {
            let q =
                cp_quadrature([xf, 0.0, 0.0], Polarization::Axial, [0.0, 0.0, 1.0], &spec).value;
            let v = ez_cp_radial(xf, &spec).unwrap();
            assert!((v - q).abs() < 1e-8 * q, "{xf}: {v} vs {q}");
            assert!((ez_cp_radial_printed(xf, &spec).unwrap() - q / 2.0).abs() < 1e-8 * q);
        }
        assert!(ez_cp_radial(1.0, &spec).is_err());
    }

    #[test]
    fn radial_y_form_matches_quadrature() {
        let spec = cyl(1.0, 100.0);
        let printed = |y: f64| {
            let (a, l) = (1.0f64, 100.0f64);
            (2.0 * a + 2.0 * y - 2.0 * (a - y).abs() + (l * l + 4.0 * (y - a).powi(2)).sqrt()
                - (l * l + 4.0 * (y + a).powi(2)).sqrt())
                / (2.0 * y)
        };
        for yf in [0.1, 0.5, 0.9] {
            let q =
                cp_quadrature([0.0, yf, 0.0], Polarization::Axial, [1.0, 0.0, 0.0], &spec).value;
            let v = ex_cp_radial_y(yf, &spec).unwrap();
            assert!((v - q).abs() < 1e-2 * q);
            assert!((v - printed(yf)).abs() < 1e-12);
        }
        let lim = 2.0 - 4.0 / (100f64 * 100.0 + 4.0).sqrt();
        assert!((ex_cp_radial_y(1e-9, &spec).unwrap() - lim).abs() < 1e-12);
        assert_eq!(ex_cp_radial_x(0.4, &spec).unwrap(), 2.0);
    }

    #[test]
    fn transverse_forms_match_quadrature() {
        let spec = cyl(1.0, 6.0);
        for comp in [Component::X, Component::Y, Component::Z] {
            let f = [0.0, 0.0, 0.7];
            let cp = transverse_pol_cp(comp, 0.7, &spec).unwrap();
            let qcp = cp_quadrature(f, Polarization::Transverse, comp.unit(), &spec).value;
            assert!((cp - qcp).abs() < 1e-8 * qcp, "{comp:?} cp {cp} vs {qcp}");
            let tr = transverse_pol_tr(comp, 0.7, &spec).unwrap();
            let qtr = tr_quadrature(f, Polarization::Transverse, comp.unit(), &spec).value;
            assert!((tr - qtr).abs() < 1e-8 * qtr, "{comp:?} tr {tr} vs {qtr}");
        }
    }

    #[test]
    fn profile_peaks() {
        let spec = cyl(1.0, 1e4);
        let k = 2.0 * PI;
        assert!(
            (resolution_profile(ProfileKind::EzTrans, 0.0, k, &spec).unwrap() - PI).abs() < 1e-15
        );
        assert!(
            (resolution_profile(ProfileKind::ExLong, 0.0, k, &spec).unwrap() - 4.0 / PI).abs()
                < 1e-15
        );
        assert_eq!(
            resolution_profile(ProfileKind::ExTransX, 0.0, k, &spec).unwrap(),
            2.0
        );
        assert_eq!(
            resolution_profile(ProfileKind::ExTransY, 0.0, k, &spec).unwrap(),
            2.0
        );
        let short = cyl(1.0, 2.0);
        let v = resolution_profile(ProfileKind::EzLong, 0.1, k, &short).unwrap();
        assert!((v - PI / 2f64.sqrt() * specfun::sinc(0.1 * k / 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(
            ProfileKind::parse("ex_trans_y"),
            Some(ProfileKind::ExTransY)
        );
        assert_eq!(ProfileKind::parse("nope"), None);
    }

    proptest! {
        #[test]
        fn profiles_are_even(d in 0.0f64..2.0) {
            let spec = cyl(1.0, 10.0);
            for kind in ProfileKind::ALL {
                let a = resolution_profile(kind, d, 2.0 * PI, &spec).unwrap();
                let b = resolution_profile(kind, -d, 2.0 * PI, &spec).unwrap();
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn axis_curves_are_even(z in 0.0f64..4.9) {
            let spec = cyl(1.0, 10.0);
            for f in [ez_cp_axis, ex_cp_axis, ez_tr_axis, ex_tr_axis] {
                let a = f(z, &spec).unwrap();
                let b = f(-z, &spec).unwrap();
                prop_assert!((a - b).abs() <= 1e-13 * a.abs());
            }
        }
    }
}
