use std::f64::consts::PI;

use nearfocus::analytic::{self, ProfileKind};
use nearfocus::em::{self, Aperture, Kernel, SourceKind};
use nearfocus::focusing::{self, PowerConstraints};
use nearfocus::geometry::{self, CylinderSpec, Polarization, Wavelength};
use nearfocus::quad;
use nearfocus::specfun;
use nearfocus::vector::{X_HAT, Z_HAT};
use proptest::prelude::*;

fn array(spec: CylinderSpec, wl: Wavelength) -> (Aperture, f64) {
    let layout = geometry::build_ring_array(spec, wl, Polarization::Axial).unwrap();
    let cell = layout.spacing_d * 2.0 * PI * spec.radius_a / layout.per_ring as f64;
    (Aperture::Array(layout), cell)
}

/// CP focal amplitude of the discrete array equals the continuous-aperture
/// integral once each element is assigned its cell area.
#[test]
fn discrete_cp_focus_matches_aperture_integral() {
    let wl = Wavelength::from_frequency(1e9).unwrap();
    let spec = CylinderSpec::new(1.0, 10.0).unwrap();
    let (ap, cell) = array(spec, wl);
    let l = 0.05 * wl.lambda;
    let re = em::DipoleConstants::new(l, &wl).re_const.norm();
    let pc = PowerConstraints::new(1.0, 1e300, 50.0).unwrap();
    for (e_hat, closed) in [
        (Z_HAT, analytic::ez_cp_axis(0.0, &spec).unwrap()),
        (X_HAT, analytic::ex_cp_axis(0.0, &spec).unwrap()),
    ] {
        let h = em::assemble_channel(
            &ap,
            [0.0; 3],
            e_hat,
            &wl,
            Kernel::DipoleApprox,
            SourceKind::Electric,
        )
        .unwrap();
        let (_, rep) = focusing::cp_weights(&h, &pc).unwrap();
        let continuous = re * 4.0 * spec.radius_a * closed / cell;
        let rel = (rep.e_focus.norm() - continuous).abs() / continuous;
        assert!(rel < 0.01, "relative deviation {rel}");
    }
}

/// Normalized transverse CP cut from the dipole array and from the patch
/// mesh with the full kernel.
#[test]
fn mesh_and_array_agree_far_from_the_wall() {
    let wl = Wavelength::from_frequency(1e9).unwrap();
    let spec = CylinderSpec::new(1.0, 4.0).unwrap();
    let (ap, _) = array(spec, wl);
    let mesh = Aperture::Mesh {
        patches: geometry::build_cylinder_mesh(spec, 160, 64).unwrap(),
        component: em::CurrentComponent::Z,
    };
    let pc = PowerConstraints::new(1.0, 1.0, 50.0).unwrap();
    let profile = |a: &Aperture, kernel| {
        let h =
            em::assemble_channel(a, [0.0; 3], Z_HAT, &wl, kernel, SourceKind::Electric).unwrap();
        let (w, _) = focusing::cp_weights(&h, &pc).unwrap();
        let (_, pts) = geometry::axis_cut([0.0; 3], 0, 0.6 * wl.lambda, wl.lambda / 64.0);
        let m = em::evaluate_field(a, &w.w, &pts, &wl, kernel, SourceKind::Electric)
            .unwrap()
            .magnitude(Z_HAT);
        let peak = m.iter().copied().fold(0.0, f64::max);
        m.into_iter().map(|v| v / peak).collect::<Vec<_>>()
    };
    let a = profile(&ap, Kernel::DipoleApprox);
    let b = profile(&mesh, Kernel::Full);
    let worst = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.02, "max deviation {worst}");
}

#[test]
fn transverse_profile_tends_to_sinc_for_long_apertures() {
    let wl = Wavelength::from_frequency(1e9).unwrap();
    let spec = CylinderSpec::new(1.0, 60.0).unwrap();
    let (ap, _) = array(spec, wl);
    let h = em::assemble_channel(
        &ap,
        [0.0; 3],
        Z_HAT,
        &wl,
        Kernel::DipoleApprox,
        SourceKind::Electric,
    )
    .unwrap();
    let (w, _) =
        focusing::cp_weights(&h, &PowerConstraints::new(1.0, 1e300, 50.0).unwrap()).unwrap();
    let (off, pts) = geometry::axis_cut([0.0; 3], 0, 0.4 * wl.lambda, wl.lambda / 64.0);
    let m = em::evaluate_field(
        &ap,
        &w.w,
        &pts,
        &wl,
        Kernel::DipoleApprox,
        SourceKind::Electric,
    )
    .unwrap()
    .magnitude(Z_HAT);
    let prof = analytic::sample_profile(ProfileKind::EzTrans, &off, wl.k, &spec).unwrap();
    let mid = m.len() / 2;
    for i in 0..m.len() {
        let d = (m[i] / m[mid] - prof.values[i] / prof.normalization).abs();
        assert!(d < 0.01, "offset {} deviation {d}", off[i]);
    }
}

proptest! {
    #[test]
    fn bessel_j0_matches_integral(x in -60.0f64..60.0) {
        let o = quad::integrate(|t| (x * t.sin()).cos(), 0.0, PI, 1e-14, 1e-13).value / PI;
        prop_assert!((specfun::bessel_j0(x).unwrap() - o).abs() < 1e-12);
    }

    #[test]
    fn sine_integral_derivative_is_sinc(x in 0.1f64..200.0) {
        let h = 1e-4;
        let d = (specfun::sine_integral(x + h) - specfun::sine_integral(x - h)) / (2.0 * h);
        prop_assert!((d - specfun::sinc(x)).abs() < 1e-7);
    }

    #[test]
    fn struve_orders_are_linked(x in 0.5f64..80.0) {
        // H_{-1}(x) = 2/pi - H_1(x) and H_0'(x) = H_{-1}(x).
        let h = 1e-5;
        let d = (specfun::struve_h(0, x + h).unwrap() - specfun::struve_h(0, x - h).unwrap()) / (2.0 * h);
        let hm1 = specfun::struve_h(-1, x).unwrap();
        prop_assert!((d - hm1).abs() < 1e-6);
        prop_assert!((hm1 + specfun::struve_h1(x).unwrap() - 2.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn elliptic_k_matches_integral(m in -30.0f64..0.999) {
        let o = quad::integrate(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, PI / 2.0, 1e-14, 1e-13).value;
        prop_assert!((specfun::complete_elliptic_k(m).unwrap() - o).abs() < 1e-11 * o);
    }
}
