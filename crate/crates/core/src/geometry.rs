//! Aperture geometry: Hertzian-dipole ring arrays on a cylinder, surface
//! meshes of cylinders and rectangular corridors, and evaluation grids.

use std::f64::consts::PI;

use thiserror::Error;

use crate::vector::{cross, dot, norm, Vec3, X_HAT, Y_HAT, Z_HAT};
use crate::C0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid {what}: {value}")]
    Invalid { what: &'static str, value: f64 },
    #[error("radius {radius} m is below a quarter wavelength ({min} m)")]
    RadiusTooSmall { radius: f64, min: f64 },
    #[error("degenerate ring: {0} elements per ring (need at least 3)")]
    DegenerateRing(usize),
    #[error("mesh needs n_axial >= 2 and n_azimuthal >= 3 (got {0} x {1})")]
    MeshTooCoarse(usize, usize),
    #[error("patch target {target} m exceeds a quarter wavelength ({max} m)")]
    PatchTooLarge { target: f64, max: f64 },
}

fn positive(what: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(GeometryError::Invalid { what, value })
    }
}

/// Free-space wavelength and wavenumber at a given frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavelength {
    pub frequency: f64,
    pub lambda: f64,
    pub k: f64,
}

impl Wavelength {
    pub fn from_frequency(frequency: f64) -> Result<Self, GeometryError> {
        let frequency = positive("frequency", frequency)?;
        let lambda = C0 / frequency;
        Ok(Self {
            frequency,
            lambda,
            k: 2.0 * PI / lambda,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderSpec {
    pub radius_a: f64,
    pub length_l: f64,
}

impl CylinderSpec {
    pub fn new(radius_a: f64, length_l: f64) -> Result<Self, GeometryError> {
        Ok(Self {
            radius_a: positive("radius", radius_a)?,
            length_l: positive("length", length_l)?,
        })
    }

    pub fn area(&self) -> f64 {
        2.0 * PI * self.radius_a * self.length_l
    }
}

/// Rectangular corridor: width along x, height along y, length along z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectCorridorSpec {
    pub width_la: f64,
    pub height_lb: f64,
    pub length_l: f64,
}

impl RectCorridorSpec {
    pub fn new(width_la: f64, height_lb: f64, length_l: f64) -> Result<Self, GeometryError> {
        let width_la = positive("width", width_la)?;
        let height_lb = positive("height", height_lb)?;
        let length_l = positive("length", length_l)?;
        if width_la < height_lb {
            return Err(GeometryError::Invalid {
                what: "width (must be >= height)",
                value: width_la,
            });
        }
        Ok(Self {
            width_la,
            height_lb,
            length_l,
        })
    }

    /// Radius of the largest circle inside the cross-section.
    pub fn inscribed_radius(&self) -> f64 {
        0.5 * self.height_lb
    }

    /// Radius of the circle through the four corners of the cross-section.
    pub fn circumscribed_radius(&self) -> f64 {
        0.5 * self.width_la.hypot(self.height_lb)
    }

    pub fn area(&self) -> f64 {
        2.0 * (self.width_la + self.height_lb) * self.length_l
    }

    pub fn inscribed_cylinder(&self) -> CylinderSpec {
        CylinderSpec {
            radius_a: self.inscribed_radius(),
            length_l: self.length_l,
        }
    }

    pub fn circumscribed_cylinder(&self) -> CylinderSpec {
        CylinderSpec {
            radius_a: self.circumscribed_radius(),
            length_l: self.length_l,
        }
    }
}

/// Element (or surface-current) orientation on the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    /// Along the cylinder axis (ẑ).
    Axial,
    /// Along the local circumferential direction φ̂.
    Azimuthal,
    /// Fixed transverse direction x̂ for every element.
    Transverse,
}

impl Polarization {
    pub fn direction(self, phi: f64) -> Vec3 {
        match self {
            Polarization::Axial => Z_HAT,
            Polarization::Azimuthal => [-phi.sin(), phi.cos(), 0.0],
            Polarization::Transverse => X_HAT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleElement {
    pub position: Vec3,
    pub orientation_p: Vec3,
    pub length_l: f64,
}

/// Concentric rings of Hertzian dipoles on a cylinder, stored ring by ring
/// (ring index major, azimuthal index minor).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    pub elements: Vec<DipoleElement>,
    pub rings: usize,
    pub per_ring: usize,
    pub spacing_d: f64,
    pub radius_a: f64,
}

impl ArrayLayout {
    /// Axial positions of the ring planes.
    pub fn ring_z(&self) -> Vec<f64> {
        (0..self.rings)
            .map(|m| self.elements[m * self.per_ring].position[2])
            .collect()
    }

    pub fn with_dipole_length(mut self, length: f64) -> Self {
        for e in &mut self.elements {
            e.length_l = length;
        }
        self
    }

    /// Surface area represented by one element.
    pub fn element_area(&self) -> f64 {
        2.0 * PI * self.radius_a / self.per_ring as f64 * self.spacing_d
    }
}

/// Default Hertzian-dipole length as a fraction of the wavelength.
pub const DEFAULT_DIPOLE_LENGTH_FRACTION: f64 = 0.05;

/// Builds a ring array with half-wavelength ring spacing and at most
/// half-wavelength arc spacing. Rings are centered on z = 0.
pub fn build_ring_array(
    spec: CylinderSpec,
    wl: Wavelength,
    polarization: Polarization,
) -> Result<ArrayLayout, GeometryError> {
    let half = 0.5 * wl.lambda;
    if spec.radius_a < 0.25 * wl.lambda {
        return Err(GeometryError::RadiusTooSmall {
            radius: spec.radius_a,
            min: 0.25 * wl.lambda,
        });
    }
    // Small relative slack so that exact multiples do not round up.
    let per_ring = (2.0 * PI * spec.radius_a / half * (1.0 - 1e-12)).ceil() as usize;
    if per_ring < 3 {
        return Err(GeometryError::DegenerateRing(per_ring));
    }
    let rings = (spec.length_l / half * (1.0 + 1e-12)).floor() as usize + 1;
    let length = DEFAULT_DIPOLE_LENGTH_FRACTION * wl.lambda;
    let mut elements = Vec::with_capacity(rings * per_ring);
    let centre = 0.5 * (rings as f64 - 1.0);
    for m in 0..rings {
        let z = (m as f64 - centre) * half;
        for n in 0..per_ring {
            let phi = 2.0 * PI * n as f64 / per_ring as f64;
            elements.push(DipoleElement {
                position: [spec.radius_a * phi.cos(), spec.radius_a * phi.sin(), z],
                orientation_p: polarization.direction(phi),
                length_l: length,
            });
        }
    }
    Ok(ArrayLayout {
        elements,
        rings,
        per_ring,
        spacing_d: half,
        radius_a: spec.radius_a,
    })
}

/// A flat surface cell carrying tangential current; the current is lumped
/// at the centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePatch {
    pub centroid: Vec3,
    pub area: f64,
    pub tangent_phi: Vec3,
    pub tangent_z: Vec3,
}

impl SurfacePatch {
    /// Outward unit normal.
    pub fn normal(&self) -> Vec3 {
        cross(self.tangent_phi, self.tangent_z)
    }
}

/// Meshes the cylinder side wall into `n_axial × n_azimuthal` patches,
/// axial index major.
pub fn build_cylinder_mesh(
    spec: CylinderSpec,
    n_axial: usize,
    n_azimuthal: usize,
) -> Result<Vec<SurfacePatch>, GeometryError> {
    if n_axial < 2 || n_azimuthal < 3 {
        return Err(GeometryError::MeshTooCoarse(n_axial, n_azimuthal));
    }
    let dz = spec.length_l / n_axial as f64;
    let dphi = 2.0 * PI / n_azimuthal as f64;
    let area = spec.radius_a * dphi * dz;
    let mut out = Vec::with_capacity(n_axial * n_azimuthal);
    for m in 0..n_axial {
        let z = -0.5 * spec.length_l + (m as f64 + 0.5) * dz;
        for n in 0..n_azimuthal {
            let phi = (n as f64 + 0.5) * dphi;
            let (s, c) = phi.sin_cos();
            out.push(SurfacePatch {
                centroid: [spec.radius_a * c, spec.radius_a * s, z],
                area,
                tangent_phi: [-s, c, 0.0],
                tangent_z: Z_HAT,
            });
        }
    }
    Ok(out)
}

/// Meshes the four walls of a rectangular corridor with cells no larger than
/// `patch_target` on a side. The horizontal tangent runs counter-clockwise
/// around the cross-section so that `tangent_phi × ẑ` points outward.
pub fn build_rect_corridor_mesh(
    spec: RectCorridorSpec,
    patch_target: f64,
    wl: Wavelength,
) -> Result<Vec<SurfacePatch>, GeometryError> {
    let patch_target = positive("patch target", patch_target)?;
    if patch_target > 0.25 * wl.lambda * (1.0 + 1e-12) {
        return Err(GeometryError::PatchTooLarge {
            target: patch_target,
            max: 0.25 * wl.lambda,
        });
    }
    let hx = 0.5 * spec.width_la;
    let hy = 0.5 * spec.height_lb;
    let nz = (spec.length_l / patch_target).ceil() as usize;
    let dz = spec.length_l / nz as f64;
    // (start corner, direction, side length)
    let walls: [(Vec3, Vec3, f64); 4] = [
        ([hx, -hy, 0.0], Y_HAT, spec.height_lb),
        ([hx, hy, 0.0], [-1.0, 0.0, 0.0], spec.width_la),
        ([-hx, hy, 0.0], [0.0, -1.0, 0.0], spec.height_lb),
        ([-hx, -hy, 0.0], X_HAT, spec.width_la),
    ];
    let mut out = Vec::new();
    for (start, dir, side) in walls {
        let ns = (side / patch_target).ceil() as usize;
        let ds = side / ns as f64;
        for m in 0..nz {
            let z = -0.5 * spec.length_l + (m as f64 + 0.5) * dz;
            for i in 0..ns {
                let s = (i as f64 + 0.5) * ds;
                out.push(SurfacePatch {
                    centroid: [start[0] + s * dir[0], start[1] + s * dir[1], z],
                    area: ds * dz,
                    tangent_phi: dir,
                    tangent_z: Z_HAT,
                });
            }
        }
    }
    Ok(out)
}

/// Evenly spaced points on `[-half_extent, half_extent]` along one axis
/// through `center`.
pub fn axis_cut(center: Vec3, axis: usize, half_extent: f64, step: f64) -> (Vec<f64>, Vec<Vec3>) {
    assert!(axis < 3 && step > 0.0 && half_extent >= 0.0);
    let n = (half_extent / step * (1.0 + 1e-12)).floor() as i64;
    let offsets: Vec<f64> = (-n..=n).map(|i| i as f64 * step).collect();
    let points = offsets
        .iter()
        .map(|&o| {
            let mut p = center;
            p[axis] += o;
            p
        })
        .collect();
    (offsets, points)
}

/// Rectangular grid in the plane spanned by axes `u` and `v` through
/// `center`; returned row-major with `v` as the slow index.
pub fn plane_grid(
    center: Vec3,
    (u, v): (usize, usize),
    (half_u, half_v): (f64, f64),
    step: f64,
) -> (Vec<f64>, Vec<f64>, Vec<Vec3>) {
    assert!(u < 3 && v < 3 && u != v && step > 0.0);
    let (ou, _) = axis_cut([0.0; 3], 0, half_u, step);
    let (ov, _) = axis_cut([0.0; 3], 0, half_v, step);
    let mut pts = Vec::with_capacity(ou.len() * ov.len());
    for &b in &ov {
        for &a in &ou {
            let mut p = center;
            p[u] += a;
            p[v] += b;
            pts.push(p);
        }
    }
    (ou, ov, pts)
}

/// True when `p` lies strictly inside the cylinder.
pub fn inside_cylinder(spec: &CylinderSpec, p: Vec3) -> bool {
    p[0].hypot(p[1]) < spec.radius_a && p[2].abs() < 0.5 * spec.length_l
}

/// True when `p` lies strictly inside the corridor.
pub fn inside_rect(spec: &RectCorridorSpec, p: Vec3) -> bool {
    p[0].abs() < 0.5 * spec.width_la
        && p[1].abs() < 0.5 * spec.height_lb
        && p[2].abs() < 0.5 * spec.length_l
}

/// Checks that a direction is a unit vector to 1e-12.
pub fn is_unit(v: Vec3) -> bool {
    (norm(v) - 1.0).abs() <= 1e-12
}

/// Checks that two tangents are orthogonal to 1e-12.
pub fn is_orthogonal(a: Vec3, b: Vec3) -> bool {
    dot(a, b).abs() <= 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz(f: f64) -> Wavelength {
        Wavelength::from_frequency(f * 1e9).unwrap()
    }

    #[test]
    fn baseline_counts() {
        let spec = CylinderSpec::new(1.0, 10.0).unwrap();
        let a = build_ring_array(spec, ghz(1.0), Polarization::Axial).unwrap();
        assert_eq!((a.per_ring, a.rings), (42, 67));
        assert_eq!(a.elements.len(), 42 * 67);
        let b = build_ring_array(spec, ghz(6.0), Polarization::Axial).unwrap();
        assert_eq!((b.per_ring, b.rings), (252, 401));
    }

    #[test]
    fn small_radius_rejected() {
        let wl = ghz(1.0);
        let spec = CylinderSpec::new(0.25 * wl.lambda - 1e-6, 1.0).unwrap();
        assert!(matches!(
            build_ring_array(spec, wl, Polarization::Axial),
            Err(GeometryError::RadiusTooSmall { .. })
        ));
    }

    #[test]
    fn arc_spacing_at_most_half_wavelength() {
        let wl = ghz(1.0);
        let spec = CylinderSpec::new(1.0, 2.0).unwrap();
        let a = build_ring_array(spec, wl, Polarization::Azimuthal).unwrap();
        let arc = 2.0 * PI * spec.radius_a / a.per_ring as f64;
        assert!(arc <= 0.5 * wl.lambda);
        for e in &a.elements {
            assert!(is_unit(e.orientation_p));
            // azimuthal direction is tangent to the ring
            assert!(dot(e.orientation_p, [e.position[0], e.position[1], 0.0]).abs() < 1e-12);
        }
        let z = a.ring_z();
        for w in z.windows(2) {
            assert!((w[1] - w[0] - a.spacing_d).abs() < 1e-12);
        }
    }

    #[test]
    fn ring_array_mirror_symmetric() {
        let spec = CylinderSpec::new(1.0, 3.0).unwrap();
        let a = build_ring_array(spec, ghz(1.0), Polarization::Axial).unwrap();
        for e in &a.elements {
            let mirrored = [e.position[0], e.position[1], -e.position[2]];
            assert!(a
                .elements
                .iter()
                .any(|f| crate::vector::norm(crate::vector::sub(f.position, mirrored)) < 1e-12));
        }
    }

    #[test]
    fn cylinder_mesh_area() {
        let spec = CylinderSpec::new(1.0, 10.0).unwrap();
        let m = build_cylinder_mesh(spec, 200, 36).unwrap();
        assert_eq!(m.len(), 7200);
        let total: f64 = m.iter().map(|p| p.area).sum();
        assert!((total - 20.0 * PI).abs() < 1e-9 * 20.0 * PI);
        assert!(m
            .iter()
            .all(|p| p.tangent_z == Z_HAT && is_orthogonal(p.tangent_phi, p.tangent_z)));
        assert_eq!(
            build_cylinder_mesh(CylinderSpec::new(1.0, 1.0).unwrap(), 2, 3)
                .unwrap()
                .len(),
            6
        );
        assert!(build_cylinder_mesh(spec, 1, 3).is_err());
    }

    #[test]
    fn rect_mesh_area_and_radii() {
        let wl = ghz(1.0);
        let spec = RectCorridorSpec::new(2.0, 2.0, 10.0).unwrap();
        let m = build_rect_corridor_mesh(spec, 0.05, wl).unwrap();
        let total: f64 = m.iter().map(|p| p.area).sum();
        assert!((total - 80.0).abs() < 1e-9 * 80.0);
        for p in &m {
            // outward normal points away from the axis
            let n = p.normal();
            assert!(n[0] * p.centroid[0] + n[1] * p.centroid[1] > 0.0);
        }
        let r = RectCorridorSpec::new(3.0, 2.0, 1.0).unwrap();
        assert_eq!(r.inscribed_radius(), 1.0);
        assert!((r.circumscribed_radius() - 13f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(build_rect_corridor_mesh(spec, 0.1, wl).is_err());
        assert!(RectCorridorSpec::new(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn cuts_are_symmetric() {
        let (o, p) = axis_cut([0.0, 0.0, 1.0], 2, 1.0, 0.25);
        assert_eq!(o.len(), 9);
        assert_eq!(p[0], [0.0, 0.0, 0.0]);
        assert_eq!(p[8], [0.0, 0.0, 2.0]);
        let (u, v, g) = plane_grid([0.0; 3], (0, 2), (0.5, 1.0), 0.5);
        assert_eq!((u.len(), v.len(), g.len()), (3, 5, 15));
    }
}
