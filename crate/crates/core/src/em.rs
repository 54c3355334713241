//! Vector fields of impressed electric and magnetic point currents.
//!
//! Time convention `e^{jωt}`; the scalar Green's function is
//! `g(R) = e^{-jkR} / (4πR)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{ArrayLayout, DipoleElement, SurfacePatch, Wavelength};
use crate::vector::{dot, norm, scale, sub, Vec3};
use crate::ETA0;

pub type Tensor3 = [[C; 3]; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmError {
    #[error("observation point coincides with a source")]
    Coincident,
    #[error(
        "point {point:?} is {distance} m from source {source_index}, inside the {min} m standoff"
    )]
    Standoff {
        point: Vec3,
        source_index: usize,
        distance: f64,
        min: f64,
    },
    #[error("polarization vector must be a unit vector")]
    BadPolarization,
    #[error("weights have length {weights}, aperture has {sources} sources")]
    LengthMismatch { weights: usize, sources: usize },
}

/// Complex vector field sample `(Ex, Ey, Ez)` in V/m.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexField3(pub [C; 3]);

impl ComplexField3 {
    pub fn ex(&self) -> C {
        self.0[0]
    }
    pub fn ey(&self) -> C {
        self.0[1]
    }
    pub fn ez(&self) -> C {
        self.0[2]
    }

    /// Projection onto a real direction.
    pub fn project(&self, e_hat: Vec3) -> C {
        self.0[0] * e_hat[0] + self.0[1] * e_hat[1] + self.0[2] * e_hat[2]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    fn add_scaled(&mut self, other: &ComplexField3, w: C) {
        for i in 0..3 {
            self.0[i] += other.0[i] * w;
        }
    }
}

/// Hertzian-dipole field constant `R_e = -j η₀ l k / (4π)` for the
/// `e^{jωt}` convention, so that the approximate dipole field coincides
/// with the far-field limit of [`green_electric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleConstants {
    pub eta0: f64,
    pub re_const: C,
}

impl DipoleConstants {
    pub fn new(length_l: f64, wl: &Wavelength) -> Self {
        Self {
            eta0: ETA0,
            re_const: C::new(0.0, -ETA0 * length_l * wl.k / (4.0 * PI)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// Complete dyadic kernel with all near-field terms.
    Full,
    /// Single-term `e^{-jkr}/r` transverse dipole field.
    DipoleApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Electric,
    Magnetic,
}

fn check_distance(r: Vec3, r_src: Vec3) -> Result<(Vec3, f64), EmError> {
    let d = sub(r, r_src);
    let dist = norm(d);
    if dist > 0.0 {
        Ok((d, dist))
    } else {
        Err(EmError::Coincident)
    }
}

fn scalar_green(k: f64, dist: f64) -> C {
    C::from_polar(1.0 / (4.0 * PI * dist), -k * dist)
}

/// Electric-current dyadic kernel `-jkη₀ (I + ∇∇/k²) g`.
pub fn green_electric(r: Vec3, r_src: Vec3, wl: &Wavelength) -> Result<Tensor3, EmError> {
    let (d, dist) = check_distance(r, r_src)?;
    let (a, b, pref) = electric_coefficients(wl.k, dist);
    let rh = scale(d, 1.0 / dist);
    let mut t = [[C::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { a } else { C::new(0.0, 0.0) };
            t[i][j] = pref * (delta + b * rh[i] * rh[j]);
        }
    }
    Ok(t)
}

/// `(A, B, prefactor)` such that `G = prefactor·(A·I + B·R̂R̂)`.
fn electric_coefficients(k: f64, dist: f64) -> (C, C, C) {
    let kr = k * dist;
    let inv = 1.0 / kr;
    let inv2 = inv * inv;
    let a = C::new(1.0 - inv2, -inv);
    let b = C::new(-1.0 + 3.0 * inv2, 3.0 * inv);
    let pref = C::new(0.0, -k * ETA0) * scalar_green(k, dist);
    (a, b, pref)
}

/// Magnetic-current kernel `-∇ × (I g)`: `E = (1 + jkR) e^{-jkR}/(4πR²) · R̂ × M`.
pub fn green_magnetic(r: Vec3, r_src: Vec3, wl: &Wavelength) -> Result<Tensor3, EmError> {
    let (d, dist) = check_distance(r, r_src)?;
    let c = magnetic_coefficient(wl.k, dist);
    let rh = scale(d, 1.0 / dist);
    let z = C::new(0.0, 0.0);
    Ok([
        [z, -c * rh[2], c * rh[1]],
        [c * rh[2], z, -c * rh[0]],
        [-c * rh[1], c * rh[0], z],
    ])
}

fn magnetic_coefficient(k: f64, dist: f64) -> C {
    C::new(1.0, k * dist) * scalar_green(k, dist) / dist
}

/// Approximate Hertzian-dipole field `R_e I e^{-jkr}/r (p̂ − (r̂·p̂) r̂)`.
pub fn dipole_field_approx(
    element: &DipoleElement,
    drive: C,
    r: Vec3,
    wl: &Wavelength,
) -> Result<ComplexField3, EmError> {
    let (d, dist) = check_distance(r, element.position)?;
    let min = 0.25 * wl.lambda;
    if dist < min {
        return Err(EmError::Standoff {
            point: r,
            source_index: 0,
            distance: dist,
            min,
        });
    }
    let re = DipoleConstants::new(element.length_l, wl).re_const;
    let amp = re * drive * C::from_polar(1.0 / dist, -wl.k * dist);
    let rh = scale(d, 1.0 / dist);
    let p = element.orientation_p;
    let pr = dot(rh, p);
    Ok(ComplexField3([
        amp * (p[0] - pr * rh[0]),
        amp * (p[1] - pr * rh[1]),
        amp * (p[2] - pr * rh[2]),
    ]))
}

/// A lumped current element: unit drive produces moment `moment · direction`
/// (A·m for electric, V·m for magnetic sources).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource {
    pub position: Vec3,
    pub direction: Vec3,
    pub moment: f64,
}

/// Tangential current component carried by mesh patches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurrentComponent {
    Phi,
    Z,
}

/// Radiating aperture: a discrete dipole array or a patch mesh carrying one
/// tangential current component (drive = surface current density).
#[derive(Debug, Clone, PartialEq)]
pub enum Aperture {
    Array(ArrayLayout),
    Mesh {
        patches: Vec<SurfacePatch>,
        component: CurrentComponent,
    },
}

impl Aperture {
    pub fn sources(&self) -> Vec<PointSource> {
        match self {
            Aperture::Array(layout) => layout
                .elements
                .iter()
                .map(|e| PointSource {
                    position: e.position,
                    direction: e.orientation_p,
                    moment: e.length_l,
                })
                .collect(),
            Aperture::Mesh { patches, component } => patches
                .iter()
                .map(|p| PointSource {
                    position: p.centroid,
                    direction: match component {
                        CurrentComponent::Phi => p.tangent_phi,
                        CurrentComponent::Z => p.tangent_z,
                    },
                    moment: p.area,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Aperture::Array(l) => l.elements.len(),
            Aperture::Mesh { patches, .. } => patches.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Field of one source with unit drive.
pub fn source_field(
    src: &PointSource,
    r: Vec3,
    wl: &Wavelength,
    kernel: Kernel,
    kind: SourceKind,
) -> ComplexField3 {
    let d = sub(r, src.position);
    let dist = norm(d);
    let rh = scale(d, 1.0 / dist);
    let p = src.direction;
    match (kind, kernel) {
        (SourceKind::Electric, Kernel::Full) => {
            let (a, b, pref) = electric_coefficients(wl.k, dist);
            let pr = dot(rh, p);
            let s = pref * src.moment;
            ComplexField3([
                s * (a * p[0] + b * (pr * rh[0])),
                s * (a * p[1] + b * (pr * rh[1])),
                s * (a * p[2] + b * (pr * rh[2])),
            ])
        }
        (SourceKind::Electric, Kernel::DipoleApprox) => {
            let s = C::new(0.0, -ETA0 * wl.k) * scalar_green(wl.k, dist) * src.moment;
            let pr = dot(rh, p);
            ComplexField3([
                s * (p[0] - pr * rh[0]),
                s * (p[1] - pr * rh[1]),
                s * (p[2] - pr * rh[2]),
            ])
        }
        (SourceKind::Magnetic, kernel) => {
            let c = match kernel {
                Kernel::Full => magnetic_coefficient(wl.k, dist),
                Kernel::DipoleApprox => C::new(0.0, wl.k) * scalar_green(wl.k, dist),
            } * src.moment;
            let x = crate::vector::cross(rh, p);
            ComplexField3([c * x[0], c * x[1], c * x[2]])
        }
    }
}

/// Per-source field vectors at a focal point plus the target polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<ComplexField3>,
    pub focal_point: Vec3,
    pub polarization_e: Vec3,
}

impl ChannelVector {
    /// Scalar channel `g_n = h_n · ê`.
    pub fn projected(&self) -> Vec<C> {
        self.entries
            .iter()
            .map(|h| h.project(self.polarization_e))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn standoff_check(sources: &[PointSource], r: Vec3, min: f64) -> Result<(), EmError> {
    for (i, s) in sources.iter().enumerate() {
        let d = norm(sub(r, s.position));
        if d < min {
            return Err(EmError::Standoff {
                point: r,
                source_index: i,
                distance: d,
                min,
            });
        }
    }
    Ok(())
}

/// Builds the channel from every source of `aperture` to `focal`.
pub fn assemble_channel(
    aperture: &Aperture,
    focal: Vec3,
    e_hat: Vec3,
    wl: &Wavelength,
    kernel: Kernel,
    kind: SourceKind,
) -> Result<ChannelVector, EmError> {
    if !crate::geometry::is_unit(e_hat) {
        return Err(EmError::BadPolarization);
    }
    let sources = aperture.sources();
    standoff_check(&sources, focal, 0.25 * wl.lambda)?;
    let entries = sources
        .par_iter()
        .map(|s| source_field(s, focal, wl, kernel, kind))
        .collect();
    Ok(ChannelVector {
        entries,
        focal_point: focal,
        polarization_e: e_hat,
    })
}

/// Sampled complex field over a list of points.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    pub points: Vec<Vec3>,
    pub fields: Vec<ComplexField3>,
    /// Indices of samples closer than λ/4 to a source (full kernel only).
    pub near_singular: Vec<usize>,
}

impl FieldMap {
    /// |E · ê| at every sample.
    pub fn magnitude(&self, e_hat: Vec3) -> Vec<f64> {
        self.fields
            .iter()
            .map(|f| f.project(e_hat).norm())
            .collect()
    }
}

/// Superposes `Σ w_n · field_n(r)` at every grid point. Summation runs in
/// source index order; grid points are processed in parallel.
pub fn evaluate_field(
    aperture: &Aperture,
    weights: &[C],
    grid: &[Vec3],
    wl: &Wavelength,
    kernel: Kernel,
    kind: SourceKind,
) -> Result<FieldMap, EmError> {
    let sources = aperture.sources();
    if weights.len() != sources.len() {
        return Err(EmError::LengthMismatch {
            weights: weights.len(),
            sources: sources.len(),
        });
    }
    let min = 0.25 * wl.lambda;
    let mut near_singular = Vec::new();
    for (i, &r) in grid.iter().enumerate() {
        match standoff_check(&sources, r, min) {
            Ok(()) => {}
            Err(e) => {
                let coincident = sources.iter().any(|s| norm(sub(r, s.position)) == 0.0);
                if kernel == Kernel::DipoleApprox || coincident {
                    return Err(if coincident { EmError::Coincident } else { e });
                }
                near_singular.push(i);
            }
        }
    }
    let active: Vec<(PointSource, C)> = sources
        .into_iter()
        .zip(weights.iter().copied())
        .filter(|(_, w)| *w != C::new(0.0, 0.0))
        .collect();
    let fields = grid
        .par_iter()
        .map(|&r| {
            let mut acc = ComplexField3::default();
            for (s, w) in &active {
                acc.add_scaled(&source_field(s, r, wl, kernel, kind), *w);
            }
            acc
        })
        .collect();
    Ok(FieldMap {
        points: grid.to_vec(),
        fields,
        near_singular,
    })
}
