//! Scenario files and the `run`, `validate`, `analytic` and `layout`
//! pipelines behind the command-line tool.
//!
//! A scenario is a flat TOML document whose keys carry their unit
//! (`radius_m`, `frequency_hz`, ...). Every omitted key is filled with a
//! default and the fully resolved scenario is written to the manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::analytic::{self, AnalyticError, Component, ProfileKind};
use crate::em::{self, Aperture, CurrentComponent, EmError, FieldMap, Kernel, SourceKind};
use crate::focusing::{
    self, ExcitationWeights, FocalReport, FocusError, OracleReport, PowerConstraints, Regime,
};
use crate::geometry::{
    self, ArrayLayout, CylinderSpec, DipoleElement, GeometryError, Polarization, RectCorridorSpec,
    Wavelength,
};
use crate::io;
use crate::metrics::{self, CutMetrics, MetricsError};
use crate::vector::Vec3;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Em(#[from] EmError),
    #[error(transparent)]
    Focus(#[from] FocusError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ScenarioError {
    /// Short machine-readable category for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Read { .. } => "read",
            ScenarioError::Parse(_) => "parse",
            ScenarioError::Invalid(_) => "invalid_scenario",
            ScenarioError::Geometry(_) => "geometry",
            ScenarioError::Em(_) => "field",
            ScenarioError::Focus(_) => "focusing",
            ScenarioError::Metrics(_) => "metrics",
            ScenarioError::Analytic(_) => "analytic",
            ScenarioError::Write { .. } => "write",
        }
    }
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Cylinder,
    Rectangle,
    /// A single dipole at the origin.
    Dipole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureKind {
    Discrete,
    Mesh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Cp,
    Tr,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Cut,
    Plane,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Full,
    DipoleApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKindName {
    Electric,
    Magnetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarizationName {
    Axial,
    Azimuthal,
    Transverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    X,
    Y,
    Z,
}

impl AxisName {
    pub fn index(self) -> usize {
        match self {
            AxisName::X => 0,
            AxisName::Y => 1,
            AxisName::Z => 2,
        }
    }

    pub fn unit(self) -> Vec3 {
        let mut v = [0.0; 3];
        v[self.index()] = 1.0;
        v
    }
}

/// Scenario as written by the user; every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub geometry: Option<GeometryKind>,
    pub radius_m: Option<f64>,
    pub length_m: Option<f64>,
    pub width_m: Option<f64>,
    pub height_m: Option<f64>,
    pub frequency_hz: Option<f64>,
    pub source_kind: Option<SourceKindName>,
    pub element_polarization: Option<PolarizationName>,
    pub aperture: Option<ApertureKind>,
    pub mesh_axial: Option<usize>,
    pub mesh_azimuthal: Option<usize>,
    pub mesh_patch_m: Option<f64>,
    pub kernel: Option<KernelKind>,
    pub dipole_length_m: Option<f64>,
    pub focal_x_m: Option<f64>,
    pub focal_y_m: Option<f64>,
    pub focal_z_m: Option<f64>,
    pub target_polarization: Option<AxisName>,
    pub w_max_a: Option<f64>,
    pub p0_w: Option<f64>,
    pub r0_ohm: Option<f64>,
    pub reference_area_m2: Option<f64>,
    pub method: Option<MethodKind>,
    pub tolerance_w: Option<f64>,
    pub max_iters: Option<usize>,
    pub oracle: Option<bool>,
    pub grid: Option<GridKind>,
    pub cut_axis: Option<AxisName>,
    pub cut_half_extent_m: Option<f64>,
    pub cut_step_m: Option<f64>,
    pub plane_u_axis: Option<AxisName>,
    pub plane_v_axis: Option<AxisName>,
    pub plane_half_u_m: Option<f64>,
    pub plane_half_v_m: Option<f64>,
    pub plane_step_m: Option<f64>,
    pub metrics_component: Option<AxisName>,
    pub analytic_reference: Option<String>,
    pub validate_tolerance: Option<f64>,
    pub analytic_curve: Option<String>,
    pub curve_points: Option<usize>,
}

/// Fully resolved scenario; serialized verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub geometry: GeometryKind,
    pub radius_m: f64,
    pub length_m: f64,
    pub width_m: Option<f64>,
    pub height_m: Option<f64>,
    pub frequency_hz: f64,
    pub wavelength_m: f64,
    pub source_kind: SourceKindName,
    pub element_polarization: PolarizationName,
    pub aperture: ApertureKind,
    pub mesh_axial: Option<usize>,
    pub mesh_azimuthal: Option<usize>,
    pub mesh_patch_m: Option<f64>,
    pub kernel: KernelKind,
    pub dipole_length_m: f64,
    pub focal_point_m: Vec3,
    pub target_polarization: AxisName,
    pub w_max_a: f64,
    pub p0_w: f64,
    pub r0_ohm: f64,
    pub reference_area_m2: Option<f64>,
    pub method: MethodKind,
    pub tolerance_w: f64,
    pub max_iters: usize,
    pub oracle: bool,
    pub grid: GridKind,
    pub cut_axis: AxisName,
    pub cut_half_extent_m: f64,
    pub cut_step_m: f64,
    pub plane_u_axis: AxisName,
    pub plane_v_axis: AxisName,
    pub plane_half_u_m: f64,
    pub plane_half_v_m: f64,
    pub plane_step_m: f64,
    pub metrics_component: AxisName,
    pub analytic_reference: Option<String>,
    pub validate_tolerance: f64,
    pub analytic_curve: Option<String>,
    pub curve_points: usize,
}

/// Parses a scenario document and fills in defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    resolve(file)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

fn positive(name: &str, v: f64) -> Result<f64, ScenarioError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite (got {v})"
        )))
    }
}

pub fn resolve(f: ScenarioFile) -> Result<Scenario, ScenarioError> {
    let geometry = f.geometry.unwrap_or(GeometryKind::Cylinder);
    let frequency_hz = positive("frequency_hz", f.frequency_hz.unwrap_or(1e9))?;
    let lambda = Wavelength::from_frequency(frequency_hz)?.lambda;
    let radius_m = positive("radius_m", f.radius_m.unwrap_or(1.0))?;
    let length_m = positive("length_m", f.length_m.unwrap_or(10.0))?;
    let (width_m, height_m) = match geometry {
        GeometryKind::Rectangle => (
            Some(positive(
                "width_m",
                f.width_m
                    .ok_or_else(|| invalid("rectangle needs width_m"))?,
            )?),
            Some(positive(
                "height_m",
                f.height_m
                    .ok_or_else(|| invalid("rectangle needs height_m"))?,
            )?),
        ),
        _ => {
            if f.width_m.is_some() || f.height_m.is_some() {
                return Err(invalid(
                    "width_m/height_m only apply to geometry = \"rectangle\"",
                ));
            }
            (None, None)
        }
    };
    let aperture = f.aperture.unwrap_or(match geometry {
        GeometryKind::Rectangle => ApertureKind::Mesh,
        _ => ApertureKind::Discrete,
    });
    if geometry == GeometryKind::Rectangle && aperture == ApertureKind::Discrete {
        return Err(invalid(
            "rectangle corridors are only supported with aperture = \"mesh\"",
        ));
    }
    if geometry == GeometryKind::Dipole && aperture == ApertureKind::Mesh {
        return Err(invalid("a single dipole cannot be meshed"));
    }
    let element_polarization = f.element_polarization.unwrap_or(PolarizationName::Axial);
    if aperture == ApertureKind::Mesh && element_polarization == PolarizationName::Transverse {
        return Err(invalid(
            "mesh apertures carry axial or azimuthal current only",
        ));
    }
    let (mesh_axial, mesh_azimuthal, mesh_patch_m) = match (aperture, geometry) {
        (ApertureKind::Mesh, GeometryKind::Cylinder) => (
            Some(f.mesh_axial.unwrap_or(200)),
            Some(f.mesh_azimuthal.unwrap_or(36)),
            None,
        ),
        (ApertureKind::Mesh, _) => (
            None,
            None,
            Some(positive(
                "mesh_patch_m",
                f.mesh_patch_m.unwrap_or(0.25 * lambda),
            )?),
        ),
        _ => (None, None, None),
    };
    let kernel = f.kernel.unwrap_or(match aperture {
        ApertureKind::Discrete => KernelKind::DipoleApprox,
        ApertureKind::Mesh => KernelKind::Full,
    });
    let p0_w = positive("p0_w", f.p0_w.unwrap_or(1.0))?;
    let r0_ohm = positive("r0_ohm", f.r0_ohm.unwrap_or(50.0))?;
    let w_max_a = positive("w_max_a", f.w_max_a.unwrap_or((2.0 * p0_w / r0_ohm).sqrt()))?;
    let reference_area_m2 = match aperture {
        ApertureKind::Mesh => Some(match f.reference_area_m2 {
            Some(a) => positive("reference_area_m2", a)?,
            None => mean_patch_area(
                geometry,
                radius_m,
                length_m,
                width_m,
                height_m,
                mesh_axial,
                mesh_azimuthal,
                mesh_patch_m,
            ),
        }),
        ApertureKind::Discrete => {
            if f.reference_area_m2.is_some() {
                return Err(invalid("reference_area_m2 only applies to mesh apertures"));
            }
            None
        }
    };
    let focal_point_m = [
        f.focal_x_m.unwrap_or(0.0),
        f.focal_y_m.unwrap_or(0.0),
        f.focal_z_m.unwrap_or(0.0),
    ];
    if focal_point_m.iter().any(|x| !x.is_finite()) {
        return Err(invalid("focal point must be finite"));
    }
    let target_polarization = f.target_polarization.unwrap_or(AxisName::Z);
    let tolerance_w = positive(
        "tolerance_w",
        f.tolerance_w.unwrap_or(focusing::DEFAULT_TOL_REL * p0_w),
    )?;
    let cut_step_m = positive("cut_step_m", f.cut_step_m.unwrap_or(lambda / 128.0))?;
    let plane_step_m = positive("plane_step_m", f.plane_step_m.unwrap_or(lambda / 32.0))?;
    let validate_tolerance = f.validate_tolerance.unwrap_or(0.02);
    if !(validate_tolerance >= 0.0) {
        return Err(invalid("validate_tolerance must be >= 0"));
    }
    if let Some(r) = &f.analytic_reference {
        if !VALIDATE_REFERENCES.contains(&r.as_str()) {
            return Err(invalid(format!(
                "unknown analytic_reference {r:?} (expected one of {VALIDATE_REFERENCES:?})"
            )));
        }
    }
    if let Some(c) = &f.analytic_curve {
        if !ANALYTIC_CURVES.contains(&c.as_str()) {
            return Err(invalid(format!(
                "unknown analytic_curve {c:?} (expected one of {ANALYTIC_CURVES:?})"
            )));
        }
    }
    let plane_u_axis = f.plane_u_axis.unwrap_or(AxisName::X);
    let plane_v_axis = f.plane_v_axis.unwrap_or(AxisName::Z);
    if plane_u_axis == plane_v_axis {
        return Err(invalid("plane axes must differ"));
    }
    let s = Scenario {
        name: f.name.unwrap_or_else(|| "scenario".to_string()),
        geometry,
        radius_m,
        length_m,
        width_m,
        height_m,
        frequency_hz,
        wavelength_m: lambda,
        source_kind: f.source_kind.unwrap_or(SourceKindName::Electric),
        element_polarization,
        aperture,
        mesh_axial,
        mesh_azimuthal,
        mesh_patch_m,
        kernel,
        dipole_length_m: positive(
            "dipole_length_m",
            f.dipole_length_m
                .unwrap_or(geometry::DEFAULT_DIPOLE_LENGTH_FRACTION * lambda),
        )?,
        focal_point_m,
        target_polarization,
        w_max_a,
        p0_w,
        r0_ohm,
        reference_area_m2,
        method: f.method.unwrap_or(MethodKind::Hybrid),
        tolerance_w,
        max_iters: f.max_iters.unwrap_or(focusing::DEFAULT_MAX_ITERS),
        oracle: f.oracle.unwrap_or(false),
        grid: f.grid.unwrap_or(GridKind::Cut),
        cut_axis: f.cut_axis.unwrap_or(AxisName::X),
        cut_half_extent_m: positive(
            "cut_half_extent_m",
            f.cut_half_extent_m.unwrap_or(1.5 * lambda),
        )?,
        cut_step_m,
        plane_u_axis,
        plane_v_axis,
        plane_half_u_m: positive("plane_half_u_m", f.plane_half_u_m.unwrap_or(lambda))?,
        plane_half_v_m: positive("plane_half_v_m", f.plane_half_v_m.unwrap_or(lambda))?,
        plane_step_m,
        metrics_component: f.metrics_component.unwrap_or(target_polarization),
        analytic_reference: f.analytic_reference,
        validate_tolerance,
        analytic_curve: f.analytic_curve,
        curve_points: f.curve_points.unwrap_or(201).max(3),
    };
    check_focal(&s)?;
    Ok(s)
}

#[allow(clippy::too_many_arguments)]
fn mean_patch_area(
    geometry: GeometryKind,
    radius: f64,
    length: f64,
    width: Option<f64>,
    height: Option<f64>,
    n_axial: Option<usize>,
    n_azimuthal: Option<usize>,
    patch: Option<f64>,
) -> f64 {
    match geometry {
        GeometryKind::Rectangle => {
            let (w, h, p) = (
                width.unwrap_or(1.0),
                height.unwrap_or(1.0),
                patch.unwrap_or(1.0),
            );
            let nz = (length / p).ceil();
            let n_side = 2.0 * ((w / p).ceil() + (h / p).ceil());
            2.0 * (w + h) * length / (nz * n_side)
        }
        _ => {
            let n = (n_axial.unwrap_or(1) * n_azimuthal.unwrap_or(1)) as f64;
            2.0 * std::f64::consts::PI * radius * length / n
        }
    }
}

fn check_focal(s: &Scenario) -> Result<(), ScenarioError> {
    let p = s.focal_point_m;
    let inside = match s.geometry {
        GeometryKind::Cylinder => geometry::inside_cylinder(&s.cylinder(), p),
        GeometryKind::Rectangle => geometry::inside_rect(&s.rectangle()?, p),
        GeometryKind::Dipole => true,
    };
    if inside {
        Ok(())
    } else {
        Err(invalid(format!(
            "focal point {p:?} is not inside the aperture"
        )))
    }
}

/// Analytic references accepted by `validate`.
pub const VALIDATE_REFERENCES: [&str; 7] = [
    "ez_long",
    "ez_trans",
    "ex_long",
    "ex_trans_x",
    "ex_trans_y",
    "cp_ratio",
    "tr_ratio",
];

/// Closed-form curves accepted by `analytic`.
pub const ANALYTIC_CURVES: [&str; 20] = [
    "kernel_point",
    "kernel_dipole_0",
    "kernel_dipole_90",
    "ez_long",
    "ez_trans",
    "ex_long",
    "ex_trans_x",
    "ex_trans_y",
    "ez_cp_axis",
    "ez_tr_axis",
    "ex_cp_axis",
    "ex_tr_axis",
    "ez_cp_radial",
    "ex_cp_radial_y",
    "transverse_cp_x",
    "transverse_cp_y",
    "transverse_cp_z",
    "transverse_tr_x",
    "transverse_tr_y",
    "transverse_tr_z",
];

impl Scenario {
    pub fn wavelength(&self) -> Wavelength {
        Wavelength::from_frequency(self.frequency_hz).expect("validated frequency")
    }

    pub fn cylinder(&self) -> CylinderSpec {
        CylinderSpec {
            radius_a: self.radius_m,
            length_l: self.length_m,
        }
    }

    pub fn rectangle(&self) -> Result<RectCorridorSpec, ScenarioError> {
        Ok(RectCorridorSpec::new(
            self.width_m
                .ok_or_else(|| invalid("rectangle needs width_m"))?,
            self.height_m
                .ok_or_else(|| invalid("rectangle needs height_m"))?,
            self.length_m,
        )?)
    }

    pub fn polarization(&self) -> Polarization {
        match self.element_polarization {
            PolarizationName::Axial => Polarization::Axial,
            PolarizationName::Azimuthal => Polarization::Azimuthal,
            PolarizationName::Transverse => Polarization::Transverse,
        }
    }

    pub fn kernel(&self) -> Kernel {
        match self.kernel {
            KernelKind::Full => Kernel::Full,
            KernelKind::DipoleApprox => Kernel::DipoleApprox,
        }
    }

    pub fn source_kind(&self) -> SourceKind {
        match self.source_kind {
            SourceKindName::Electric => SourceKind::Electric,
            SourceKindName::Magnetic => SourceKind::Magnetic,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("scenario serializes")
    }
}

/// Builds the radiating aperture described by the scenario.
pub fn build_aperture(s: &Scenario) -> Result<Aperture, ScenarioError> {
    let wl = s.wavelength();
    let pol = s.polarization();
    Ok(match (s.geometry, s.aperture) {
        (GeometryKind::Dipole, _) => Aperture::Array(ArrayLayout {
            elements: vec![DipoleElement {
                position: [0.0; 3],
                orientation_p: pol.direction(0.0),
                length_l: s.dipole_length_m,
            }],
            rings: 1,
            per_ring: 1,
            spacing_d: 0.5 * wl.lambda,
            radius_a: 0.0,
        }),
        (GeometryKind::Cylinder, ApertureKind::Discrete) => Aperture::Array(
            geometry::build_ring_array(s.cylinder(), wl, pol)?
                .with_dipole_length(s.dipole_length_m),
        ),
        (GeometryKind::Cylinder, ApertureKind::Mesh) => Aperture::Mesh {
            patches: geometry::build_cylinder_mesh(
                s.cylinder(),
                s.mesh_axial.unwrap_or(200),
                s.mesh_azimuthal.unwrap_or(36),
            )?,
            component: current_component(pol)?,
        },
        (GeometryKind::Rectangle, _) => Aperture::Mesh {
            patches: geometry::build_rect_corridor_mesh(
                s.rectangle()?,
                s.mesh_patch_m.unwrap_or(0.25 * wl.lambda),
                wl,
            )?,
            component: current_component(pol)?,
        },
    })
}

fn current_component(pol: Polarization) -> Result<CurrentComponent, ScenarioError> {
    match pol {
        Polarization::Axial => Ok(CurrentComponent::Z),
        Polarization::Azimuthal => Ok(CurrentComponent::Phi),
        Polarization::Transverse => Err(invalid(
            "mesh apertures carry axial or azimuthal current only",
        )),
    }
}

/// Power constraints with per-patch port scaling `A_n / A_ref` for meshes.
pub fn constraints(s: &Scenario, aperture: &Aperture) -> Result<PowerConstraints, ScenarioError> {
    let pc = PowerConstraints::new(s.w_max_a, s.p0_w, s.r0_ohm)?;
    Ok(match aperture {
        Aperture::Mesh { patches, .. } => {
            let a_ref = s.reference_area_m2.unwrap_or(1.0);
            pc.with_port_scale(patches.iter().map(|p| p.area / a_ref).collect())?
        }
        Aperture::Array(_) => pc,
    })
}

/// Weights plus the focal report for the scenario's method.
pub fn solve_weights(
    method: MethodKind,
    h: &em::ChannelVector,
    pc: &PowerConstraints,
    tol: f64,
    max_iters: usize,
) -> Result<(ExcitationWeights, FocalReport), ScenarioError> {
    Ok(match method {
        MethodKind::Cp => focusing::cp_weights(h, pc)?,
        MethodKind::Tr => focusing::tr_weights(h, pc)?,
        MethodKind::Hybrid => focusing::hybrid_weights(h, pc, tol, max_iters)?,
    })
}

/// Evaluation grid of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Cut {
        axis: usize,
        offsets: Vec<f64>,
        points: Vec<Vec3>,
    },
    Plane {
        axes: (usize, usize),
        u: Vec<f64>,
        v: Vec<f64>,
        points: Vec<Vec3>,
    },
    None,
}

impl Grid {
    pub fn points(&self) -> &[Vec3] {
        match self {
            Grid::Cut { points, .. } | Grid::Plane { points, .. } => points,
            Grid::None => &[],
        }
    }
}

pub fn build_grid(s: &Scenario) -> Grid {
    match s.grid {
        GridKind::Cut => {
            let axis = s.cut_axis.index();
            let (offsets, points) =
                geometry::axis_cut(s.focal_point_m, axis, s.cut_half_extent_m, s.cut_step_m);
            Grid::Cut {
                axis,
                offsets,
                points,
            }
        }
        GridKind::Plane => {
            let axes = (s.plane_u_axis.index(), s.plane_v_axis.index());
            let (u, v, points) = geometry::plane_grid(
                s.focal_point_m,
                axes,
                (s.plane_half_u_m, s.plane_half_v_m),
                s.plane_step_m,
            );
            Grid::Plane { axes, u, v, points }
        }
        GridKind::None => Grid::None,
    }
}

/// Everything computed by one `run`.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub weights: ExcitationWeights,
    pub report: FocalReport,
    pub grid: Grid,
    pub field: Option<FieldMap>,
    pub metrics: serde_json::Value,
    pub oracle: Option<OracleReport>,
    pub contour: Option<metrics::Contour>,
}

pub fn run_scenario(s: &Scenario, seed: u64) -> Result<RunOutcome, ScenarioError> {
    let wl = s.wavelength();
    let aperture = build_aperture(s)?;
    let pc = constraints(s, &aperture)?;
    let h = em::assemble_channel(
        &aperture,
        s.focal_point_m,
        s.target_polarization.unit(),
        &wl,
        s.kernel(),
        s.source_kind(),
    )?;
    let (weights, report) = solve_weights(s.method, &h, &pc, s.tolerance_w, s.max_iters)?;
    let oracle = if s.oracle {
        if h.len() > focusing::ORACLE_MAX_N {
            return Err(invalid(format!(
                "oracle needs at most {} sources (aperture has {})",
                focusing::ORACLE_MAX_N,
                h.len()
            )));
        }
        Some(focusing::optimality_oracle(&h, &pc, &weights, seed)?)
    } else {
        None
    };
    let grid = build_grid(s);
    let comp = s.metrics_component.unit();
    let mut contour = None;
    let (field, metrics) = match &grid {
        Grid::None => (
            None,
            json!({
                "peak": report.e_focus.norm(),
                "width_3db_lambda": null,
                "first_null_lambda": null,
                "sidelobe_ratio": null,
            }),
        ),
        Grid::Cut {
            offsets, points, ..
        } => {
            let map = em::evaluate_field(
                &aperture,
                &weights.w,
                points,
                &wl,
                s.kernel(),
                s.source_kind(),
            )?;
            let m = metrics::cut_metrics(offsets, &map.magnitude(comp), wl.lambda)?;
            (Some(map), m.to_json())
        }
        Grid::Plane { u, v, points, .. } => {
            let map = em::evaluate_field(
                &aperture,
                &weights.w,
                points,
                &wl,
                s.kernel(),
                s.source_kind(),
            )?;
            let mag = map.magnitude(comp);
            let c = metrics::contour_3db(u, v, &mag)?;
            let (eu, ev) = c.extents();
            let peak = mag.iter().copied().fold(0.0, f64::max);
            let doc = json!({
                "peak": peak,
                "width_3db_lambda": eu / wl.lambda,
                "depth_3db_lambda": ev / wl.lambda,
                "first_null_lambda": null,
                "sidelobe_ratio": null,
                "contour_closed": c.closed,
            });
            contour = Some(c);
            (Some(map), doc)
        }
    };
    let mut metrics = metrics;
    metrics["e_focus_abs"] = json!(report.e_focus.norm());
    Ok(RunOutcome {
        weights,
        report,
        grid,
        field,
        metrics,
        oracle,
        contour,
    })
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Cp => "cp",
        Regime::Tr => "tr",
        Regime::Hybrid => "hybrid",
    }
}

/// Common CLI options recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunOptions {
    pub seed: u64,
    pub threads: usize,
    pub scenario_path: Option<PathBuf>,
}

fn write(path: &Path, text: &str) -> Result<(), ScenarioError> {
    io::write_text(path, text).map_err(|source| ScenarioError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), ScenarioError> {
    io::write_json(path, value).map_err(|source| ScenarioError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn manifest(
    command: &str,
    s: &Scenario,
    opts: &RunOptions,
    outputs: &[&str],
    elapsed: f64,
    extra: serde_json::Value,
) -> serde_json::Value {
    let res = analytic::resolve_transverse_tr_x();
    let mut m = json!({
        "tool": "nearfocus",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "scenario_path": opts.scenario_path,
        "scenario": s.to_json(),
        "outputs": outputs,
        "elapsed_seconds": elapsed,
        "seed": opts.seed,
        "threads": opts.threads,
        "analytic_constants": analytic::constants::table()
            .into_iter()
            .map(|(n, e, v)| json!({"name": n, "expression": e, "value": v}))
            .collect::<Vec<_>>(),
        "analytic_resolutions": [
            serde_json::to_value(res).expect("serializable"),
            {
                "quantity": "off-axis elliptic prefactor",
                "selected": "L (each elliptic term is half the exact azimuthal integral)",
                "rejected": "L/2",
            },
        ],
    });
    if let serde_json::Value::Object(extra) = extra {
        for (k, v) in extra {
            m[k] = v;
        }
    }
    m
}

/// `run`: weights, field samples, metrics and manifest.
pub fn cmd_run(s: &Scenario, out: &Path, opts: &RunOptions) -> Result<RunOutcome, ScenarioError> {
    let start = Instant::now();
    let outcome = run_scenario(s, opts.seed)?;
    let mut outputs = vec!["weights.csv", "weights.json", "metrics.json"];
    write(
        &out.join("weights.csv"),
        &io::weights_csv(&outcome.weights.w),
    )?;
    let mut wj = json!({
        "regime": regime_name(outcome.weights.regime),
        "beta": outcome.report.beta,
        "total_power_w": outcome.weights.total_power,
        "active_constraint": outcome.report.active_constraint,
        "e_focus_re": outcome.report.e_focus.re,
        "e_focus_im": outcome.report.e_focus.im,
        "iterations": outcome.report.iterations,
        "count": outcome.weights.w.len(),
    });
    if let Some(o) = &outcome.oracle {
        wj["oracle"] = serde_json::to_value(o).expect("serializable");
    }
    write_json(&out.join("weights.json"), &wj)?;
    if let Some(map) = &outcome.field {
        let name = match outcome.grid {
            Grid::Cut { .. } => "cut.csv",
            _ => "fieldmap.csv",
        };
        write(&out.join(name), &io::fieldmap_csv(map))?;
        outputs.push(name);
    }
    if let Some(c) = &outcome.contour {
        write(
            &out.join("contour.csv"),
            &io::csv_string(&["u", "v"], c.points.iter().map(|p| vec![p[0], p[1]])),
        )?;
        outputs.push("contour.csv");
    }
    write_json(&out.join("metrics.json"), &outcome.metrics)?;
    outputs.push("manifest.json");
    let m = manifest(
        "run",
        s,
        opts,
        &outputs,
        start.elapsed().as_secs_f64(),
        json!({}),
    );
    write_json(&out.join("manifest.json"), &m)?;
    Ok(outcome)
}

/// Result of comparing the numeric engine against a closed form.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub reference: String,
    pub passed: bool,
    pub tolerance: f64,
    /// Main-lobe L∞ deviation of peak-normalized profiles, or relative
    /// deviation of the field ratio.
    pub deviation: f64,
    pub numeric: serde_json::Value,
    pub analytic: serde_json::Value,
    pub deltas: serde_json::Value,
}

/// Peak-normalized main-lobe comparison of a numeric cut against an
/// analytic profile. The main lobe spans the first local minima of the
/// analytic profile on either side of the origin.
pub fn main_lobe_deviation(offsets: &[f64], numeric: &[f64], analytic_vals: &[f64]) -> f64 {
    let a: Vec<f64> = analytic_vals.iter().map(|v| v.abs()).collect();
    let centre = offsets
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut lo = centre;
    while lo > 0 && a[lo - 1] < a[lo] {
        lo -= 1;
    }
    let mut hi = centre;
    while hi + 1 < a.len() && a[hi + 1] < a[hi] {
        hi += 1;
    }
    let na = a.iter().copied().fold(0.0, f64::max);
    let nn = numeric.iter().copied().fold(0.0, f64::max);
    (lo..=hi)
        .map(|i| (numeric[i] / nn - a[i] / na).abs())
        .fold(0.0, f64::max)
}

pub fn validate_scenario(s: &Scenario) -> Result<ValidationReport, ScenarioError> {
    let reference = s
        .analytic_reference
        .clone()
        .ok_or_else(|| invalid("validate needs analytic_reference"))?;
    if s.geometry != GeometryKind::Cylinder {
        return Err(invalid("validate compares against cylinder closed forms"));
    }
    let wl = s.wavelength();
    let spec = s.cylinder();
    let aperture = build_aperture(s)?;
    let pc = constraints(s, &aperture)?;
    let tol = s.validate_tolerance;
    if let Some(kind) = ProfileKind::parse(&reference) {
        let (axis, comp) = kind.axis_and_component();
        let e_hat = AxisName::unit(match comp {
            0 => AxisName::X,
            1 => AxisName::Y,
            _ => AxisName::Z,
        });
        let h = em::assemble_channel(
            &aperture,
            s.focal_point_m,
            e_hat,
            &wl,
            s.kernel(),
            s.source_kind(),
        )?;
        let (w, _) = solve_weights(s.method, &h, &pc, s.tolerance_w, s.max_iters)?;
        let (offsets, points) =
            geometry::axis_cut(s.focal_point_m, axis, s.cut_half_extent_m, s.cut_step_m);
        let map = em::evaluate_field(&aperture, &w.w, &points, &wl, s.kernel(), s.source_kind())?;
        let num = map.magnitude(e_hat);
        let prof = analytic::sample_profile(kind, &offsets, wl.k, &spec)?;
        let deviation = main_lobe_deviation(&offsets, &num, &prof.values);
        let mn = metrics::cut_metrics(&offsets, &num, wl.lambda)?;
        let ma = metrics::cut_metrics(&offsets, &prof.values, wl.lambda)?;
        let delta = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => json!((a - b) / wl.lambda),
            _ => serde_json::Value::Null,
        };
        return Ok(ValidationReport {
            passed: deviation <= tol,
            reference,
            tolerance: tol,
            deviation,
            deltas: json!({
                "width_3db_lambda": delta(mn.width_3db, ma.width_3db),
                "first_null_lambda": delta(mn.first_null, ma.first_null),
            }),
            numeric: mn.to_json(),
            analytic: ma.to_json(),
        });
    }
    // Field ratio E_z / E_x at the scenario focus; TR fields are divided by
    // their own D_r so that the ratio is expressed in the same normalized
    // units as the closed forms.
    let tr = match reference.as_str() {
        "cp_ratio" => false,
        "tr_ratio" => true,
        other => return Err(invalid(format!("unknown analytic reference {other:?}"))),
    };
    if s.focal_point_m[0] != 0.0 || s.focal_point_m[1] != 0.0 {
        return Err(invalid("ratio validation needs an on-axis focus"));
    }
    let level = |e_hat: Vec3| -> Result<f64, ScenarioError> {
        let h = em::assemble_channel(
            &aperture,
            s.focal_point_m,
            e_hat,
            &wl,
            s.kernel(),
            s.source_kind(),
        )?;
        let g = h.projected();
        if tr {
            let r = pc.resistances(g.len())?;
            let s2: f64 = g.iter().zip(&r).map(|(g, r)| g.norm_sqr() / r).sum();
            let (_, rep) = focusing::tr_weights(&h, &pc)?;
            let dr = (2.0 * pc.p0 / s2).sqrt();
            Ok(rep.e_focus.norm() / dr)
        } else {
            let big = PowerConstraints {
                p0: f64::MAX / 4.0,
                ..pc.clone()
            };
            let (_, rep) = focusing::cp_weights(&h, &big)?;
            Ok(rep.e_focus.norm())
        }
    };
    let ez = level([0.0, 0.0, 1.0])?;
    let ex = level([1.0, 0.0, 0.0])?;
    let ratio = ez / ex;
    let zf = s.focal_point_m[2];
    let expected = if tr {
        analytic::ez_tr_axis(zf, &spec)? / analytic::ex_tr_axis(zf, &spec)?
    } else {
        analytic::ez_cp_axis(zf, &spec)? / analytic::ex_cp_axis(zf, &spec)?
    };
    let limit = if tr {
        analytic::constants::TR_RATIO
    } else {
        analytic::constants::CP_RATIO
    };
    let deviation = (ratio - expected).abs() / expected;
    Ok(ValidationReport {
        passed: deviation <= tol,
        reference,
        tolerance: tol,
        deviation,
        numeric: json!({"ratio": ratio, "ez": ez, "ex": ex}),
        analytic: json!({"ratio": expected, "long_aperture_limit": limit}),
        deltas: json!({
            "ratio": ratio - expected,
            "ratio_vs_long_aperture_limit": (ratio - limit) / limit,
        }),
    })
}

/// `validate`: numeric vs closed form with a pass/fail verdict.
pub fn cmd_validate(
    s: &Scenario,
    out: &Path,
    opts: &RunOptions,
) -> Result<ValidationReport, ScenarioError> {
    let start = Instant::now();
    let report = validate_scenario(s)?;
    let doc = serde_json::to_value(&report).expect("serializable");
    write_json(&out.join("validation.json"), &doc)?;
    let m = manifest(
        "validate",
        s,
        opts,
        &["validation.json", "manifest.json"],
        start.elapsed().as_secs_f64(),
        json!({"passed": report.passed}),
    );
    write_json(&out.join("manifest.json"), &m)?;
    Ok(report)
}

/// Samples a named closed-form curve. Offsets are in meters: displacement
/// from the focus for kernels and profiles, focal position for axis and
/// radial curves.
pub fn analytic_curve(s: &Scenario, name: &str) -> Result<analytic::AxisProfile, ScenarioError> {
    let wl = s.wavelength();
    let spec = s.cylinder();
    let open_span = |half: f64| -> Vec<f64> {
        let n = s.curve_points;
        (0..n)
            .map(|i| half * (2.0 * (i as f64 + 0.5) / n as f64 - 1.0))
            .collect()
    };
    let cut = || geometry::axis_cut([0.0; 3], 0, s.cut_half_extent_m, s.cut_step_m).0;
    let eval = |offsets: Vec<f64>, axis: char, f: &dyn Fn(f64) -> Result<f64, AnalyticError>| {
        let values = offsets
            .iter()
            .map(|&x| f(x))
            .collect::<Result<Vec<_>, _>>()?;
        let normalization = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok::<_, ScenarioError>(analytic::AxisProfile {
            axis,
            offsets,
            values,
            normalization,
        })
    };
    if let Some(kind) = ProfileKind::parse(name) {
        return Ok(analytic::sample_profile(kind, &cut(), wl.k, &spec)?);
    }
    let k = wl.k;
    let half_l = 0.5 * s.length_m;
    let a = s.radius_m;
    match name {
        "kernel_point" => eval(cut(), 'r', &|d| Ok(analytic::kernel_point(k * d.abs()))),
        "kernel_dipole_0" => eval(cut(), 'z', &|d| {
            Ok(analytic::kernel_dipole(k * d.abs(), 0.0))
        }),
        "kernel_dipole_90" => eval(cut(), 'x', &|d| {
            Ok(analytic::kernel_dipole(
                k * d.abs(),
                std::f64::consts::FRAC_PI_2,
            ))
        }),
        "ez_cp_axis" => eval(open_span(half_l), 'z', &|z| analytic::ez_cp_axis(z, &spec)),
        "ez_tr_axis" => eval(open_span(half_l), 'z', &|z| analytic::ez_tr_axis(z, &spec)),
        "ex_cp_axis" => eval(open_span(half_l), 'z', &|z| analytic::ex_cp_axis(z, &spec)),
        "ex_tr_axis" => eval(open_span(half_l), 'z', &|z| analytic::ex_tr_axis(z, &spec)),
        "ez_cp_radial" => eval(open_span(a), 'x', &|x| analytic::ez_cp_radial(x, &spec)),
        "ex_cp_radial_y" => eval(open_span(a), 'y', &|y| analytic::ex_cp_radial_y(y, &spec)),
        other => {
            let (tr, comp) = match other {
                "transverse_cp_x" => (false, Component::X),
                "transverse_cp_y" => (false, Component::Y),
                "transverse_cp_z" => (false, Component::Z),
                "transverse_tr_x" => (true, Component::X),
                "transverse_tr_y" => (true, Component::Y),
                "transverse_tr_z" => (true, Component::Z),
                _ => return Err(invalid(format!("unknown analytic curve {other:?}"))),
            };
            eval(open_span(half_l), 'z', &|z| {
                if tr {
                    analytic::transverse_pol_tr(comp, z, &spec)
                } else {
                    analytic::transverse_pol_cp(comp, z, &spec)
                }
            })
        }
    }
}

/// `analytic`: writes `profile.csv` for the scenario's `analytic_curve`.
pub fn cmd_analytic(
    s: &Scenario,
    out: &Path,
    opts: &RunOptions,
) -> Result<analytic::AxisProfile, ScenarioError> {
    let start = Instant::now();
    let name = s
        .analytic_curve
        .clone()
        .or_else(|| {
            s.analytic_reference
                .clone()
                .filter(|r| ProfileKind::parse(r).is_some())
        })
        .ok_or_else(|| invalid("analytic needs analytic_curve"))?;
    let profile = analytic_curve(s, &name)?;
    write(
        &out.join("profile.csv"),
        &io::profile_csv(&profile, s.wavelength_m),
    )?;
    let m = manifest(
        "analytic",
        s,
        opts,
        &["profile.csv", "manifest.json"],
        start.elapsed().as_secs_f64(),
        json!({"curve": name, "normalization": profile.normalization}),
    );
    write_json(&out.join("manifest.json"), &m)?;
    Ok(profile)
}

/// `layout`: writes the element or patch table.
pub fn cmd_layout(s: &Scenario, out: &Path, opts: &RunOptions) -> Result<usize, ScenarioError> {
    let start = Instant::now();
    let aperture = build_aperture(s)?;
    let (text, extra) = match &aperture {
        Aperture::Array(l) => (
            io::array_layout_csv(l),
            json!({"rings": l.rings, "per_ring": l.per_ring, "spacing_m": l.spacing_d, "count": l.elements.len()}),
        ),
        Aperture::Mesh { patches, .. } => {
            let area: f64 = patches.iter().map(|p| p.area).sum();
            (
                io::mesh_layout_csv(patches),
                json!({"count": patches.len(), "total_area_m2": area}),
            )
        }
    };
    write(&out.join("layout.csv"), &text)?;
    let mut extra = extra;
    if let Ok(r) = s.rectangle() {
        extra["inscribed_radius_m"] = json!(r.inscribed_radius());
        extra["circumscribed_radius_m"] = json!(r.circumscribed_radius());
    }
    let m = manifest(
        "layout",
        s,
        opts,
        &["layout.csv", "manifest.json"],
        start.elapsed().as_secs_f64(),
        json!({"layout": extra}),
    );
    write_json(&out.join("manifest.json"), &m)?;
    Ok(aperture.len())
}

/// Scalar projected channel for a scenario (used by tests and tools).
pub fn scenario_channel(s: &Scenario) -> Result<(Aperture, Vec<C>), ScenarioError> {
    let aperture = build_aperture(s)?;
    let h = em::assemble_channel(
        &aperture,
        s.focal_point_m,
        s.target_polarization.unit(),
        &s.wavelength(),
        s.kernel(),
        s.source_kind(),
    )?;
    Ok((aperture, h.projected()))
}

/// Metrics of the scenario's cut, for callers that already hold a field map.
pub fn cut_metrics_for(
    s: &Scenario,
    offsets: &[f64],
    map: &FieldMap,
) -> Result<CutMetrics, ScenarioError> {
    Ok(metrics::cut_metrics(
        offsets,
        &map.magnitude(s.metrics_component.unit()),
        s.wavelength_m,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_filled() {
        let s = parse_scenario("").unwrap();
        assert_eq!(s.geometry, GeometryKind::Cylinder);
        assert_eq!(s.aperture, ApertureKind::Discrete);
        assert_eq!(s.kernel, KernelKind::DipoleApprox);
        assert!((s.w_max_a - (2.0f64 / 50.0).sqrt()).abs() < 1e-15);
        assert!((s.cut_step_m - s.wavelength_m / 128.0).abs() < 1e-15);
        let mesh = parse_scenario("aperture = \"mesh\"").unwrap();
        assert_eq!(mesh.kernel, KernelKind::Full);
        let a = mesh.reference_area_m2.unwrap();
        assert!((a - 2.0 * std::f64::consts::PI * 10.0 / 7200.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_scenario("radius = 1.0"),
            Err(ScenarioError::Parse(_))
        ));
        assert!(matches!(
            parse_scenario("radius_m = -1.0"),
            Err(ScenarioError::Invalid(_))
        ));
        assert!(matches!(
            parse_scenario("focal_z_m = 6.0"),
            Err(ScenarioError::Invalid(_))
        ));
        assert!(parse_scenario("analytic_reference = \"nope\"").is_err());
        assert!(parse_scenario("geometry = \"rectangle\"").is_err());
        assert!(parse_scenario("method = \"mosek\"").is_err());
    }

    #[test]
    fn single_dipole_run() {
        let s = parse_scenario(
            "geometry = \"dipole\"\nfocal_y_m = 1.0\ngrid = \"none\"\nw_max_a = 1.0\np0_w = 1.0\nr0_ohm = 50.0",
        )
        .unwrap();
        let out = run_scenario(&s, 0).unwrap();
        assert_eq!(out.weights.w.len(), 1);
        assert!((out.weights.w[0].norm() - (2.0f64 / 50.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn lobe_deviation_of_identical_profiles_is_zero() {
        let x: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.01).collect();
        let f: Vec<f64> = x.iter().map(|v| crate::specfun::sinc(6.0 * v)).collect();
        let g: Vec<f64> = f.iter().map(|v| 3.0 * v.abs()).collect();
        assert!(main_lobe_deviation(&x, &g, &f) < 1e-15);
    }
}
