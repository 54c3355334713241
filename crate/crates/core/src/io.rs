//! CSV and JSON artifact writers.
//!
//! Numbers are written with 17 significant digits in scientific notation,
//! `.` as decimal separator and `\n` line endings, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use num_complex::Complex64 as C;

use crate::analytic::AxisProfile;
use crate::em::FieldMap;
use crate::geometry::{ArrayLayout, SurfacePatch};

/// Formats a float with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Builds a CSV document from a header and numeric rows.
pub fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    write_text(path, &text)
}

/// `index,abs_w_a,arg_w_rad`; the index column is written as an integer.
pub fn weights_csv(w: &[C]) -> String {
    let mut out = String::from("index,abs_w_a,arg_w_rad\n");
    for (i, c) in w.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", i, fmt_num(c.norm()), fmt_num(c.arg()));
    }
    out
}

/// `x,y,z,re_ex,im_ex,re_ey,im_ey,re_ez,im_ez` in m and V/m.
pub fn fieldmap_csv(map: &FieldMap) -> String {
    csv_string(
        &[
            "x", "y", "z", "re_ex", "im_ex", "re_ey", "im_ey", "re_ez", "im_ez",
        ],
        map.points.iter().zip(&map.fields).map(|(p, f)| {
            vec![
                p[0], p[1], p[2], f.0[0].re, f.0[0].im, f.0[1].re, f.0[1].im, f.0[2].re, f.0[2].im,
            ]
        }),
    )
}

/// One row per dipole: position, orientation and length.
pub fn array_layout_csv(layout: &ArrayLayout) -> String {
    let mut out = String::from("index,x,y,z,px,py,pz,length_m\n");
    for (i, e) in layout.elements.iter().enumerate() {
        let cells: Vec<String> = [
            e.position[0],
            e.position[1],
            e.position[2],
            e.orientation_p[0],
            e.orientation_p[1],
            e.orientation_p[2],
            e.length_l,
        ]
        .into_iter()
        .map(fmt_num)
        .collect();
        let _ = writeln!(out, "{},{}", i, cells.join(","));
    }
    out
}

/// One row per patch: centroid, both tangents and area.
pub fn mesh_layout_csv(patches: &[SurfacePatch]) -> String {
    let mut out = String::from("index,x,y,z,tphi_x,tphi_y,tphi_z,tz_x,tz_y,tz_z,area_m2\n");
    for (i, p) in patches.iter().enumerate() {
        let cells: Vec<String> = [
            p.centroid[0],
            p.centroid[1],
            p.centroid[2],
            p.tangent_phi[0],
            p.tangent_phi[1],
            p.tangent_phi[2],
            p.tangent_z[0],
            p.tangent_z[1],
            p.tangent_z[2],
            p.area,
        ]
        .into_iter()
        .map(fmt_num)
        .collect();
        let _ = writeln!(out, "{},{}", i, cells.join(","));
    }
    out
}

/// Two-column profile: offset in wavelengths, normalized value.
pub fn profile_csv(profile: &AxisProfile, lambda: f64) -> String {
    csv_string(
        &["offset_lambda", "value"],
        profile
            .offsets
            .iter()
            .zip(&profile.values)
            .map(|(o, v)| vec![o / lambda, *v]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::ComplexField3;

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, -1.0 / 3.0, 6.02e23, 1e-300, 0.0] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn weights_and_fields() {
        let w = [C::new(0.0, -2.0)];
        let s = weights_csv(&w);
        assert_eq!(s.lines().count(), 2);
        assert!(s.ends_with('\n') && !s.contains('\r'));
        let map = FieldMap {
            points: vec![[0.0, 1.0, 2.0]],
            fields: vec![ComplexField3([C::new(1.0, 2.0); 3])],
            near_singular: vec![],
        };
        let s = fieldmap_csv(&map);
        assert_eq!(s.lines().next().unwrap().split(',').count(), 9);
        assert_eq!(s.lines().nth(1).unwrap().split(',').count(), 9);
    }
}
