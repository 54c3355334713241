//! Focal-spot metrics from sampled cuts and planar maps.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("sample spacing {spacing} m exceeds lambda/64 = {max} m")]
    SpacingTooCoarse { spacing: f64, max: f64 },
    #[error("offsets must be strictly increasing and finite")]
    UnsortedOffsets,
    #[error("offsets and values differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("profile is identically zero")]
    ZeroProfile,
    #[error("peak lies on the boundary of the map")]
    PeakOnBoundary,
    #[error("ratio denominator must be positive, got {0}")]
    ZeroDenominator(f64),
}

pub const MIN_SAMPLES: usize = 32;

/// Metrics of a 1D focal cut. Offsets are measured from the sampled peak;
/// `None` means the feature was not found inside the sampled span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutMetrics {
    pub peak_value: f64,
    pub peak_offset: f64,
    pub width_3db: Option<f64>,
    pub first_null: Option<f64>,
    pub max_sidelobe_ratio: Option<f64>,
    pub lambda: f64,
}

impl CutMetrics {
    pub fn width_3db_lambda(&self) -> Option<f64> {
        self.width_3db.map(|w| w / self.lambda)
    }

    pub fn first_null_lambda(&self) -> Option<f64> {
        self.first_null.map(|w| w / self.lambda)
    }

    /// Flat document with the keys used by the CLI.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "peak": self.peak_value,
            "peak_offset_m": self.peak_offset,
            "width_3db_m": self.width_3db,
            "width_3db_lambda": self.width_3db_lambda(),
            "first_null_m": self.first_null,
            "first_null_lambda": self.first_null_lambda(),
            "sidelobe_ratio": self.max_sidelobe_ratio,
            "lambda_m": self.lambda,
        })
    }
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    // Vertex of the parabola through three points.
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a == 0.0 {
        return (x[1], y[1]);
    }
    let b = d1 - a * (x[0] + x[1]);
    let xv = (-b / (2.0 * a)).clamp(x[0], x[2]);
    let yv = y[0] + d1 * (xv - x[0]) + a * (xv - x[0]) * (xv - x[1]);
    (xv, yv)
}

/// Extracts peak, 3-dB width, first null and sidelobe level from a sampled
/// cut. Signed samples are allowed; the metrics use their magnitude and a
/// sign change marks an exact null.
pub fn cut_metrics(
    offsets: &[f64],
    values: &[f64],
    lambda: f64,
) -> Result<CutMetrics, MetricsError> {
    let n = offsets.len();
    if values.len() != n {
        return Err(MetricsError::LengthMismatch(n, values.len()));
    }
    if n < MIN_SAMPLES {
        return Err(MetricsError::TooFewSamples {
            min: MIN_SAMPLES,
            got: n,
        });
    }
    if offsets.iter().any(|x| !x.is_finite()) || offsets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MetricsError::UnsortedOffsets);
    }
    let max_step = offsets.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if max_step > lambda / 64.0 * (1.0 + 1e-9) {
        return Err(MetricsError::SpacingTooCoarse {
            spacing: max_step,
            max: lambda / 64.0,
        });
    }
    let f: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let (ip, &fmax) = f
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if !(fmax > 0.0) {
        return Err(MetricsError::ZeroProfile);
    }
    let (peak_offset, peak_value) = if ip > 0 && ip + 1 < n {
        parabola_vertex(
            [offsets[ip - 1], offsets[ip], offsets[ip + 1]],
            [f[ip - 1], f[ip], f[ip + 1]],
        )
    } else {
        (offsets[ip], fmax)
    };
    let peak_value = peak_value.max(fmax);

    // 3-dB crossings
    let level = peak_value / std::f64::consts::SQRT_2;
    let crossing = |dir: isize| -> Option<f64> {
        let mut i = ip as isize;
        loop {
            let j = i + dir;
            if j < 0 || j as usize >= n {
                return None;
            }
            let (fi, fj) = (f[i as usize], f[j as usize]);
            if fj < level {
                let (xi, xj) = (offsets[i as usize], offsets[j as usize]);
                let t = (fi - level) / (fi - fj);
                return Some(xi + t * (xj - xi));
            }
            i = j;
        }
    };
    let width = match (crossing(-1), crossing(1)) {
        (Some(l), Some(r)) => Some(r - l),
        _ => None,
    };

    // Main-lobe edges: first local minima of |f| on each side.
    let local_min = |dir: isize| -> Option<usize> {
        let mut i = ip as isize + dir;
        while i > 0 && ((i + 1) as usize) < n {
            let u = i as usize;
            if f[u] <= f[u - 1] && f[u] <= f[u + 1] && f[u] < fmax {
                return Some(u);
            }
            i += dir;
        }
        None
    };
    let edges = [local_min(-1), local_min(1)];

    // First null: first local minimum (walking outward) whose refined depth
    // falls below 1% of the peak.
    let null_distance = |dir: isize| -> Option<f64> {
        let mut i = ip as isize + dir;
        while i > 0 && ((i + 1) as usize) < n {
            let u = i as usize;
            if f[u] <= f[u - 1] && f[u] <= f[u + 1] {
                let (x, depth) = refine_minimum(offsets, values, &f, u);
                if depth < 0.01 * peak_value {
                    return Some((x - peak_offset).abs());
                }
            }
            i += dir;
        }
        None
    };
    let nulls: Vec<f64> = [null_distance(-1), null_distance(1)]
        .into_iter()
        .flatten()
        .collect();
    let first_null = if nulls.is_empty() {
        None
    } else {
        Some(nulls.iter().sum::<f64>() / nulls.len() as f64)
    };

    // Sidelobes: largest local maximum outside the main lobe.
    let mut side: Option<f64> = None;
    let lo = edges[0];
    let hi = edges[1];
    for u in 1..n - 1 {
        let outside = lo.is_some_and(|l| u < l) || hi.is_some_and(|h| u > h);
        if outside && f[u] >= f[u - 1] && f[u] >= f[u + 1] && f[u] > 0.0 {
            side = Some(side.map_or(f[u], |s: f64| s.max(f[u])));
        }
    }

    Ok(CutMetrics {
        peak_value,
        peak_offset,
        width_3db: width,
        first_null,
        max_sidelobe_ratio: side.map(|s| s / peak_value),
        lambda,
    })
}

/// Sub-sample location and depth of the minimum of `f = |values|` at `u`.
fn refine_minimum(x: &[f64], values: &[f64], f: &[f64], u: usize) -> (f64, f64) {
    let n = f.len();
    // Sign change in the signed samples: linear zero crossing.
    for j in [u.saturating_sub(1), u] {
        if j + 1 < n && values[j] * values[j + 1] < 0.0 {
            let t = values[j] / (values[j] - values[j + 1]);
            return (x[j] + t * (x[j + 1] - x[j]), 0.0);
        }
    }
    if values[u] == 0.0 {
        return (x[u], 0.0);
    }
    // A magnitude V (zero crossing between samples) is fitted with two lines.
    if u >= 2 && u + 2 < n {
        let dl = (f[u - 2] - f[u - 1]).abs();
        let dr = (f[u + 2] - f[u + 1]).abs();
        if f[u] <= 0.6 * dl.max(dr) {
            let sl = (f[u - 1] - f[u - 2]) / (x[u - 1] - x[u - 2]);
            let sr = (f[u + 2] - f[u + 1]) / (x[u + 2] - x[u + 1]);
            if sl < 0.0 && sr > 0.0 {
                // f = f[u-1] + sl (t - x[u-1]) = f[u+1] + sr (t - x[u+1])
                let t = (f[u + 1] - f[u - 1] + sl * x[u - 1] - sr * x[u + 1]) / (sl - sr);
                let depth = (f[u - 1] + sl * (t - x[u - 1])).max(0.0);
                return (t.clamp(x[u - 1], x[u + 1]), depth);
            }
        }
    }
    let (xv, yv) = parabola_vertex([x[u - 1], x[u], x[u + 1]], [f[u - 1], f[u], f[u + 1]]);
    (xv, yv.max(0.0))
}

/// Ratio of a co-polar to a cross-polar field level.
pub fn polarization_ratio(e_long: f64, e_trans: f64) -> Result<f64, MetricsError> {
    if e_trans > 0.0 {
        Ok(e_long / e_trans)
    } else {
        Err(MetricsError::ZeroDenominator(e_trans))
    }
}

/// Closed polyline (first point repeated at the end when closed).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
    pub level: f64,
}

impl Contour {
    /// Extent along the first and second coordinate.
    pub fn extents(&self) -> (f64, f64) {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &self.points {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        (hi[0] - lo[0], hi[1] - lo[1])
    }
}

/// 3-dB contour of a magnitude map sampled on `u × v` (row-major, `v`
/// slow). Returns the level set `|E| = peak/√2` that encloses the peak.
pub fn contour_3db(u: &[f64], v: &[f64], magnitude: &[f64]) -> Result<Contour, MetricsError> {
    let (nu, nv) = (u.len(), v.len());
    if magnitude.len() != nu * nv {
        return Err(MetricsError::LengthMismatch(nu * nv, magnitude.len()));
    }
    if nu < 3 || nv < 3 {
        return Err(MetricsError::TooFewSamples {
            min: 9,
            got: nu * nv,
        });
    }
    let at = |i: usize, j: usize| magnitude[j * nu + i];
    let (imax, &peak) = magnitude
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if !(peak > 0.0) {
        return Err(MetricsError::ZeroProfile);
    }
    let (pi, pj) = (imax % nu, imax / nu);
    if pi == 0 || pj == 0 || pi == nu - 1 || pj == nv - 1 {
        return Err(MetricsError::PeakOnBoundary);
    }
    let level = peak / std::f64::consts::SQRT_2;

    // Edge ids: horizontal edge (i,j)-(i+1,j) -> 2*(j*nu+i), vertical -> +1.
    let point_on = |edge: usize| -> [f64; 2] {
        let cell = edge / 2;
        let (i, j) = (cell % nu, cell / nu);
        let (i2, j2) = if edge.is_multiple_of(2) {
            (i + 1, j)
        } else {
            (i, j + 1)
        };
        let (a, b) = (at(i, j), at(i2, j2));
        let t = if a == b { 0.5 } else { (level - a) / (b - a) };
        [u[i] + t * (u[i2] - u[i]), v[j] + t * (v[j2] - v[j])]
    };
    let mut segments: Vec<(usize, usize)> = Vec::new();
    for j in 0..nv - 1 {
        for i in 0..nu - 1 {
            let c = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let mut idx = 0;
            for (b, val) in c.iter().enumerate() {
                if *val >= level {
                    idx |= 1 << b;
                }
            }
            let bottom = 2 * (j * nu + i);
            let right = 2 * (j * nu + i + 1) + 1;
            let top = 2 * ((j + 1) * nu + i);
            let left = 2 * (j * nu + i) + 1;
            let centre_above = c.iter().sum::<f64>() / 4.0 >= level;
            let segs: &[(usize, usize)] = match idx {
                0 | 15 => &[],
                1 | 14 => &[(left, bottom)],
                2 | 13 => &[(bottom, right)],
                3 | 12 => &[(left, right)],
                4 | 11 => &[(right, top)],
                6 | 9 => &[(bottom, top)],
                7 | 8 => &[(left, top)],
                5 => {
                    if centre_above {
                        &[(left, top), (bottom, right)]
                    } else {
                        &[(left, bottom), (right, top)]
                    }
                }
                10 => {
                    if centre_above {
                        &[(left, bottom), (right, top)]
                    } else {
                        &[(left, top), (bottom, right)]
                    }
                }
                _ => unreachable!(),
            };
            segments.extend_from_slice(segs);
        }
    }

    // Chain segments into polylines through shared edge ids.
    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(s);
        by_edge.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let peak_pt = [u[pi], v[pj]];
    // (encloses peak, length, points, closed)
    let mut best: Option<(bool, usize, Vec<[f64; 2]>, bool)> = None;
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut cur) = segments[start];
        let mut chain = vec![first, cur];
        let mut closed = false;
        while let Some(s) = by_edge[&cur].iter().copied().find(|&s| !used[s]) {
            used[s] = true;
            let (a, b) = segments[s];
            cur = if a == cur { b } else { a };
            chain.push(cur);
            if cur == first {
                closed = true;
                break;
            }
        }
        if !closed {
            // extend backwards from the first edge
            let mut head = first;
            let mut prefix = Vec::new();
            while let Some(s) = by_edge[&head].iter().copied().find(|&s| !used[s]) {
                used[s] = true;
                let (a, b) = segments[s];
                head = if a == head { b } else { a };
                prefix.push(head);
            }
            prefix.reverse();
            prefix.extend(chain);
            chain = prefix;
        }
        let pts: Vec<[f64; 2]> = chain.iter().map(|&e| point_on(e)).collect();
        let encloses = closed && winding_contains(&pts, peak_pt);
        let key = (encloses, pts.len());
        if best.as_ref().is_none_or(|b| key > (b.0, b.1)) {
            best = Some((encloses, pts.len(), pts, closed));
        }
    }
    let (_, _, points, closed) = best.ok_or(MetricsError::PeakOnBoundary)?;
    Ok(Contour {
        points,
        closed,
        level,
    })
}

fn winding_contains(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}
