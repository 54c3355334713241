//! Numerical quadrature.
//!
//! Global adaptive Gauss-Kronrod (7/15) for 1D integrals, a nested 2D
//! driver, and fixed Gauss-Legendre rules.

use std::cmp::Ordering;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
    pub converged: bool,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Integrates `f` over `[a, b]` until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            abs_error: 0.0,
            intervals: 0,
            converged: true,
        };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![Piece {
        a,
        b,
        value: v,
        err: e,
    }];
    let mut total = v;
    let mut total_err = e;
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol {
            return Quadrature {
                value: total,
                abs_error: total_err,
                intervals: pieces.len(),
                converged: true,
            };
        }
        if pieces.len() >= MAX_INTERVALS {
            return Quadrature {
                value: total,
                abs_error: total_err,
                intervals: pieces.len(),
                converged: false,
            };
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap_or(Ordering::Equal))
            .expect("non-empty");
        let worst = pieces.swap_remove(idx);
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        // Re-sum occasionally to avoid drift from the incremental updates.
        if pieces.len() % 64 == 0 {
            total = pieces.iter().map(|p| p.value).sum::<f64>() + v1 + v2;
            total_err = pieces.iter().map(|p| p.err).sum::<f64>() + e1 + e2;
        }
        pieces.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        pieces.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
}

/// Integrates `f` over `[a, b]` after splitting at the given interior
/// break points (kinks, integrable cusps).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a.min(b) && x < a.max(b))
        .collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    if a > b {
        inner.reverse();
    }
    pts.extend(inner);
    pts.push(b);
    let share = abs_tol / (pts.len() - 1) as f64;
    let mut out = Quadrature {
        value: 0.0,
        abs_error: 0.0,
        intervals: 0,
        converged: true,
    };
    for w in pts.windows(2) {
        let q = integrate(&mut f, w[0], w[1], share, rel_tol);
        out.value += q.value;
        out.abs_error += q.abs_error;
        out.intervals += q.intervals;
        out.converged &= q.converged;
    }
    out
}

/// Nested 2D integral: `∫_{ya}^{yb} ∫_{xa}^{xb} f(x, y) dx dy` with interior
/// break points for the inner (`x`) and outer (`y`) variables.
#[allow(clippy::too_many_arguments)]
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (xa, xb): (f64, f64),
    x_breaks: &[f64],
    (ya, yb): (f64, f64),
    y_breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Quadrature {
    let mut converged = true;
    let inner_tol = abs_tol / (yb - ya).abs().max(1.0);
    let q = integrate_with_breaks(
        |y| {
            let qi = integrate_with_breaks(|x| f(x, y), xa, xb, x_breaks, inner_tol, rel_tol);
            converged &= qi.converged;
            qi.value
        },
        ya,
        yb,
        y_breaks,
        abs_tol,
        rel_tol,
    );
    Quadrature {
        converged: converged && q.converged,
        ..q
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
