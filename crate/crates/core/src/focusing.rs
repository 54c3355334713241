//! Excitation synthesis under per-element amplitude and total-power limits.
//!
//! The focal field is `E = Σ g_n w_n` with `g_n = h_n · ê`. Port `n`
//! dissipates `R_n |w_n|² / 2`.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::em::ChannelVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FocusError {
    #[error("channel is identically zero")]
    ZeroChannel,
    #[error("invalid constraint {what}: {value}")]
    InvalidConstraint { what: &'static str, value: f64 },
    #[error("port scale has length {scale}, channel has {channel} entries")]
    LengthMismatch { scale: usize, channel: usize },
    #[error(
        "bisection did not converge after {iterations} iterations (power error {power_error} W)"
    )]
    NonConvergence { iterations: usize, power_error: f64 },
}

/// Local amplitude bound, global power budget and port resistances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerConstraints {
    pub w_max: f64,
    pub p0: f64,
    pub r0_per_port: f64,
    /// Optional per-port multipliers on `r0_per_port`; mesh apertures use
    /// the patch-area ratio `A_n / A_ref`.
    pub port_scale: Option<Vec<f64>>,
}

impl PowerConstraints {
    pub fn new(w_max: f64, p0: f64, r0_per_port: f64) -> Result<Self, FocusError> {
        for (what, value) in [("w_max", w_max), ("p0", p0), ("r0", r0_per_port)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(FocusError::InvalidConstraint { what, value });
            }
        }
        Ok(Self {
            w_max,
            p0,
            r0_per_port,
            port_scale: None,
        })
    }

    pub fn with_port_scale(mut self, scale: Vec<f64>) -> Result<Self, FocusError> {
        if let Some(&bad) = scale.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(FocusError::InvalidConstraint {
                what: "port scale",
                value: bad,
            });
        }
        self.port_scale = Some(scale);
        Ok(self)
    }

    /// Per-port resistances for `n` ports.
    pub fn resistances(&self, n: usize) -> Result<Vec<f64>, FocusError> {
        match &self.port_scale {
            None => Ok(vec![self.r0_per_port; n]),
            Some(s) if s.len() == n => Ok(s.iter().map(|x| x * self.r0_per_port).collect()),
            Some(s) => Err(FocusError::LengthMismatch {
                scale: s.len(),
                channel: n,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Cp,
    Tr,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActiveConstraint {
    Local,
    Global,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationWeights {
    pub w: Vec<C>,
    pub regime: Regime,
    /// `Σ R_n |w_n|² / 2` in W.
    pub total_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalReport {
    pub e_focus: C,
    pub active_constraint: ActiveConstraint,
    /// Water level: unclipped magnitudes are `beta · v_n` with
    /// `v_n = (|g_n|/R_n) / sqrt(Σ |g_m|²/R_m)`.
    pub beta: f64,
    pub iterations: usize,
}

/// Threshold below which a channel entry is treated as zero, relative to
/// the largest entry.
pub const ZERO_CHANNEL_REL: f64 = 1e-15;

struct Prepared {
    g: Vec<C>,
    mag: Vec<f64>,
    r: Vec<f64>,
    live: Vec<bool>,
}

fn prepare(g: Vec<C>, pc: &PowerConstraints) -> Result<Prepared, FocusError> {
    let r = pc.resistances(g.len())?;
    let mag: Vec<f64> = g.iter().map(|c| c.norm()).collect();
    let max = mag.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(FocusError::ZeroChannel);
    }
    let live = mag.iter().map(|&m| m >= ZERO_CHANNEL_REL * max).collect();
    Ok(Prepared { g, mag, r, live })
}

fn phase_conj(g: C) -> C {
    g.conj() / g.norm()
}

fn power(r: &[f64], w: &[C]) -> f64 {
    r.iter().zip(w).map(|(r, w)| 0.5 * r * w.norm_sqr()).sum()
}

fn focal(g: &[C], w: &[C]) -> C {
    g.iter().zip(w).map(|(g, w)| g * w).sum()
}

/// Conjugate-phase weights at full amplitude `w_max`, uniformly scaled down
/// when the budget would be exceeded.
pub fn cp_weights(
    h: &ChannelVector,
    pc: &PowerConstraints,
) -> Result<(ExcitationWeights, FocalReport), FocusError> {
    cp_from_scalar(h.projected(), pc)
}

pub fn cp_from_scalar(
    g: Vec<C>,
    pc: &PowerConstraints,
) -> Result<(ExcitationWeights, FocalReport), FocusError> {
    let p = prepare(g, pc)?;
    let mut w: Vec<C> =
        p.g.iter()
            .zip(&p.live)
            .map(|(&g, &live)| {
                if live {
                    phase_conj(g) * pc.w_max
                } else {
                    C::new(0.0, 0.0)
                }
            })
            .collect();
    let mut total = power(&p.r, &w);
    let mut active = ActiveConstraint::Local;
    if total > pc.p0 {
        let s = (pc.p0 / total).sqrt();
        for x in &mut w {
            *x *= s;
        }
        total = power(&p.r, &w);
        active = ActiveConstraint::Both;
    }
    let beta = level_for_all_clipped(&p, pc.w_max);
    let report = FocalReport {
        e_focus: focal(&p.g, &w),
        active_constraint: active,
        beta,
        iterations: 0,
    };
    Ok((
        ExcitationWeights {
            w,
            regime: Regime::Cp,
            total_power: total,
        },
        report,
    ))
}

/// Time-reversal weights `w = sqrt(2P₀) R⁻¹ g* / sqrt(gᴴ R⁻¹ g)`.
pub fn tr_weights(
    h: &ChannelVector,
    pc: &PowerConstraints,
) -> Result<(ExcitationWeights, FocalReport), FocusError> {
    tr_from_scalar(h.projected(), pc)
}

pub fn tr_from_scalar(
    g: Vec<C>,
    pc: &PowerConstraints,
) -> Result<(ExcitationWeights, FocalReport), FocusError> {
    let p = prepare(g, pc)?;
    let s = norm_r(&p);
    let d = (2.0 * pc.p0).sqrt() / s;
    let w: Vec<C> =
        p.g.iter()
            .zip(&p.r)
            .map(|(g, r)| g.conj() * (d / r))
            .collect();
    let report = FocalReport {
        e_focus: focal(&p.g, &w),
        active_constraint: ActiveConstraint::Global,
        beta: (2.0 * pc.p0).sqrt(),
        iterations: 0,
    };
    Ok((
        ExcitationWeights {
            total_power: power(&p.r, &w),
            w,
            regime: Regime::Tr,
        },
        report,
    ))
}

/// `sqrt(Σ |g_n|² / R_n)`.
fn norm_r(p: &Prepared) -> f64 {
    p.mag
        .iter()
        .zip(&p.r)
        .map(|(m, r)| m * m / r)
        .sum::<f64>()
        .sqrt()
}

fn direction(p: &Prepared) -> Vec<f64> {
    let s = norm_r(p);
    p.mag
        .iter()
        .zip(&p.r)
        .zip(&p.live)
        .map(|((m, r), &live)| if live { m / r / s } else { 0.0 })
        .collect()
}

fn level_for_all_clipped(p: &Prepared, w_max: f64) -> f64 {
    let v = direction(p);
    let vmin = v
        .iter()
        .copied()
        .filter(|&x| x > 0.0)
        .fold(f64::INFINITY, f64::min);
    w_max / vmin
}

fn clipped_power(v: &[f64], r: &[f64], beta: f64, w_max: f64) -> f64 {
    v.iter()
        .zip(r)
        .map(|(v, r)| {
            let a = (beta * v).min(w_max);
            0.5 * r * a * a
        })
        .sum()
}

/// Default bisection tolerance relative to `P₀`.
pub const DEFAULT_TOL_REL: f64 = 1e-10;
/// Default bisection iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 200;
const DOUBLING_CAP: usize = 64;

/// Water-level solution `clip(β v, w_max)` with CP phases; `β` is found by
/// doubling then bisection on the power budget.
pub fn hybrid_weights(
    h: &ChannelVector,
    pc: &PowerConstraints,
    tol: f64,
    max_iters: usize,
) -> Result<(ExcitationWeights, FocalReport), FocusError> {
    hybrid_from_scalar(h.projected(), pc, tol, max_iters)
}

pub fn hybrid_from_scalar(
    g: Vec<C>,
    pc: &PowerConstraints,
    tol: f64,
    max_iters: usize,
) -> Result<(ExcitationWeights, FocalReport), FocusError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(FocusError::InvalidConstraint {
            what: "tolerance",
            value: tol,
        });
    }
    let p = prepare(g, pc)?;
    let v = direction(&p);
    let w_max = pc.w_max;

    let all_clip_power: f64 =
        p.r.iter()
            .zip(&p.live)
            .filter(|(_, &l)| l)
            .map(|(r, _)| 0.5 * r * w_max * w_max)
            .sum();

    let (beta, iterations) = if all_clip_power <= pc.p0 {
        // The budget cannot bind before every element saturates.
        (level_for_all_clipped(&p, w_max), 0)
    } else {
        let mut lo = 0.0;
        let mut hi = (2.0 * pc.p0).sqrt();
        let mut it = 0;
        let mut f_hi = clipped_power(&v, &p.r, hi, w_max);
        while f_hi < pc.p0 - tol {
            if it >= DOUBLING_CAP {
                return Err(FocusError::NonConvergence {
                    iterations: it,
                    power_error: pc.p0 - f_hi,
                });
            }
            lo = hi;
            hi *= 2.0;
            f_hi = clipped_power(&v, &p.r, hi, w_max);
            it += 1;
        }
        let mut beta = hi;
        let mut err = f_hi - pc.p0;
        while err.abs() > tol {
            if it >= max_iters {
                return Err(FocusError::NonConvergence {
                    iterations: it,
                    power_error: err,
                });
            }
            let mid = 0.5 * (lo + hi);
            let f = clipped_power(&v, &p.r, mid, w_max);
            if f > pc.p0 {
                hi = mid;
            } else {
                lo = mid;
            }
            beta = mid;
            err = f - pc.p0;
            it += 1;
        }
        (beta, it)
    };

    let mut clipped = 0usize;
    let mut live = 0usize;
    let w: Vec<C> =
        p.g.iter()
            .zip(&v)
            .zip(&p.live)
            .map(|((&g, &v), &l)| {
                if !l {
                    return C::new(0.0, 0.0);
                }
                live += 1;
                let level = beta * v;
                let a = if level >= w_max {
                    clipped += 1;
                    w_max
                } else {
                    level
                };
                phase_conj(g) * a
            })
            .collect();
    let total = power(&p.r, &w);
    let (regime, active) = if clipped == live {
        let active = if (total - pc.p0).abs() <= tol {
            ActiveConstraint::Both
        } else {
            ActiveConstraint::Local
        };
        (Regime::Cp, active)
    } else if clipped == 0 {
        (Regime::Tr, ActiveConstraint::Global)
    } else {
        (Regime::Hybrid, ActiveConstraint::Both)
    };
    let report = FocalReport {
        e_focus: focal(&p.g, &w),
        active_constraint: active,
        beta,
        iterations,
    };
    Ok((
        ExcitationWeights {
            w,
            regime,
            total_power: total,
        },
        report,
    ))
}

/// Outcome of the projected-ascent optimality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    pub best_objective: f64,
    pub candidate_objective: f64,
    /// `(best − candidate) / best`.
    pub relative_gap: f64,
    pub starts: usize,
    pub total_iterations: usize,
}

/// Largest instance the oracle accepts.
pub const ORACLE_MAX_N: usize = 256;

/// Independent optimality check: projected gradient ascent of `Re(gᵀw)`
/// over `{|w_n| ≤ w_max} ∩ {Σ R_n|w_n|²/2 ≤ P₀}` from random feasible
/// starts, compared with the objective reached by `w`.
pub fn optimality_oracle(
    h: &ChannelVector,
    pc: &PowerConstraints,
    w: &ExcitationWeights,
    seed: u64,
) -> Result<OracleReport, FocusError> {
    oracle_from_scalar(&h.projected(), pc, &w.w, seed)
}

pub fn oracle_from_scalar(
    g: &[C],
    pc: &PowerConstraints,
    w: &[C],
    seed: u64,
) -> Result<OracleReport, FocusError> {
    const STARTS: usize = 20;
    const MAX_STEPS: usize = 20_000;
    let n = g.len();
    if n == 0 || n > ORACLE_MAX_N {
        return Err(FocusError::InvalidConstraint {
            what: "oracle size",
            value: n as f64,
        });
    }
    if w.len() != n {
        return Err(FocusError::LengthMismatch {
            scale: w.len(),
            channel: n,
        });
    }
    let r = pc.resistances(n)?;
    let gnorm = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if gnorm == 0.0 {
        return Err(FocusError::ZeroChannel);
    }
    let rmin = r.iter().copied().fold(f64::INFINITY, f64::min);
    let radius = (2.0 * pc.p0 / rmin)
        .sqrt()
        .min(pc.w_max * (n as f64).sqrt());
    let step = 10.0 * radius / gnorm;
    let objective = |w: &[C]| focal(g, w).re;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut total_iterations = 0;
    let mut x = vec![C::new(0.0, 0.0); n];
    let mut y = vec![C::new(0.0, 0.0); n];
    for _ in 0..STARTS {
        for xi in x.iter_mut() {
            *xi = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * pc.w_max;
        }
        project_feasible(&mut x, &r, pc);
        for _ in 0..MAX_STEPS {
            total_iterations += 1;
            for i in 0..n {
                y[i] = x[i] + g[i].conj() * step;
            }
            project_feasible(&mut y, &r, pc);
            let diff: f64 = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let size: f64 = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            std::mem::swap(&mut x, &mut y);
            if diff <= 1e-15 * size.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        // Restore strict feasibility before scoring.
        let p = power(&r, &x);
        if p > pc.p0 {
            let s = (pc.p0 / p).sqrt();
            x.iter_mut().for_each(|c| *c *= s);
        }
        for c in x.iter_mut() {
            if c.norm() > pc.w_max {
                *c *= pc.w_max / c.norm();
            }
        }
        best = best.max(objective(&x));
    }
    let candidate = objective(w);
    Ok(OracleReport {
        best_objective: best,
        candidate_objective: candidate,
        relative_gap: (best - candidate) / best.abs().max(f64::MIN_POSITIVE),
        starts: STARTS,
        total_iterations,
    })
}

/// Euclidean projection onto the box-ball intersection. The minimizer is
/// `z_n · min(1/(1 + μR_n), w_max/|z_n|)` for the smallest `μ ≥ 0` meeting
/// the budget; `μ` is located by bisection.
fn project_feasible(z: &mut [C], r: &[f64], pc: &PowerConstraints) {
    let mags: Vec<f64> = z.iter().map(|c| c.norm()).collect();
    let pw = |mu: f64| -> f64 {
        mags.iter()
            .zip(r)
            .map(|(m, r)| {
                let a = (m / (1.0 + mu * r)).min(pc.w_max);
                0.5 * r * a * a
            })
            .sum()
    };
    let mu = if pw(0.0) <= pc.p0 {
        0.0
    } else {
        let mut lo = 0.0;
        let mut hi = 1.0 / r.iter().copied().fold(f64::INFINITY, f64::min);
        while pw(hi) > pc.p0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if pw(mid) > pc.p0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    for ((c, m), r) in z.iter_mut().zip(&mags).zip(r) {
        if *m > 0.0 {
            let a = (m / (1.0 + mu * r)).min(pc.w_max);
            *c *= a / m;
        }
    }
}

/// Cosine similarity of two magnitude profiles.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn pc(w_max: f64, p0: f64, r0: f64) -> PowerConstraints {
        PowerConstraints::new(w_max, p0, r0).unwrap()
    }

    #[test]
    fn cp_conjugates_phases() {
        let g = vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let (w, rep) = cp_from_scalar(g, &pc(2.0, 1e6, 1.0)).unwrap();
        let expect = [c(2.0, 0.0), c(0.0, -2.0), c(-2.0, 0.0)];
        for (a, b) in w.w.iter().zip(expect) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!((rep.e_focus - c(6.0, 0.0)).norm() < 1e-14);
        assert_eq!(rep.active_constraint, ActiveConstraint::Local);
    }

    #[test]
    fn cp_scales_down_over_budget() {
        let g = vec![c(1.0, 1.0), c(0.5, -2.0)];
        // full amplitude would draw 2 W
        let (w, rep) = cp_from_scalar(g.clone(), &pc(1.0, 1.0, 2.0)).unwrap();
        for x in &w.w {
            assert!((x.norm() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        }
        for (x, g) in w.w.iter().zip(&g) {
            assert!(((x * g).arg()).abs() < 1e-15);
        }
        assert_eq!(rep.active_constraint, ActiveConstraint::Both);
        assert!((w.total_power - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cp_zero_entries_and_zero_channel() {
        let (w, _) = cp_from_scalar(vec![c(1.0, 0.0), c(0.0, 0.0)], &pc(1.0, 10.0, 1.0)).unwrap();
        assert_eq!(w.w[1], c(0.0, 0.0));
        assert_eq!(
            cp_from_scalar(vec![c(0.0, 0.0); 3], &pc(1.0, 1.0, 1.0)).unwrap_err(),
            FocusError::ZeroChannel
        );
    }

    #[test]
    fn tr_reference_current() {
        let n = 2000;
        let g: Vec<C> = (0..n).map(|i| C::from_polar(1.0, i as f64 * 0.1)).collect();
        let (w, rep) = tr_from_scalar(g, &pc(1.0, 1.0, 50.0)).unwrap();
        let max = w.w.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!((max - (2.0 / 50.0 / n as f64).sqrt()).abs() < 1e-15);
        assert!((max - 0.0045).abs() < 1e-4);
        assert!((w.total_power - 1.0).abs() < 1e-12);
        assert!((rep.e_focus.re - (2.0 * n as f64 / 50.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_element_cp_equals_tr() {
        let g = vec![c(0.3, 0.4)];
        let p = pc((2.0 * 1.0 / 50.0f64).sqrt(), 1.0, 50.0);
        let (_, a) = cp_from_scalar(g.clone(), &p).unwrap();
        let (_, b) = tr_from_scalar(g, &p).unwrap();
        assert!((a.e_focus - b.e_focus).norm() < 1e-14);
    }

    #[test]
    fn hybrid_two_element_water_level() {
        let g = vec![c(2.0, 0.0), c(1.0, 0.0)];
        let (w, rep) = hybrid_from_scalar(g, &pc(0.8, 1.0, 2.0), 1e-13, 500).unwrap();
        assert!((w.w[0].norm() - 0.8).abs() < 1e-12);
        assert!((w.w[1].norm() - 0.6).abs() < 1e-10);
        assert_eq!(w.regime, Regime::Hybrid);
        assert_eq!(rep.active_constraint, ActiveConstraint::Both);
    }

    #[test]
    fn hybrid_limits() {
        let g: Vec<C> = (1..=10)
            .map(|i| C::from_polar(i as f64, 0.7 * i as f64))
            .collect();
        let big = pc(1e6, 1.0, 50.0);
        let (h, _) = hybrid_from_scalar(g.clone(), &big, 1e-12, 200).unwrap();
        let (t, _) = tr_from_scalar(g.clone(), &big).unwrap();
        assert_eq!(h.regime, Regime::Tr);
        for (a, b) in h.w.iter().zip(&t.w) {
            assert!((a - b).norm() < 1e-9);
        }
        let tiny = pc(1e-6, 1.0, 50.0);
        let (h, rep) = hybrid_from_scalar(g.clone(), &tiny, 1e-12, 200).unwrap();
        let (cp, _) = cp_from_scalar(g, &tiny).unwrap();
        assert_eq!(h.regime, Regime::Cp);
        assert_eq!(rep.active_constraint, ActiveConstraint::Local);
        for (a, b) in h.w.iter().zip(&cp.w) {
            assert!((a - b).norm() < 1e-18);
        }
    }

    #[test]
    fn hybrid_rejects_bad_tolerance_and_reports_nonconvergence() {
        let g = vec![c(2.0, 0.0), c(1.0, 0.0)];
        assert!(hybrid_from_scalar(g.clone(), &pc(0.8, 1.0, 2.0), 0.0, 10).is_err());
        assert!(matches!(
            hybrid_from_scalar(g, &pc(0.8, 1.0, 2.0), 1e-300, 5),
            Err(FocusError::NonConvergence { .. })
        ));
    }

    #[test]
    fn oracle_agrees_on_closed_forms() {
        let g: Vec<C> = (0..8)
            .map(|i| C::from_polar(1.0 + i as f64 * 0.3, i as f64))
            .collect();
        // CP regime: E = w_max Σ|g|
        let p = pc(0.01, 100.0, 50.0);
        let (w, rep) = cp_from_scalar(g.clone(), &p).unwrap();
        let o = oracle_from_scalar(&g, &p, &w.w, 7).unwrap();
        let sum: f64 = g.iter().map(|c| c.norm()).sum();
        assert!((o.best_objective - 0.01 * sum).abs() < 1e-9 * o.best_objective);
        assert!((rep.e_focus.re - 0.01 * sum).abs() < 1e-12);
        // TR regime
        let p = pc(100.0, 1.0, 50.0);
        let (w, rep) = tr_from_scalar(g.clone(), &p).unwrap();
        let o = oracle_from_scalar(&g, &p, &w.w, 7).unwrap();
        assert!(o.relative_gap.abs() < 1e-9, "{o:?}");
        assert!((o.best_objective - rep.e_focus.re).abs() < 1e-9 * rep.e_focus.re);
    }

    #[test]
    fn non_uniform_ports() {
        let g = vec![c(1.0, 0.0), c(0.0, 2.0), c(-0.5, 0.5), c(3.0, 0.0)];
        let p = pc(0.2, 0.05, 10.0)
            .with_port_scale(vec![1.0, 2.0, 0.5, 4.0])
            .unwrap();
        let (w, _) = hybrid_from_scalar(g.clone(), &p, 1e-14, 500).unwrap();
        assert!((w.total_power - 0.05).abs() < 1e-13);
        let o = oracle_from_scalar(&g, &p, &w.w, 3).unwrap();
        assert!(o.relative_gap.abs() < 1e-8, "{o:?}");
        assert!(p.clone().with_port_scale(vec![1.0, -1.0]).is_err());
        assert!(cp_from_scalar(g[..2].to_vec(), &p).is_err());
    }

    fn channel() -> impl Strategy<Value = Vec<C>> {
        prop::collection::vec((0.01f64..5.0, -3.2f64..3.2), 1..40)
            .prop_map(|v| v.into_iter().map(|(m, a)| C::from_polar(m, a)).collect())
    }

    proptest! {
        #[test]
        fn phase_law_and_monotone_level(g in channel(), wm in 0.001f64..0.5, p0 in 0.01f64..10.0) {
            let p = pc(wm, p0, 50.0);
            let (w, _) = hybrid_from_scalar(g.clone(), &p, 1e-10 * p0, 400).unwrap();
            for (wi, gi) in w.w.iter().zip(&g) {
                if wi.norm() > 0.0 {
                    prop_assert!((wi * gi).arg().abs() < 1e-9);
                }
                prop_assert!(wi.norm() <= wm * (1.0 + 1e-12));
            }
            for i in 0..g.len() {
                for j in 0..g.len() {
                    if g[i].norm() >= g[j].norm() {
                        prop_assert!(w.w[i].norm() >= w.w[j].norm() * (1.0 - 1e-12));
                    }
                }
            }
            prop_assert!(w.total_power <= p0 + 1e-10 * p0 + 1e-15);
            // at least one constraint is tight
            let max = w.w.iter().map(|c| c.norm()).fold(0.0, f64::max);
            prop_assert!((w.total_power - p0).abs() <= 1e-10 * p0 || (max - wm).abs() <= 1e-12 * wm);
        }

        #[test]
        fn shape_is_scale_invariant(g in channel(), s in 0.01f64..100.0) {
            let p = pc(0.05, 1.0, 50.0);
            let (a, _) = hybrid_from_scalar(g.clone(), &p, 1e-12, 400).unwrap();
            let scaled: Vec<C> = g.iter().map(|c| c * s).collect();
            let (b, _) = tr_from_scalar(scaled, &p).unwrap();
            let (t, _) = tr_from_scalar(g, &p).unwrap();
            let norm = |w: &[C]| w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for (x, y) in b.w.iter().zip(&t.w) {
                prop_assert!((x.norm() / norm(&b.w) - y.norm() / norm(&t.w)).abs() < 1e-12);
            }
            prop_assert!(a.w.len() == b.w.len());
        }

        #[test]
        fn tr_amplitude_proportional(g in channel()) {
            let (w, _) = tr_from_scalar(g.clone(), &pc(1.0, 1.0, 50.0)).unwrap();
            for i in 1..g.len() {
                let lhs = w.w[i].norm() / w.w[0].norm();
                let rhs = g[i].norm() / g[0].norm();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }
        }
    }
}
