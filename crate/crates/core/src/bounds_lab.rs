//! Verdicts from kernel grids and model kernels.
//!
//! Regime fits report a weighted sup together with its growth under domain
//! truncation: a bound `|K| <~ w^-1` is taken to hold when the sup of `w |K|` is
//! finite and its log-log trend against the truncation radius stays below
//! [`HOLDS_SLOPE`]. The model probes (Schur sums, `L^p` growth, the annulus
//! example) integrate radial kernels so the operator lemmas can be exercised
//! without kernel quadrature error.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::{adaptive_integrate, bracket, composite_gauss, SPHERE3_AREA};
use crate::wave_kernel::{KernelGrid, Regime};

/// Trend slope at or below which a weighted sup counts as bounded.
pub const HOLDS_SLOPE: f64 = 0.1;
/// Minimum number of in-regime samples behind a sup.
pub const MIN_SAMPLES: usize = 100;
/// Relative width of the sliding max used to take the upper envelope.
pub const ENVELOPE_SPAN: f64 = 1.5;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("no samples in regime {0:?}")]
    EmptyRegime(Regime),
    #[error("only {found} samples in regime {regime:?}, need {need}")]
    TooFewSamples {
        regime: Regime,
        found: usize,
        need: usize,
    },
    #[error("fit window [{lo}, {hi}] spans less than one decade")]
    DynamicRange { lo: f64, hi: f64 },
    #[error("trend needs at least 3 truncation radii, got {0}")]
    Truncations(usize),
    #[error("{lemma}: hypothesis violated, {condition}")]
    Hypothesis {
        lemma: &'static str,
        condition: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BoundsError>;

/// Ordinary least-squares slope of `(x, y)` pairs.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope of `ln v` against `ln r`.
pub fn log_log_slope(series: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = series.iter().map(|&(r, v)| (r.ln(), v.ln())).collect();
    least_squares_slope(&pts)
}

/// `<x>^a <y>^b <|x|-|y|>^c <|x|+|y|>^sum / <ln <|x|-|y|>>^log`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub sum: f64,
    pub log: f64,
}

impl Weight {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self {
            a,
            b,
            c,
            sum: 0.0,
            log: 0.0,
        }
    }

    /// The envelope of the logarithmic term with `3 - eps` on the difference.
    pub fn log_envelope(eps: f64) -> Self {
        Self {
            a: 2.0,
            b: 0.0,
            c: 3.0 - eps,
            sum: 1.0,
            log: 1.0,
        }
    }

    pub fn eval(&self, rx: f64, ry: f64) -> f64 {
        let d = bracket(rx - ry);
        let mut w = bracket(rx).powf(self.a) * bracket(ry).powf(self.b) * d.powf(self.c);
        if self.sum != 0.0 {
            w *= bracket(rx + ry).powf(self.sum);
        }
        if self.log != 0.0 {
            w /= bracket(d.ln()).powf(self.log);
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupLocation {
    pub rx: f64,
    pub ry: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundFit {
    pub regime: Regime,
    pub weight: Weight,
    pub sup: f64,
    pub sup_location: SupLocation,
    pub trend_slope: f64,
    pub samples: usize,
    /// `(R, sup over samples with max(|x|, |y|) <= R)`.
    pub truncations: Vec<(f64, f64)>,
}

impl BoundFit {
    pub fn holds(&self) -> bool {
        self.sup.is_finite() && self.trend_slope <= HOLDS_SLOPE
    }

    /// A bound missing `deficit` powers fails when the trend reaches half of it.
    pub fn fails(&self, deficit: f64) -> bool {
        self.trend_slope >= 0.5 * deficit
    }
}

/// `r_max / 8, r_max / 4, r_max / 2, r_max`.
pub fn default_truncations(r_max: f64) -> Vec<f64> {
    [8.0, 4.0, 2.0, 1.0].iter().map(|d| r_max / d).collect()
}

pub fn fit_regime_bound(
    grid: &KernelGrid,
    regime: Regime,
    weight: Weight,
    truncations: &[f64],
) -> Result<BoundFit> {
    if truncations.len() < 3 {
        return Err(BoundsError::Truncations(truncations.len()));
    }
    let weighted: Vec<(f64, SupLocation)> = grid
        .in_regime(regime)
        .map(|s| {
            (
                s.k.norm() * weight.eval(s.rx, s.ry),
                SupLocation {
                    rx: s.rx,
                    ry: s.ry,
                    theta: s.theta,
                },
            )
        })
        .collect();
    if weighted.is_empty() {
        return Err(BoundsError::EmptyRegime(regime));
    }
    if weighted.len() < MIN_SAMPLES {
        return Err(BoundsError::TooFewSamples {
            regime,
            found: weighted.len(),
            need: MIN_SAMPLES,
        });
    }
    // first maximum in sample order, so ties resolve deterministically
    let (sup, sup_location) =
        weighted
            .iter()
            .fold((f64::NEG_INFINITY, weighted[0].1), |acc, &(v, loc)| {
                if v > acc.0 {
                    (v, loc)
                } else {
                    acc
                }
            });
    let series: Vec<(f64, f64)> = truncations
        .iter()
        .map(|&r| {
            let s = weighted
                .iter()
                .filter(|(_, l)| l.rx.max(l.ry) <= r * (1.0 + 1e-12))
                .map(|(v, _)| *v)
                .fold(0.0, f64::max);
            (r, s)
        })
        .collect();
    let usable: Vec<(f64, f64)> = series.iter().copied().filter(|p| p.1 > 0.0).collect();
    if usable.len() < 3 {
        return Err(BoundsError::Truncations(usable.len()));
    }
    Ok(BoundFit {
        regime,
        weight,
        sup,
        sup_location,
        trend_slope: log_log_slope(&usable),
        samples: weighted.len(),
        truncations: series,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub regime: Regime,
    pub direction: Direction,
    /// Positive for decay.
    pub exponent: f64,
    pub window: (f64, f64),
    /// `(t, smoothed envelope)` at the points used in the regression.
    pub envelope: Vec<(f64, f64)>,
}

/// Raw envelope: max of `|K|` over in-regime samples at each value of the
/// chosen coordinate, sorted by that coordinate.
pub fn regime_envelope(grid: &KernelGrid, regime: Regime, direction: Direction) -> Vec<(f64, f64)> {
    let mut env: Vec<(f64, f64)> = Vec::new();
    for s in grid.in_regime(regime) {
        let t = match direction {
            Direction::X => s.rx,
            Direction::Y => s.ry,
        };
        let v = s.k.norm();
        match env.iter_mut().find(|e| e.0 == t) {
            Some(e) => e.1 = e.1.max(v),
            None => env.push((t, v)),
        }
    }
    env.sort_by(|a, b| a.0.total_cmp(&b.0));
    env
}

/// Log-log regression of the upper envelope over `window`.
///
/// The envelope at `t` is the max of the raw envelope on `[t, ENVELOPE_SPAN t]`,
/// which is exact for a pure power law and removes the zeros of the oscillating
/// factor. Points are used while `ENVELOPE_SPAN t` stays inside the window.
pub fn fit_decay_exponent(
    grid: &KernelGrid,
    regime: Regime,
    direction: Direction,
    window: (f64, f64),
) -> Result<DecayFit> {
    let (lo, hi) = window;
    if !(hi >= 10.0 * lo * (1.0 - 1e-9)) {
        return Err(BoundsError::DynamicRange { lo, hi });
    }
    let raw = regime_envelope(grid, regime, direction);
    if raw.is_empty() {
        return Err(BoundsError::EmptyRegime(regime));
    }
    let top = raw.last().map(|e| e.0).unwrap_or(0.0).min(hi);
    if top < 10.0 * lo * (1.0 - 1e-9) {
        return Err(BoundsError::DynamicRange { lo, hi: top });
    }
    let tol = 1.0 + 1e-12;
    let envelope: Vec<(f64, f64)> = raw
        .iter()
        .filter(|&&(t, _)| t >= lo / tol && t * ENVELOPE_SPAN <= top * tol)
        .map(|&(t, _)| {
            let m = raw
                .iter()
                .filter(|&&(u, _)| u >= t && u <= t * ENVELOPE_SPAN * tol)
                .map(|e| e.1)
                .fold(0.0, f64::max);
            (t, m)
        })
        .filter(|e| e.1 > 0.0)
        .collect();
    if envelope.len() < 3 {
        return Err(BoundsError::DynamicRange { lo, hi: top });
    }
    Ok(DecayFit {
        regime,
        direction,
        exponent: -log_log_slope(&envelope),
        window: (lo, top),
        envelope,
    })
}

/// Radial model kernel `K(|x|, |y|) >= 0`.
pub trait RadialModel: Sync {
    fn eval(&self, rx: f64, ry: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64 + Sync> RadialModel for F {
    fn eval(&self, rx: f64, ry: f64) -> f64 {
        self(rx, ry)
    }
}

/// Range of the partner radius that keeps `(r, partner)` in the regime.
/// `row` means `r = |x|` and the partner is `|y|`.
fn regime_interval(regime: Regime, r: f64, row: bool) -> (f64, f64) {
    let (small, large) = if row {
        (Regime::XLarge, Regime::YLarge)
    } else {
        (Regime::YLarge, Regime::XLarge)
    };
    if regime == small {
        (0.0, 0.5 * r)
    } else if regime == large {
        (2.0 * r, f64::INFINITY)
    } else {
        (0.5 * r, 2.0 * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurSums {
    pub radius: f64,
    pub row_sup: f64,
    pub col_sup: f64,
}

fn schur_side(model: &dyn RadialModel, regime: Regime, radius: f64, row: bool) -> f64 {
    let scan: Vec<f64> = std::iter::once(0.0)
        .chain((0..=240).map(|i| 1e-3 * (radius / 1e-3).powf(i as f64 / 240.0)))
        .collect();
    scan.par_iter()
        .map(|&r| {
            let (a, b) = regime_interval(regime, r, row);
            let b = b.min(radius);
            if b <= a {
                return 0.0;
            }
            let f = |rho: f64| {
                let k = if row {
                    model.eval(r, rho)
                } else {
                    model.eval(rho, r)
                };
                rho.powi(3) * k
            };
            let mut breaks = vec![r];
            breaks.extend((0..12).map(|k| a + (b - a) * 0.5f64.powi(k)));
            SPHERE3_AREA * adaptive_integrate(f, a, b, &breaks, 1e-14, 1e-10, 4000).value
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// `sup_x int |K| dy` and `sup_y int |K| dx` over `|x|, |y| <= R` within the
/// regime, for each truncation radius.
pub fn schur_sums(model: &dyn RadialModel, regime: Regime, radii: &[f64]) -> Vec<SchurSums> {
    radii
        .iter()
        .map(|&radius| SchurSums {
            radius,
            row_sup: schur_side(model, regime, radius, true),
            col_sup: schur_side(model, regime, radius, false),
        })
        .collect()
}

/// Schur sums of an assembled grid: trapezoid in `ln r` and in the angle with
/// the `S^3` measure `4 pi sin^2 theta d theta`.
pub fn grid_schur_sums(grid: &KernelGrid, regime: Regime, radius: f64) -> SchurSums {
    let radii = grid.meta.spec.radius_nodes();
    let angles = grid.meta.spec.angle_nodes();
    let na = angles.len();
    let nr = radii.len();
    let tw = trapezoid_weights(&angles);
    let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let rw = trapezoid_weights(&lr);
    // samples are ordered rx, ry, theta
    let angular = |i: usize, j: usize| -> f64 {
        (0..na)
            .map(|t| {
                let s = &grid.samples[(i * nr + j) * na + t];
                tw[t] * 4.0 * PI * angles[t].sin().powi(2) * s.k.norm()
            })
            .sum()
    };
    let side = |row: bool| -> f64 {
        (0..nr)
            .filter(|&i| radii[i] <= radius)
            .map(|i| {
                (0..nr)
                    .filter(|&j| radii[j] <= radius)
                    .filter(|&j| {
                        let (x, y) = if row { (i, j) } else { (j, i) };
                        Regime::classify(radii[x], radii[y]) == regime
                    })
                    .map(|j| {
                        let v = if row { angular(i, j) } else { angular(j, i) };
                        rw[j] * radii[j].powi(4) * v
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    };
    SchurSums {
        radius,
        row_sup: side(true),
        col_sup: side(false),
    }
}

fn trapezoid_weights(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { t[i] - t[i - 1] } else { 0.0 };
            let right = if i + 1 < n { t[i + 1] - t[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `int_0^r rho^3 <rho>^-b d rho` in closed form.
pub fn radial_moment(b: f64, r: f64) -> f64 {
    // u = 1 + rho^2: (1/2) int_1^U (u - 1) u^{-b/2} du
    let u = 1.0 + r * r;
    let prim = |e: f64| -> f64 {
        // int_1^U u^e du
        if (e + 1.0).abs() < 1e-12 {
            u.ln()
        } else {
            (u.powf(e + 1.0) - 1.0) / (e + 1.0)
        }
    };
    0.5 * (prim(1.0 - 0.5 * b) - prim(-0.5 * b))
}

/// `||K f_R||_p / ||f_R||_p` for `K = <x>^-a <y>^-b 1{|y| > 2|x|}` and
/// `f_R = 1{R < |y| < 2R}`.
pub fn lp_growth_probe(a: f64, b: f64, p: f64, radii: &[f64]) -> Vec<(f64, f64)> {
    radii
        .iter()
        .map(|&r| {
            let kf = |rx: f64| -> f64 {
                let lo = r.max(2.0 * rx);
                if lo >= 2.0 * r {
                    return 0.0;
                }
                bracket(rx).powf(-a)
                    * SPHERE3_AREA
                    * (radial_moment(b, 2.0 * r) - radial_moment(b, lo))
            };
            // Kf vanishes for |x| >= R and has a kink at R/2
            let edges: Vec<f64> = std::iter::once(0.0)
                .chain((0..=60).map(|i| 1e-2 * (r / 1e-2).powf(i as f64 / 60.0)))
                .chain(std::iter::once(0.5 * r))
                .collect();
            let mut edges: Vec<f64> = edges.into_iter().filter(|&t| t <= r).collect();
            edges.sort_by(f64::total_cmp);
            edges.dedup();
            let rule = composite_gauss(&edges, 16);
            let norm_p: f64 = rule.integrate(|rx: f64| SPHERE3_AREA * rx.powi(3) * kf(rx).powf(p));
            let vol = SPHERE3_AREA / 4.0 * 15.0 * r.powi(4);
            (r, norm_p.powf(1.0 / p) / vol.powf(1.0 / p))
        })
        .collect()
}

/// `max_{R < |x| < 2R} int K(x, y) f(|y|, R) dy` for the ring model
/// `K = <x>^-3 <|x|-|y|>^-power` on `|x|/2 <= |y| <= 2|x|`.
pub fn annulus_log_probe<F>(radii: &[f64], power: f64, profile: F) -> Vec<(f64, f64)>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    radii
        .iter()
        .map(|&r| {
            let value = (0..=64)
                .into_par_iter()
                .map(|i| {
                    let rx = r * (1.0 + i as f64 / 64.0);
                    let (a, b) = (0.5 * rx, 2.0 * rx);
                    let f =
                        |rho: f64| rho.powi(3) * bracket(rx - rho).powf(-power) * profile(rho, r);
                    let breaks = [rx, r, 2.0 * r, rx - 1.0, rx + 1.0];
                    bracket(rx).powi(-3)
                        * SPHERE3_AREA
                        * adaptive_integrate(f, a, b, &breaks, 1e-14, 1e-10, 4000).value
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .fold(0.0, f64::max);
            (r, value)
        })
        .collect()
}

/// Indicator of `R < |y| < 2R`.
pub fn annulus_indicator(rho: f64, r: f64) -> f64 {
    if rho > r && rho < 2.0 * r {
        1.0
    } else {
        0.0
    }
}

/// Weighted convolution inequalities, with the decay exponent of the
/// `<z>^-N` factor as `n_decay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lemma", rename_all = "UPPERCASE")]
pub enum Convolution {
    A1 {
        alpha: f64,
        beta: f64,
        n_decay: f64,
    },
    B1 {
        s: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        n_decay: f64,
    },
    #[serde(rename = "LARGEW")]
    LargeW {
        k: f64,
        alpha: f64,
        n_decay: f64,
    },
}

const DIM: f64 = 4.0;

impl Convolution {
    pub fn name(&self) -> &'static str {
        match self {
            Self::A1 { .. } => "A1",
            Self::B1 { .. } => "B1",
            Self::LargeW { .. } => "LARGEW",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |condition: String| {
            Err(BoundsError::Hypothesis {
                lemma: self.name(),
                condition,
            })
        };
        match *self {
            Self::A1 {
                alpha,
                beta,
                n_decay,
            } => {
                if !(beta >= 1.0) {
                    return fail(format!("beta = {beta} < 1"));
                }
                if !(0.0..DIM - 1.0).contains(&alpha) {
                    return fail(format!("alpha = {alpha} outside [0, 3)"));
                }
                if !(n_decay >= DIM + beta) {
                    return fail(format!("N = {n_decay} < 4 + beta"));
                }
            }
            Self::B1 {
                s,
                alpha,
                beta,
                gamma,
                n_decay,
            } => {
                if !(s > 0.0 && s <= 1.0) {
                    return fail(format!("s = {s} outside (0, 1]"));
                }
                if !(0.0..=DIM).contains(&alpha) {
                    return fail(format!("alpha = {alpha} outside [0, 4]"));
                }
                if !(beta >= 1.0) {
                    return fail(format!("beta = {beta} < 1"));
                }
                if !gamma.is_finite() {
                    return fail(format!("gamma = {gamma} not finite"));
                }
                if !(n_decay >= DIM + beta) {
                    return fail(format!("N = {n_decay} < 4 + beta"));
                }
            }
            Self::LargeW { k, alpha, n_decay } => {
                if !(k >= 0.0) {
                    return fail(format!("k = {k} < 0"));
                }
                if !(0.0..DIM - 1.0).contains(&alpha) {
                    return fail(format!("alpha = {alpha} outside [0, 3)"));
                }
                if !(n_decay >= DIM + 1.0 + k) {
                    return fail(format!("N = {n_decay} < 5 + k"));
                }
            }
        }
        Ok(())
    }

    /// Left side by quadrature in coordinates centred at the point `t` (`|x|`
    /// for A1, `|y|` otherwise), angles reduced to the polar angle.
    pub fn lhs(&self, t: f64, r: f64) -> f64 {
        match *self {
            Self::A1 {
                alpha,
                beta,
                n_decay,
            } => {
                // z = x + rho w, |z|^2 = t^2 + rho^2 + 2 t rho cos
                let g = |rho: f64| {
                    rho.powf(3.0 - alpha) / (bracket(rho + r) * bracket(rho - r).powf(beta))
                        * shell_average(t, rho, n_decay, -1.0)
                };
                centred_radial(g, t, r)
            }
            Self::LargeW { alpha, n_decay, .. } => {
                // w = y + rho w', region |w| > t/2
                let g = |rho: f64| {
                    if rho <= 0.0 {
                        return 0.0;
                    }
                    let c = -(0.75 * t * t + rho * rho) / (2.0 * t * rho);
                    rho.powf(3.0 - alpha) / (bracket(r + rho) * bracket(r - rho))
                        * shell_average(t, rho, n_decay, c)
                };
                centred_radial(g, t, r)
            }
            Self::B1 {
                s,
                alpha,
                beta,
                gamma,
                n_decay,
            } => {
                // polar about the origin in w, |w| < t/2, D = |y - s w|
                let inner = |rho: f64| -> f64 {
                    let f = |th: f64| {
                        let d = (t * t + s * s * rho * rho - 2.0 * s * rho * t * th.cos())
                            .max(0.0)
                            .sqrt();
                        th.sin().powi(2)
                            / (d.powf(alpha)
                                * bracket(d + r).powf(gamma)
                                * bracket(d - r).powf(beta))
                    };
                    4.0 * PI * adaptive_integrate(f, 0.0, PI, &[], 1e-300, 1e-11, 2000).value
                };
                let f = |rho: f64| rho.powi(3) * bracket(rho).powf(-n_decay) * inner(rho);
                let top = 0.5 * t;
                let breaks: Vec<f64> = (1..8)
                    .map(|k| top * 0.5f64.powi(k))
                    .chain([1.0, 2.0, 4.0])
                    .collect();
                adaptive_integrate(f, 0.0, top, &breaks, 1e-300, 1e-10, 4000).value
            }
        }
    }

    pub fn rhs(&self, t: f64, r: f64) -> f64 {
        match *self {
            Self::A1 { alpha, beta, .. } => {
                1.0 / (bracket(t).powf(alpha) * bracket(t + r) * bracket(r - t).powf(beta))
            }
            Self::B1 {
                alpha, beta, gamma, ..
            } => {
                1.0 / (bracket(t).powf(alpha)
                    * bracket(t + r).powf(gamma)
                    * bracket(r - t).powf(beta))
            }
            Self::LargeW { k, alpha, .. } => {
                1.0 / (bracket(r + t) * bracket(r - t) * bracket(t).powf(alpha + k))
            }
        }
    }
}

/// `4 pi int_{cos >= c_min} sin^2 <sqrt(t^2 + rho^2 + 2 t rho cos)>^-n d theta`.
fn shell_average(t: f64, rho: f64, n: f64, c_min: f64) -> f64 {
    if c_min >= 1.0 {
        return 0.0;
    }
    let top = c_min.max(-1.0).acos();
    let f = |th: f64| {
        let z2 = (t * t + rho * rho + 2.0 * t * rho * th.cos()).max(0.0);
        th.sin().powi(2) * (1.0 + z2).powf(-0.5 * n)
    };
    // the bump of <z>^-n sits at theta = pi when rho ~ t, width ~ 1/t
    let width = (1.0 / t.max(1.0)).min(1.0);
    let breaks: Vec<f64> = (0..10)
        .map(|k| PI - width * 4.0 * 0.5f64.powi(k))
        .filter(|&b| b > 0.0 && b < top)
        .collect();
    4.0 * PI * adaptive_integrate(f, 0.0, top, &breaks, 1e-300, 1e-11, 2000).value
}

/// Integrate `g(rho)` over `rho` in `[0, t + L]` where the `<z>^-N` factor
/// confines the mass to `|rho - t| <~ L`.
fn centred_radial<G: Fn(f64) -> f64>(g: G, t: f64, r: f64) -> f64 {
    const L: f64 = 60.0;
    let lo = (t - L).max(0.0);
    let hi = t + L;
    let mut breaks = vec![t, r, t - 2.0, t + 2.0, r - 2.0, r + 2.0];
    breaks.extend((1..10).map(|k| lo + 0.5f64.powi(k)));
    adaptive_integrate(g, lo, hi, &breaks, 1e-300, 1e-10, 8000).value
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionCheck {
    pub lemma: Convolution,
    /// Sup of LHS / RHS over the base parameter grid.
    pub sup_ratio: f64,
    pub argmax: (f64, f64),
    /// Sup after doubling the grid extent.
    pub extended_sup: f64,
    pub points: usize,
}

impl ConvolutionCheck {
    pub fn extension_ratio(&self) -> f64 {
        self.extended_sup / self.sup_ratio
    }

    pub fn stable(&self) -> bool {
        self.sup_ratio.is_finite() && self.sup_ratio > 0.0 && self.extension_ratio() < 2.0
    }
}

/// Parameter grid `(t, R)`: `t` log-spaced in `[0.05, extent]`, `R` in
/// `{0, t}` and log-spaced in `[0.5, extent]`.
pub fn convolution_grid(extent: f64, n: usize) -> Vec<(f64, f64)> {
    let ts: Vec<f64> = (0..n)
        .map(|i| 0.05 * (extent / 0.05).powf(i as f64 / (n - 1) as f64))
        .collect();
    let rs: Vec<f64> = (0..n)
        .map(|i| 0.5 * (extent / 0.5).powf(i as f64 / (n - 1) as f64))
        .collect();
    let mut out = Vec::new();
    for &t in &ts {
        out.push((t, 0.0));
        out.push((t, t));
        out.extend(rs.iter().map(|&r| (t, r)));
    }
    out
}

/// Sup of LHS/RHS on the grid to `extent` and on the doubled grid.
pub fn weighted_convolution_check(
    lemma: Convolution,
    extent: f64,
    n: usize,
) -> Result<ConvolutionCheck> {
    lemma.validate()?;
    let sup_on = |pts: &[(f64, f64)]| -> (f64, (f64, f64)) {
        let ratios: Vec<f64> = pts
            .par_iter()
            .map(|&(t, r)| lemma.lhs(t, r) / lemma.rhs(t, r))
            .collect();
        ratios
            .iter()
            .zip(pts)
            .fold((f64::NEG_INFINITY, pts[0]), |acc, (&v, &p)| {
                if v > acc.0 {
                    (v, p)
                } else {
                    acc
                }
            })
    };
    let base = convolution_grid(extent, n);
    let (sup_ratio, argmax) = sup_on(&base);
    let extended = convolution_grid(2.0 * extent, n + (n - 1) / 4);
    let (ext, _) = sup_on(&extended);
    Ok(ConvolutionCheck {
        lemma,
        sup_ratio,
        argmax,
        extended_sup: ext.max(sup_ratio),
        points: base.len(),
    })
}

/// `bound_fit.csv`, one block of rows per labelled grid.
pub fn write_bound_fits(path: &Path, groups: &[(String, Vec<BoundFit>)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        f,
        "grid,regime,a,b,c,sum,log,sup,sup_rx,sup_ry,sup_theta,trend_slope,samples"
    )?;
    for (label, b) in groups
        .iter()
        .flat_map(|(l, fits)| fits.iter().map(move |b| (l, b)))
    {
        writeln!(
            f,
            "{label},{},{},{},{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            b.regime.tag(),
            b.weight.a,
            b.weight.b,
            b.weight.c,
            b.weight.sum,
            b.weight.log,
            b.sup,
            b.sup_location.rx,
            b.sup_location.ry,
            b.sup_location.theta,
            b.trend_slope,
            b.samples
        )?;
    }
    f.flush()?;
    Ok(())
}

/// A probe R-series as `probe,R,value`.
pub fn write_series(path: &Path, rows: &[(String, Vec<(f64, f64)>)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "probe,R,value")?;
    for (name, series) in rows {
        for (r, v) in series {
            writeln!(f, "{name},{r:.17e},{v:.17e}")?;
        }
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        assert!((least_squares_slope(&pts) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn weight_values() {
        let w = Weight::new(2.0, 3.0, 0.0);
        assert!((w.eval(0.0, 0.0) - 1.0).abs() < 1e-15);
        let v = w.eval(1.0, 2.0);
        assert!((v - 2.0 * 5f64.powf(1.5)).abs() < 1e-12);
        let l = Weight::log_envelope(0.1);
        assert!(l.eval(3.0, 3.0) > 0.0 && l.c == 2.9);
    }

    #[test]
    fn radial_moment_closed_form() {
        for b in [2.0, 3.0, 4.0, 5.0] {
            let r = 7.5;
            let rule = composite_gauss(&[0.0, 1.0, 2.0, 4.0, 7.5], 30);
            let num = rule.integrate(|t: f64| t.powi(3) * bracket(t).powf(-b));
            assert!((radial_moment(b, r) - num).abs() < 1e-10 * num, "b={b}");
        }
    }

    #[test]
    fn hypotheses_named() {
        let bad = Convolution::A1 {
            alpha: 2.0,
            beta: 2.0,
            n_decay: 5.0,
        };
        match bad.validate() {
            Err(BoundsError::Hypothesis { lemma, condition }) => {
                assert_eq!(lemma, "A1");
                assert!(condition.contains("N"));
            }
            other => panic!("{other:?}"),
        }
        let bad = Convolution::B1 {
            s: 0.0,
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.0,
            n_decay: 8.0,
        };
        assert!(bad.validate().is_err());
        let ok = Convolution::LargeW {
            k: 1.0,
            alpha: 0.0,
            n_decay: 8.0,
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn shell_average_total() {
        // t = 0: the shell integral is |S^3| <rho>^-n
        let v = shell_average(0.0, 1.3, 6.0, -1.0);
        assert!((v - SPHERE3_AREA * bracket(1.3).powf(-6.0)).abs() < 1e-10);
    }
}
