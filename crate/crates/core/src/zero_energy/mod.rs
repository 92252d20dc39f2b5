//! Zero-energy eigenstates in a fixed angular sector.
//!
//! The radial profile solves `u'' + (3/r) u' - l(l+2)/r^2 u = V(r) u`. Shooting
//! runs outward from `r0` with `u ~ r^l` and inward from `r_max` with the
//! decaying harmonic `r^-(2+l)`, matching at `r_match`.

mod harmonics;
mod ode;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use harmonics::{
    addition_factor, chebyshev_u, harmonic_basis, multiplet_size, representative, Harmonic,
};
pub use ode::{Integrator, OdeFailure, State};

use crate::potential::RadialPotential;
use crate::specfun::{composite_gauss, sphere3_rule};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ZeroEnergyError {
    #[error("sector {0} unsupported (0..=3)")]
    UnsupportedSector(usize),
    #[error("integration failed near r = {r}: {reason}")]
    Integration { r: f64, reason: String },
    #[error("no sign change of the matching function on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("sector 0 threshold state is resonance-class (not square integrable)")]
    NotSquareIntegrable,
    #[error("radial grid must reach r = {needed}, it stops at {have}")]
    InsufficientGrid { needed: f64, have: f64 },
}

impl From<OdeFailure> for ZeroEnergyError {
    fn from(f: OdeFailure) -> Self {
        match f {
            OdeFailure::NonFinite { r } => Self::Integration {
                r,
                reason: "solution blew up".into(),
            },
            OdeFailure::StepUnderflow { r } => Self::Integration {
                r,
                reason: "step size underflow".into(),
            },
            OdeFailure::TooManySteps { r } => Self::Integration {
                r,
                reason: "step budget exhausted".into(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig {
    pub r0: f64,
    pub r_match: f64,
    pub r_max: f64,
    pub rtol: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            r0: 1e-4,
            r_match: 8.0,
            r_max: 60.0,
            rtol: 1e-12,
        }
    }
}

/// Matching data at `r_match`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    /// Difference of logarithmic derivatives, outward minus inward.
    pub mismatch: f64,
    /// Wronskian normalized by the solution sizes; continuous in the coupling.
    pub wronskian: f64,
    pub outward: State,
    pub inward: State,
}

fn check_sector(ell: usize) -> Result<(), ZeroEnergyError> {
    if ell > 3 {
        Err(ZeroEnergyError::UnsupportedSector(ell))
    } else {
        Ok(())
    }
}

fn rhs(v: RadialPotential, ell: usize) -> impl Fn(f64, &State) -> State {
    let centrifugal = (ell * (ell + 2)) as f64;
    move |r: f64, y: &State| {
        [
            y[1],
            -3.0 * y[1] / r + centrifugal * y[0] / (r * r) + v.evaluate(r) * y[0],
        ]
    }
}

fn outward_start(v: &RadialPotential, ell: usize, r0: f64) -> State {
    let a = v.evaluate(0.0) / (4.0 * (ell as f64 + 2.0));
    let l = ell as i32;
    let u = r0.powi(l) * (1.0 + a * r0 * r0);
    let du = if ell == 0 {
        2.0 * a * r0
    } else {
        ell as f64 * r0.powi(l - 1) * (1.0 + a * r0 * r0) + 2.0 * a * r0.powi(l + 1)
    };
    [u, du]
}

fn inward_start(ell: usize, r_max: f64) -> State {
    let p = 2.0 + ell as f64;
    [r_max.powf(-p), -p * r_max.powf(-p - 1.0)]
}

/// Shoot both ways at coupling `c` and compare at the matching radius.
pub fn shoot(
    v: &RadialPotential,
    ell: usize,
    c: f64,
    cfg: &ShootingConfig,
) -> Result<Shot, ZeroEnergyError> {
    check_sector(ell)?;
    let v = v.with_coupling(c);
    let mut it = Integrator::new(rhs(v, ell), cfg.rtol, 1e-3 * cfg.r0.max(1e-6) * 10.0);
    let out = it.advance(cfg.r0, outward_start(&v, ell, cfg.r0), cfg.r_match)?;
    let mut it = Integrator::new(rhs(v, ell), cfg.rtol, 0.1);
    let inw = it.advance(cfg.r_max, inward_start(ell, cfg.r_max), cfg.r_match)?;
    let rm = cfg.r_match;
    let mismatch = out[1] / out[0] - inw[1] / inw[0];
    let size = |s: &State| (s[0] * s[0] + rm * rm * s[1] * s[1]).sqrt();
    let wronskian = rm * (out[1] * inw[0] - out[0] * inw[1]) / (size(&out) * size(&inw));
    if !mismatch.is_finite() && !wronskian.is_finite() {
        return Err(ZeroEnergyError::Integration {
            r: rm,
            reason: "non-finite matching data".into(),
        });
    }
    Ok(Shot {
        mismatch,
        wronskian,
        outward: out,
        inward: inw,
    })
}

/// Log-derivative mismatch at the default matching radius.
pub fn radial_zero_solve(v: &RadialPotential, ell: usize, c: f64) -> Result<f64, ZeroEnergyError> {
    Ok(shoot(v, ell, c, &ShootingConfig::default())?.mismatch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdClass {
    Eigenvalue,
    ResonanceClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunedCoupling {
    pub coupling: f64,
    pub mismatch: f64,
    pub class: ThresholdClass,
}

/// First sign change of the matching Wronskian when scanning the coupling from
/// `start` in increments of `step` (negative steps deepen an attractive well).
pub fn find_bracket(
    v: &RadialPotential,
    ell: usize,
    start: f64,
    step: f64,
    limit: f64,
) -> Result<(f64, f64), ZeroEnergyError> {
    let cfg = ShootingConfig::default();
    let mut c = start;
    let mut prev = shoot(v, ell, c, &cfg)?.wronskian;
    while (limit - c) * step.signum() > 0.0 {
        let next = c + step;
        let w = shoot(v, ell, next, &cfg)?.wronskian;
        if w.signum() != prev.signum() {
            return Ok(if c < next { (c, next) } else { (next, c) });
        }
        prev = w;
        c = next;
    }
    Err(ZeroEnergyError::Bracket {
        lo: start.min(limit),
        hi: start.max(limit),
    })
}

/// Bisection on the matching Wronskian inside `bracket`.
pub fn tune_coupling(
    v: &RadialPotential,
    ell: usize,
    bracket: (f64, f64),
) -> Result<TunedCoupling, ZeroEnergyError> {
    tune_coupling_with(v, ell, bracket, &ShootingConfig::default())
}

pub fn tune_coupling_with(
    v: &RadialPotential,
    ell: usize,
    bracket: (f64, f64),
    cfg: &ShootingConfig,
) -> Result<TunedCoupling, ZeroEnergyError> {
    check_sector(ell)?;
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let mut w_lo = shoot(v, ell, lo, cfg)?.wronskian;
    let w_hi = shoot(v, ell, hi, cfg)?.wronskian;
    if w_lo.signum() == w_hi.signum() || w_lo == 0.0 && w_hi == 0.0 {
        return Err(ZeroEnergyError::Bracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let w = shoot(v, ell, mid, cfg)?.wronskian;
        if w == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if w.signum() == w_lo.signum() {
            lo = mid;
            w_lo = w;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint with the smaller mismatch
    let s_lo = shoot(v, ell, lo, cfg)?;
    let s_hi = shoot(v, ell, hi, cfg)?;
    let (coupling, mismatch) = if s_lo.mismatch.abs() <= s_hi.mismatch.abs() {
        (lo, s_lo.mismatch)
    } else {
        (hi, s_hi.mismatch)
    };
    Ok(TunedCoupling {
        coupling,
        mismatch,
        class: if ell == 0 {
            ThresholdClass::ResonanceClass
        } else {
            ThresholdClass::Eigenvalue
        },
    })
}

/// A normalized zero-energy eigenfunction `psi(x) = u(|x|) Y(x/|x|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorState {
    pub ell: usize,
    pub potential: RadialPotential,
    pub coupling: f64,
    pub mismatch: f64,
    pub r_grid: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// L2 norm recomputed after normalization.
    pub l2_norm: f64,
    /// `int V psi dx` for the representative harmonic.
    pub m0: f64,
    /// `int x V psi dx` for the representative harmonic.
    pub m1: [f64; 4],
    pub config: ShootingConfig,
}

fn radial_grid(cfg: &ShootingConfig) -> Vec<f64> {
    let mut g = Vec::new();
    let knee = 0.05f64.max(cfg.r0 * 2.0);
    let n_geo = 60;
    for i in 0..n_geo {
        g.push(cfg.r0 * (knee / cfg.r0).powf(i as f64 / n_geo as f64));
    }
    let h1 = 0.005;
    let n1 = ((cfg.r_match - knee) / h1).round() as usize;
    for i in 0..n1 {
        g.push(knee + (cfg.r_match - knee) * i as f64 / n1 as f64);
    }
    let h2 = 0.02;
    let n2 = ((cfg.r_max - cfg.r_match) / h2).round() as usize;
    for i in 0..=n2 {
        g.push(cfg.r_match + (cfg.r_max - cfg.r_match) * i as f64 / n2 as f64);
    }
    g
}

/// Integrate at the tuned coupling, stitch, and normalize.
pub fn build_eigenstate(
    v: &RadialPotential,
    ell: usize,
    coupling: f64,
) -> Result<SectorState, ZeroEnergyError> {
    build_eigenstate_with(v, ell, coupling, &ShootingConfig::default())
}

pub fn build_eigenstate_with(
    v: &RadialPotential,
    ell: usize,
    coupling: f64,
    cfg: &ShootingConfig,
) -> Result<SectorState, ZeroEnergyError> {
    check_sector(ell)?;
    if ell == 0 {
        return Err(ZeroEnergyError::NotSquareIntegrable);
    }
    let pot = v.with_coupling(coupling);
    let grid = radial_grid(cfg);
    let split = grid.partition_point(|&r| r < cfg.r_match);
    let mut u = vec![0.0; grid.len()];
    let mut du = vec![0.0; grid.len()];

    let mut it = Integrator::new(rhs(pot, ell), cfg.rtol, 1e-5);
    let mut y = outward_start(&pot, ell, cfg.r0);
    u[0] = y[0];
    du[0] = y[1];
    for i in 1..split {
        y = it.advance(grid[i - 1], y, grid[i])?;
        u[i] = y[0];
        du[i] = y[1];
    }
    let out_match = it.advance(grid[split - 1], y, cfg.r_match)?;

    let mut it = Integrator::new(rhs(pot, ell), cfg.rtol, 0.05);
    let last = grid.len() - 1;
    let mut y = inward_start(ell, cfg.r_max);
    u[last] = y[0];
    du[last] = y[1];
    for i in (split..last).rev() {
        y = it.advance(grid[i + 1], y, grid[i])?;
        u[i] = y[0];
        du[i] = y[1];
    }
    let in_match = if (grid[split] - cfg.r_match).abs() < 1e-14 {
        [u[split], du[split]]
    } else {
        it.advance(grid[split], y, cfg.r_match)?
    };
    let scale = out_match[0] / in_match[0];
    for i in split..grid.len() {
        u[i] *= scale;
        du[i] *= scale;
    }
    let mismatch = out_match[1] / out_match[0] - in_match[1] / in_match[0];

    let mut state = SectorState {
        ell,
        potential: pot,
        coupling,
        mismatch,
        r_grid: grid,
        u,
        du,
        l2_norm: 0.0,
        m0: 0.0,
        m1: [0.0; 4],
        config: *cfg,
    };
    let n = state.norm_squared().sqrt();
    if state.u.iter().any(|x| !x.is_finite()) || !n.is_finite() || n == 0.0 {
        return Err(ZeroEnergyError::Integration {
            r: cfg.r_match,
            reason: "degenerate eigenfunction".into(),
        });
    }
    for x in state.u.iter_mut().chain(state.du.iter_mut()) {
        *x /= n;
    }
    state.l2_norm = state.norm_squared_check().sqrt();
    let (m0, m1) = state.moments();
    state.m0 = m0;
    state.m1 = m1;
    Ok(state)
}

impl SectorState {
    fn locate(&self, r: f64) -> usize {
        let i = self.r_grid.partition_point(|&g| g <= r);
        i.clamp(1, self.r_grid.len() - 1) - 1
    }

    /// Radial profile (cubic Hermite on the grid, harmonic tails outside it).
    pub fn u_at(&self, r: f64) -> f64 {
        let g = &self.r_grid;
        let last = g.len() - 1;
        if r >= g[last] {
            return self.u[last] * (g[last] / r).powi(2 + self.ell as i32);
        }
        if r <= g[0] {
            return self.u[0] * (r / g[0]).powi(self.ell as i32);
        }
        let i = self.locate(r);
        let h = g[i + 1] - g[i];
        let t = (r - g[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.u[i] + h10 * h * self.du[i] + h01 * self.u[i + 1] + h11 * h * self.du[i + 1]
    }

    /// `V(r) u(r)`, the radial part of `V psi`.
    pub fn v_u(&self, r: f64) -> f64 {
        self.potential.evaluate(r) * self.u_at(r)
    }

    pub fn psi(&self, x: &[f64; 4]) -> f64 {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let z = x.map(|c| c / r);
        self.u_at(r) * representative(self.ell).eval(&z)
    }

    /// Radius beyond which `V psi` is negligible.
    pub fn support_radius(&self) -> f64 {
        self.potential.effective_radius().min(self.config.r_max)
    }

    fn exterior_tail(&self) -> f64 {
        let g = &self.r_grid;
        let last = g.len() - 1;
        let r = g[last];
        self.u[last].powi(2) * r.powi(4) / (2.0 * self.ell as f64)
    }

    fn norm_squared(&self) -> f64 {
        // 5-point Gauss per grid interval is exact for the squared Hermite cubic times r^3
        let base = crate::specfun::gauss_legendre_cached(5);
        let mut s = 0.0;
        for w in self.r_grid.windows(2) {
            let m = base.mapped(w[0], w[1]);
            s += m
                .iter()
                .map(|(r, wt)| wt * self.u_at(r).powi(2) * r.powi(3))
                .sum::<f64>();
        }
        s + self.exterior_tail()
    }

    /// Independent recomputation on a coarse composite rule.
    fn norm_squared_check(&self) -> f64 {
        let r_max = *self.r_grid.last().unwrap();
        let edges: Vec<f64> = (0..=600)
            .map(|i| r_max * (i as f64 / 600.0).powi(2))
            .collect();
        let rule = composite_gauss(&edges, 12);
        rule.iter()
            .map(|(r, w)| w * self.u_at(r).powi(2) * r.powi(3))
            .sum::<f64>()
            + self.exterior_tail()
    }

    fn radial_moment(&self, power: i32) -> f64 {
        let rmax = self.support_radius();
        let n = (rmax / 0.1).ceil() as usize;
        let edges: Vec<f64> = (0..=n).map(|i| rmax * i as f64 / n as f64).collect();
        composite_gauss(&edges, 10)
            .iter()
            .map(|(r, w)| w * self.v_u(r) * r.powi(power))
            .sum()
    }

    /// `(int V psi, int x V psi)` by radial quadrature times the S^3 rule.
    pub fn moments(&self) -> (f64, [f64; 4]) {
        let y = representative(self.ell);
        let sphere = sphere3_rule(8).expect("degree 8");
        let ang0: f64 = sphere.iter().map(|(z, w)| w * y.eval(&z)).sum();
        let mut ang1 = [0.0; 4];
        for (z, w) in sphere.iter() {
            let yv = y.eval(&z);
            for i in 0..4 {
                ang1[i] += w * z[i] * yv;
            }
        }
        let rad0 = self.radial_moment(3);
        let rad1 = self.radial_moment(4);
        (rad0 * ang0, ang1.map(|a| a * rad1))
    }

    /// `max |u'' - rhs(u, u')|` over the interior uniform grid, relative to `max |u|`,
    /// with `u''` from 4th-order differences of the stored `u'`.
    pub fn ode_residual(&self) -> f64 {
        let f = rhs(self.potential, self.ell);
        let g = &self.r_grid;
        let mut worst: f64 = 0.0;
        for i in 2..g.len() - 2 {
            let h = g[i + 1] - g[i];
            let uniform = (g[i] - g[i - 1] - h).abs() < 1e-9
                && (g[i + 2] - g[i + 1] - h).abs() < 1e-9
                && (g[i - 1] - g[i - 2] - h).abs() < 1e-9;
            if !uniform || g[i] < 0.1 || g[i] > 40.0 {
                continue;
            }
            let d2 = (-self.du[i + 2] + 8.0 * self.du[i + 1] - 8.0 * self.du[i - 1]
                + self.du[i - 2])
                / (12.0 * h);
            let want = f(g[i], &[self.u[i], self.du[i]])[1];
            worst = worst.max((d2 - want).abs());
        }
        let umax = self.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        worst / umax
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "r,u")?;
        for (r, u) in self.r_grid.iter().zip(&self.u) {
            writeln!(f, "{r:.17e},{u:.17e}")?;
        }
        f.flush()
    }

    pub fn sidecar(&self) -> StateSidecar {
        StateSidecar {
            ell: self.ell,
            coupling: self.coupling,
            mismatch: self.mismatch,
            l2_norm: self.l2_norm,
            m0: self.m0,
            m1: self.m1,
        }
    }
}

/// JSON companion of the eigenstate CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSidecar {
    pub ell: usize,
    pub coupling: f64,
    pub mismatch: f64,
    pub l2_norm: f64,
    pub m0: f64,
    pub m1: [f64; 4],
}

/// Least-squares slope of `log |u|` against `log r` over `[20, 40]`.
pub fn decay_fit(state: &SectorState) -> Result<f64, ZeroEnergyError> {
    decay_fit_window(state, 20.0, 40.0)
}

pub fn decay_fit_window(state: &SectorState, lo: f64, hi: f64) -> Result<f64, ZeroEnergyError> {
    let have = *state.r_grid.last().unwrap();
    if have < hi {
        return Err(ZeroEnergyError::InsufficientGrid { needed: hi, have });
    }
    let pts: Vec<(f64, f64)> = state
        .r_grid
        .iter()
        .zip(&state.u)
        .filter(|(r, u)| **r >= lo && **r <= hi && u.abs() > 0.0)
        .map(|(r, u)| (r.ln(), u.abs().ln()))
        .collect();
    Ok(crate::bounds_lab::least_squares_slope(&pts))
}

/// Tune and build in one go, scanning for the first threshold below zero.
pub fn first_threshold_state(
    v: &RadialPotential,
    ell: usize,
) -> Result<SectorState, ZeroEnergyError> {
    let bracket = find_bracket(v, ell, -0.5, -0.5, -200.0)?;
    let tuned = tune_coupling(v, ell, bracket)?;
    build_eigenstate(v, ell, tuned.coupling)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_mismatch_is_harmonic_difference() {
        let v = RadialPotential::gaussian(-1.0);
        for ell in 0..=3 {
            let m = radial_zero_solve(&v, ell, 0.0).unwrap();
            let expect = (2.0 + 2.0 * ell as f64) / 8.0;
            assert!((m - expect).abs() < 1e-8, "ell={ell} {m}");
        }
    }

    #[test]
    fn unsupported_sector() {
        let v = RadialPotential::gaussian(-1.0);
        assert!(matches!(
            radial_zero_solve(&v, 4, -1.0),
            Err(ZeroEnergyError::UnsupportedSector(4))
        ));
    }

    #[test]
    fn bracket_error_without_sign_change() {
        let v = RadialPotential::gaussian(-1.0);
        assert!(matches!(
            tune_coupling(&v, 1, (-2.0, -1.0)),
            Err(ZeroEnergyError::Bracket { .. })
        ));
    }

    #[test]
    fn sector_zero_is_resonance_class() {
        let v = RadialPotential::gaussian(-1.0);
        let b = find_bracket(&v, 0, -0.5, -0.5, -50.0).unwrap();
        let t = tune_coupling(&v, 0, b).unwrap();
        assert_eq!(t.class, ThresholdClass::ResonanceClass);
        assert!(matches!(
            build_eigenstate(&v, 0, t.coupling),
            Err(ZeroEnergyError::NotSquareIntegrable)
        ));
    }
}
