//! Leading low-energy kernels `W_s` and `W_log` on `(|x|, |y|, angle)` grids.
//!
//! With the eigenspace spanned by a full angular multiplet, the free resolvents
//! expand in the same harmonics, and the kernel factorizes exactly as
//! `K(x, y) = G_l(x.y / |x||y|) kappa(|x|, |y|)` with
//!
//! ```text
//! kappa(rx, ry) = int w(lambda) left(lambda, rx) J_{l+1}(lambda ry) M(lambda) / ry dlambda
//! left(lambda, r) = (i pi / 2r) int Vu(s) s^2 J_{l+1}(lambda min(r,s)) H_{l+1}(lambda max(r,s)) ds
//! M(lambda)       = int Vu(s) s^2 J_{l+1}(lambda s) ds
//! ```
//!
//! where `w = cutoff / lambda` for `W_s` and `cutoff * lambda log lambda` for
//! `W_log`. The `1/(pi i)` prefactor cancels against the `i pi` of the
//! difference-kernel expansion. [`direct`] keeps the literal eight-dimensional
//! assembly over tabulated `I(A, B)` as a cross-check.

pub mod direct;
mod taylor;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::osc_integrals::{panel_edges, OscError, PanelOptions};
use crate::specfun::{composite_gauss, gauss_legendre_cached, jn, jyn, smooth_cutoff, CutoffSpec};
use crate::zero_energy::{addition_factor, harmonic_basis, SectorState};

pub use direct::{assemble_ws_kernel_direct, PairIntegral, Separable, SpatialRule};
pub use taylor::{
    gamma_factors, second_order_check, taylor_identity_check, GammaCheck, TaylorTrial,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum KernelError {
    #[error("sector {0} has no square-integrable eigenstate")]
    NotEigenstate(usize),
    #[error("radius {r} outside the assembled range (0, {max}]")]
    Range { r: f64, max: f64 },
    #[error("|V psi| tail beyond R_V = {radius} is {tail:.3e} of the total (tolerance {tol:.1e})")]
    Truncation { radius: f64, tail: f64, tol: f64 },
    #[error("|w| = {w} must be below |y|/2 = {}", .y / 2.0)]
    Inadmissible { w: f64, y: f64 },
    #[error("coefficient matrix must be {n}x{n}")]
    Coefficients { n: usize },
    #[error(transparent)]
    Osc(#[from] OscError),
    #[error("{} samples failed, first at (rx={}, ry={}, theta={}): {}", .0.len(), .0[0].0, .0[0].1, .0[0].2, .0[0].3)]
    Samples(Vec<(f64, f64, f64, String)>),
}

/// Which spectral weight multiplies the resolvent product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `cutoff(lambda) / lambda`
    Ws,
    /// `cutoff(lambda) lambda log lambda`
    Wlog,
}

impl KernelKind {
    fn weight(self, lambda: f64, cutoff: &CutoffSpec) -> f64 {
        let c = smooth_cutoff(lambda, cutoff);
        match self {
            Self::Ws => c / lambda,
            Self::Wlog => c * lambda * lambda.ln(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ws => "ws",
            Self::Wlog => "wlog",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub cutoff: CutoffSpec,
    /// Radius `R_V` beyond which `V psi` is dropped.
    pub truncation_radius: f64,
    pub truncation_tol: f64,
    /// Panel width and Gauss order of the `s` quadrature.
    pub s_panel: f64,
    pub s_order: usize,
    /// Gauss order per `lambda` panel; panels follow [`PanelOptions`].
    pub lambda_order: usize,
    pub panels: PanelOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            cutoff: CutoffSpec::default(),
            truncation_radius: 12.0,
            truncation_tol: 1e-10,
            s_panel: 0.25,
            s_order: 10,
            lambda_order: 16,
            panels: PanelOptions::default(),
        }
    }
}

impl SpectralOptions {
    /// Twice the radial and spectral quadrature density.
    pub fn refined(mut self) -> Self {
        self.s_panel *= 0.5;
        self.panels = self.panels.doubled();
        self
    }
}

/// Fraction of `int |V u| s^3 ds` lying beyond `radius`.
pub fn truncation_tail(state: &SectorState, radius: f64) -> f64 {
    let r_end = state.config.r_max.max(radius + 1.0);
    let n = ((r_end / 0.1).ceil() as usize).max(10);
    let edges: Vec<f64> = (0..=n).map(|i| r_end * i as f64 / n as f64).collect();
    let rule = composite_gauss(&edges, 8);
    let (mut inner, mut outer) = (0.0, 0.0);
    for (s, w) in rule.iter() {
        let v = w * state.v_u(s).abs() * s.powi(3);
        if s <= radius {
            inner += v;
        } else {
            outer += v;
        }
    }
    outer / (inner + outer)
}

/// Precomputed spectral nodes and the `s`-moments `M(lambda)`.
#[derive(Debug, Clone)]
pub struct SpectralAssembler<'a> {
    state: &'a SectorState,
    kind: KernelKind,
    opts: SpectralOptions,
    r_max: f64,
    nu: usize,
    lambdas: Vec<f64>,
    lweights: Vec<f64>,
    moments: Vec<f64>,
}

impl<'a> SpectralAssembler<'a> {
    /// Prepare for radii up to `r_max`.
    pub fn new(
        state: &'a SectorState,
        kind: KernelKind,
        opts: SpectralOptions,
        r_max: f64,
    ) -> Result<Self, KernelError> {
        if state.ell == 0 {
            return Err(KernelError::NotEigenstate(0));
        }
        let tail = truncation_tail(state, opts.truncation_radius);
        if tail > opts.truncation_tol {
            return Err(KernelError::Truncation {
                radius: opts.truncation_radius,
                tail,
                tol: opts.truncation_tol,
            });
        }
        let nu = state.ell + 1;
        let cutoff = opts.cutoff;
        let edges = panel_edges(
            cutoff.support_end(),
            2.0 * r_max + opts.truncation_radius + 1.0,
            &[cutoff.plateau_end()],
            &opts.panels,
        );
        let base = gauss_legendre_cached(opts.lambda_order);
        let mut lambdas = Vec::new();
        let mut lweights = Vec::new();
        for e in edges.windows(2) {
            for (x, w) in base.mapped(e[0], e[1]).iter() {
                let wt = w * kind.weight(x, &cutoff);
                if wt != 0.0 {
                    lambdas.push(x);
                    lweights.push(wt);
                }
            }
        }
        let mut me = Self {
            state,
            kind,
            opts,
            r_max,
            nu,
            lambdas,
            lweights,
            moments: Vec::new(),
        };
        let (s, c) = me.s_rule(None);
        me.moments = me
            .lambdas
            .iter()
            .map(|&l| s.iter().zip(&c).map(|(&s, &c)| c * jn(nu, l * s)).sum())
            .collect();
        Ok(me)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn lambda_nodes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// `s` nodes on `[0, R_V]` (with an extra edge at `split`) and the
    /// coefficients `w Vu(s) s^2`.
    fn s_rule(&self, split: Option<f64>) -> (Vec<f64>, Vec<f64>) {
        let rv = self.opts.truncation_radius;
        let n = (rv / self.opts.s_panel).ceil() as usize;
        let mut edges: Vec<f64> = (0..=n).map(|i| rv * i as f64 / n as f64).collect();
        if let Some(r) = split.filter(|&r| r > 0.0 && r < rv) {
            if !edges.contains(&r) {
                edges.push(r);
                edges.sort_by(f64::total_cmp);
            }
        }
        let rule = composite_gauss(&edges, self.opts.s_order);
        let nodes: Vec<f64> = rule.nodes.clone();
        let coef = rule
            .iter()
            .map(|(s, w)| w * self.state.v_u(s) * s * s)
            .collect();
        (nodes, coef)
    }

    fn check_radius(&self, r: f64) -> Result<(), KernelError> {
        if r > 0.0 && r <= self.r_max * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(KernelError::Range { r, max: self.r_max })
        }
    }

    /// `left(lambda_k, r)` at every spectral node.
    pub fn left_factor(&self, r: f64) -> Result<Vec<Complex64>, KernelError> {
        self.check_radius(r)?;
        let nu = self.nu;
        let pre = Complex64::new(0.0, PI / (2.0 * r));
        if r >= self.opts.truncation_radius {
            return Ok(self
                .lambdas
                .iter()
                .zip(&self.moments)
                .map(|(&l, &m)| {
                    let (j, y) = jyn(nu, l * r);
                    pre * Complex64::new(j, y) * m
                })
                .collect());
        }
        let (s, c) = self.s_rule(Some(r));
        Ok(self
            .lambdas
            .iter()
            .map(|&l| {
                let (jr, yr) = jyn(nu, l * r);
                let mut inner = 0.0;
                let mut outer = Complex64::new(0.0, 0.0);
                for (&s, &c) in s.iter().zip(&c) {
                    if s < r {
                        inner += c * jn(nu, l * s);
                    } else {
                        let (js, ys) = jyn(nu, l * s);
                        outer += Complex64::new(js, ys) * c;
                    }
                }
                pre * (Complex64::new(jr, yr) * inner + outer * jr)
            })
            .collect())
    }

    /// `J_{l+1}(lambda_k r) M(lambda_k) / r`, weighted by the spectral weight.
    pub fn right_factor(&self, r: f64) -> Result<Vec<f64>, KernelError> {
        self.check_radius(r)?;
        Ok(self
            .lambdas
            .iter()
            .zip(&self.moments)
            .zip(&self.lweights)
            .map(|((&l, &m), &w)| w * jn(self.nu, l * r) * m / r)
            .collect())
    }

    fn contract(left: &[Complex64], right: &[f64]) -> Complex64 {
        left.iter()
            .zip(right)
            .fold(Complex64::new(0.0, 0.0), |acc, (l, r)| acc + l * r)
    }

    /// The radial factor `kappa(rx, ry)`.
    pub fn radial(&self, rx: f64, ry: f64) -> Result<Complex64, KernelError> {
        Ok(Self::contract(
            &self.left_factor(rx)?,
            &self.right_factor(ry)?,
        ))
    }

    /// `kappa` on a tensor grid, row-major in `rx`. Parallel over radii, ordered.
    pub fn radial_matrix(&self, rxs: &[f64], rys: &[f64]) -> Result<Vec<Complex64>, KernelError> {
        let lefts: Vec<Vec<Complex64>> = rxs
            .par_iter()
            .map(|&r| self.left_factor(r))
            .collect::<Result<_, _>>()?;
        let rights: Vec<Vec<f64>> = rys
            .par_iter()
            .map(|&r| self.right_factor(r))
            .collect::<Result<_, _>>()?;
        Ok(lefts
            .par_iter()
            .flat_map_iter(|l| rights.iter().map(move |r| Self::contract(l, r)))
            .collect())
    }

    /// `K(x, y)` for the canonical multiplet combination, by angle.
    pub fn kernel(&self, rx: f64, ry: f64, theta: f64) -> Result<Complex64, KernelError> {
        Ok(self.radial(rx, ry)? * addition_factor(self.state.ell, theta.cos()))
    }

    /// `K(x, y)` at general positions with coefficients `a_jk` on the harmonic
    /// basis of the multiplet (`None` means the identity).
    pub fn kernel_at(
        &self,
        x: &[f64; 4],
        y: &[f64; 4],
        coefficients: Option<&[Vec<f64>]>,
    ) -> Result<Complex64, KernelError> {
        let rx = norm4(x);
        let ry = norm4(y);
        let f = multiplet_factor(self.state.ell, &unit(x, rx), &unit(y, ry), coefficients)?;
        Ok(self.radial(rx, ry)? * f)
    }
}

fn norm4(x: &[f64; 4]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn unit(x: &[f64; 4], r: f64) -> [f64; 4] {
    x.map(|c| c / r)
}

/// `sum_jk a_jk Y_j(xh) Y_k(yh)` over the orthonormal harmonic basis.
pub fn multiplet_factor(
    ell: usize,
    xh: &[f64; 4],
    yh: &[f64; 4],
    coefficients: Option<&[Vec<f64>]>,
) -> Result<f64, KernelError> {
    let basis = harmonic_basis(ell);
    let n = basis.len();
    let yx: Vec<f64> = basis.iter().map(|h| h.eval(xh)).collect();
    let yy: Vec<f64> = basis.iter().map(|h| h.eval(yh)).collect();
    match coefficients {
        None => Ok(yx.iter().zip(&yy).map(|(a, b)| a * b).sum()),
        Some(a) => {
            if a.len() != n || a.iter().any(|row| row.len() != n) {
                return Err(KernelError::Coefficients { n });
            }
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += a[j][k] * yx[j] * yy[k];
                }
            }
            Ok(s)
        }
    }
}

/// `W_s` at one sample.
pub fn assemble_ws_kernel(
    assembler: &SpectralAssembler<'_>,
    rx: f64,
    ry: f64,
    theta: f64,
) -> Result<Complex64, KernelError> {
    assembler.kernel(rx, ry, theta)
}

/// `W_log` with coefficients `a_jk`; `x` on the first axis, `y` at angle `theta`
/// from it in the first coordinate plane.
pub fn assemble_wlog_kernel(
    assembler: &SpectralAssembler<'_>,
    coefficients: &[Vec<f64>],
    rx: f64,
    ry: f64,
    theta: f64,
) -> Result<Complex64, KernelError> {
    let x = [rx, 0.0, 0.0, 0.0];
    let y = [ry * theta.cos(), ry * theta.sin(), 0.0, 0.0];
    assembler.kernel_at(&x, &y, Some(coefficients))
}

/// Identity coefficients on the sector multiplet.
pub fn identity_coefficients(ell: usize) -> Vec<Vec<f64>> {
    let n = harmonic_basis(ell).len();
    (0..n)
        .map(|j| (0..n).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "X-LARGE")]
    XLarge,
    #[serde(rename = "RING")]
    Ring,
    #[serde(rename = "Y-LARGE")]
    YLarge,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Self::XLarge, Self::Ring, Self::YLarge];

    pub fn classify(rx: f64, ry: f64) -> Self {
        if rx > 2.0 * ry {
            Self::XLarge
        } else if ry > 2.0 * rx {
            Self::YLarge
        } else {
            Self::Ring
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::XLarge => "X-LARGE",
            Self::Ring => "RING",
            Self::YLarge => "Y-LARGE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.tag().eq_ignore_ascii_case(s))
    }
}

/// Tensor sample layout: shared log radii for `|x|` and `|y|`, uniform angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub angles: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_min: 0.5,
            r_max: 2560.0,
            radii: 60,
            angles: 7,
        }
    }
}

impl GridSpec {
    pub fn radius_nodes(&self) -> Vec<f64> {
        if self.radii == 1 {
            return vec![self.r_min];
        }
        (0..self.radii)
            .map(|i| {
                self.r_min * (self.r_max / self.r_min).powf(i as f64 / (self.radii - 1) as f64)
            })
            .collect()
    }

    /// `theta` in `{0, pi/(n-1), ..., pi}`.
    pub fn angle_nodes(&self) -> Vec<f64> {
        if self.angles == 1 {
            return vec![0.0];
        }
        (0..self.angles)
            .map(|i| PI * i as f64 / (self.angles - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub rx: f64,
    pub ry: f64,
    pub theta: f64,
    pub k: Complex64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub kind: KernelKind,
    pub ell: usize,
    pub coupling: f64,
    pub lambda0: f64,
    pub truncation_radius: f64,
    pub lambda_nodes: usize,
    pub spec: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelGrid {
    pub scenario: String,
    pub meta: GridMeta,
    pub samples: Vec<KernelSample>,
}

/// Assemble on a grid. Sample order: `rx` outer, then `ry`, then `theta`.
pub fn assemble_grid(
    scenario: &str,
    assembler: &SpectralAssembler<'_>,
    spec: &GridSpec,
    coefficients: Option<&[Vec<f64>]>,
) -> Result<KernelGrid, KernelError> {
    let radii = spec.radius_nodes();
    let angles = spec.angle_nodes();
    if let Some(&bad) = radii.iter().find(|&&r| !(r > 0.0)) {
        return Err(KernelError::Range {
            r: bad,
            max: spec.r_max,
        });
    }
    let kappa = assembler.radial_matrix(&radii, &radii)?;
    let ell = assembler.state.ell;
    let factors: Vec<f64> = angles
        .iter()
        .map(|&t| {
            let x = [1.0, 0.0, 0.0, 0.0];
            let y = [t.cos(), t.sin(), 0.0, 0.0];
            match coefficients {
                None => Ok(addition_factor(ell, t.cos())),
                Some(a) => multiplet_factor(ell, &x, &y, Some(a)),
            }
        })
        .collect::<Result<_, _>>()?;
    let n = radii.len();
    let mut samples = Vec::with_capacity(n * n * angles.len());
    for (i, &rx) in radii.iter().enumerate() {
        for (j, &ry) in radii.iter().enumerate() {
            for (&theta, &g) in angles.iter().zip(&factors) {
                samples.push(KernelSample {
                    rx,
                    ry,
                    theta,
                    k: kappa[i * n + j] * g,
                    regime: Regime::classify(rx, ry),
                });
            }
        }
    }
    Ok(KernelGrid {
        scenario: scenario.to_string(),
        meta: GridMeta {
            kind: assembler.kind,
            ell,
            coupling: assembler.state.coupling,
            lambda0: assembler.opts.cutoff.lambda0,
            truncation_radius: assembler.opts.truncation_radius,
            lambda_nodes: assembler.lambda_nodes(),
            spec: spec.clone(),
        },
        samples,
    })
}

/// `W_s` grid for a sector state with default options.
pub fn assemble_ws_grid(
    scenario: &str,
    state: &SectorState,
    opts: SpectralOptions,
    spec: &GridSpec,
) -> Result<KernelGrid, KernelError> {
    let asm = SpectralAssembler::new(state, KernelKind::Ws, opts, spec.r_max)?;
    assemble_grid(scenario, &asm, spec, None)
}

impl KernelGrid {
    /// A grid of a model kernel `f(rx, ry, theta)`, for exercising the fits
    /// without assembly. Metadata carries `ell = 0` and no cutoff.
    pub fn tabulate<F>(scenario: &str, spec: &GridSpec, f: F) -> Self
    where
        F: Fn(f64, f64, f64) -> Complex64,
    {
        let radii = spec.radius_nodes();
        let angles = spec.angle_nodes();
        let mut samples = Vec::with_capacity(radii.len() * radii.len() * angles.len());
        for &rx in &radii {
            for &ry in &radii {
                for &theta in &angles {
                    samples.push(KernelSample {
                        rx,
                        ry,
                        theta,
                        k: f(rx, ry, theta),
                        regime: Regime::classify(rx, ry),
                    });
                }
            }
        }
        Self {
            scenario: scenario.to_string(),
            meta: GridMeta {
                kind: KernelKind::Ws,
                ell: 0,
                coupling: 0.0,
                lambda0: 0.0,
                truncation_radius: 0.0,
                lambda_nodes: 0,
                spec: spec.clone(),
            },
            samples,
        }
    }

    pub fn in_regime(&self, regime: Regime) -> impl Iterator<Item = &KernelSample> {
        self.samples.iter().filter(move |s| s.regime == regime)
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "rx,ry,theta,re_K,im_K,regime")?;
        for s in &self.samples {
            writeln!(
                f,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                s.rx,
                s.ry,
                s.theta,
                s.k.re,
                s.k.im,
                s.regime.tag()
            )?;
        }
        f.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes_partition() {
        assert_eq!(Regime::classify(5.0, 2.0), Regime::XLarge);
        assert_eq!(Regime::classify(2.0, 4.0), Regime::Ring);
        assert_eq!(Regime::classify(2.0, 4.1), Regime::YLarge);
        assert_eq!(Regime::classify(4.0, 2.0), Regime::Ring);
        assert_eq!(Regime::parse("y-large"), Some(Regime::YLarge));
    }

    #[test]
    fn grid_nodes() {
        let g = GridSpec::default();
        let r = g.radius_nodes();
        assert_eq!(r.len(), 60);
        assert!((r[59] - 2560.0).abs() < 1e-9 && r[0] == 0.5);
        let a = g.angle_nodes();
        assert_eq!(a[0], 0.0);
        assert!((a[6] - PI).abs() < 1e-15);
    }

    #[test]
    fn identity_coefficients_reduce_to_addition_factor() {
        let x = [0.3, -0.2, 0.9, 0.1];
        let y = [-0.5, 0.4, 0.2, 0.7];
        for ell in 1..=2 {
            let xh = unit(&x, norm4(&x));
            let yh = unit(&y, norm4(&y));
            let c: f64 = xh.iter().zip(&yh).map(|(a, b)| a * b).sum();
            let a = identity_coefficients(ell);
            let f = multiplet_factor(ell, &xh, &yh, Some(&a)).unwrap();
            assert!((f - addition_factor(ell, c)).abs() < 1e-12);
        }
        assert!(multiplet_factor(
            1,
            &[1.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            Some(&[vec![1.0]])
        )
        .is_err());
    }
}
