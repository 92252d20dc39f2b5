//! Literal spatial assembly `(1/(pi i)) sum_{z,w} V psi(z) V psi(w) I(|x-z|, |y-w|)`
//! over radial Gauss times S^3 nodes, with the multiplet sum collapsed to the
//! addition factor of `z.w`. Used to cross-check the spectral factorization.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::osc_integrals::{OscError, OscTable};
use crate::specfun::{composite_gauss, sphere3_rule};
use crate::zero_energy::{addition_factor, SectorState};

/// A tabulated or model `I(A, B)`, split so that per-argument work (index
/// search, interpolation weights) is done once per node.
pub trait PairIntegral: Sync {
    type Left: Sync + Send;
    type Right: Sync + Send;
    fn left(&self, a: f64) -> Result<Self::Left, OscError>;
    fn right(&self, b: f64) -> Result<Self::Right, OscError>;
    fn pair(&self, l: &Self::Left, r: &Self::Right) -> Complex64;
}

/// Interpolation stencil of one table argument.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    base: usize,
    weights: [f64; 4],
}

impl PairIntegral for OscTable {
    type Left = Stencil;
    type Right = Stencil;

    fn left(&self, a: f64) -> Result<Stencil, OscError> {
        self.require(a)?;
        let (base, mut weights) = self.stencil_at(a)?;
        // interpolate A^2 I, then divide by A^2
        for (k, w) in weights.iter_mut().enumerate() {
            let node = self.grid[base + k];
            *w *= node * node / (a * a);
        }
        Ok(Stencil { base, weights })
    }

    fn right(&self, b: f64) -> Result<Stencil, OscError> {
        self.require(b)?;
        let (base, weights) = self.stencil_at(b)?;
        Ok(Stencil { base, weights })
    }

    fn pair(&self, l: &Stencil, r: &Stencil) -> Complex64 {
        let n = self.grid.len();
        let mut s = Complex64::new(0.0, 0.0);
        for p in 0..4 {
            let row = (l.base + p) * n + r.base;
            let mut t = Complex64::new(0.0, 0.0);
            for q in 0..4 {
                t += self.values[row + q] * r.weights[q];
            }
            s += t * l.weights[p];
        }
        s
    }
}

/// Model `I(A, B) = f(A) g(B)`.
pub struct Separable<F, G> {
    pub f: F,
    pub g: G,
}

impl<F, G> PairIntegral for Separable<F, G>
where
    F: Fn(f64) -> Complex64 + Sync,
    G: Fn(f64) -> Complex64 + Sync,
{
    type Left = Complex64;
    type Right = Complex64;
    fn left(&self, a: f64) -> Result<Complex64, OscError> {
        Ok((self.f)(a))
    }
    fn right(&self, b: f64) -> Result<Complex64, OscError> {
        Ok((self.g)(b))
    }
    fn pair(&self, l: &Complex64, r: &Complex64) -> Complex64 {
        l * r
    }
}

/// Radial Gauss (graded toward 0) times a rotated S^3 product rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialRule {
    pub radial_nodes: usize,
    pub r_min: f64,
    pub truncation_radius: f64,
    pub sphere_degree: usize,
}

impl Default for SpatialRule {
    fn default() -> Self {
        Self {
            radial_nodes: 48,
            r_min: 1e-3,
            truncation_radius: 12.0,
            sphere_degree: 8,
        }
    }
}

/// Minimum allowed `|x - z|`.
pub const NODE_CLEARANCE: f64 = 1e-3;

/// Fixed generic rotation that moves sphere nodes off the coordinate planes.
fn jitter(z: [f64; 4]) -> [f64; 4] {
    let mut v = z;
    for (i, j, t) in [
        (0, 1, 0.1234),
        (1, 2, 0.2345),
        (2, 3, 0.3456),
        (0, 3, 0.4567),
    ] {
        let (s, c) = f64::sin_cos(t);
        let (a, b) = (v[i], v[j]);
        v[i] = c * a - s * b;
        v[j] = s * a + c * b;
    }
    v
}

impl SpatialRule {
    /// Points and weights `w V u(|z|)`, with unit directions for the addition factor.
    pub fn nodes(&self, state: &SectorState) -> Result<Vec<([f64; 4], f64)>, KernelError> {
        let panels = (self.radial_nodes / 8).max(1);
        let order = self.radial_nodes.div_ceil(panels);
        let span = self.truncation_radius - self.r_min;
        let edges: Vec<f64> = (0..=panels)
            .map(|k| self.r_min + span * (k as f64 / panels as f64).powi(2))
            .collect();
        let radial = composite_gauss(&edges, order);
        let sphere = sphere3_rule(self.sphere_degree)
            .map_err(|e| KernelError::Osc(OscError::Hypothesis(e.to_string())))?;
        let mut out = Vec::with_capacity(radial.len() * sphere.len());
        for (r, wr) in radial.iter() {
            let c = wr * r.powi(3) * state.v_u(r);
            for (z, wz) in sphere.iter() {
                out.push((jitter(z).map(|x| x * r), c * wz));
            }
        }
        Ok(out)
    }
}

fn dist(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `W_s(x, y)` with `x` on the first axis and `y` at angle `theta`, by direct
/// spatial quadrature against a pair integral.
pub fn assemble_ws_kernel_direct<T: PairIntegral>(
    state: &SectorState,
    table: &T,
    rx: f64,
    ry: f64,
    theta: f64,
    rule: &SpatialRule,
) -> Result<Complex64, KernelError> {
    if state.ell == 0 {
        return Err(KernelError::NotEigenstate(0));
    }
    let x = [rx, 0.0, 0.0, 0.0];
    let y = [ry * theta.cos(), ry * theta.sin(), 0.0, 0.0];
    let nodes = rule.nodes(state)?;
    let units: Vec<[f64; 4]> = nodes
        .iter()
        .map(|(p, _)| {
            let r = p.iter().map(|c| c * c).sum::<f64>().sqrt();
            p.map(|c| c / r)
        })
        .collect();
    let lefts: Vec<T::Left> = nodes
        .iter()
        .map(|(z, _)| table.left(dist(&x, z).max(NODE_CLEARANCE)))
        .collect::<Result<_, _>>()?;
    let rights: Vec<T::Right> = nodes
        .iter()
        .map(|(w, _)| table.right(dist(&y, w).max(NODE_CLEARANCE)))
        .collect::<Result<_, _>>()?;
    let ell = state.ell;
    let partial: Vec<Complex64> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..nodes.len() {
                let c: f64 = units[i].iter().zip(&units[j]).map(|(a, b)| a * b).sum();
                let g = addition_factor(ell, c.clamp(-1.0, 1.0));
                acc += table.pair(&lefts[i], &rights[j]) * (nodes[j].1 * g);
            }
            acc * nodes[i].1
        })
        .collect();
    let total: Complex64 = partial.iter().sum();
    Ok(total / Complex64::new(0.0, std::f64::consts::PI))
}
