//! First- and second-order radial Taylor identities for the difference kernel
//! along the segment `y - s w`, and the geometric factors of the second-order form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::resolvent::r0_diff_derivative_raw;
use crate::specfun::gauss_legendre_cached;

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn along(y: &[f64; 4], w: &[f64; 4], s: f64) -> [f64; 4] {
    [
        y[0] - s * w[0],
        y[1] - s * w[1],
        y[2] - s * w[2],
        y[3] - s * w[3],
    ]
}

fn admissible(y: &[f64; 4], w: &[f64; 4]) -> Result<(f64, f64), KernelError> {
    let ny = dot(y, y).sqrt();
    let nw = dot(w, w).sqrt();
    if nw < 0.5 * ny {
        Ok((ny, nw))
    } else {
        Err(KernelError::Inadmissible { w: nw, y: ny })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorTrial {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

impl TaylorTrial {
    /// Residual relative to `1 + |lhs|`.
    pub fn scaled_residual(&self) -> f64 {
        self.residual / (1.0 + self.lhs.norm())
    }
}

const S_NODES: usize = 64;

/// `F(|y - w|) - F(|y|)` against `int_0^1 F'(|y - s w|) (-w).(y - s w)/|y - s w| ds`
/// for `F = R0^+ - R0^-` at `lambda`.
pub fn taylor_identity_check(
    lambda: f64,
    y: &[f64; 4],
    w: &[f64; 4],
) -> Result<TaylorTrial, KernelError> {
    let (ny, _) = admissible(y, w)?;
    let f = |r: f64, j: usize| r0_diff_derivative_raw(lambda, r, j);
    let lhs = f(dot(&along(y, w, 1.0), &along(y, w, 1.0)).sqrt(), 0) - f(ny, 0);
    let rule = gauss_legendre_cached(S_NODES).mapped(0.0, 1.0);
    let mut rhs = Complex64::new(0.0, 0.0);
    for (s, ws) in rule.iter() {
        let p = along(y, w, s);
        let r = dot(&p, &p).sqrt();
        rhs += f(r, 1) * (ws * -dot(w, &p) / r);
    }
    Ok(TaylorTrial {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

/// `(Gamma_1, Gamma_2)` at `(s, w, y)`.
pub fn gamma_factors(s: f64, w: &[f64; 4], y: &[f64; 4]) -> (f64, f64) {
    let p = along(y, w, s);
    let r2 = dot(&p, &p);
    let r = r2.sqrt();
    let wp = dot(w, &p);
    let ww = dot(w, w);
    (ww / r - wp * wp / (r2 * r), wp * wp / r2)
}

/// Second-order identity with remainder weighted by `(1 - s)` and the two
/// geometric factors.
pub fn second_order_check(
    lambda: f64,
    y: &[f64; 4],
    w: &[f64; 4],
) -> Result<TaylorTrial, KernelError> {
    let (ny, _) = admissible(y, w)?;
    let f = |r: f64, j: usize| r0_diff_derivative_raw(lambda, r, j);
    let ryw = dot(&along(y, w, 1.0), &along(y, w, 1.0)).sqrt();
    let lhs = f(ryw, 0) - f(ny, 0) + f(ny, 1) * (dot(w, y) / ny);
    let rule = gauss_legendre_cached(S_NODES).mapped(0.0, 1.0);
    let mut rhs = Complex64::new(0.0, 0.0);
    for (s, ws) in rule.iter() {
        let p = along(y, w, s);
        let r = dot(&p, &p).sqrt();
        let (g1, g2) = gamma_factors(s, w, y);
        rhs += (f(r, 2) * g2 + f(r, 1) * g1) * (ws * (1.0 - s));
    }
    Ok(TaylorTrial {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

/// Pointwise check of `|Gamma_1| <= |w|^2 / |y - s w|` and `|Gamma_2| <= |w|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaCheck {
    pub gamma1: f64,
    pub gamma2: f64,
    pub bound1: f64,
    pub bound2: f64,
}

impl GammaCheck {
    pub fn at(s: f64, w: &[f64; 4], y: &[f64; 4]) -> Self {
        let (g1, g2) = gamma_factors(s, w, y);
        let p = along(y, w, s);
        let ww = dot(w, w);
        Self {
            gamma1: g1,
            gamma2: g2,
            bound1: ww / dot(&p, &p).sqrt(),
            bound2: ww,
        }
    }

    /// Both inequalities, with `rel_tol` slack for rounding.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.gamma1.abs() <= self.bound1 * (1.0 + rel_tol)
            && self.gamma2.abs() <= self.bound2 * (1.0 + rel_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_displacement() {
        let y = [3.0, 1.0, 0.0, -2.0];
        let t = taylor_identity_check(0.3, &y, &[0.0; 4]).unwrap();
        assert_eq!(t.lhs, Complex64::new(0.0, 0.0));
        assert_eq!(t.residual, 0.0);
        let t2 = second_order_check(0.3, &y, &[0.0; 4]).unwrap();
        assert_eq!(t2.residual, 0.0);
    }

    #[test]
    fn inadmissible_rejected() {
        let y = [1.0, 0.0, 0.0, 0.0];
        assert!(taylor_identity_check(0.3, &y, &[0.6, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn gamma_factors_collinear() {
        // w parallel to y: Gamma_1 vanishes, Gamma_2 = |w|^2
        let g = GammaCheck::at(0.3, &[1.0, 0.0, 0.0, 0.0], &[5.0, 0.0, 0.0, 0.0]);
        assert!(g.gamma1.abs() < 1e-15);
        assert!((g.gamma2 - 1.0).abs() < 1e-15);
        assert!(g.holds(1e-12));
    }
}
