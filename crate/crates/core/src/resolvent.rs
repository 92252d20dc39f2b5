//! Free resolvent kernels of `-Delta` in four dimensions.
//!
//! `R0^+-(lambda^2, r) = -(lambda / (8 pi r)) [Y_1(lambda r) -+ i J_1(lambda r)]`.
//! Radial derivatives come from `d/dx (x^-n C_n) = -x^-n C_{n+1}`, valid for both
//! `J` and `Y`, so nothing here is differentiated numerically.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::specfun::{j1, jn_over_pow, jyn, y1, MAX_ARGUMENT};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ResolventError {
    #[error("resolvent kernel undefined at lambda = {lambda}, r = {r}")]
    Domain { lambda: f64, r: f64 },
    #[error("derivative order {0} unsupported (1 or 2)")]
    Order(usize),
}

fn check(lambda: f64, r: f64) -> Result<(), ResolventError> {
    let ok = lambda.is_finite()
        && r.is_finite()
        && lambda > 0.0
        && r > 0.0
        && lambda * r <= MAX_ARGUMENT;
    if ok {
        Ok(())
    } else {
        Err(ResolventError::Domain { lambda, r })
    }
}

/// Outgoing kernel without argument checks.
#[inline]
pub fn r0_plus_raw(lambda: f64, r: f64) -> Complex64 {
    let x = lambda * r;
    let pre = -lambda / (8.0 * PI * r);
    Complex64::new(pre * y1(x), -pre * j1(x))
}

/// `R0^-`, the complex conjugate of `R0^+` for real arguments.
#[inline]
pub fn r0_minus_raw(lambda: f64, r: f64) -> Complex64 {
    let x = lambda * r;
    let pre = -lambda / (8.0 * PI * r);
    Complex64::new(pre * y1(x), pre * j1(x))
}

/// `(R0^+ - R0^-)(lambda^2, r) = i lambda J_1(lambda r) / (4 pi r)`.
#[inline]
pub fn r0_diff_raw(lambda: f64, r: f64) -> Complex64 {
    let x = lambda * r;
    Complex64::new(0.0, lambda * lambda / (4.0 * PI) * jn_over_pow(1, x))
}

/// `d^j/dr^j` of the difference kernel, `j` in `0..=2`.
#[inline]
pub fn r0_diff_derivative_raw(lambda: f64, r: f64, j: usize) -> Complex64 {
    let x = lambda * r;
    // g(x) = J1(x)/x, g' = -J2/x, g'' = J3/x - J2/x^2
    let g = match j {
        0 => jn_over_pow(1, x),
        1 => -x * jn_over_pow(2, x),
        _ => x * x * jn_over_pow(3, x) - jn_over_pow(2, x),
    };
    Complex64::new(0.0, lambda.powi(2 + j as i32) / (4.0 * PI) * g)
}

/// `d/dr R0^+(lambda^2, r) = (lambda^3 / (8 pi)) [Y_2(x) - i J_2(x)] / x`.
#[inline]
pub fn r0_plus_derivative_raw(lambda: f64, r: f64) -> Complex64 {
    let x = lambda * r;
    let (j2, y2) = jyn(2, x);
    let pre = lambda.powi(3) / (8.0 * PI * x);
    Complex64::new(pre * y2, -pre * j2)
}

pub fn r0_plus(lambda: f64, r: f64) -> Result<Complex64, ResolventError> {
    check(lambda, r)?;
    Ok(r0_plus_raw(lambda, r))
}

pub fn r0_minus(lambda: f64, r: f64) -> Result<Complex64, ResolventError> {
    check(lambda, r)?;
    Ok(r0_minus_raw(lambda, r))
}

pub fn r0_diff(lambda: f64, r: f64) -> Result<Complex64, ResolventError> {
    check(lambda, r)?;
    Ok(r0_diff_raw(lambda, r))
}

pub fn r0_diff_radial_derivative(
    lambda: f64,
    r: f64,
    j: usize,
) -> Result<Complex64, ResolventError> {
    if !(1..=2).contains(&j) {
        return Err(ResolventError::Order(j));
    }
    check(lambda, r)?;
    Ok(r0_diff_derivative_raw(lambda, r, j))
}

pub fn r0_plus_radial_derivative(lambda: f64, r: f64) -> Result<Complex64, ResolventError> {
    check(lambda, r)?;
    Ok(r0_plus_derivative_raw(lambda, r))
}

/// The zero-energy Green's function `1 / (4 pi^2 r^2)`.
pub fn green_zero(r: f64) -> f64 {
    1.0 / (4.0 * PI * PI * r * r)
}

/// `sup |4 pi^2 r^2 R0^+(lambda, r) - 1|` over a log grid of `r` in `[r_lo, r_hi]`.
pub fn green_limit_deviation(lambda: f64, r_lo: f64, r_hi: f64, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let r = r_lo * (r_hi / r_lo).powf(i as f64 / (n - 1) as f64);
            (r0_plus_raw(lambda, r) / green_zero(r) - 1.0).norm()
        })
        .fold(0.0, f64::max)
}

/// Worst relative deviation of `R0^+ - R0^-` from `i lambda J_1 / (4 pi r)` over an
/// `n x n` log grid, with the difference formed from the two one-sided kernels.
pub fn difference_identity_deviation(n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let lambda = 1e-3 * (0.5f64 / 1e-3).powf(a as f64 / (n - 1) as f64);
        for b in 0..n {
            let r = 1e-2 * (200.0f64 / 1e-2).powf(b as f64 / (n - 1) as f64);
            let direct = r0_plus_raw(lambda, r) - r0_minus_raw(lambda, r);
            let formula = Complex64::new(0.0, lambda * j1(lambda * r) / (4.0 * PI * r));
            let scale = formula.norm().max(f64::MIN_POSITIVE);
            worst = worst.max((direct - formula).norm() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_limit() {
        let v = r0_plus(1e-4, 1.0).unwrap();
        assert!((v.re - 1.0 / (4.0 * PI * PI)).abs() < 1e-6);
        assert!(v.im > 0.0);
        assert!(green_limit_deviation(1e-4, 0.1, 50.0, 200) < 1e-3);
    }

    #[test]
    fn large_argument_magnitude() {
        let v = r0_plus(1.0, 100.0).unwrap().norm();
        let expect = (2.0 / PI).sqrt() / (8.0 * PI) * 100f64.powf(-1.5);
        assert!((v / expect - 1.0).abs() < 0.02, "{v} {expect}");
    }

    #[test]
    fn diff_small_argument() {
        let lambda = 0.1;
        let d = r0_diff(lambda, 1e-2).unwrap();
        assert_eq!(d.re, 0.0);
        let expect = lambda * lambda / (8.0 * PI);
        assert!((d.im / expect - 1.0).abs() < 1e-4);
    }

    #[test]
    fn diff_derivative_orders() {
        assert!(matches!(
            r0_diff_radial_derivative(1.0, 1.0, 3),
            Err(ResolventError::Order(3))
        ));
        assert!(r0_plus(0.0, 1.0).is_err());
        assert!(r0_diff(1.0, 0.0).is_err());
        // j = 1 vanishes linearly at the origin
        let d = r0_diff_radial_derivative(1.0, 1e-6, 1).unwrap();
        assert!(d.norm() < 1e-7);
    }

    #[test]
    fn plus_derivative_zero_energy() {
        let r = 2.0;
        let d = r0_plus_radial_derivative(1e-5, r).unwrap();
        let expect = -1.0 / (2.0 * PI * PI * r.powi(3));
        assert!((d.re / expect - 1.0).abs() < 1e-6);
    }

    #[test]
    fn identity_grid() {
        assert!(difference_identity_deviation(32) < 1e-12);
    }
}
