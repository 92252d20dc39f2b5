//! Special functions and quadrature primitives.

mod bessel;
mod cutoff;
mod quadrature;

pub use bessel::{
    bessel_j0, bessel_j1, bessel_y0, bessel_y1, j0, j1, jn, jn_over_pow, jn_series, jyn,
    overlap_discrepancy, y0, y1, yn, MAX_ARGUMENT, SERIES_SWITCH,
};
pub use cutoff::{smooth_cutoff, smooth_step, CutoffSpec};
pub use quadrature::{
    adaptive_integrate, composite_gauss, gauss_legendre, gauss_legendre_cached, sphere3_rule,
    AdaptiveResult, QuadratureRule, SPHERE3_AREA, SPHERE_MAX_DEGREE,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecFunError {
    #[error("argument {x} outside the supported domain")]
    Domain { x: f64 },
    #[error("sphere rule degree {degree} unsupported (1..=20)")]
    UnsupportedDegree { degree: usize },
}

/// Japanese bracket `sqrt(1 + t^2)`.
#[inline]
pub fn bracket(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}
