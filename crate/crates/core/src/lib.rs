//! Low-energy wave-operator kernels for four-dimensional Schrödinger operators
//! with a zero-energy eigenvalue: eigenstate construction, free-resolvent
//! kernels, oscillatory spectral integrals, kernel assembly and bound verdicts.

pub mod bounds_lab;
pub mod checks;
pub mod osc_integrals;
pub mod potential;
pub mod resolvent;
pub mod specfun;
pub mod wave_kernel;
pub mod zero_energy;

pub use num_complex::Complex64;
