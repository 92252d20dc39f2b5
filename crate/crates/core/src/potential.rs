//! Radial model potentials `V(r) = c * profile(r)`.

use serde::{Deserialize, Serialize};

use crate::specfun::bracket;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `exp(-(r/width)^2) / width^2`
    Gaussian { width: f64 },
    /// `exp(-r/width) / width^2`
    Exponential { width: f64 },
    /// `exp(1 - 1/(1-(r/radius)^2))` inside `radius`, zero outside.
    CompactBump { radius: f64 },
    /// `<r>^-power`; diagnostic profile with polynomial decay.
    Algebraic { power: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    pub profile: Profile,
    pub coupling: f64,
}

impl Default for RadialPotential {
    fn default() -> Self {
        Self::gaussian(-1.0)
    }
}

impl RadialPotential {
    pub fn gaussian(coupling: f64) -> Self {
        Self {
            profile: Profile::Gaussian { width: 1.0 },
            coupling,
        }
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    /// The family `a^-2 profile(r / a)`.
    pub fn scaled(mut self, a: f64) -> Self {
        self.profile = match self.profile {
            Profile::Gaussian { width } => Profile::Gaussian { width: width * a },
            Profile::Exponential { width } => Profile::Exponential { width: width * a },
            other => other,
        };
        self
    }

    pub fn profile_value(&self, r: f64) -> f64 {
        match self.profile {
            Profile::Gaussian { width } => {
                let t = r / width;
                (-t * t).exp() / (width * width)
            }
            Profile::Exponential { width } => (-r / width).exp() / (width * width),
            Profile::CompactBump { radius } => {
                let t = r / radius;
                if t >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                }
            }
            Profile::Algebraic { power } => bracket(r).powf(-power),
        }
    }

    pub fn evaluate(&self, r: f64) -> f64 {
        self.coupling * self.profile_value(r)
    }

    /// Nominal decay exponent; infinite for super-polynomial profiles.
    pub fn nominal_beta(&self) -> f64 {
        match self.profile {
            Profile::Algebraic { power } => power,
            _ => f64::INFINITY,
        }
    }

    /// Radius beyond which `|V| < 1e-30 |c|`.
    pub fn effective_radius(&self) -> f64 {
        match self.profile {
            Profile::Gaussian { width } => width * 69.0f64.sqrt() + 0.5,
            Profile::Exponential { width } => width * 70.0,
            Profile::CompactBump { radius } => radius,
            Profile::Algebraic { .. } => f64::INFINITY,
        }
    }
}

/// Largest tested exponent on the decay grid.
pub const DECAY_GRID_MAX_EXPONENT: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayMargin {
    /// Largest `beta'` with `sup |V| <r>^beta' <= 10 |c|` on the r-grid.
    pub beta: f64,
    /// Whether `beta' > 6`.
    pub satisfies_hypothesis: bool,
}

/// Start of the tail on which the decay bound is tested.
pub const DECAY_TAIL_START: f64 = 10.0;

/// Scans `beta'` on a 0.05 grid up to [`DECAY_GRID_MAX_EXPONENT`], testing the
/// bound on `r` in `[10, 100]`. Including the core would cap a Gaussian near 7.5
/// because `exp(-r^2) <r>^beta` peaks at `r^2 = beta/2 - 1` with a huge value.
pub fn decay_margin(p: &RadialPotential) -> DecayMargin {
    let rs: Vec<f64> = (0..=1800)
        .map(|i| DECAY_TAIL_START + (100.0 - DECAY_TAIL_START) * i as f64 / 1800.0)
        .collect();
    let bound = 10.0 * p.coupling.abs();
    let ok = |beta: f64| {
        rs.iter()
            .all(|&r| p.evaluate(r).abs() * bracket(r).powf(beta) <= bound)
    };
    let mut beta = 0.0;
    let step = 0.05;
    while beta + step <= DECAY_GRID_MAX_EXPONENT + 1e-12 && ok(beta + step) {
        beta += step;
    }
    DecayMargin {
        beta,
        satisfies_hypothesis: beta > 6.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_values() {
        let p = RadialPotential::gaussian(-1.0);
        assert_eq!(p.evaluate(0.0), -1.0);
        let q = RadialPotential::gaussian(2.5);
        assert!((q.evaluate(3.0) - 2.5 * (-9.0f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn compact_bump_vanishes_outside() {
        let p = RadialPotential {
            profile: Profile::CompactBump { radius: 2.0 },
            coupling: -3.0,
        };
        assert_eq!(p.evaluate(2.0), 0.0);
        assert_eq!(p.evaluate(7.0), 0.0);
        assert!(p.evaluate(1.0) < 0.0);
    }

    #[test]
    fn decay_margins() {
        let g = decay_margin(&RadialPotential::gaussian(-1.0));
        assert!(g.beta >= 20.0 && g.satisfies_hypothesis);
        let b = decay_margin(&RadialPotential {
            profile: Profile::CompactBump { radius: 3.0 },
            coupling: 1.0,
        });
        assert!((b.beta - DECAY_GRID_MAX_EXPONENT).abs() < 1e-9);
        let a = decay_margin(&RadialPotential {
            profile: Profile::Algebraic { power: 4.0 },
            coupling: 1.0,
        });
        assert!((4.0..=4.6).contains(&a.beta), "{}", a.beta);
        assert!(!a.satisfies_hypothesis);
    }

    #[test]
    fn scaling_family() {
        let p = RadialPotential::gaussian(-2.0).scaled(2.0);
        let r: f64 = 1.7;
        let expect = -2.0 * (-(r / 2.0) * (r / 2.0)).exp() / 4.0;
        assert!((p.evaluate(r) - expect).abs() < 1e-15);
    }
}
