use serde::{Deserialize, Serialize};

/// Low-energy cutoff: identically one on `[0, lambda0/2]`, zero on `[lambda0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub lambda0: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { lambda0: 0.5 }
    }
}

impl CutoffSpec {
    pub fn new(lambda0: f64) -> Self {
        Self { lambda0 }
    }

    /// Start of the transition band.
    pub fn plateau_end(&self) -> f64 {
        0.5 * self.lambda0
    }

    pub fn support_end(&self) -> f64 {
        self.lambda0
    }
}

fn g(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step rising from 0 at `t <= 0` to 1 at `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = g(t);
        a / (a + g(1.0 - t))
    }
}

/// The cutoff `1 - h((lambda - lambda0/2) / (lambda0/2))`.
pub fn smooth_cutoff(lambda: f64, spec: &CutoffSpec) -> f64 {
    let half = spec.plateau_end();
    let t = (lambda - half) / half;
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        // evaluate g(1-t)/(g(t)+g(1-t)) directly so the midpoint is exactly 1/2
        let a = g(1.0 - t);
        a / (a + g(t))
    }
}
