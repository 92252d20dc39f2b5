//! Dormand–Prince 5(4) integrator for the zero-energy radial equation.

/// State `(u, u')`.
pub type State = [f64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeFailure {
    NonFinite { r: f64 },
    StepUnderflow { r: f64 },
    TooManySteps { r: f64 },
}

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Adaptive integrator with a carried step size. Error norm is relative to
/// `|u| + r |u'|`, so zero crossings of either component do not stall it.
pub struct Integrator<F: Fn(f64, &State) -> State> {
    pub rhs: F,
    pub rtol: f64,
    h: f64,
    pub steps: usize,
}

impl<F: Fn(f64, &State) -> State> Integrator<F> {
    pub fn new(rhs: F, rtol: f64, h0: f64) -> Self {
        Self {
            rhs,
            rtol,
            h: h0,
            steps: 0,
        }
    }

    /// Advance from `r0` to `r1` (either direction).
    pub fn advance(&mut self, r0: f64, y0: State, r1: f64) -> Result<State, OdeFailure> {
        let dir = if r1 >= r0 { 1.0 } else { -1.0 };
        let mut r = r0;
        let mut y = y0;
        let mut k1 = (self.rhs)(r, &y);
        let mut h = self.h.abs().min((r1 - r0).abs()) * dir;
        if h == 0.0 {
            return Ok(y);
        }
        let mut local_steps = 0usize;
        while (r1 - r) * dir > 0.0 {
            if (r + h - r1) * dir > 0.0 {
                h = r1 - r;
            }
            let k2 = (self.rhs)(r + C2 * h, &axpy(&y, &[(A21, &k1)], h));
            let k3 = (self.rhs)(r + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = (self.rhs)(
                r + C4 * h,
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
            );
            let k5 = (self.rhs)(
                r + C5 * h,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            );
            let k6 = (self.rhs)(
                r + h,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    h,
                ),
            );
            let y_new = axpy(
                &y,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
                h,
            );
            let k7 = (self.rhs)(r + h, &y_new);
            let err = [
                h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0]),
                h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1]),
            ];
            let rr = (r + h).abs().max(r.abs());
            let scale_u = y[0].abs().max(y_new[0].abs()) + rr * y[1].abs().max(y_new[1].abs());
            let scale = self.rtol * scale_u.max(1e-300);
            let en = (err[0].abs() / scale).max(err[1].abs() * rr.max(1e-300) / scale);
            if !en.is_finite() || !y_new[0].is_finite() || !y_new[1].is_finite() {
                if h.abs() < 1e-14 * rr.max(1.0) {
                    return Err(OdeFailure::NonFinite { r });
                }
                h *= 0.25;
                continue;
            }
            if en <= 1.0 {
                r += h;
                y = y_new;
                k1 = k7;
                self.steps += 1;
                local_steps += 1;
                if local_steps > 2_000_000 {
                    return Err(OdeFailure::TooManySteps { r });
                }
                let fac = if en == 0.0 {
                    5.0
                } else {
                    (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
                };
                self.h = h * fac;
                h = self.h;
            } else {
                let fac = (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
                h *= fac;
                if h.abs() < 1e-15 * rr.max(1e-10) {
                    return Err(OdeFailure::StepUnderflow { r });
                }
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let mut it = Integrator::new(|_r, y: &State| [y[1], -y[0]], 1e-11, 0.1);
        let y = it
            .advance(0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8);
        assert!(y[1].abs() < 1e-8);
    }

    #[test]
    fn backwards_integration() {
        // u = r^-3 solves u'' + 3u'/r - 3u/r^2 = 0
        let mut it = Integrator::new(
            |r, y: &State| [y[1], -3.0 * y[1] / r + 3.0 * y[0] / (r * r)],
            1e-11,
            0.1,
        );
        let y = it
            .advance(60.0, [60f64.powi(-3), -3.0 * 60f64.powi(-4)], 2.0)
            .unwrap();
        assert!((y[0] / 2f64.powi(-3) - 1.0).abs() < 1e-9);
    }
}
