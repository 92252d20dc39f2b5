//! Bessel functions of integer order for real positive arguments.
//!
//! Power series below [`SERIES_SWITCH`], Hankel asymptotic expansion (truncated at
//! its smallest term) above it. Orders 2..=4 come from the series for small
//! arguments and from forward recurrence otherwise.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use super::SpecFunError;

/// Crossover between the power series and the Hankel expansion.
pub const SERIES_SWITCH: f64 = 12.0;

/// Largest argument accepted by the checked entry points.
pub const MAX_ARGUMENT: f64 = 1.0e6;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Power series for `J_n(x)`.
pub fn jn_series(n: usize, x: f64) -> f64 {
    let z = 0.25 * x * x;
    let mut term = (0.5 * x).powi(n as i32) / factorial(n);
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        sum += term;
        k += 1;
        term *= -z / (k as f64 * (k + n) as f64);
        if term.abs() <= 1e-17 * sum.abs() && k > 2 {
            break;
        }
        if k > 300 {
            break;
        }
    }
    sum
}

/// Power series for `Y_n(x)` (n = 0 or 1).
fn yn_series(n: usize, x: f64) -> f64 {
    debug_assert!(n <= 1);
    let z = 0.25 * x * x;
    let jn = jn_series(n, x);
    let log_term = FRAC_2_PI * (0.5 * x).ln() * jn;
    // digamma(k+1) + digamma(k+n+1) = -2 gamma + H_k + H_{k+n}
    let mut term = (0.5 * x).powi(n as i32) / factorial(n);
    let mut h_k = 0.0;
    let mut h_kn: f64 = (1..=n).map(|j| 1.0 / j as f64).sum();
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        let psi = -2.0 * EULER_GAMMA + h_k + h_kn;
        let contrib = psi * term;
        sum += contrib;
        k += 1;
        h_k += 1.0 / k as f64;
        h_kn += 1.0 / (k + n) as f64;
        term *= -z / (k as f64 * (k + n) as f64);
        if (term * (h_kn + 3.0)).abs() <= 1e-18 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
        if k > 300 {
            break;
        }
    }
    let head = if n == 1 { -2.0 / (PI * x) } else { 0.0 };
    head + log_term - sum / PI
}

/// Hankel expansion, returns `(J_nu, Y_nu)`.
fn hankel_asymptotic(nu: usize, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a: f64 = 1.0;
    let mut last = f64::INFINITY;
    let mut xk: f64 = 1.0;
    for k in 0..200usize {
        let term = a / xk;
        if term.abs() > last {
            break;
        }
        last = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
        let kk = (k + 1) as f64;
        a *= (mu - (2.0 * kk - 1.0).powi(2)) / (8.0 * kk);
        xk *= x;
    }
    // chi = x - (nu/2 + 1/4) pi; expand to keep argument reduction inside sin/cos.
    let phase = (nu as f64 * 0.5) * PI + FRAC_PI_4;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    let amp = (FRAC_2_PI / x).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

/// `J_0(x)` for `x >= 0` (no domain check).
pub fn j0(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        jn_series(0, x)
    } else {
        hankel_asymptotic(0, x).0
    }
}

/// `J_1(x)` for `x >= 0` (no domain check).
pub fn j1(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        jn_series(1, x)
    } else {
        hankel_asymptotic(1, x).0
    }
}

/// `Y_0(x)` for `x > 0` (no domain check).
pub fn y0(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        yn_series(0, x)
    } else {
        hankel_asymptotic(0, x).1
    }
}

/// `Y_1(x)` for `x > 0` (no domain check).
pub fn y1(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        yn_series(1, x)
    } else {
        hankel_asymptotic(1, x).1
    }
}

/// `J_n(x)` for small integer orders. Series below the switch, upward recurrence
/// above it (stable there since `n < x`).
pub fn jn(n: usize, x: f64) -> f64 {
    match n {
        0 => j0(x),
        1 => j1(x),
        _ if x < SERIES_SWITCH => jn_series(n, x),
        _ => {
            let (mut prev, mut cur) = hankel_pair_j(x);
            for k in 1..n {
                let next = 2.0 * k as f64 / x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn hankel_pair_j(x: f64) -> (f64, f64) {
    (hankel_asymptotic(0, x).0, hankel_asymptotic(1, x).0)
}

/// `Y_n(x)` by upward recurrence from `Y_0`, `Y_1` (stable for all `x > 0`).
pub fn yn(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (y0(x), y1(x));
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * k as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `(J_n(x), Y_n(x))` together, sharing the order-0/1 evaluations.
pub fn jyn(n: usize, x: f64) -> (f64, f64) {
    let (j0v, j1v, y0v, y1v) = if x < SERIES_SWITCH {
        (f64::NAN, f64::NAN, yn_series(0, x), yn_series(1, x))
    } else {
        let (a, b) = hankel_asymptotic(0, x);
        let (c, d) = hankel_asymptotic(1, x);
        (a, c, b, d)
    };
    let mut y = (y0v, y1v);
    let mut j = (j0v, j1v);
    for k in 1..n {
        let t = 2.0 * k as f64 / x;
        y = (y.1, t * y.1 - y.0);
        j = (j.1, t * j.1 - j.0);
    }
    let yv = if n == 0 { y0v } else { y.1 };
    let jv = if x < SERIES_SWITCH {
        jn_series(n, x)
    } else if n == 0 {
        j0v
    } else {
        j.1
    };
    (jv, yv)
}

/// `J_n(x) / x^n`, accurate down to `x = 0` (where it equals `1 / (2^n n!)`).
pub fn jn_over_pow(n: usize, x: f64) -> f64 {
    if x < 1.0 {
        let z = 0.25 * x * x;
        let mut term = 0.5f64.powi(n as i32) / factorial(n);
        let mut sum = 0.0;
        let mut k = 0usize;
        loop {
            sum += term;
            k += 1;
            term *= -z / (k as f64 * (k + n) as f64);
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        jn(n, x) / x.powi(n as i32)
    }
}

fn check_nonnegative(x: f64) -> Result<(), SpecFunError> {
    if !x.is_finite() || x < 0.0 || x > MAX_ARGUMENT {
        return Err(SpecFunError::Domain { x });
    }
    Ok(())
}

fn check_positive(x: f64) -> Result<(), SpecFunError> {
    if !x.is_finite() || x <= 0.0 || x > MAX_ARGUMENT {
        return Err(SpecFunError::Domain { x });
    }
    Ok(())
}

pub fn bessel_j0(x: f64) -> Result<f64, SpecFunError> {
    check_nonnegative(x)?;
    Ok(j0(x))
}

pub fn bessel_j1(x: f64) -> Result<f64, SpecFunError> {
    check_nonnegative(x)?;
    Ok(j1(x))
}

pub fn bessel_y0(x: f64) -> Result<f64, SpecFunError> {
    check_positive(x)?;
    Ok(y0(x))
}

pub fn bessel_y1(x: f64) -> Result<f64, SpecFunError> {
    check_positive(x)?;
    Ok(y1(x))
}

/// Largest discrepancy between the two evaluation paths over the overlap band
/// `[8, 16]`, measured against the large-argument envelope `sqrt(2 / (pi x))`.
pub fn overlap_discrepancy() -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..=160 {
        let x = 8.0 + 8.0 * i as f64 / 160.0;
        let env = (FRAC_2_PI / x).sqrt();
        for nu in 0..=1 {
            let (ja, ya) = hankel_asymptotic(nu, x);
            let js = jn_series(nu, x);
            let ys = yn_series(nu, x);
            worst = worst.max((ja - js).abs() / env).max((ya - ys).abs() / env);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j1_vanishes_at_origin() {
        assert_eq!(bessel_j1(0.0).unwrap(), 0.0);
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn first_zero_of_j1() {
        assert!(j1(3.831_705_970_207_512).abs() < 1e-12);
        assert!(j1(3.831_705_970_2).abs() < 1e-8);
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j1(-1.0).is_err());
        assert!(bessel_j1(f64::NAN).is_err());
        assert!(bessel_y1(0.0).is_err());
        assert!(bessel_y1(-2.0).is_err());
        assert!(bessel_y0(f64::INFINITY).is_err());
    }

    #[test]
    fn overlap_band_agrees() {
        // the asymptotic side is only ~1e-8 accurate at x = 8
        assert!(overlap_discrepancy() < 5e-8);
    }

    #[test]
    fn higher_orders_match_series_across_switch() {
        for &x in &[11.9, 12.1, 13.0] {
            for n in 2..=4 {
                let rec = {
                    let (mut p, mut c) = (j0(x), j1(x));
                    for k in 1..n {
                        let nx = 2.0 * k as f64 / x * c - p;
                        p = c;
                        c = nx;
                    }
                    c
                };
                assert!((jn(n, x) - rec).abs() < 1e-11, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn jn_over_pow_limit() {
        assert!((jn_over_pow(1, 0.0) - 0.5).abs() < 1e-16);
        assert!((jn_over_pow(2, 0.0) - 0.125).abs() < 1e-16);
        let x = 0.9;
        assert!((jn_over_pow(3, x) - jn(3, x) / x.powi(3)).abs() < 1e-14);
    }
}
