use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use super::SpecFunError;

/// Nodes and positive weights. `P` is `f64` for interval rules and `[f64; 4]` for
/// rules on the unit 3-sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<P = f64> {
    pub nodes: Vec<P>,
    pub weights: Vec<f64>,
}

impl<P: Copy> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (P, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<T, F>(&self, mut f: F) -> T
    where
        F: FnMut(P) -> T,
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        self.iter().fold(T::default(), |acc, (x, w)| acc + f(x) * w)
    }
}

impl QuadratureRule<f64> {
    /// Affine map of a rule on `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        QuadratureRule {
            nodes: self.nodes.iter().map(|t| mid + half * t).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule with `n` nodes on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> QuadratureRule<f64> {
    assert!(n >= 1);
    if n == 1 {
        return QuadratureRule {
            nodes: vec![0.0],
            weights: vec![2.0],
        };
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

const CACHE_MAX: usize = 128;

/// Cached Gauss–Legendre rule on `[-1, 1]`; orders above 128 are computed fresh.
pub fn gauss_legendre_cached(n: usize) -> std::borrow::Cow<'static, QuadratureRule<f64>> {
    static CACHE: [OnceLock<QuadratureRule<f64>>; CACHE_MAX + 1] =
        [const { OnceLock::new() }; CACHE_MAX + 1];
    if n <= CACHE_MAX {
        std::borrow::Cow::Borrowed(CACHE[n].get_or_init(|| gauss_legendre(n)))
    } else {
        std::borrow::Cow::Owned(gauss_legendre(n))
    }
}

/// Composite Gauss–Legendre rule over consecutive breakpoints.
pub fn composite_gauss(edges: &[f64], order: usize) -> QuadratureRule<f64> {
    let base = gauss_legendre_cached(order);
    let mut nodes = Vec::with_capacity(order * edges.len());
    let mut weights = Vec::with_capacity(order * edges.len());
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let m = base.mapped(a, b);
        nodes.extend(m.nodes);
        weights.extend(m.weights);
    }
    QuadratureRule { nodes, weights }
}

pub const SPHERE_MAX_DEGREE: usize = 20;

/// Product rule on S^3 exact for polynomials of total degree `<= degree`.
///
/// Coordinates `(cos a, sin a cos b, sin a sin b cos c, sin a sin b sin c)` with
/// measure `sin^2 a sin b da db dc`: Gauss–Chebyshev (second kind) in `cos a`,
/// Gauss–Legendre in `cos b`, equally spaced `c`.
pub fn sphere3_rule(degree: usize) -> Result<QuadratureRule<[f64; 4]>, SpecFunError> {
    if degree == 0 || degree > SPHERE_MAX_DEGREE {
        return Err(SpecFunError::UnsupportedDegree { degree });
    }
    let n_a = degree / 2 + 1;
    let n_b = degree / 2 + 1;
    let n_c = degree + 1;
    let cheb: Vec<(f64, f64)> = (1..=n_a)
        .map(|k| {
            let th = k as f64 * PI / (n_a as f64 + 1.0);
            (th.cos(), PI / (n_a as f64 + 1.0) * th.sin().powi(2))
        })
        .collect();
    let gl = gauss_legendre(n_b);
    let mut nodes = Vec::with_capacity(n_a * n_b * n_c);
    let mut weights = Vec::with_capacity(n_a * n_b * n_c);
    for &(ca, wa) in &cheb {
        let sa = (1.0 - ca * ca).max(0.0).sqrt();
        for (cb, wb) in gl.iter() {
            let sb = (1.0 - cb * cb).max(0.0).sqrt();
            for ic in 0..n_c {
                let c = 2.0 * PI * ic as f64 / n_c as f64;
                let (sc, cc) = c.sin_cos();
                nodes.push([ca, sa * cb, sa * sb * cc, sa * sb * sc]);
                weights.push(wa * wb * 2.0 * PI / n_c as f64);
            }
        }
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Surface measure of S^3.
pub const SPHERE3_AREA: f64 = 2.0 * PI * PI;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_pair<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let lo = gauss_legendre_cached(10);
    let hi = gauss_legendre_cached(20);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let g_lo: f64 = lo.iter().map(|(t, w)| w * f(mid + half * t)).sum::<f64>() * half;
    let g_hi: f64 = hi.iter().map(|(t, w)| w * f(mid + half * t)).sum::<f64>() * half;
    (g_hi, (g_hi - g_lo).abs())
}

/// Result of [`adaptive_integrate`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error: f64,
    pub segments: usize,
}

/// Globally adaptive bisection with a 10/20-point Gauss–Legendre error estimate.
/// `breaks` are interior points where the integrand is known to be non-smooth.
pub fn adaptive_integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> AdaptiveResult {
    let mut edges = vec![a];
    let mut interior: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    interior.sort_by(f64::total_cmp);
    edges.extend(interior);
    edges.push(b);
    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gauss_pair(&mut f, w[0], w[1]);
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    loop {
        let total: f64 = heap.iter().map(|s| s.value).sum();
        let err: f64 = heap.iter().map(|s| s.error).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || heap.len() >= max_segments {
            // ordered summation for reproducibility
            let mut segs: Vec<Segment> = heap.into_vec();
            segs.sort_by(|x, y| x.a.total_cmp(&y.a));
            let value = segs.iter().map(|s| s.value).sum();
            return AdaptiveResult {
                value,
                error: err,
                segments: segs.len(),
            };
        }
        let worst = heap.pop().expect("non-empty");
        let m = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, m), (m, worst.b)] {
            let (value, error) = gauss_pair(&mut f, lo, hi);
            heap.push(Segment {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1usize, 2, 5, 16, 24, 64] {
            let r = gauss_legendre(n);
            assert!((r.total_weight() - 2.0).abs() < 1e-13);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                let got: f64 = r.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn sphere_moments() {
        let r = sphere3_rule(8).unwrap();
        assert!((r.total_weight() - SPHERE3_AREA).abs() < 1e-12);
        assert!(r.weights.iter().all(|&w| w > 0.0));
        let m1: f64 = r.iter().map(|(z, w)| w * z[0]).sum();
        assert!(m1.abs() < 1e-12);
        let m2: f64 = r.iter().map(|(z, w)| w * z[0] * z[0]).sum();
        assert!((m2 - PI * PI / 2.0).abs() < 1e-12);
        for (z, _) in r.iter() {
            let n: f64 = z.iter().map(|c| c * c).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_exact_to_degree() {
        // int z1^a z2^b z3^c z4^d over S^3 = 2 prod Gamma((e+1)/2) / Gamma((sum+4)/2)
        fn gamma_half(k: usize) -> f64 {
            // Gamma(k/2)
            if k % 2 == 0 {
                (1..k / 2).fold(1.0, |a, j| a * j as f64)
            } else {
                let mut v = PI.sqrt();
                let mut s = 0.5;
                while s < k as f64 / 2.0 - 0.25 {
                    v *= s;
                    s += 1.0;
                }
                v
            }
        }
        for degree in [2usize, 5, 8, 12] {
            let r = sphere3_rule(degree).unwrap();
            for e in [
                [2usize, 0, 0, 0],
                [0, 2, 2, 0],
                [1, 1, 0, 0],
                [0, 0, 0, 4],
                [2, 2, 2, 2],
            ] {
                let tot: usize = e.iter().sum();
                if tot > degree {
                    continue;
                }
                let got: f64 = r
                    .iter()
                    .map(|(z, w)| w * (0..4).map(|i| z[i].powi(e[i] as i32)).product::<f64>())
                    .sum();
                let exact = if e.iter().any(|k| k % 2 == 1) {
                    0.0
                } else {
                    2.0 * e.iter().map(|&k| gamma_half(k + 1)).product::<f64>()
                        / gamma_half(tot + 4)
                };
                assert!(
                    (got - exact).abs() < 1e-12,
                    "deg={degree} e={e:?} {got} {exact}"
                );
            }
        }
    }

    #[test]
    fn sphere_degree_limits() {
        assert!(sphere3_rule(0).is_err());
        assert!(sphere3_rule(21).is_err());
        assert!(sphere3_rule(20).is_ok());
    }

    #[test]
    fn adaptive_handles_kink() {
        let r = adaptive_integrate(
            |x: f64| (x - 0.3).abs().sqrt(),
            0.0,
            1.0,
            &[0.3],
            1e-12,
            1e-12,
            500,
        );
        let exact = 2.0 / 3.0 * (0.3f64.powf(1.5) + 0.7f64.powf(1.5));
        assert!((r.value - exact).abs() < 1e-10);
    }
}
