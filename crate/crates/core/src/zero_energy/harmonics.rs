//! Real spherical harmonics on S^3 as restrictions of homogeneous polynomials.

use std::f64::consts::PI;

use crate::specfun::sphere3_rule;

/// Polynomial `sum coef * z^exps` evaluated on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonic {
    pub terms: Vec<(f64, [u8; 4])>,
}

impl Harmonic {
    pub fn eval(&self, z: &[f64; 4]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * (0..4).map(|i| z[i].powi(e[i] as i32)).product::<f64>())
            .sum()
    }

    fn scaled(&self, s: f64) -> Harmonic {
        Harmonic {
            terms: self.terms.iter().map(|(c, e)| (c * s, *e)).collect(),
        }
    }

    fn axpy(&self, a: f64, other: &Harmonic) -> Harmonic {
        let mut terms = self.terms.clone();
        for (c, e) in &other.terms {
            if let Some(t) = terms.iter_mut().find(|t| t.1 == *e) {
                t.0 += a * c;
            } else {
                terms.push((a * c, *e));
            }
        }
        terms.retain(|t| t.0.abs() > 1e-15);
        Harmonic { terms }
    }
}

fn monomials(degree: u8) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    for a in 0..=degree {
        for b in 0..=degree - a {
            for c in 0..=degree - a - b {
                out.push([a, b, c, degree - a - b - c]);
            }
        }
    }
    out
}

/// Number of independent degree-`ell` harmonics on S^3.
pub fn multiplet_size(ell: usize) -> usize {
    (ell + 1) * (ell + 1)
}

/// An orthonormal basis of degree-`ell` harmonics (Gram–Schmidt of monomials
/// against all lower degrees of the same parity, exact sphere quadrature).
pub fn harmonic_basis(ell: usize) -> Vec<Harmonic> {
    let rule = sphere3_rule((2 * ell).max(2)).expect("degree within range");
    let inner = |a: &Harmonic, b: &Harmonic| -> f64 {
        rule.iter().map(|(z, w)| w * a.eval(&z) * b.eval(&z)).sum()
    };
    let mut lower: Vec<Harmonic> = Vec::new();
    let mut degree = ell % 2;
    let mut top = Vec::new();
    while degree <= ell {
        let mut fresh = Vec::new();
        for e in monomials(degree as u8) {
            let mut h = Harmonic {
                terms: vec![(1.0, e)],
            };
            for b in lower.iter().chain(fresh.iter()) {
                let p = inner(&h, b);
                h = h.axpy(-p, b);
            }
            let n = inner(&h, &h);
            if n > 1e-10 {
                fresh.push(h.scaled(1.0 / n.sqrt()));
            }
        }
        if degree == ell {
            top = fresh;
        } else {
            lower.extend(fresh);
        }
        degree += 2;
    }
    debug_assert_eq!(top.len(), multiplet_size(ell));
    top
}

/// A fixed normalized representative: `1`, `z1`, `z1 z2`, `z1 z2 z3`.
pub fn representative(ell: usize) -> Harmonic {
    let e: [u8; 4] = match ell {
        0 => [0, 0, 0, 0],
        1 => [1, 0, 0, 0],
        2 => [1, 1, 0, 0],
        3 => [1, 1, 1, 0],
        _ => panic!("sector {ell} unsupported"),
    };
    let h = Harmonic {
        terms: vec![(1.0, e)],
    };
    let rule = sphere3_rule(8).expect("degree 8");
    let n: f64 = rule.iter().map(|(z, w)| w * h.eval(&z).powi(2)).sum();
    h.scaled(1.0 / n.sqrt())
}

/// Chebyshev polynomial of the second kind `U_ell(t)`.
pub fn chebyshev_u(ell: usize, t: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * t);
    if ell == 0 {
        return a;
    }
    for _ in 1..ell {
        let c = 2.0 * t * b - a;
        a = b;
        b = c;
    }
    b
}

/// Addition theorem: `sum_m Y_m(a) Y_m(b) = (ell+1)/(2 pi^2) U_ell(a.b)`.
pub fn addition_factor(ell: usize, cos_angle: f64) -> f64 {
    (ell as f64 + 1.0) / (2.0 * PI * PI) * chebyshev_u(ell, cos_angle.clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: [f64; 4]) -> [f64; 4] {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.map(|x| x / n)
    }

    #[test]
    fn basis_sizes_and_orthonormality() {
        let rule = sphere3_rule(12).unwrap();
        for ell in 0..=3 {
            let b = harmonic_basis(ell);
            assert_eq!(b.len(), multiplet_size(ell));
            for i in 0..b.len() {
                for j in 0..b.len() {
                    let g: f64 = rule
                        .iter()
                        .map(|(z, w)| w * b[i].eval(&z) * b[j].eval(&z))
                        .sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g - e).abs() < 1e-10, "ell={ell} {i} {j} {g}");
                }
            }
        }
    }

    #[test]
    fn addition_theorem_matches_basis_sum() {
        let a = unit([0.3, -0.2, 0.9, 0.1]);
        let b = unit([-0.5, 0.4, 0.2, 0.7]);
        let t: f64 = (0..4).map(|i| a[i] * b[i]).sum();
        for ell in 0..=3 {
            let s: f64 = harmonic_basis(ell)
                .iter()
                .map(|h| h.eval(&a) * h.eval(&b))
                .sum();
            assert!((s - addition_factor(ell, t)).abs() < 1e-10, "ell={ell}");
        }
    }

    #[test]
    fn representatives_are_in_their_multiplet() {
        // orthogonal to every lower-degree polynomial: check against degree <= ell-1 monomials
        let rule = sphere3_rule(8).unwrap();
        for ell in 1..=3 {
            let y = representative(ell);
            for d in 0..ell {
                for e in monomials(d as u8) {
                    let m = Harmonic {
                        terms: vec![(1.0, e)],
                    };
                    let p: f64 = rule.iter().map(|(z, w)| w * y.eval(&z) * m.eval(&z)).sum();
                    assert!(p.abs() < 1e-12);
                }
            }
        }
    }
}
