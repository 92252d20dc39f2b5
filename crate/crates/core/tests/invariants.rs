use std::sync::OnceLock;

use proptest::prelude::*;
use waveop::potential::RadialPotential;
use waveop::resolvent::{r0_diff, r0_minus, r0_plus};
use waveop::specfun::{jn, smooth_cutoff, yn, CutoffSpec};
use waveop::wave_kernel::{
    second_order_check, taylor_identity_check, GammaCheck, KernelKind, Regime, SpectralAssembler,
    SpectralOptions,
};
use waveop::zero_energy::{addition_factor, first_threshold_state, harmonic_basis, SectorState};

fn state() -> &'static SectorState {
    static S: OnceLock<SectorState> = OnceLock::new();
    S.get_or_init(|| first_threshold_state(&RadialPotential::gaussian(-1.0), 1).unwrap())
}

fn norm(v: &[f64; 4]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn vec4(range: std::ops::Range<f64>) -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(range)
}

/// Rotation in the `(i, j)` plane.
fn rotate(v: &[f64; 4], i: usize, j: usize, t: f64) -> [f64; 4] {
    let (s, c) = t.sin_cos();
    let mut out = *v;
    out[i] = c * v[i] - s * v[j];
    out[j] = s * v[i] + c * v[j];
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regimes_partition_and_mirror(rx in 1e-3f64..1e3, ry in 1e-3f64..1e3) {
        let r = Regime::classify(rx, ry);
        let mirrored = Regime::classify(ry, rx);
        let expected = match r {
            Regime::XLarge => Regime::YLarge,
            Regime::YLarge => Regime::XLarge,
            Regime::Ring => Regime::Ring,
        };
        prop_assert_eq!(mirrored, expected);
        prop_assert_eq!(Regime::parse(r.tag()), Some(r));
    }

    #[test]
    fn gamma_factors_obey_their_bounds(
        y in vec4(-10.0..10.0),
        dir in vec4(-1.0..1.0),
        frac in 0.0f64..0.49,
        s in 0.0f64..1.0,
    ) {
        let ny = norm(&y);
        let nd = norm(&dir);
        prop_assume!(ny > 0.1 && nd > 1e-3);
        let w = dir.map(|c| c / nd * frac * ny);
        prop_assert!(GammaCheck::at(s, &w, &y).holds(1e-12));
    }

    #[test]
    fn taylor_identities_hold(
        lambda in 0.01f64..1.0,
        y in vec4(-10.0..10.0),
        dir in vec4(-1.0..1.0),
        frac in 0.0f64..0.49,
    ) {
        let ny = norm(&y);
        let nd = norm(&dir);
        prop_assume!(ny > 0.5 && nd > 1e-3);
        let w = dir.map(|c| c / nd * frac * ny);
        let first = taylor_identity_check(lambda, &y, &w).unwrap();
        let second = second_order_check(lambda, &y, &w).unwrap();
        prop_assert!(first.scaled_residual() < 1e-8, "{:?}", first);
        prop_assert!(second.scaled_residual() < 1e-8, "{:?}", second);
    }

    #[test]
    fn addition_factor_is_the_multiplet_sum(a in vec4(-1.0..1.0), b in vec4(-1.0..1.0)) {
        let (na, nb) = (norm(&a), norm(&b));
        prop_assume!(na > 1e-2 && nb > 1e-2);
        let (a, b) = (a.map(|c| c / na), b.map(|c| c / nb));
        let cos: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
        for ell in 0..=2 {
            let sum: f64 = harmonic_basis(ell).iter().map(|h| h.eval(&a) * h.eval(&b)).sum();
            prop_assert!((sum - addition_factor(ell, cos)).abs() < 1e-10);
        }
    }

    #[test]
    fn resolvent_difference_and_conjugacy(lambda in 0.01f64..5.0, r in 0.01f64..50.0) {
        let p = r0_plus(lambda, r).unwrap();
        let m = r0_minus(lambda, r).unwrap();
        prop_assert!((p.conj() - m).norm() <= 1e-12 * p.norm());
        prop_assert!((r0_diff(lambda, r).unwrap() - (p - m)).norm() <= 1e-12 * p.norm());
    }

    #[test]
    fn bessel_wronskian(n in 0usize..4, x in 0.5f64..60.0) {
        // J_{n+1} Y_n - J_n Y_{n+1} = 2 / (pi x)
        let w = jn(n + 1, x) * yn(n, x) - jn(n, x) * yn(n + 1, x);
        let want = 2.0 / (std::f64::consts::PI * x);
        prop_assert!((w - want).abs() < 1e-10 * want.max(1.0), "n {} x {} w {} want {}", n, x, w, want);
    }

    #[test]
    fn cutoff_is_monotone_and_bounded(l0 in 0.1f64..2.0, a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let spec = CutoffSpec::new(l0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (clo, chi) = (smooth_cutoff(lo, &spec), smooth_cutoff(hi, &spec));
        prop_assert!((0.0..=1.0).contains(&clo) && (0.0..=1.0).contains(&chi));
        prop_assert!(chi <= clo + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// The identity-coefficient kernel depends only on `|x|`, `|y|` and the angle.
    #[test]
    fn kernel_is_rotation_invariant(
        x in vec4(-3.0..3.0),
        y in vec4(-3.0..3.0),
        t in 0.0f64..6.28,
        plane in 0usize..6,
    ) {
        prop_assume!(norm(&x) > 0.3 && norm(&y) > 0.3);
        let (i, j) = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)][plane];
        let asm = SpectralAssembler::new(state(), KernelKind::Ws, SpectralOptions::default(), 10.0)
            .unwrap();
        let k = asm.kernel_at(&x, &y, None).unwrap();
        let kr = asm.kernel_at(&rotate(&x, i, j, t), &rotate(&y, i, j, t), None).unwrap();
        prop_assert!((k - kr).norm() <= 1e-10 * k.norm().max(1e-300));
    }
}
