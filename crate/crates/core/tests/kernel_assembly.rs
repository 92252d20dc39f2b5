use approx::assert_relative_eq;
use waveop::bounds_lab::{fit_regime_bound, Weight};
use waveop::osc_integrals::{IntegralKind, OscTable, TableSpec};
use waveop::potential::RadialPotential;
use waveop::specfun::CutoffSpec;
use waveop::wave_kernel::{
    assemble_grid, assemble_ws_kernel_direct, GridSpec, KernelGrid, KernelKind, Regime, Separable,
    SpatialRule, SpectralAssembler, SpectralOptions,
};
use waveop::zero_energy::{first_threshold_state, harmonic_basis, SectorState};
use waveop::Complex64;

fn state(ell: usize) -> SectorState {
    first_threshold_state(&RadialPotential::gaussian(-1.0), ell).unwrap()
}

fn dist(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// With a product model `I(A, B) = f(A) g(B)` the literal double sum factors
/// into `sum_m F_m G_m / (pi i)`, computed here from the explicit harmonic
/// basis instead of the addition factor.
#[test]
fn separable_stub_matches_explicit_multiplet_sum() {
    let f = |a: f64| Complex64::new((-0.3 * a).exp(), 0.2 * a.sin());
    let g = |b: f64| Complex64::new(1.0 / (1.0 + b * b), -0.1 * b.cos());
    for ell in [1, 2] {
        let s = state(ell);
        let rule = SpatialRule {
            radial_nodes: 16,
            sphere_degree: 4,
            ..Default::default()
        };
        let (rx, ry, theta) = (1.3, 2.1, 0.7);
        let direct =
            assemble_ws_kernel_direct(&s, &Separable { f, g }, rx, ry, theta, &rule).unwrap();

        let x = [rx, 0.0, 0.0, 0.0];
        let y = [ry * theta.cos(), ry * theta.sin(), 0.0, 0.0];
        let nodes = rule.nodes(&s).unwrap();
        let mut expected = Complex64::new(0.0, 0.0);
        for h in harmonic_basis(ell) {
            let (mut fm, mut gm) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (p, w) in &nodes {
                let r = p.iter().map(|c| c * c).sum::<f64>().sqrt();
                let yv = h.eval(&p.map(|c| c / r));
                fm += f(dist(&x, p).max(1e-3)) * (w * yv);
                gm += g(dist(&y, p).max(1e-3)) * (w * yv);
            }
            expected += fm * gm;
        }
        expected /= Complex64::new(0.0, std::f64::consts::PI);
        assert!(
            (direct - expected).norm() <= 1e-8 * expected.norm(),
            "ell {ell}: direct {direct} explicit {expected}"
        );
    }
}

/// Away from the support of `V psi` the spatial and spectral routes agree;
/// near it the spatial rule is too coarse for the integrable singularity.
#[test]
fn direct_route_agrees_with_spectral_off_support() {
    let s = state(1);
    let cutoff = CutoffSpec::new(0.5);
    let opts = SpectralOptions {
        cutoff,
        ..Default::default()
    };
    let asm = SpectralAssembler::new(&s, KernelKind::Ws, opts, 40.0).unwrap();
    let table =
        OscTable::build(TableSpec::new(IntegralKind::Ws0, cutoff, 1e-3, 20.0, 121)).unwrap();
    let (rx, ry, theta) = (3.0, 0.7, 1.2);
    let direct =
        assemble_ws_kernel_direct(&s, &table, rx, ry, theta, &SpatialRule::default()).unwrap();
    let spectral = asm.kernel(rx, ry, theta).unwrap();
    let rel = (direct - spectral).norm() / spectral.norm();
    assert!(
        rel < 5e-3,
        "direct {direct} spectral {spectral} rel {rel:.2e}"
    );
}

#[test]
fn truncation_radius_is_converged() {
    let s = state(1);
    let base = SpectralOptions::default();
    let wide = SpectralOptions {
        truncation_radius: 16.0,
        ..base
    };
    let a = SpectralAssembler::new(&s, KernelKind::Ws, base, 60.0).unwrap();
    let b = SpectralAssembler::new(&s, KernelKind::Ws, wide, 60.0).unwrap();
    for (rx, ry) in [(0.5, 3.0), (2.0, 2.0), (30.0, 1.0), (1.0, 50.0)] {
        let ka = a.radial(rx, ry).unwrap();
        let kb = b.radial(rx, ry).unwrap();
        assert!(
            (ka - kb).norm() <= 1e-4 * kb.norm(),
            "({rx}, {ry}): {ka} vs {kb}"
        );
    }
}

#[test]
fn grid_assembly_is_deterministic() {
    let s = state(2);
    let asm = SpectralAssembler::new(&s, KernelKind::Ws, SpectralOptions::default(), 20.0).unwrap();
    let spec = GridSpec {
        r_min: 0.5,
        r_max: 20.0,
        radii: 6,
        angles: 3,
    };
    let g1 = assemble_grid("det", &asm, &spec, None).unwrap();
    let g2 = assemble_grid("det", &asm, &spec, None).unwrap();
    assert_eq!(g1, g2);
    assert_eq!(g1.samples.len(), 6 * 6 * 3);
    let json = serde_json::to_string(&g1).unwrap();
    let back: KernelGrid = serde_json::from_str(&json).unwrap();
    assert_eq!(back, g1);
}

#[test]
fn grid_point_matches_pointwise_kernel() {
    let s = state(1);
    let asm = SpectralAssembler::new(&s, KernelKind::Ws, SpectralOptions::default(), 20.0).unwrap();
    let spec = GridSpec {
        r_min: 1.0,
        r_max: 20.0,
        radii: 4,
        angles: 3,
    };
    let grid = assemble_grid("pt", &asm, &spec, None).unwrap();
    for smp in grid.samples.iter().step_by(7) {
        let k = asm.kernel(smp.rx, smp.ry, smp.theta).unwrap();
        assert_relative_eq!(smp.k.re, k.re, max_relative = 1e-10, epsilon = 1e-300);
        assert_relative_eq!(smp.k.im, k.im, max_relative = 1e-10, epsilon = 1e-300);
    }
}

/// A model kernel that saturates a weight exactly: the fitted sup is 1 and
/// the truncation trend is flat.
#[test]
fn synthetic_saturating_kernel_fits_exactly() {
    let spec = GridSpec {
        r_min: 0.5,
        r_max: 640.0,
        radii: 30,
        angles: 3,
    };
    let jp = |t: f64| (1.0 + t * t).sqrt();
    let grid = KernelGrid::tabulate("synthetic", &spec, |rx, ry, _| {
        Complex64::new(1.0 / (jp(rx).powi(2) * jp(ry).powi(3)), 0.0)
    });
    let truncations = [80.0, 160.0, 320.0, 640.0];
    let fit = fit_regime_bound(
        &grid,
        Regime::YLarge,
        Weight::new(2.0, 3.0, 0.0),
        &truncations,
    )
    .unwrap();
    assert_relative_eq!(fit.sup, 1.0, max_relative = 1e-12);
    assert!(fit.trend_slope.abs() < 1e-12);
    assert!(fit.holds());

    // one power short in |y|: the sup grows linearly with the domain
    let short = fit_regime_bound(
        &grid,
        Regime::YLarge,
        Weight::new(2.0, 4.0, 0.0),
        &truncations,
    )
    .unwrap();
    assert!(short.trend_slope > 0.9, "slope {}", short.trend_slope);
    assert!(short.fails(1.0));
}
