use waveop::bounds_lab::{
    log_log_slope, lp_growth_probe, schur_sums, weighted_convolution_check, write_bound_fits,
    write_series, BoundsError, Convolution, HOLDS_SLOPE,
};
use waveop::osc_integrals::{lambda_integral, IntegralKind, OscTable, TableSpec};
use waveop::specfun::{bracket, CutoffSpec};
use waveop::wave_kernel::Regime;

fn col_growth(radii: &[f64], kernel: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let s = schur_sums(&kernel, Regime::XLarge, radii);
    log_log_slope(&s.iter().map(|x| (x.radius, x.col_sup)).collect::<Vec<_>>())
}

#[test]
fn schur_sums_flat_for_integrable_kernels() {
    let radii = [10.0, 20.0, 40.0];
    assert!(col_growth(&radii, |rx, _| bracket(rx).powi(-5)) < HOLDS_SLOPE);
    assert!(col_growth(&radii, |rx, _| bracket(rx).powi(-6)) < HOLDS_SLOPE);
}

#[test]
fn lp_sharpness_side() {
    // (2, 3) stays bounded below p = 4 and grows like R^(1/2) at p = 8; (2, 4) does not grow
    let radii = [1e4, 1e5, 1e6, 1e7, 1e8];
    let s3 = log_log_slope(&lp_growth_probe(2.0, 3.0, 3.0, &radii));
    let s8 = log_log_slope(&lp_growth_probe(2.0, 3.0, 8.0, &radii));
    let c8 = log_log_slope(&lp_growth_probe(2.0, 4.0, 8.0, &radii));
    assert!(s3 < HOLDS_SLOPE, "p = 3 slope {s3}");
    assert!((s8 - 0.5).abs() < 0.1, "p = 8 slope {s8}");
    assert!(c8 < HOLDS_SLOPE, "cancelled p = 8 slope {c8}");
}

#[test]
fn convolution_hypotheses_are_named() {
    let bad = [
        Convolution::A1 {
            alpha: 3.5,
            beta: 2.0,
            n_decay: 8.0,
        },
        Convolution::A1 {
            alpha: 1.0,
            beta: 2.0,
            n_decay: 5.0,
        },
        Convolution::B1 {
            s: 1.5,
            alpha: 2.0,
            beta: 2.0,
            gamma: 1.0,
            n_decay: 8.0,
        },
    ];
    for lemma in bad {
        match weighted_convolution_check(lemma, 10.0, 5) {
            Err(BoundsError::Hypothesis {
                lemma: name,
                condition,
            }) => {
                assert_eq!(name, lemma.name());
                assert!(!condition.is_empty());
            }
            other => panic!("{lemma:?} accepted: {other:?}"),
        }
    }
}

#[test]
fn csv_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.csv");
    write_series(&series, &[("p".into(), vec![(1.0, 2.0), (2.0, 3.0)])]).unwrap();
    let text = std::fs::read_to_string(&series).unwrap();
    assert_eq!(text.lines().next(), Some("probe,R,value"));
    assert_eq!(text.lines().count(), 3);

    let fits = dir.path().join("fits.csv");
    write_bound_fits(&fits, &[("empty".into(), vec![])]).unwrap();
    let text = std::fs::read_to_string(&fits).unwrap();
    assert!(text.starts_with("grid,regime,a,b,c,sum,log,sup,"));
}

#[test]
fn table_interpolates_off_nodes() {
    let cutoff = CutoffSpec::new(0.5);
    let table =
        OscTable::build(TableSpec::new(IntegralKind::Ws1, cutoff, 1e-2, 10.0, 161)).unwrap();
    for (a, b) in [(0.37, 2.9), (5.5, 0.8), (1.234, 1.234)] {
        let t = table.lookup(a, b).unwrap();
        let d = lambda_integral(a, b, IntegralKind::Ws1, &cutoff).unwrap();
        assert!((t - d).norm() <= 1e-4 * d.norm(), "({a}, {b}): {t} vs {d}");
    }
    // outside the grid the lookup falls back to direct evaluation
    let far = table.lookup(30.0, 2.0).unwrap();
    let direct = lambda_integral(30.0, 2.0, IntegralKind::Ws1, &cutoff).unwrap();
    assert_eq!(far, direct);
}
