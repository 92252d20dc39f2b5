use approx::assert_relative_eq;
use waveop::potential::RadialPotential;
use waveop::zero_energy::{decay_fit, first_threshold_state};

// couplings from an independent DOP853 shooting plus brentq, rtol 1e-13
const ORACLE_COUPLING: [(usize, f64); 2] = [(1, -18.8257022818809), (2, -36.3278358417583)];

#[test]
fn couplings_match_independent_shooting() {
    for (ell, want) in ORACLE_COUPLING {
        let s = first_threshold_state(&RadialPotential::gaussian(-1.0), ell).unwrap();
        assert_relative_eq!(s.coupling, want, max_relative = 1e-10);
        assert!(s.mismatch.abs() < 1e-8, "ell {ell} mismatch {}", s.mismatch);
        assert_relative_eq!(s.l2_norm, 1.0, max_relative = 1e-6);
    }
}

#[test]
fn moments_by_sector() {
    let s1 = first_threshold_state(&RadialPotential::gaussian(-1.0), 1).unwrap();
    let (m0, m1) = s1.moments();
    assert!(m0.abs() < 1e-10);
    let n1 = m1.iter().map(|c| c * c).sum::<f64>().sqrt();
    // regression pin for the default Gaussian
    assert_relative_eq!(n1, 12.99337, max_relative = 1e-5);

    let s2 = first_threshold_state(&RadialPotential::gaussian(-1.0), 2).unwrap();
    let (m0, m1) = s2.moments();
    assert!(m0.abs() < 1e-10);
    assert!(m1.iter().all(|c| c.abs() < 1e-10));
}

#[test]
fn decay_exponents() {
    for ell in [1, 2] {
        let s = first_threshold_state(&RadialPotential::gaussian(-1.0), ell).unwrap();
        let p = decay_fit(&s).unwrap();
        assert!(
            (p + (ell as f64 + 2.0)).abs() < 0.1,
            "ell {ell} exponent {p}"
        );
    }
}

#[test]
fn state_csv_and_sidecar() {
    let s = first_threshold_state(&RadialPotential::gaussian(-1.0), 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.csv");
    s.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), s.r_grid.len() + 1);
    let side = serde_json::to_value(s.sidecar()).unwrap();
    assert!(side.get("coupling").is_some());
}

#[test]
fn compact_bump_also_tunes() {
    let v = RadialPotential {
        profile: waveop::potential::Profile::CompactBump { radius: 3.0 },
        ..RadialPotential::gaussian(-1.0)
    };
    let s = first_threshold_state(&v, 1).unwrap();
    assert!(s.coupling < 0.0);
    assert!(s.mismatch.abs() < 1e-8);
}
