//! Calibration checks for the average module: the classical harmonic
//! asymptotics, exact-vs-floating agreement, and the growth ordering of
//! fitted exponents.

use ostar_core::multfunc::{average, average_exact, kappa_fit, MultFuncSpec};
use ostar_core::sieves::SieveConfig;

const EULER_MASCHERONI: f64 = 0.5772156649;

#[test]
fn harmonic_tracks_log_plus_gamma_at_1e6() {
    let cfg = SieveConfig::default();
    let series = average(&MultFuncSpec::Unit, &[1_000_000], &cfg).unwrap();
    let (x, sum) = series.points[0];
    let drift = (sum - (x as f64).ln() - EULER_MASCHERONI).abs();
    assert!(drift < 1e-2, "drift {drift}");
}

#[test]
fn rational_and_floating_paths_agree_at_1e4() {
    let cfg = SieveConfig::default();
    let float = average(&MultFuncSpec::Unit, &[10_000], &cfg).unwrap().points[0].1;
    let exact = average_exact(&MultFuncSpec::Unit, 10_000, &cfg).unwrap();
    let exact_f = num::ToPrimitive::to_f64(&exact).unwrap();
    assert!(
        (float - exact_f).abs() <= 1e-12 * exact_f,
        "float {float} vs exact {exact_f}"
    );
}

#[test]
fn unit_kappa_near_one_at_1e8() {
    let cfg = SieveConfig::default();
    let grid = [100_000u64, 1_000_000, 10_000_000, 100_000_000];
    let series = average(&MultFuncSpec::Unit, &grid, &cfg).unwrap();
    let fit = kappa_fit(&series).unwrap();
    assert!(
        (0.9..=1.1).contains(&fit.slope),
        "unit kappa {}",
        fit.slope
    );
}

#[test]
fn tau_l_kappa_increases_with_l() {
    let cfg = SieveConfig::default();
    let grid = [10_000u64, 100_000, 1_000_000];
    let mut slopes = Vec::new();
    for l in 2..=5 {
        let series = average(&MultFuncSpec::TauL { l }, &grid, &cfg).unwrap();
        slopes.push(kappa_fit(&series).unwrap().slope);
    }
    for w in slopes.windows(2) {
        assert!(w[0] < w[1], "slopes {slopes:?}");
    }
}
