//! Acceptance suite: one test per criterion, each printing a pass line.
//! Exact identities are checked in integer/rational arithmetic; empirical
//! trends are pinned to values recorded from a pilot run and re-verified
//! bit-identically.
//!
//! Run with `cargo test -p ostar-cli --test acceptance -- --nocapture`.

use std::process::Command;
use std::time::Instant;

use ostar_core::moments::{
    dyadic_weight_inequality_holds, exponent_fit, markov_check, moment_sum, moment_via_tuples,
    p_k_count, ratio_table, shifted_values, DEFAULT_WORK_BUDGET,
};
use ostar_core::multfunc::{average, average_exact, MultFuncSpec};
use ostar_core::sieves::{omega_star_single, OmegaStarTable, SieveConfig};
use ostar_core::verify::{
    decomposition_campaign, gk_campaign, lcm_identity_campaign, profile_enumeration_campaign,
    psi_campaign,
};

const SEED: u64 = 0xC0FFEE;

fn cfg() -> SieveConfig {
    SieveConfig::default()
}

#[test]
fn criterion_01_moment_tuple_identity() {
    let start = Instant::now();
    for x in [10u64, 50, 100, 200, 500] {
        let table = OmegaStarTable::build(x, &cfg()).unwrap();
        for k in 1..=3 {
            let table_route = moment_sum(&table, k).unwrap().sum;
            let tuple_route = moment_via_tuples(x, k, DEFAULT_WORK_BUDGET, &cfg()).unwrap();
            assert_eq!(table_route, tuple_route, "x={x} k={k}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!(
        "criterion 01 PASS: moment/tuple identity exact for x in {{10,50,100,200,500}}, k in {{1,2,3}} ({elapsed:?})"
    );
}

// Independent slow oracles for criterion 2: trial division only.
fn naive_is_prime(n: u64) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn naive_omega_star(n: u64) -> u64 {
    (1..=n).filter(|d| n.is_multiple_of(*d) && naive_is_prime(d + 1)).count() as u64
}

fn naive_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        naive_gcd(b, a % b)
    }
}

#[test]
fn criterion_02_regression_anchors() {
    // Brute-force values first.
    let values: Vec<u64> = (1..=10).map(naive_omega_star).collect();
    let s1: u64 = values.iter().sum();
    let s2: u64 = values.iter().map(|v| v * v).sum();
    assert_eq!(s1, 19);
    assert_eq!(s2, 45);
    let shifted: Vec<u64> = (2..=11).filter(|&p| naive_is_prime(p)).map(|p| p - 1).collect();
    let mut p2 = 0u64;
    for &a in &shifted {
        for &b in &shifted {
            if a / naive_gcd(a, b) * b <= 10 {
                p2 += 1;
            }
        }
    }
    assert_eq!(p2, 19);
    assert_eq!(values.iter().filter(|&&v| v >= 2).count(), 5);
    assert_eq!(values.iter().filter(|&&v| v >= 3).count(), 4);
    assert_eq!(naive_omega_star(12), 5);

    // The library must reproduce every anchor.
    let table = OmegaStarTable::build(12, &cfg()).unwrap();
    let t10 = OmegaStarTable::build(10, &cfg()).unwrap();
    assert_eq!(moment_sum(&t10, 1).unwrap().sum, 19);
    assert_eq!(moment_sum(&t10, 2).unwrap().sum, 45);
    assert_eq!(p_k_count(10, 2, DEFAULT_WORK_BUDGET, &cfg()).unwrap(), 19);
    let tails = ostar_core::moments::distribution(&t10, &[2, 3]).unwrap();
    assert_eq!(tails[0].count, 5);
    assert_eq!(tails[1].count, 4);
    assert_eq!(table.count(12), 5);
    assert_eq!(omega_star_single(12).unwrap(), 5);
    println!("criterion 02 PASS: regression anchors S_1(10)=19 S_2(10)=45 P_2(10)=19 N(10,2)=5 N(10,3)=4 count(12)=5");
}

#[test]
fn criterion_03_lcm_identity_campaign() {
    let start = Instant::now();
    for k in 2..=6 {
        let report = lcm_identity_campaign(k, 100_000, SEED, 1_000_000_000).unwrap();
        assert!(
            report.passed(),
            "k={k}: {} failures, first {:?}",
            report.failures,
            report.first_counterexample
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}");
    println!(
        "criterion 03 PASS: lcm identity on 5 x 100000 random tuples, zero failures ({elapsed:?})"
    );
}

#[test]
fn criterion_04_decomposition_campaign() {
    let start = Instant::now();
    for k in 2..=6 {
        let report = decomposition_campaign(k, 100_000, SEED, 1_000_000_000).unwrap();
        assert!(
            report.passed(),
            "k={k}: {} failures, first {:?}",
            report.failures,
            report.first_counterexample
        );
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 04 PASS: decomposition integrality/product/reconstruction/coprimality on the same corpus, zero failures ({elapsed:?})"
    );
}

#[test]
fn criterion_05_profile_enumeration() {
    let start = Instant::now();
    let expected = [1u64, 4, 11, 26, 57];
    for (i, k) in (2..=6).enumerate() {
        let report = profile_enumeration_campaign(k, &[2, 3], 2).unwrap();
        assert!(report.passed(), "k={k}: {report:?}");
        let details = report.details.as_ref().unwrap();
        for per_prime in details["per_prime"].as_array().unwrap() {
            assert_eq!(
                per_prime["d_equals_prime"].as_u64().unwrap(),
                expected[i],
                "k={k} p={}",
                per_prime["prime"]
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!(
        "criterion 05 PASS: exhaustive profile counts 1,4,11,26,57 for k=2..6, p in {{2,3}}, exponents <= 2; both D routes agree ({elapsed:?})"
    );
}

#[test]
fn criterion_06_psi_injectivity() {
    for k in 3..=12 {
        let report = psi_campaign(k).unwrap();
        assert!(report.passed(), "k={k}: {report:?}");
        let details = report.details.as_ref().unwrap();
        assert_eq!(
            details["image"].as_u64().unwrap(),
            (1u64 << k) - k as u64 - 1
        );
    }
    println!("criterion 06 PASS: pairwise-minima map injective with image size 2^k-k-1 for k=3..12");
}

#[test]
fn criterion_07_gk_exact() {
    for k in 2..=6 {
        let report = gk_campaign(k, &[2, 3, 5, 7]).unwrap();
        assert!(report.passed(), "k={k}: {report:?}");
    }
    println!(
        "criterion 07 PASS: profile weight sums equal (2^k-k-1)(1-1/p)^(k-1) exactly for k=2..6, p in {{2,3,5,7}}"
    );
}

#[test]
fn criterion_08_markov_at_1e6() {
    let table = OmegaStarTable::build(1_000_000, &cfg()).unwrap();
    let max = table.counts().iter().copied().max().unwrap() as u64;
    let mut grid = vec![];
    let mut y = 2u64;
    while y <= max {
        grid.push(y);
        y *= 2;
    }
    assert!(markov_check(&table, &[1, 2, 3, 4], &grid).unwrap());
    println!(
        "criterion 08 PASS: N(x,y) * y^k <= S_k(x) exactly at x=1e6 for k in {{1..4}}, y in {grid:?}"
    );
}

#[test]
fn criterion_09_dyadic_inequality_at_1e6() {
    let table = OmegaStarTable::build(1_000_000, &cfg()).unwrap();
    for j in 1..=3 {
        assert!(dyadic_weight_inequality_holds(&table, j).unwrap(), "j={j}");
    }
    println!("criterion 09 PASS: level-weight inequality exact at x=1e6 for j in {{1,2,3}}");
}

/// Exact moment sums recorded from the pilot run and re-verified against
/// an independent exchange-of-summation route below.
const PILOT_SUMS: [(u64, [u128; 3]); 4] = [
    (100_000, [343_728, 2_849_314, 42_287_910]),
    (1_000_000, [3_626_869, 35_261_891, 686_388_655]),
    (10_000_000, [37_861_931, 421_296_839, 10_446_388_493]),
    (100_000_000, [392_353_059, 4_907_181_351, 151_596_897_705]),
];

/// Pilot band for S_1(x)/x - ln ln x on the grid.
const PILOT_BAND: (f64, f64) = (0.98, 1.02);

#[test]
fn criterion_10_trend_grid_to_1e8() {
    let start = Instant::now();
    let x_max = 100_000_000u64;
    let table = OmegaStarTable::build(x_max, &cfg()).unwrap();
    assert!(
        table.storage_bytes() <= 250_000_000,
        "table uses {} bytes",
        table.storage_bytes()
    );
    let grid: Vec<u64> = PILOT_SUMS.iter().map(|&(x, _)| x).collect();
    let records = ratio_table(&table, &[1, 2, 3], &grid).unwrap();

    // Bit-identical rerun of the recorded pilot sums.
    for &(x, sums) in &PILOT_SUMS {
        for (ki, &expected) in sums.iter().enumerate() {
            let r = records
                .iter()
                .find(|r| r.x == x && r.k == ki as u32 + 1)
                .unwrap();
            assert_eq!(r.sum, expected, "x={x} k={}", ki + 1);
        }
    }

    // Independent route to S_1 at the full scale: exchange of summation
    // over the shifted primes themselves.
    let shifted = shifted_values(x_max, &cfg()).unwrap();
    for &(x, sums) in &PILOT_SUMS {
        let oracle: u128 = shifted
            .iter()
            .take_while(|&&t| t <= x)
            .map(|&t| (x / t) as u128)
            .sum();
        assert_eq!(oracle, sums[0], "exchange oracle at x={x}");
    }

    // S_1(x)/x - ln ln x stays inside the recorded band.
    for &(x, sums) in &PILOT_SUMS {
        let r = sums[0] as f64 / x as f64 - (x as f64).ln().ln();
        assert!(
            (PILOT_BAND.0..=PILOT_BAND.1).contains(&r),
            "x={x}: drift {r} outside {PILOT_BAND:?}"
        );
    }

    // Fitted growth exponents strictly increase with k.
    let mut slopes = Vec::new();
    for k in 1..=3u32 {
        let group: Vec<_> = records.iter().filter(|r| r.k == k).cloned().collect();
        slopes.push(exponent_fit(&group).unwrap().slope);
    }
    assert!(
        slopes[0] < slopes[1] && slopes[1] < slopes[2],
        "slopes {slopes:?}"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 900, "took {elapsed:?}");
    println!(
        "criterion 10 PASS: pilot sums bit-identical on x=1e5..1e8, drift in {PILOT_BAND:?}, slopes {slopes:?} increasing ({elapsed:?})"
    );
}

#[test]
fn criterion_11_wirsing_calibration() {
    const EULER_MASCHERONI: f64 = 0.5772156649;
    let series = average(&MultFuncSpec::Unit, &[1_000_000], &cfg()).unwrap();
    let (x, sum) = series.points[0];
    let drift = (sum - (x as f64).ln() - EULER_MASCHERONI).abs();
    assert!(drift < 1e-2, "drift {drift}");

    let float = average(&MultFuncSpec::Unit, &[10_000], &cfg()).unwrap().points[0].1;
    let exact = average_exact(&MultFuncSpec::Unit, 10_000, &cfg()).unwrap();
    let exact_f = num::ToPrimitive::to_f64(&exact).unwrap();
    let rel = (float - exact_f).abs() / exact_f;
    assert!(rel <= 1e-12, "relative gap {rel}");
    println!(
        "criterion 11 PASS: harmonic drift {drift:.2e} < 1e-2 at x=1e6; rational/floating gap {rel:.2e} <= 1e-12 at x=1e4"
    );
}

fn run_with_threads(args: &[&str], threads: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_ostar"))
        .args(args)
        .args(["--threads", threads])
        .output()
        .expect("spawn ostar");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn criterion_12_determinism_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    // (artifact name, command args, flag that names the output file)
    let artifacts: [(&str, &[&str], &str); 6] = [
        (
            "moments.csv",
            &["moments", "--x-grid", "1000:100000:10", "--k", "1,2,3"],
            "--out",
        ),
        ("distribution.csv", &["distribution", "--x", "50000"], "--out"),
        ("profile.csv", &["profile", "--x", "50000", "--j", "2"], "--out"),
        (
            "wirsing.csv",
            &["wirsing", "--spec", "tau_l:3", "--x-grid", "1000:100000:10"],
            "--out",
        ),
        (
            "report.json",
            &["verify", "lcm-identity", "--k", "2..4", "--trials", "5000", "--seed", "7"],
            "--out",
        ),
        ("table.omst", &["omega", "--x", "50000"], "--dump"),
    ];
    for (name, args, out_flag) in &artifacts {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "8"] {
            let path = dir.path().join(format!("{threads}-{name}"));
            let path = path.to_str().unwrap();
            let full: Vec<&str> = args.iter().chain(&[*out_flag, path]).copied().collect();
            run_with_threads(&full, threads);
            outputs.push(std::fs::read(path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{name}: 1 vs 4 threads");
        assert_eq!(outputs[0], outputs[2], "{name}: 1 vs 8 threads");
        assert!(!outputs[0].is_empty());
    }
    println!(
        "criterion 12 PASS: byte-identical artifacts (moments, distribution, profile, wirsing, verify, table dump) under 1/4/8 threads"
    );
}
