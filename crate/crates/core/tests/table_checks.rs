//! Exhaustive cross-checks of the tables against independent slow paths.

use ostar_core::arith;
use ostar_core::sieves::{omega_star_single, OmegaStarTable, SieveConfig, SpfTable};

#[test]
fn primality_agrees_with_trial_division_to_1e6() {
    let spf = SpfTable::build(1_000_000, &SieveConfig::default()).unwrap();
    for n in 0..=1_000_000u64 {
        let expected = n >= 2 && spf.is_prime(n);
        assert_eq!(arith::is_prime(n), expected, "n={n}");
    }
}

#[test]
fn tau_2_equals_divisor_count_to_1e4() {
    for n in 1..=10_000u64 {
        let direct = (1..=n).filter(|d| n % d == 0).count() as u128;
        assert_eq!(arith::tau_l(n, 2).unwrap(), direct, "n={n}");
    }
}

#[test]
fn omega_star_two_algorithms_agree_to_1e5() {
    let table = OmegaStarTable::build(100_000, &SieveConfig::default()).unwrap();
    for n in 1..=100_000u64 {
        assert_eq!(
            omega_star_single(n).unwrap(),
            table.count(n) as u64,
            "n={n}"
        );
    }
}

#[test]
fn omega_star_bounded_by_tau_to_1e5() {
    let table = OmegaStarTable::build(100_000, &SieveConfig::default()).unwrap();
    let spf = SpfTable::build(100_000, &SieveConfig::default()).unwrap();
    for n in 2..=100_000u64 {
        let tau: u64 = spf
            .factorize(n)
            .unwrap()
            .entries()
            .iter()
            .map(|&(_, e)| e as u64 + 1)
            .product();
        assert!(table.count(n) as u64 <= tau, "n={n}");
    }
}
