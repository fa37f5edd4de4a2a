//! Averages of nonnegative multiplicative functions: partial sums of
//! `f(n)/n` over a grid, their fitted growth exponent, and shifted-prime
//! analogues summing `f((p-1)/V) / ((p-1)/V)` over primes `p = 1 (mod V)`.
//!
//! Functions are rule-defined at prime powers and evaluated through
//! factorization, so multiplicativity holds by construction. Floating
//! accumulation is compensated and merged in fixed segment order, so a
//! rerun is bit-identical regardless of thread count; an exact-rational
//! path cross-validates the floating path at small scale.

use num::{BigInt, BigRational, One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LineFit};
use crate::sieves::{PrimeTable, SieveConfig, SpfTable};

/// Rule-defined nonnegative multiplicative function, evaluated at prime
/// powers. The value at 1 is 1 for every rule.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MultFuncSpec {
    /// Constantly 1.
    Unit,
    /// Ordered-factorization count `tau_l`.
    TauL { l: u32 },
    /// `(n / phi(n))^s`.
    PhiRatioPower { s: u32 },
    /// 1 on squarefree n, 0 otherwise.
    SquarefreeIndicator,
    /// Pointwise product of rules.
    Product { factors: Vec<MultFuncSpec> },
    /// Explicit values at prime powers `(p, e, value)`; anything not in
    /// the table falls back to `default`, and a miss with no default is a
    /// domain error.
    Custom {
        values: Vec<(u64, u32, f64)>,
        #[serde(default)]
        default: Option<f64>,
    },
}

impl MultFuncSpec {
    /// Value at the prime power `p^e`, `e >= 1`.
    pub fn prime_power_value(&self, p: u64, e: u32) -> Result<f64> {
        Ok(match self {
            MultFuncSpec::Unit => 1.0,
            MultFuncSpec::TauL { l } => {
                arith::binomial((e + l - 1) as u64, (*l as u64).saturating_sub(1))? as f64
            }
            MultFuncSpec::PhiRatioPower { s } => {
                // p^e / phi(p^e) = p / (p - 1) independently of e
                (p as f64 / (p - 1) as f64).powi(*s as i32)
            }
            MultFuncSpec::SquarefreeIndicator => {
                if e == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            MultFuncSpec::Product { factors } => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= f.prime_power_value(p, e)?;
                }
                acc
            }
            MultFuncSpec::Custom { values, default } => values
                .iter()
                .find(|&&(q, f, _)| q == p && f == e)
                .map(|&(_, _, v)| v)
                .or(*default)
                .ok_or_else(|| {
                    Error::InvalidInput(format!("no value for prime power {p}^{e} and no default"))
                })?,
        })
    }

    /// Exact-rational value at a prime power; unsupported for custom
    /// tables, whose entries are floating.
    fn prime_power_value_exact(&self, p: u64, e: u32) -> Result<BigRational> {
        Ok(match self {
            MultFuncSpec::Unit => BigRational::one(),
            MultFuncSpec::TauL { l } => BigRational::from(BigInt::from(arith::binomial(
                (e + l - 1) as u64,
                (*l as u64).saturating_sub(1),
            )?)),
            MultFuncSpec::PhiRatioPower { s } => {
                BigRational::new(BigInt::from(p), BigInt::from(p - 1)).pow(*s as i32)
            }
            MultFuncSpec::SquarefreeIndicator => {
                if e == 1 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }
            MultFuncSpec::Product { factors } => {
                let mut acc = BigRational::one();
                for f in factors {
                    acc *= f.prime_power_value_exact(p, e)?;
                }
                acc
            }
            MultFuncSpec::Custom { .. } => {
                return Err(Error::InvalidInput(
                    "exact evaluation is unsupported for custom tables".into(),
                ))
            }
        })
    }

    fn supports_exact(&self) -> bool {
        match self {
            MultFuncSpec::Custom { .. } => false,
            MultFuncSpec::Product { factors } => factors.iter().all(|f| f.supports_exact()),
            _ => true,
        }
    }
}

/// `f(n)` as the product of prime-power values over the factorization.
pub fn eval(spec: &MultFuncSpec, n: u64) -> Result<f64> {
    let f = arith::factorize(n)?;
    let mut acc = 1.0;
    for &(p, e) in f.entries() {
        acc *= spec.prime_power_value(p, e)?;
    }
    Ok(acc)
}

fn eval_exact(spec: &MultFuncSpec, f: &arith::Factorization) -> Result<BigRational> {
    let mut acc = BigRational::one();
    for &(p, e) in f.entries() {
        acc *= spec.prime_power_value_exact(p, e)?;
    }
    Ok(acc)
}

/// Partial sums `sum_{n <= x} f(n)/n` at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageSeries {
    pub points: Vec<(u64, f64)>,
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

struct SegmentSums {
    /// Compensated total of the segment.
    total: f64,
    /// Partial totals from segment start up to each contained grid point.
    cuts: Vec<(usize, f64)>,
}

/// Streaming accumulation of `sum f(n)/n` by a factorization sweep:
/// segments of `[1, x]` are factored in bulk against the base primes and
/// summed with compensation, then merged in segment order.
pub fn average(spec: &MultFuncSpec, x_grid: &[u64], cfg: &SieveConfig) -> Result<AverageSeries> {
    if x_grid.is_empty() || x_grid.contains(&0) || x_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidInput("x grid must be positive and ascending".into()));
    }
    let x_max = *x_grid.last().unwrap();
    let root = (x_max as f64).sqrt() as u64 + 1;
    let base = PrimeTable::build(root.max(2), cfg)?;
    let seg = cfg.segment_len as u64;
    let n_segments = ((x_max - 1) / seg + 1) as usize;

    let segments: Vec<Result<SegmentSums>> = (0..n_segments)
        .into_par_iter()
        .map(|si| {
            let lo = 1 + si as u64 * seg;
            let hi = (lo + seg).min(x_max + 1);
            let len = (hi - lo) as usize;
            let mut rem: Vec<u64> = (lo..hi).collect();
            let mut val = vec![1.0f64; len];
            for &p in base.primes() {
                if p >= hi {
                    break;
                }
                let mut m = lo.div_ceil(p) * p;
                while m < hi {
                    let idx = (m - lo) as usize;
                    let mut e = 0u32;
                    while rem[idx].is_multiple_of(p) {
                        rem[idx] /= p;
                        e += 1;
                    }
                    val[idx] *= spec.prime_power_value(p, e)?;
                    m += p;
                }
            }
            let mut acc = Compensated::default();
            let mut cuts = Vec::new();
            for i in 0..len {
                let n = lo + i as u64;
                let mut f = val[i];
                if rem[i] > 1 {
                    f *= spec.prime_power_value(rem[i], 1)?;
                }
                acc.add(f / n as f64);
                if let Ok(gi) = x_grid.binary_search(&n) {
                    cuts.push((gi, acc.total()));
                }
            }
            Ok(SegmentSums {
                total: acc.total(),
                cuts,
            })
        })
        .collect();

    let mut points = vec![(0u64, 0.0f64); x_grid.len()];
    let mut running = Compensated::default();
    for s in segments {
        let s = s?;
        for (gi, partial) in s.cuts {
            points[gi] = (x_grid[gi], running.total() + partial);
        }
        running.add(s.total);
    }
    Ok(AverageSeries { points })
}

/// Exact-rational partial sum `sum_{n <= x} f(n)/n` for small `x`,
/// cross-validating the floating path. Terms are merged pairwise to keep
/// the intermediate fractions balanced.
pub fn average_exact(spec: &MultFuncSpec, x: u64, cfg: &SieveConfig) -> Result<BigRational> {
    const EXACT_LIMIT: u64 = 100_000;
    if x == 0 || x > EXACT_LIMIT {
        return Err(Error::InvalidInput(format!(
            "exact averages support 1 <= x <= {EXACT_LIMIT}"
        )));
    }
    if !spec.supports_exact() {
        return Err(Error::InvalidInput(
            "exact evaluation is unsupported for custom tables".into(),
        ));
    }
    let spf = if x >= 2 {
        Some(SpfTable::build(x, cfg)?)
    } else {
        None
    };
    let mut terms: Vec<BigRational> = Vec::with_capacity(x as usize);
    for n in 1..=x {
        let f = match &spf {
            Some(t) => t.factorize(n)?,
            None => arith::factorize(n)?,
        };
        let v = eval_exact(spec, &f)?;
        terms.push(v / BigRational::from(BigInt::from(n)));
    }
    fn tree_sum(terms: &[BigRational]) -> BigRational {
        match terms.len() {
            0 => BigRational::zero(),
            1 => terms[0].clone(),
            n => tree_sum(&terms[..n / 2]) + tree_sum(&terms[n / 2..]),
        }
    }
    Ok(tree_sum(&terms))
}

/// Least-squares slope of `ln(partial sum)` against `ln ln x`. Rejected
/// for fewer than two points or a constant series.
pub fn kappa_fit(series: &AverageSeries) -> Option<LineFit> {
    let xs: Vec<f64> = series
        .points
        .iter()
        .map(|&(x, _)| (x as f64).ln().ln())
        .collect();
    let ys: Vec<f64> = series.points.iter().map(|&(_, s)| s.ln()).collect();
    linear_fit(&xs, &ys)
}

/// `sum f((p-1)/V) / ((p-1)/V)` over primes `p <= x` with `p = 1 (mod V)`,
/// by direct sieve enumeration. Blocks of primes are summed in fixed
/// order, so the result is thread-count independent.
pub fn shifted_prime_average(
    spec: &MultFuncSpec,
    x: u64,
    modulus: u64,
    cfg: &SieveConfig,
) -> Result<f64> {
    if modulus == 0 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    if x < 2 {
        return Ok(0.0);
    }
    let primes = PrimeTable::build(x, cfg)?;
    let eligible: Vec<u64> = primes
        .primes()
        .iter()
        .copied()
        .filter(|&p| (p - 1) % modulus == 0 && p > modulus)
        .collect();
    const BLOCK: usize = 1 << 16;
    let blocks: Vec<Result<f64>> = eligible
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut acc = Compensated::default();
            for &p in chunk {
                let q = (p - 1) / modulus;
                acc.add(eval(spec, q)? / q as f64);
            }
            Ok(acc.total())
        })
        .collect();
    let mut acc = Compensated::default();
    for b in blocks {
        acc.add(b?);
    }
    Ok(acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(eval(&MultFuncSpec::Unit, 987).unwrap(), 1.0);
        let t3 = MultFuncSpec::TauL { l: 3 };
        assert_eq!(eval(&t3, 4).unwrap(), 6.0);
        assert_eq!(eval(&t3, 1).unwrap(), 1.0);
        let phi2 = MultFuncSpec::PhiRatioPower { s: 2 };
        assert_eq!(eval(&phi2, 4).unwrap(), 4.0); // (4/2)^2
        let sq = MultFuncSpec::SquarefreeIndicator;
        assert_eq!(eval(&sq, 30).unwrap(), 1.0);
        assert_eq!(eval(&sq, 12).unwrap(), 0.0);
    }

    #[test]
    fn eval_is_multiplicative_on_coprime_pairs() {
        let specs = [
            MultFuncSpec::Unit,
            MultFuncSpec::TauL { l: 4 },
            MultFuncSpec::PhiRatioPower { s: 2 },
            MultFuncSpec::SquarefreeIndicator,
            MultFuncSpec::Product {
                factors: vec![MultFuncSpec::TauL { l: 2 }, MultFuncSpec::SquarefreeIndicator],
            },
        ];
        for spec in &specs {
            for (m, n) in [(4u64, 9u64), (8, 15), (25, 77), (1, 42)] {
                assert_eq!(arith::gcd(m, n), 1);
                let lhs = eval(spec, m * n).unwrap();
                let rhs = eval(spec, m).unwrap() * eval(spec, n).unwrap();
                assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()), "{spec:?} {m} {n}");
            }
        }
    }

    #[test]
    fn custom_table_lookup_and_miss() {
        let c = MultFuncSpec::Custom {
            values: vec![(2, 1, 5.0), (3, 2, 7.0)],
            default: Some(0.0),
        };
        assert_eq!(eval(&c, 2).unwrap(), 5.0);
        assert_eq!(eval(&c, 9).unwrap(), 7.0);
        assert_eq!(eval(&c, 5).unwrap(), 0.0);
        let strict = MultFuncSpec::Custom {
            values: vec![(2, 1, 5.0)],
            default: None,
        };
        assert!(eval(&strict, 3).is_err());
    }

    #[test]
    fn json_wire_format() {
        let spec: MultFuncSpec = serde_json::from_str(r#"{"rule":"tau_l","l":4}"#).unwrap();
        assert_eq!(spec, MultFuncSpec::TauL { l: 4 });
        let spec: MultFuncSpec =
            serde_json::from_str(r#"{"rule":"phi_ratio_power","s":2}"#).unwrap();
        assert_eq!(spec, MultFuncSpec::PhiRatioPower { s: 2 });
        let spec: MultFuncSpec = serde_json::from_str(
            r#"{"rule":"product","factors":[{"rule":"unit"},{"rule":"squarefree_indicator"}]}"#,
        )
        .unwrap();
        assert!(matches!(spec, MultFuncSpec::Product { .. }));
        let spec: MultFuncSpec =
            serde_json::from_str(r#"{"rule":"custom","values":[[2,1,0.5]],"default":0}"#).unwrap();
        assert_eq!(
            spec,
            MultFuncSpec::Custom {
                values: vec![(2, 1, 0.5)],
                default: Some(0.0)
            }
        );
    }

    #[test]
    fn harmonic_partial_sum() {
        let cfg = SieveConfig::default();
        let exact = average_exact(&MultFuncSpec::Unit, 10, &cfg).unwrap();
        assert_eq!(exact, BigRational::new(BigInt::from(7381), BigInt::from(2520)));
        let series = average(&MultFuncSpec::Unit, &[10], &cfg).unwrap();
        let expect = 7381.0 / 2520.0;
        assert!((series.points[0].1 - expect).abs() < 1e-14);
    }

    #[test]
    fn exact_vs_floating_small() {
        let cfg = SieveConfig::default();
        for spec in [
            MultFuncSpec::Unit,
            MultFuncSpec::TauL { l: 3 },
            MultFuncSpec::PhiRatioPower { s: 1 },
        ] {
            let float = average(&spec, &[2000], &cfg).unwrap().points[0].1;
            let exact = average_exact(&spec, 2000, &cfg).unwrap();
            let exact_f = num::ToPrimitive::to_f64(&exact).unwrap();
            assert!((float - exact_f).abs() <= 1e-12 * exact_f.abs(), "{spec:?}");
        }
    }

    #[test]
    fn constant_series_rejected_by_fit() {
        let cfg = SieveConfig::default();
        // f(p^e) = 0 everywhere: only n = 1 contributes, series constant 1.
        let dead = MultFuncSpec::Custom {
            values: vec![],
            default: Some(0.0),
        };
        let series = average(&dead, &[10, 100, 1000], &cfg).unwrap();
        for &(_, s) in &series.points {
            assert_eq!(s, 1.0);
        }
        assert!(kappa_fit(&series).is_none());
    }

    #[test]
    fn average_deterministic_across_threads_and_segments() {
        let grid = [10u64, 1000, 30_000];
        let reference = average(&MultFuncSpec::TauL { l: 2 }, &grid, &SieveConfig::default()).unwrap();
        let cfg_small = SieveConfig {
            segment_len: 1 << 22, // segment length is part of the config "shape"
            ..SieveConfig::default()
        };
        for threads in [1usize, 4, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let got = pool.install(|| average(&MultFuncSpec::TauL { l: 2 }, &grid, &cfg_small).unwrap());
            assert_eq!(got.points, reference.points); // bit-identical
        }
    }

    #[test]
    fn shifted_average_examples() {
        let cfg = SieveConfig::default();
        // primes 2,3,5,7: 1/1 + 1/2 + 1/4 + 1/6
        let v1 = shifted_prime_average(&MultFuncSpec::Unit, 10, 1, &cfg).unwrap();
        assert!((v1 - 23.0 / 12.0).abs() < 1e-14);
        // odd primes <= 10 with (p-1)/2 in {1,2,3}
        let v2 = shifted_prime_average(&MultFuncSpec::Unit, 10, 2, &cfg).unwrap();
        assert!((v2 - 11.0 / 6.0).abs() < 1e-14);
        // modulus beyond x - 1: empty sum
        let v3 = shifted_prime_average(&MultFuncSpec::Unit, 10, 100, &cfg).unwrap();
        assert_eq!(v3, 0.0);
    }

    #[test]
    fn shifted_average_grows_with_l() {
        let cfg = SieveConfig::default();
        let sums: Vec<f64> = (2..=5)
            .map(|l| shifted_prime_average(&MultFuncSpec::TauL { l }, 20_000, 1, &cfg).unwrap())
            .collect();
        for w in sums.windows(2) {
            assert!(w[0] < w[1]);
        }
    }
}
