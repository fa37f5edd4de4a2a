//! Global quantities that are exactly computable from the count table:
//! moments, tuple counts with an lcm bound, the tail distribution, level
//! profiles, and box-constrained prime tuples with prescribed pairwise
//! gcds.
//!
//! The moment/tuple identity is the central cross-check of the crate: the
//! sum of `omega_star(n)^k` over `n <= x` equals the sum of
//! `floor(x / lcm(t_1..t_k))` over ordered k-tuples of shifted primes with
//! lcm at most `x`, and the two sides are computed along fully independent
//! paths.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::arith;
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LineFit};
use crate::lcm_algebra::PairProfile;
use crate::sieves::{OmegaStarTable, PrimeTable, SieveConfig};

/// Default cap on visited enumeration nodes.
pub const DEFAULT_WORK_BUDGET: u64 = 1_000_000_000;

pub const MAX_MOMENT_K: u32 = 8;

/// One exact moment with its normalized ratio
/// `sum / (x * (ln x)^(2^k - k - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRecord {
    pub x: u64,
    pub k: u32,
    pub sum: u128,
    pub ratio: f64,
}

fn growth_exponent(k: u32) -> i32 {
    (1i64 << k) as i32 - k as i32 - 1
}

fn ratio_of(x: u64, k: u32, sum: u128) -> f64 {
    let lx = (x as f64).ln();
    sum as f64 / (x as f64 * lx.powi(growth_exponent(k)))
}

fn check_moment_k(k: u32) -> Result<()> {
    if !(1..=MAX_MOMENT_K).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "moment order {k} outside 1..={MAX_MOMENT_K}"
        )));
    }
    Ok(())
}

/// Exact `sum_{n <= x} omega_star(n)^k` with overflow-checked accumulation.
pub fn moment_sum(table: &OmegaStarTable, k: u32) -> Result<MomentRecord> {
    check_moment_k(k)?;
    let mut sum: u128 = 0;
    for &c in table.counts() {
        let term = (c as u128)
            .checked_pow(k)
            .ok_or(Error::Overflow("moment term"))?;
        sum = sum.checked_add(term).ok_or(Error::Overflow("moment sum"))?;
    }
    Ok(MomentRecord {
        x: table.x(),
        k,
        sum,
        ratio: ratio_of(table.x(), k, sum),
    })
}

/// Moments for every `k` in `ks` at every grid point, in one ascending
/// sweep over the table. The grid must be ascending and end at or below
/// the table size.
pub fn ratio_table(
    table: &OmegaStarTable,
    ks: &[u32],
    x_grid: &[u64],
) -> Result<Vec<MomentRecord>> {
    for k in ks {
        check_moment_k(*k)?;
    }
    if x_grid.is_empty() || x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("x grid must be ascending and nonempty".into()));
    }
    if *x_grid.last().unwrap() > table.x() {
        return Err(Error::InvalidInput(format!(
            "grid point {} exceeds table size {}",
            x_grid.last().unwrap(),
            table.x()
        )));
    }
    let mut sums: Vec<u128> = vec![0; ks.len()];
    let mut out = Vec::with_capacity(ks.len() * x_grid.len());
    let mut next_grid = 0usize;
    for (i, &c) in table.counts().iter().enumerate() {
        let n = i as u64 + 1;
        for (ki, &k) in ks.iter().enumerate() {
            let term = (c as u128)
                .checked_pow(k)
                .ok_or(Error::Overflow("moment term"))?;
            sums[ki] = sums[ki]
                .checked_add(term)
                .ok_or(Error::Overflow("moment sum"))?;
        }
        while next_grid < x_grid.len() && x_grid[next_grid] == n {
            for (ki, &k) in ks.iter().enumerate() {
                out.push(MomentRecord {
                    x: n,
                    k,
                    sum: sums[ki],
                    ratio: ratio_of(n, k, sums[ki]),
                });
            }
            next_grid += 1;
        }
    }
    Ok(out)
}

/// Least-squares slope of `ln(sum / x)` against `ln ln x` over records of
/// one moment order. `None` for degenerate input.
pub fn exponent_fit(records: &[MomentRecord]) -> Option<LineFit> {
    let xs: Vec<f64> = records.iter().map(|r| (r.x as f64).ln().ln()).collect();
    let ys: Vec<f64> = records
        .iter()
        .map(|r| (r.sum as f64 / r.x as f64).ln())
        .collect();
    linear_fit(&xs, &ys)
}

/// The shifted primes `p - 1 <= x`, ascending.
pub fn shifted_values(x: u64, cfg: &SieveConfig) -> Result<Vec<u64>> {
    if x == 0 {
        return Err(Error::InvalidInput("x must be positive".into()));
    }
    let primes = PrimeTable::build(x + 1, cfg)?;
    Ok(primes
        .primes()
        .iter()
        .map(|&p| p - 1)
        .filter(|&t| (1..=x).contains(&t))
        .collect())
}

/// Result of enumerating ordered k-tuples of shifted primes with lcm at
/// most x.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleEnumeration {
    /// Number of ordered tuples.
    pub ordered_count: u64,
    /// `sum floor(x / lcm)` over those tuples.
    pub floor_sum: u128,
    /// DFS nodes visited.
    pub visited: u64,
}

const FACTORIALS: [u64; 9] = [1, 1, 2, 6, 24, 120, 720, 5040, 40320];

struct TupleDfs<'a> {
    values: &'a [u64],
    x: u64,
    k: u32,
    budget: u64,
    global_visited: &'a AtomicU64,
    unsynced: u64,
    local_visited: u64,
    ordered_count: u64,
    floor_sum: u128,
}

impl TupleDfs<'_> {
    fn visit(&mut self) -> Result<()> {
        self.local_visited += 1;
        self.unsynced += 1;
        if self.unsynced == 4096 {
            let seen = self
                .global_visited
                .fetch_add(self.unsynced, Ordering::Relaxed);
            self.unsynced = 0;
            if seen >= self.budget {
                return Err(Error::WorkBudget {
                    visited: self.budget,
                    budget: self.budget,
                });
            }
        }
        Ok(())
    }

    /// `prev` is the index of the last chosen value, `run` the length of
    /// its repetition run, `denom` the product of factorials of all runs
    /// so far.
    fn dfs(&mut self, prev: usize, depth: u32, l: u64, denom: u64, run: u64) -> Result<()> {
        self.visit()?;
        if depth == self.k {
            let perms = FACTORIALS[self.k as usize] / denom;
            self.ordered_count += perms;
            self.floor_sum += perms as u128 * (self.x / l) as u128;
            return Ok(());
        }
        for j in prev..self.values.len() {
            let v = self.values[j];
            let g = arith::gcd(l, v);
            let wide = (l / g) as u128 * v as u128;
            if wide > self.x as u128 {
                continue;
            }
            let (nd, nr) = if j == prev {
                (denom * (run + 1), run + 1)
            } else {
                (denom, 1)
            };
            self.dfs(j, depth + 1, wide as u64, nd, nr)?;
        }
        Ok(())
    }
}

/// Enumerates, by depth-first search over nondecreasing value sequences
/// with running-lcm pruning, all ordered k-tuples of primes whose shifts
/// have lcm at most x. Each canonical sequence is weighted by its number
/// of ordered rearrangements.
pub fn enumerate_tuples(
    x: u64,
    k: u32,
    budget: u64,
    cfg: &SieveConfig,
) -> Result<TupleEnumeration> {
    check_moment_k(k)?;
    let values = shifted_values(x, cfg)?;
    let global_visited = AtomicU64::new(0);
    let branches: Vec<Result<(u64, u128, u64)>> = (0..values.len())
        .into_par_iter()
        .map(|i| {
            let mut dfs = TupleDfs {
                values: &values,
                x,
                k,
                budget,
                global_visited: &global_visited,
                unsynced: 0,
                local_visited: 0,
                ordered_count: 0,
                floor_sum: 0,
            };
            dfs.dfs(i, 1, values[i], 1, 1)?;
            Ok((dfs.ordered_count, dfs.floor_sum, dfs.local_visited))
        })
        .collect();
    let mut out = TupleEnumeration {
        ordered_count: 0,
        floor_sum: 0,
        visited: 0,
    };
    for b in branches {
        let (c, f, v) = b?;
        out.ordered_count += c;
        out.floor_sum = out
            .floor_sum
            .checked_add(f)
            .ok_or(Error::Overflow("floor sum"))?;
        out.visited += v;
    }
    if out.visited > budget {
        return Err(Error::WorkBudget {
            visited: out.visited,
            budget,
        });
    }
    Ok(out)
}

/// Number of ordered k-tuples of primes with lcm of shifts at most x.
pub fn p_k_count(x: u64, k: u32, budget: u64, cfg: &SieveConfig) -> Result<u64> {
    Ok(enumerate_tuples(x, k, budget, cfg)?.ordered_count)
}

/// The tuple-side route to the k-th moment: `sum floor(x / lcm)` over the
/// same tuples. Must equal `moment_sum(..).sum` exactly.
pub fn moment_via_tuples(x: u64, k: u32, budget: u64, cfg: &SieveConfig) -> Result<u128> {
    Ok(enumerate_tuples(x, k, budget, cfg)?.floor_sum)
}

/// `N(x, y) = #{n <= x : omega_star(n) >= y}` at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistributionRecord {
    pub x: u64,
    pub y: u64,
    pub count: u64,
}

/// Exact tail counts for an ascending grid of thresholds.
pub fn distribution(table: &OmegaStarTable, y_grid: &[u64]) -> Result<Vec<DistributionRecord>> {
    if y_grid.is_empty()
        || y_grid.contains(&0)
        || y_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidInput("y grid must be positive and ascending".into()));
    }
    // Histogram once, then suffix sums.
    let max = table.counts().iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0u64; max + 2];
    for &c in table.counts() {
        hist[c as usize] += 1;
    }
    let mut suffix = vec![0u64; max + 3];
    for v in (0..=max + 1).rev() {
        suffix[v] = suffix[v + 1] + hist[v];
    }
    Ok(y_grid
        .iter()
        .map(|&y| DistributionRecord {
            x: table.x(),
            y,
            count: if y as usize > max { 0 } else { suffix[y as usize] },
        })
        .collect())
}

/// Exact Markov consistency: `N(x, y) * y^k <= S_k(x)` for every `k` in
/// `ks` and every `y` in the grid.
pub fn markov_check(table: &OmegaStarTable, ks: &[u32], y_grid: &[u64]) -> Result<bool> {
    let tails = distribution(table, y_grid)?;
    for &k in ks {
        let sk = moment_sum(table, k)?.sum;
        for rec in &tails {
            let holds = match (rec.y as u128)
                .checked_pow(k)
                .and_then(|yk| (rec.count as u128).checked_mul(yk))
            {
                Some(lhs) => lhs <= sk,
                // The product left u128, so the bound forces a zero count.
                None => rec.count == 0,
            };
            if !holds {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One level of the exponential profile: count of `n` with
/// `e^level < omega_star(n) <= e^(level+1)` and its weight
/// `e^(j * level) * count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicLevel {
    pub level: u32,
    pub count: u64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicProfile {
    pub x: u64,
    pub j: u32,
    pub levels: Vec<DyadicLevel>,
    /// Level maximizing the weight: the pigeonhole witness.
    pub argmax_level: Option<u32>,
}

/// Integer level boundaries `floor(e^level)`; a value v > 1 sits at level
/// `l` iff `bounds[l] < v <= bounds[l + 1]`. `e^l` is irrational for
/// l >= 1 and the boundaries stay far below the f64 integer-precision
/// limit, so the floors are exact.
fn level_bounds(max_value: u64) -> Vec<u64> {
    let mut bounds = Vec::new();
    let mut level = 0u32;
    loop {
        let b = (level as f64).exp().floor() as u64;
        bounds.push(b);
        if b > max_value {
            return bounds;
        }
        level += 1;
    }
}

/// Counts of values per exponential level, with weights for the moment
/// order `j`.
pub fn dyadic_profile(table: &OmegaStarTable, j: u32) -> Result<DyadicProfile> {
    if j == 0 {
        return Err(Error::InvalidInput("level profile needs j >= 1".into()));
    }
    let max = table.counts().iter().copied().max().unwrap_or(0) as u64;
    let bounds = level_bounds(max);
    let n_levels = bounds.len().saturating_sub(1);
    let mut counts = vec![0u64; n_levels];
    for &c in table.counts() {
        let v = c as u64;
        if v <= 1 {
            continue;
        }
        // Levels partition (1, inf); the level is the last boundary below v.
        let level = bounds.partition_point(|&b| b < v) - 1;
        counts[level] += 1;
    }
    let levels: Vec<DyadicLevel> = counts
        .iter()
        .enumerate()
        .map(|(l, &c)| DyadicLevel {
            level: l as u32,
            count: c,
            weight: ((j * l as u32) as f64).exp() * c as f64,
        })
        .collect();
    let argmax_level = levels
        .iter()
        .filter(|l| l.count > 0)
        .max_by(|a, b| a.weight.total_cmp(&b.weight))
        .map(|l| l.level);
    Ok(DyadicProfile {
        x: table.x(),
        j,
        levels,
        argmax_level,
    })
}

/// Exact form of the level-weight inequality: every value at level `l` is
/// at most `floor(e^(l+1))`, so the integer sum
/// `sum_l floor(e^(l+1))^j * count_l` dominates `sum omega_star(n)^j` over
/// `n` with `omega_star(n) > 1`. This implies the same inequality with
/// real weights `e^((l+1) j)`.
pub fn dyadic_weight_inequality_holds(table: &OmegaStarTable, j: u32) -> Result<bool> {
    let profile = dyadic_profile(table, j)?;
    let max = table.counts().iter().copied().max().unwrap_or(0) as u64;
    let bounds = level_bounds(max);
    let mut lhs: u128 = 0;
    for level in &profile.levels {
        let cap = bounds[level.level as usize + 1] as u128;
        lhs = lhs
            .checked_add(
                cap.checked_pow(j)
                    .ok_or(Error::Overflow("level cap power"))?
                    .checked_mul(level.count as u128)
                    .ok_or(Error::Overflow("level weight"))?,
            )
            .ok_or(Error::Overflow("level weight sum"))?;
    }
    let mut rhs: u128 = 0;
    for &c in table.counts() {
        if c > 1 {
            rhs += (c as u128).pow(j);
        }
    }
    Ok(lhs >= rhs)
}

/// Count of prime tuples with `p_i` in `boxes[i]` (inclusive bounds) whose
/// shifts have exactly the prescribed pairwise gcds.
pub fn count_profile_tuples(
    boxes: &[(u64, u64)],
    profile: &PairProfile,
    budget: u64,
) -> Result<u64> {
    let k = profile.k();
    if boxes.len() != k {
        return Err(Error::InvalidInput(format!(
            "{} boxes for a profile of k = {k}",
            boxes.len()
        )));
    }
    let mut visited: u64 = 0;
    let mut box_primes: Vec<Vec<u64>> = Vec::with_capacity(k);
    for &(lo, hi) in boxes {
        if lo > hi {
            return Err(Error::InvalidInput(format!("empty box [{lo}, {hi}]")));
        }
        let mut primes = Vec::new();
        for n in lo..=hi {
            visited += 1;
            if visited > budget {
                return Err(Error::WorkBudget { visited: budget, budget });
            }
            if arith::is_prime(n) {
                primes.push(n);
            }
        }
        box_primes.push(primes);
    }

    fn dfs(
        box_primes: &[Vec<u64>],
        profile: &PairProfile,
        chosen: &mut Vec<u64>,
        visited: &mut u64,
        budget: u64,
    ) -> Result<u64> {
        let i = chosen.len();
        if i == box_primes.len() {
            return Ok(1);
        }
        let mut total = 0u64;
        'candidate: for &p in &box_primes[i] {
            *visited += 1;
            if *visited > budget {
                return Err(Error::WorkBudget { visited: budget, budget });
            }
            for (j, &q) in chosen.iter().enumerate() {
                if arith::gcd(q - 1, p - 1) != profile.value(j, i) {
                    continue 'candidate;
                }
            }
            chosen.push(p);
            total += dfs(box_primes, profile, chosen, visited, budget)?;
            chosen.pop();
        }
        Ok(total)
    }

    let mut chosen = Vec::with_capacity(k);
    dfs(&box_primes, profile, &mut chosen, &mut visited, budget)
}
