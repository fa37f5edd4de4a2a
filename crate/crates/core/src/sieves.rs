//! Bulk tables over `[1, x]`: primes, smallest prime factors, and the
//! table of shifted-prime divisor counts that drives all moment
//! computations.
//!
//! Construction is segmented so the working set stays bounded, and
//! segment-parallel: every cell is computed independently of schedule, so
//! the finished tables are bit-identical for any thread count.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::arith::{self, Factorization};
use crate::error::{Error, Result};

/// Segment length and memory budget for table construction.
#[derive(Debug, Clone, Copy)]
pub struct SieveConfig {
    /// Numbers per construction segment.
    pub segment_len: usize,
    /// Upper bound on the dominant allocations, in bytes.
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_len: 1 << 22,
            memory_budget: 3 << 30,
        }
    }
}

fn check_budget(required: u64, cfg: &SieveConfig) -> Result<()> {
    if required > cfg.memory_budget {
        return Err(Error::MemoryBudget {
            required,
            budget: cfg.memory_budget,
        });
    }
    Ok(())
}

/// All primes up to `limit`, in increasing order.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn build(limit: u64, cfg: &SieveConfig) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidInput(format!("prime table limit {limit} < 2")));
        }
        // ~1.26 n / ln n overshoots pi(n) for n >= 17.
        let est = if limit < 17 {
            8
        } else {
            (1.26 * limit as f64 / (limit as f64).ln()) as u64
        };
        check_budget(est * 8 + cfg.segment_len as u64, cfg)?;

        let root = (limit as f64).sqrt() as u64 + 1;
        let base = simple_sieve(root.max(2));

        let seg = cfg.segment_len as u64;
        let n_segments = ((limit - 1) / seg + 1) as usize; // covers [2, limit]
        let mut chunks: Vec<Vec<u64>> = Vec::new();
        (0..n_segments)
            .into_par_iter()
            .map(|i| {
                let lo = (2 + i as u64 * seg).min(limit + 1);
                let hi = (lo + seg).min(limit + 1);
                sieve_segment(&base, lo, hi)
            })
            .collect_into_vec(&mut chunks);
        let primes = chunks.concat();
        Ok(PrimeTable { limit, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Membership test for `n <= limit`.
    pub fn contains(&self, n: u64) -> bool {
        debug_assert!(n <= self.limit);
        self.primes.binary_search(&n).is_ok()
    }
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for n in 2..=limit {
        if !composite[n] {
            primes.push(n as u64);
            let mut m = n * n;
            while m <= limit {
                composite[m] = true;
                m += n;
            }
        }
    }
    primes
}

/// Primes in `[lo, hi)` given base primes covering sqrt(hi).
fn sieve_segment(base: &[u64], lo: u64, hi: u64) -> Vec<u64> {
    if lo >= hi {
        return Vec::new();
    }
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p >= hi {
            break;
        }
        let start = (lo.div_ceil(p) * p).max(p * p);
        let mut m = start;
        while m < hi {
            composite[(m - lo) as usize] = true;
            m += p;
        }
    }
    (0..len)
        .filter(|&i| !composite[i] && lo + i as u64 >= 2)
        .map(|i| lo + i as u64)
        .collect()
}

/// Smallest prime factor for every integer in `[2, limit]`.
#[derive(Debug, Clone)]
pub struct SpfTable {
    limit: u64,
    // spf[n] == 0 encodes "n is prime" to avoid redundant writes.
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn build(limit: u64, cfg: &SieveConfig) -> Result<Self> {
        if limit < 2 {
            return Err(Error::InvalidInput(format!("spf table limit {limit} < 2")));
        }
        if limit >= u32::MAX as u64 {
            return Err(Error::InvalidInput("spf table limited to u32 range".into()));
        }
        check_budget(4 * (limit + 1), cfg)?;
        let root = (limit as f64).sqrt() as u64 + 1;
        let base = simple_sieve(root.max(2));

        let mut spf = vec![0u32; limit as usize + 1];
        spf[2..]
            .par_chunks_mut(cfg.segment_len)
            .enumerate()
            .for_each(|(i, chunk)| {
                let lo = 2 + (i * cfg.segment_len) as u64;
                let hi = lo + chunk.len() as u64;
                for &p in &base {
                    if p * p >= hi {
                        break;
                    }
                    let start = (lo.div_ceil(p) * p).max(p * p);
                    let mut m = start;
                    while m < hi {
                        let slot = &mut chunk[(m - lo) as usize];
                        if *slot == 0 {
                            *slot = p as u32;
                        }
                        m += p;
                    }
                }
            });
        Ok(SpfTable { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> u64 {
        debug_assert!((2..=self.limit).contains(&n));
        match self.spf[n as usize] {
            0 => n,
            p => p as u64,
        }
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf(n) == n
    }

    /// Factorization by repeated smallest-factor division.
    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 {
            return Err(Error::InvalidInput("factorize(0)".into()));
        }
        if n > self.limit {
            return Err(Error::InvalidInput(format!(
                "{n} exceeds spf table limit {}",
                self.limit
            )));
        }
        let mut rem = n;
        let mut entries = Vec::new();
        while rem > 1 {
            let p = self.spf(rem);
            let mut e = 0;
            while rem.is_multiple_of(p) {
                rem /= p;
                e += 1;
            }
            entries.push((p, e));
        }
        Ok(Factorization::from_entries(entries))
    }
}

/// Factorize through the table when one is supplied and covers `n`,
/// otherwise through the general 64-bit path.
pub fn factorize(n: u64, spf: Option<&SpfTable>) -> Result<Factorization> {
    match spf {
        Some(t) if n >= 1 && n <= t.limit() => t.factorize(n),
        _ => arith::factorize(n),
    }
}

const OMEGA_MAGIC: &[u8; 4] = b"OMST";
const OMEGA_VERSION: u32 = 1;

/// Per-integer counts of shifted-prime divisors over `[1, x]`:
/// `count(n) = #{d | n : d + 1 prime}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaStarTable {
    x: u64,
    // counts[0] is unused padding so counts[n] indexes directly by n.
    counts: Vec<u16>,
}

impl OmegaStarTable {
    /// Builds the table by striding multiples of each shifted prime
    /// `t = p - 1` with `p <= x + 1`, one increment per `(t, n)` pair.
    /// `p = 2` contributes the stride-1 divisor `d = 1` like every other
    /// prime, so `count(n) >= 1` throughout.
    pub fn build(x: u64, cfg: &SieveConfig) -> Result<Self> {
        if x < 1 {
            return Err(Error::InvalidInput("omega table needs x >= 1".into()));
        }
        check_budget(2 * (x + 1) + x / 2, cfg)?;
        let primes = PrimeTable::build(x + 1, cfg)?;
        Self::build_with_primes(x, &primes, cfg)
    }

    pub fn build_with_primes(x: u64, primes: &PrimeTable, cfg: &SieveConfig) -> Result<Self> {
        if primes.limit() < x + 1 {
            return Err(Error::InvalidInput(format!(
                "prime table limit {} < x+1 = {}",
                primes.limit(),
                x + 1
            )));
        }
        check_budget(2 * (x + 1), cfg)?;
        let mut counts = vec![0u16; x as usize + 1];
        let shifted: Vec<u64> = primes
            .primes()
            .iter()
            .map(|&p| p - 1)
            .filter(|&t| t >= 1 && t <= x)
            .collect();

        counts[1..]
            .par_chunks_mut(cfg.segment_len)
            .enumerate()
            .try_for_each(|(i, chunk)| -> Result<()> {
                let lo = 1 + (i * cfg.segment_len) as u64;
                let hi = lo + chunk.len() as u64;
                for &t in &shifted {
                    if t >= hi {
                        break;
                    }
                    let mut m = lo.div_ceil(t) * t;
                    while m < hi {
                        let slot = &mut chunk[(m - lo) as usize];
                        *slot = slot
                            .checked_add(1)
                            .ok_or(Error::Overflow("omega_star counter"))?;
                        m += t;
                    }
                }
                Ok(())
            })?;
        Ok(OmegaStarTable { x, counts })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    /// `omega_star(n)` for `1 <= n <= x`.
    pub fn count(&self, n: u64) -> u16 {
        debug_assert!((1..=self.x).contains(&n));
        self.counts[n as usize]
    }

    /// Counters for `n = 1..=x`.
    pub fn counts(&self) -> &[u16] {
        &self.counts[1..]
    }

    /// Largest counter and the smallest n attaining it.
    pub fn max_and_argmax(&self) -> (u16, u64) {
        let mut best = (0u16, 1u64);
        for (i, &c) in self.counts[1..].iter().enumerate() {
            if c > best.0 {
                best = (c, i as u64 + 1);
            }
        }
        best
    }

    /// Rough size of the backing storage in bytes.
    pub fn storage_bytes(&self) -> u64 {
        2 * self.counts.len() as u64
    }

    /// Little-endian dump: magic `OMST`, version u32, x u64, then x
    /// 16-bit counters.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(OMEGA_MAGIC)?;
        w.write_all(&OMEGA_VERSION.to_le_bytes())?;
        w.write_all(&self.x.to_le_bytes())?;
        let mut buf = Vec::with_capacity(2 << 20);
        for chunk in self.counts[1..].chunks(1 << 20) {
            buf.clear();
            for &c in chunk {
                buf.extend_from_slice(&c.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != OMEGA_MAGIC {
            return Err(Error::BadDump(format!("bad magic {magic:?}")));
        }
        let mut w32 = [0u8; 4];
        r.read_exact(&mut w32)?;
        let version = u32::from_le_bytes(w32);
        if version != OMEGA_VERSION {
            return Err(Error::BadDump(format!("unsupported version {version}")));
        }
        let mut w64 = [0u8; 8];
        r.read_exact(&mut w64)?;
        let x = u64::from_le_bytes(w64);
        if x < 1 {
            return Err(Error::BadDump("x < 1".into()));
        }
        let mut counts = vec![0u16; x as usize + 1];
        let mut buf = vec![0u8; 2 * x as usize];
        r.read_exact(&mut buf)?;
        if r.read(&mut w32)? != 0 {
            return Err(Error::BadDump("trailing bytes".into()));
        }
        for (i, b) in buf.chunks_exact(2).enumerate() {
            counts[i + 1] = u16::from_le_bytes([b[0], b[1]]);
        }
        Ok(OmegaStarTable { x, counts })
    }

    pub fn dump_to_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.dump(std::io::BufWriter::new(f))
    }

    pub fn load_from_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(f))
    }
}

/// `omega_star(n)` for a single 64-bit `n`, by enumerating all divisors of
/// `n` and testing `d + 1` for primality. Independent of the table path.
pub fn omega_star_single(n: u64) -> Result<u64> {
    let f = arith::factorize(n)?;
    Ok(f.divisors()
        .into_iter()
        .filter(|&d| d.checked_add(1).is_some_and(arith::is_prime))
        .count() as u64)
}
