//! Scalar arithmetic primitives: gcd/lcm with overflow reporting, 64-bit
//! factorization, divisor enumeration, classical arithmetic functions and
//! deterministic primality testing.

use crate::error::{Error, Result};

/// Greatest common divisor. `gcd(0, b) = b` so folds start cleanly, but all
/// callers in this crate pass positive integers.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Least common multiple in widened arithmetic. `a, b < 2^64` so the product
/// `(a / gcd) * b` always fits a `u128`.
pub fn lcm(a: u64, b: u64) -> u128 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b)) as u128 * b as u128
}

/// `lcm` that must fit back into a `u64`; overflow is a reported failure.
pub fn checked_lcm_u64(a: u64, b: u64) -> Result<u64> {
    let l = lcm(a, b);
    u64::try_from(l).map_err(|_| Error::Overflow("lcm"))
}

/// Left fold of `lcm` over many arguments with intermediate gcd reduction.
/// Aborts with a range error if the running value leaves `u128`.
pub fn lcm_many(values: &[u64]) -> Result<u128> {
    let mut acc: u128 = 1;
    for &v in values {
        if v == 0 {
            return Err(Error::InvalidInput("lcm of 0".into()));
        }
        let g = gcd_u128(acc, v as u128);
        acc = (acc / g)
            .checked_mul(v as u128)
            .ok_or(Error::Overflow("lcm fold"))?;
    }
    Ok(acc)
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Binomial coefficient in widened arithmetic with overflow detection.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // Multiply first, then divide; the intermediate product of i
        // consecutive integers is divisible by i!.
        acc = acc
            .checked_mul((n - k + i) as u128)
            .ok_or(Error::Overflow("binomial"))?;
        acc /= i as u128;
    }
    Ok(acc)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Witness set valid for every n < 2^64 (deterministic Miller–Rabin).
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic primality test for the full 64-bit range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in MR_WITNESSES.iter() {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime/exponent list with primes strictly increasing and exponents >= 1.
/// The empty list represents 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    entries: Vec<(u64, u32)>,
}

impl Factorization {
    /// Builds from raw entries; sorts and merges duplicates.
    pub fn from_entries(mut entries: Vec<(u64, u32)>) -> Self {
        entries.retain(|&(_, e)| e > 0);
        entries.sort_unstable_by_key(|&(p, _)| p);
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(entries.len());
        for (p, e) in entries {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        Factorization { entries: merged }
    }

    pub fn one() -> Self {
        Factorization { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[(u64, u32)] {
        &self.entries
    }

    pub fn is_one(&self) -> bool {
        self.entries.is_empty()
    }

    /// The represented integer, in widened arithmetic.
    pub fn value(&self) -> u128 {
        self.entries
            .iter()
            .fold(1u128, |acc, &(p, e)| acc * (p as u128).pow(e))
    }

    /// Exponent of `p` in the represented integer.
    pub fn exponent_of(&self, p: u64) -> u32 {
        self.entries
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// All divisors, in no particular order. The count is `tau(n)`, which is
    /// at most ~1.1e5 over the 64-bit range.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs: Vec<u64> = vec![1];
        for &(p, e) in &self.entries {
            let prev = divs.len();
            let mut pk: u64 = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..prev {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs
    }

    pub fn euler_phi(&self) -> u64 {
        self.entries
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e - 1) * (p - 1))
    }

    pub fn mobius(&self) -> i8 {
        if self.entries.iter().any(|&(_, e)| e > 1) {
            0
        } else if self.entries.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Number of ordered `l`-tuples of positive integers with product `n`:
    /// the product over prime powers `p^e || n` of `C(e + l - 1, l - 1)`.
    pub fn tau_l(&self, l: u32) -> Result<u128> {
        let mut acc: u128 = 1;
        for &(_, e) in &self.entries {
            let c = binomial((e + l - 1) as u64, (l - 1) as u64)?;
            acc = acc.checked_mul(c).ok_or(Error::Overflow("tau_l"))?;
        }
        Ok(acc)
    }
}

/// Deterministic Brent-cycle factor of an odd composite `n` with no prime
/// factor below the trial-division bound.
#[allow(unused_assignments)]
fn brent_rho(n: u64) -> u64 {
    // Incrementing the polynomial offset keeps the search deterministic.
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut ys = 2u64;
        let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
        let mut g;
        'outer: loop {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r {
                ys = y;
                let m = 128.min(r - k);
                for _ in 0..m {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                if g != 1 {
                    break 'outer;
                }
                k += m;
            }
            r *= 2;
        }
        if g == n {
            // Backtrack one step at a time.
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g != 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("composite input always yields a factor")
}

fn factor_into(n: u64, out: &mut Vec<(u64, u32)>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push((n, 1));
        return;
    }
    let d = brent_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Full factorization of a 64-bit integer: trial division by small primes,
/// then deterministic primality splitting of the remaining cofactor.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::InvalidInput("factorize(0)".into()));
    }
    let mut rem = n;
    let mut entries: Vec<(u64, u32)> = Vec::new();
    for p in TRIAL_PRIMES {
        if p * p > rem {
            break;
        }
        if rem.is_multiple_of(p) {
            let mut e = 0;
            while rem.is_multiple_of(p) {
                rem /= p;
                e += 1;
            }
            entries.push((p, e));
        }
    }
    if rem > 1 {
        if rem < TRIAL_LIMIT * TRIAL_LIMIT || is_prime(rem) {
            entries.push((rem, 1));
        } else {
            factor_into(rem, &mut entries);
        }
    }
    Ok(Factorization::from_entries(entries))
}

const TRIAL_LIMIT: u64 = 100;
const TRIAL_PRIMES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97,
];

pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factorize(n)?.euler_phi())
}

pub fn mobius(n: u64) -> Result<i8> {
    Ok(factorize(n)?.mobius())
}

pub fn tau_l(n: u64, l: u32) -> Result<u128> {
    factorize(n)?.tau_l(l)
}

/// Divisor count `tau(n) = tau_2(n)`.
pub fn tau(n: u64) -> Result<u64> {
    Ok(factorize(n)?
        .entries()
        .iter()
        .fold(1u64, |acc, &(_, e)| acc * (e as u64 + 1)))
}
