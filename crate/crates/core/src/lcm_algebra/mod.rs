//! Subset-indexed gcd/lcm algebra.
//!
//! Positions of a k-tuple are bits `0..k` of a mask; a nonempty subset of
//! positions is a mask in `1..2^k`. All identity checks run at valuation
//! level — factor everything, compare per-prime exponents — so tuples of
//! 64-bit integers never overflow, with widened-integer and big-integer
//! routes as independent cross-checks.

mod decomposition;
mod identity;
mod profiles;

pub use decomposition::{section_products, us_decompose, SectionProducts, UsDecomposition};
pub use identity::{lcm_identity_check, lcm_identity_check_widened, LcmIdentity};
pub use profiles::{
    b_of_profile, count_profiles_at_prime, g_k, g_k_at_prime, pair_index, psi_image_size, psi_map,
    PairProfile, ProfileEnumeration,
};

use crate::arith::{factorize, gcd};
use crate::error::{Error, Result};

pub const MAX_K: usize = 16;

pub(crate) fn check_k(k: usize) -> Result<()> {
    if !(2..=MAX_K).contains(&k) {
        return Err(Error::InvalidInput(format!("k = {k} outside 2..={MAX_K}")));
    }
    Ok(())
}

/// Values indexed by the nonempty subsets of `{0..k}` as bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetFamily {
    k: usize,
    values: Vec<u64>,
}

impl SubsetFamily {
    pub fn from_fn(k: usize, mut f: impl FnMut(u32) -> u64) -> Self {
        let mut values = vec![1u64; 1 << k];
        for mask in 1..(1u32 << k) {
            values[mask as usize] = f(mask);
        }
        SubsetFamily { k, values }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn value(&self, mask: u32) -> u64 {
        debug_assert!(mask > 0 && mask < (1 << self.k));
        self.values[mask as usize]
    }

    /// Nonempty subset masks in ascending order.
    pub fn masks(&self) -> impl Iterator<Item = u32> {
        1..(1u32 << self.k)
    }
}

/// Subset gcds `t_S = gcd{t_i : i in S}` for every nonempty `S`.
pub fn subset_gcds(t: &[u64]) -> Result<SubsetFamily> {
    let k = t.len();
    check_k(k)?;
    if t.contains(&0) {
        return Err(Error::InvalidInput("tuple entries must be positive".into()));
    }
    let mut values = vec![0u64; 1 << k];
    for mask in 1..(1u32 << k) {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        values[mask as usize] = if rest == 0 {
            t[low]
        } else {
            gcd(values[rest as usize], t[low])
        };
    }
    Ok(SubsetFamily { k, values })
}

/// Per-prime exponent vectors of a tuple: the factorization of every entry,
/// merged over the union of primes.
#[derive(Debug, Clone)]
pub(crate) struct TupleValuations {
    /// (prime, exponents per position) with primes strictly increasing.
    pub per_prime: Vec<(u64, Vec<u32>)>,
}

pub(crate) fn tuple_valuations(t: &[u64]) -> Result<TupleValuations> {
    let k = t.len();
    let mut per_prime: Vec<(u64, Vec<u32>)> = Vec::new();
    for (i, &ti) in t.iter().enumerate() {
        if ti == 0 {
            return Err(Error::InvalidInput("tuple entries must be positive".into()));
        }
        for &(p, e) in factorize(ti)?.entries() {
            match per_prime.iter_mut().find(|(q, _)| *q == p) {
                Some((_, exps)) => exps[i] = e,
                None => {
                    let mut exps = vec![0u32; k];
                    exps[i] = e;
                    per_prime.push((p, exps));
                }
            }
        }
    }
    per_prime.sort_unstable_by_key(|&(p, _)| p);
    Ok(TupleValuations { per_prime })
}

/// `min_{i in S} exps[i]` for every nonempty subset mask, by lattice DP.
pub(crate) fn subset_min_exponents(k: usize, exps: &[u32]) -> Vec<u32> {
    let mut min = vec![u32::MAX; 1 << k];
    for mask in 1..(1u32 << k) {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        min[mask as usize] = if rest == 0 {
            exps[low]
        } else {
            min[rest as usize].min(exps[low])
        };
    }
    min
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_gcds_example() {
        let fam = subset_gcds(&[6, 10, 15]).unwrap();
        assert_eq!(fam.value(0b001), 6);
        assert_eq!(fam.value(0b010), 10);
        assert_eq!(fam.value(0b100), 15);
        assert_eq!(fam.value(0b011), 2);
        assert_eq!(fam.value(0b101), 3);
        assert_eq!(fam.value(0b110), 5);
        assert_eq!(fam.value(0b111), 1);
    }

    #[test]
    fn subset_gcds_degenerate() {
        let fam = subset_gcds(&[42, 42, 42, 42]).unwrap();
        for mask in fam.masks() {
            assert_eq!(fam.value(mask), 42);
        }
        let fam = subset_gcds(&[7, 11, 13]).unwrap();
        for mask in fam.masks() {
            if mask.count_ones() >= 2 {
                assert_eq!(fam.value(mask), 1);
            }
        }
    }

    #[test]
    fn k_bounds_enforced() {
        assert!(subset_gcds(&[5]).is_err());
        assert!(subset_gcds(&[1u64; 17]).is_err());
        assert!(subset_gcds(&[0, 1]).is_err());
    }

    #[test]
    fn valuations_merge() {
        let v = tuple_valuations(&[12, 10]).unwrap();
        let primes: Vec<u64> = v.per_prime.iter().map(|&(p, _)| p).collect();
        assert_eq!(primes, vec![2, 3, 5]);
        assert_eq!(v.per_prime[0].1, vec![2, 1]);
        assert_eq!(v.per_prime[1].1, vec![1, 0]);
        assert_eq!(v.per_prime[2].1, vec![0, 1]);
    }

    #[test]
    fn min_exponent_dp() {
        let min = subset_min_exponents(3, &[3, 1, 2]);
        assert_eq!(min[0b001], 3);
        assert_eq!(min[0b011], 1);
        assert_eq!(min[0b101], 2);
        assert_eq!(min[0b111], 1);
    }
}
