//! Pairwise-gcd profiles: the `C(k,2)`-tuple of prescribed gcds
//! `m_{ij} = gcd(t_i - , t_j -)` of a tuple, the consistency condition that
//! characterizes realizable profiles, the alternating-product evaluation of
//! `D(m)` against the plain lcm, and the exhaustive enumeration of
//! prime-power profiles.

use std::collections::HashSet;

use num::{BigInt, BigRational, BigUint, One, Zero};

use crate::arith::{factorize, gcd};
use crate::error::{Error, Result};

use super::check_k;

/// Index of the unordered pair `{i, j}` with `i < j` in the canonical
/// lower-triangular layout.
pub fn pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

/// Prescribed pairwise gcds of a k-tuple, one positive value per unordered
/// pair of positions (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairProfile {
    k: usize,
    m: Vec<u64>,
}

impl PairProfile {
    /// Values in canonical pair order: (0,1), (0,2), (1,2), (0,3), ...
    pub fn new(k: usize, m: Vec<u64>) -> Result<Self> {
        check_k(k)?;
        if m.len() != k * (k - 1) / 2 {
            return Err(Error::InvalidInput(format!(
                "profile for k = {k} needs {} values, got {}",
                k * (k - 1) / 2,
                m.len()
            )));
        }
        if m.contains(&0) {
            return Err(Error::InvalidInput("profile values must be positive".into()));
        }
        Ok(PairProfile { k, m })
    }

    /// The profile of an explicit tuple: `m_{ij} = gcd(t_i, t_j)`.
    pub fn from_tuple(t: &[u64]) -> Result<Self> {
        let k = t.len();
        check_k(k)?;
        if t.contains(&0) {
            return Err(Error::InvalidInput("tuple entries must be positive".into()));
        }
        let mut m = vec![0u64; k * (k - 1) / 2];
        for j in 1..k {
            for i in 0..j {
                m[pair_index(i, j)] = gcd(t[i], t[j]);
            }
        }
        Ok(PairProfile { k, m })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[u64] {
        &self.m
    }

    /// Value at an unordered pair; argument order does not matter.
    pub fn value(&self, i: usize, j: usize) -> u64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.m[pair_index(i, j)]
    }

    /// Consistency: whenever two pairs of pairs have equal unions, their
    /// gcds agree. Unions of size 3 come from overlapping pairs inside a
    /// triple, unions of size 4 from the three pairings of a quadruple;
    /// unions of size 2 are trivial. Vacuously true for k = 2.
    pub fn is_consistent(&self) -> bool {
        let k = self.k;
        for c in 2..k {
            for b in 1..c {
                for a in 0..b {
                    let x = self.value(a, b);
                    let y = self.value(a, c);
                    let z = self.value(b, c);
                    let g = gcd(x, y);
                    if g != gcd(x, z) || g != gcd(y, z) {
                        return false;
                    }
                }
            }
        }
        for d in 3..k {
            for c in 2..d {
                for b in 1..c {
                    for a in 0..b {
                        let g = gcd(self.value(a, b), self.value(c, d));
                        if g != gcd(self.value(a, c), self.value(b, d))
                            || g != gcd(self.value(a, d), self.value(b, c))
                        {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// `m_S = gcd{m_{ij} : i, j in S}` for a subset mask with at least two
    /// positions.
    pub fn subset_value(&self, mask: u32) -> u64 {
        debug_assert!(mask.count_ones() >= 2);
        let mut acc = 0u64;
        for j in 1..self.k {
            if mask & (1 << j) == 0 {
                continue;
            }
            for i in 0..j {
                if mask & (1 << i) != 0 {
                    acc = gcd(acc, self.value(i, j));
                }
            }
        }
        acc
    }

    /// `M_i`: lcm of all pair values at pairs containing position `i`.
    pub fn big_m(&self, i: usize) -> Result<u64> {
        let mut acc: u128 = 1;
        for j in 0..self.k {
            if j == i {
                continue;
            }
            let v = self.value(i, j) as u128;
            let mut a = acc;
            let mut b = v;
            while b != 0 {
                let r = a % b;
                a = b;
                b = r;
            }
            acc = (acc / a).checked_mul(v).ok_or(Error::Overflow("M_i"))?;
        }
        u64::try_from(acc).map_err(|_| Error::Overflow("M_i"))
    }

    /// Checks `gcd(M_i, M_j) == m_{ij}` for every pair. Holds for every
    /// consistent profile.
    pub fn gcd_check_m(&self) -> Result<bool> {
        let ms: Vec<u64> = (0..self.k).map(|i| self.big_m(i)).collect::<Result<_>>()?;
        for j in 1..self.k {
            for i in 0..j {
                if gcd(ms[i], ms[j]) != self.value(i, j) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The tuple `(M_0, .., M_{k-1})` realizes a consistent profile: its
    /// pairwise gcds reproduce the profile exactly.
    pub fn realized_by_big_m(&self) -> Result<bool> {
        let ms: Vec<u64> = (0..self.k).map(|i| self.big_m(i)).collect::<Result<_>>()?;
        Ok(PairProfile::from_tuple(&ms)? == *self)
    }

    /// Plain route to `D`: the lcm of all pair values.
    pub fn d_lcm(&self) -> Result<u128> {
        crate::arith::lcm_many(&self.m)
    }

    /// Alternating-product route to `D`: subset values of even size carry
    /// exponent `size - 1` in the numerator, odd sizes at least 3 in the
    /// denominator. Exact rational in lowest terms; for consistent
    /// profiles it is integral and equals the lcm route.
    pub fn d_formula(&self) -> Result<BigRational> {
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for mask in 1u32..(1 << self.k) {
            let size = mask.count_ones();
            if size < 2 {
                continue;
            }
            let v = BigUint::from(self.subset_value(mask)).pow(size - 1);
            if size % 2 == 0 {
                num *= v;
            } else {
                den *= v;
            }
        }
        Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// The Euler-factor weight: product over primes dividing any pair value
    /// of `(1 - 1/p)^(k-1)`, exact.
    pub fn euler_weight(&self) -> Result<BigRational> {
        let mut primes: Vec<u64> = Vec::new();
        for &v in &self.m {
            for &(p, _) in factorize(v)?.entries() {
                if !primes.contains(&p) {
                    primes.push(p);
                }
            }
        }
        let mut acc = BigRational::one();
        for p in primes {
            let factor = BigRational::new(BigInt::from(p - 1), BigInt::from(p));
            acc *= factor.pow((self.k - 1) as i32);
        }
        Ok(acc)
    }
}

/// The Euler-factor weight of a profile (free-function form).
pub fn b_of_profile(profile: &PairProfile) -> Result<BigRational> {
    profile.euler_weight()
}

/// Pairwise minima of an exponent vector, in canonical pair order.
pub fn psi_map(alpha: &[u32]) -> Vec<u32> {
    let k = alpha.len();
    let mut out = vec![0u32; k * (k - 1) / 2];
    for j in 1..k {
        for i in 0..j {
            out[pair_index(i, j)] = alpha[i].min(alpha[j]);
        }
    }
    out
}

/// Enumerates all 0/1 vectors of length k with at least two ones and
/// returns the number of distinct pairwise-minima images. Injectivity
/// means the image size equals `2^k - k - 1`.
pub fn psi_image_size(k: usize) -> Result<(u64, u64, bool)> {
    if !(2..=24).contains(&k) {
        return Err(Error::InvalidInput(format!("psi enumeration limited to k <= 24, got {k}")));
    }
    let mut images: HashSet<Vec<u32>> = HashSet::new();
    let mut domain = 0u64;
    for bits in 0u32..(1 << k) {
        if bits.count_ones() < 2 {
            continue;
        }
        domain += 1;
        let alpha: Vec<u32> = (0..k).map(|i| (bits >> i) & 1).collect();
        images.insert(psi_map(&alpha));
    }
    let image = images.len() as u64;
    Ok((domain, image, image == domain))
}

/// Result of exhaustively enumerating prime-power profiles with bounded
/// exponents at a fixed prime.
#[derive(Debug, Clone)]
pub struct ProfileEnumeration {
    pub k: usize,
    pub prime: u64,
    pub max_exp: u32,
    /// All exponent tuples visited: `(max_exp + 1)^C(k,2)`.
    pub candidates: u64,
    pub consistent: u64,
    /// Consistent profiles whose alternating product equals the prime
    /// itself.
    pub d_equals_prime: u64,
    /// Consistent profiles failing any of: alternating product integral
    /// and equal to the lcm, `gcd(M_i, M_j) = m_{ij}`, realization by the
    /// `M_i` tuple.
    pub failures: u64,
    pub first_failure: Option<Vec<u64>>,
}

/// Enumerates every `C(k,2)`-tuple of powers of `p` with exponents up to
/// `max_exp`, filters the consistent ones, verifies both routes to `D` on
/// each, and counts those with `D = p`.
pub fn count_profiles_at_prime(k: usize, p: u64, max_exp: u32) -> Result<ProfileEnumeration> {
    if !(2..=6).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "profile enumeration supports 2 <= k <= 6, got {k}"
        )));
    }
    if p < 2 || max_exp < 1 {
        return Err(Error::InvalidInput("need a prime p >= 2 and max_exp >= 1".into()));
    }
    let pairs = k * (k - 1) / 2;

    // Index triples (ab, ac, bc) and quadruple pairings for the fast
    // exponent-space consistency test.
    let mut triples: Vec<[usize; 3]> = Vec::new();
    for c in 2..k {
        for b in 1..c {
            for a in 0..b {
                triples.push([pair_index(a, b), pair_index(a, c), pair_index(b, c)]);
            }
        }
    }
    let mut quads: Vec<[usize; 6]> = Vec::new();
    for d in 3..k {
        for c in 2..d {
            for b in 1..c {
                for a in 0..b {
                    quads.push([
                        pair_index(a, b),
                        pair_index(c, d),
                        pair_index(a, c),
                        pair_index(b, d),
                        pair_index(a, d),
                        pair_index(b, c),
                    ]);
                }
            }
        }
    }
    // At a single prime, equal gcds mean equal exponent minima.
    let consistent_exps = |e: &[u32]| -> bool {
        triples.iter().all(|t| {
            let m = e[t[0]].min(e[t[1]]);
            m == e[t[0]].min(e[t[2]]) && m == e[t[1]].min(e[t[2]])
        }) && quads.iter().all(|q| {
            let m = e[q[0]].min(e[q[1]]);
            m == e[q[2]].min(e[q[3]]) && m == e[q[4]].min(e[q[5]])
        })
    };

    let mut exps = vec![0u32; pairs];
    let mut candidates = 0u64;
    let mut consistent = 0u64;
    let mut d_equals_prime = 0u64;
    let mut failures = 0u64;
    let mut first_failure = None;
    let target = BigRational::from(BigInt::from(p));

    loop {
        candidates += 1;
        if consistent_exps(&exps) {
            consistent += 1;
            let values: Vec<u64> = exps
                .iter()
                .map(|&e| p.checked_pow(e).ok_or(Error::Overflow("p^e")))
                .collect::<Result<_>>()?;
            let profile = PairProfile::new(k, values.clone())?;
            debug_assert!(profile.is_consistent());
            let formula = profile.d_formula()?;
            let lcm = profile.d_lcm()?;
            let ok = formula.is_integer()
                && formula == BigRational::from(BigInt::from(lcm))
                && profile.gcd_check_m()?
                && profile.realized_by_big_m()?;
            if !ok {
                failures += 1;
                if first_failure.is_none() {
                    first_failure = Some(values);
                }
            }
            if formula == target {
                d_equals_prime += 1;
            }
        }
        // Odometer step.
        let mut pos = 0;
        loop {
            if pos == pairs {
                return Ok(ProfileEnumeration {
                    k,
                    prime: p,
                    max_exp,
                    candidates,
                    consistent,
                    d_equals_prime,
                    failures,
                    first_failure,
                });
            }
            if exps[pos] < max_exp {
                exps[pos] += 1;
                break;
            }
            exps[pos] = 0;
            pos += 1;
        }
    }
}

/// Sum of Euler-factor weights over the consistent profiles at `p` with
/// `D = p`, computed by direct enumeration. Exact rational.
pub fn g_k_at_prime(k: usize, p: u64) -> Result<BigRational> {
    if !(2..=6).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "profile enumeration supports 2 <= k <= 6, got {k}"
        )));
    }
    // D = p forces every exponent into {0, 1}, so max_exp = 1 suffices.
    let pairs = k * (k - 1) / 2;
    let mut exps = vec![0u32; pairs];
    let mut acc = BigRational::zero();
    let target = BigRational::from(BigInt::from(p));
    loop {
        let values: Vec<u64> = exps.iter().map(|&e| p.pow(e)).collect();
        let profile = PairProfile::new(k, values)?;
        if profile.is_consistent() && profile.d_formula()? == target {
            acc += profile.euler_weight()?;
        }
        let mut pos = 0;
        loop {
            if pos == pairs {
                return Ok(acc);
            }
            if exps[pos] < 1 {
                exps[pos] += 1;
                break;
            }
            exps[pos] = 0;
            pos += 1;
        }
    }
}

/// The profile-counting weight at an arbitrary squarefree modulus, derived
/// from the per-prime enumeration through multiplicativity. A direct
/// evaluator would have to enumerate profiles over several primes at once;
/// this relies on the product structure instead and is the documented
/// basis for composite values.
pub fn g_k(k: usize, m: u64) -> Result<BigRational> {
    if m == 0 {
        return Err(Error::InvalidInput("g_k(0)".into()));
    }
    let f = factorize(m)?;
    if f.entries().iter().any(|&(_, e)| e > 1) {
        return Ok(BigRational::zero());
    }
    let mut acc = BigRational::one();
    for &(p, _) in f.entries() {
        acc *= g_k_at_prime(k, p)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consistency_examples() {
        // pairwise-coprime values: consistent
        let p = PairProfile::new(3, vec![2, 3, 5]).unwrap();
        assert!(p.is_consistent());
        // gcd(m01, m02) = 2 but gcd(m01, m12) = 1 with equal unions
        let p = PairProfile::new(3, vec![2, 2, 3]).unwrap();
        assert!(!p.is_consistent());
        // k = 2 is vacuous
        let p = PairProfile::new(2, vec![77]).unwrap();
        assert!(p.is_consistent());
    }

    #[test]
    fn from_tuple_examples() {
        let p = PairProfile::from_tuple(&[6, 10, 15]).unwrap();
        assert_eq!(p.values(), &[2, 3, 5]);
        assert!(p.is_consistent());
        let p = PairProfile::from_tuple(&[9, 9, 9, 9]).unwrap();
        assert!(p.values().iter().all(|&v| v == 9));
        let p = PairProfile::from_tuple(&[7, 11, 13]).unwrap();
        assert!(p.values().iter().all(|&v| v == 1));
    }

    #[test]
    fn big_m_example() {
        let p = PairProfile::new(3, vec![2, 3, 5]).unwrap();
        assert_eq!(p.big_m(0).unwrap(), 6);
        assert_eq!(p.big_m(1).unwrap(), 10);
        assert_eq!(p.big_m(2).unwrap(), 15);
        assert!(p.gcd_check_m().unwrap());
        assert!(p.realized_by_big_m().unwrap());

        let ones = PairProfile::new(4, vec![1; 6]).unwrap();
        for i in 0..4 {
            assert_eq!(ones.big_m(i).unwrap(), 1);
        }
        let ps = PairProfile::new(4, vec![7; 6]).unwrap();
        for i in 0..4 {
            assert_eq!(ps.big_m(i).unwrap(), 7);
        }
        assert!(ps.gcd_check_m().unwrap());
    }

    #[test]
    fn d_routes_agree_on_examples() {
        let p = PairProfile::new(3, vec![2, 3, 5]).unwrap();
        let d = p.d_formula().unwrap();
        assert_eq!(d, BigRational::from(BigInt::from(30)));
        assert_eq!(p.d_lcm().unwrap(), 30);

        let ones = PairProfile::new(4, vec![1; 6]).unwrap();
        assert_eq!(ones.d_formula().unwrap(), BigRational::one());

        // all pair values p: numerator p^6 (pairs) * p^3 (full set),
        // denominator p^8 (triples), net p.
        let ps = PairProfile::new(4, vec![3; 6]).unwrap();
        assert_eq!(ps.d_formula().unwrap(), BigRational::from(BigInt::from(3)));
        assert_eq!(ps.d_lcm().unwrap(), 3);
    }

    #[test]
    fn enumeration_small_k() {
        let e = count_profiles_at_prime(2, 5, 2).unwrap();
        assert_eq!(e.candidates, 3);
        assert_eq!(e.d_equals_prime, 1);
        assert_eq!(e.failures, 0);

        for p in [2u64, 3] {
            for max_exp in [1u32, 2] {
                let e = count_profiles_at_prime(3, p, max_exp).unwrap();
                assert_eq!(e.d_equals_prime, 4, "p={p} max_exp={max_exp}");
                assert_eq!(e.failures, 0);
            }
        }
        let e = count_profiles_at_prime(4, 2, 1).unwrap();
        assert_eq!(e.d_equals_prime, 11);
        assert_eq!(e.failures, 0);
        let e = count_profiles_at_prime(5, 2, 1).unwrap();
        assert_eq!(e.d_equals_prime, 26);
        assert_eq!(e.failures, 0);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_map(&[1, 1, 0]), vec![1, 0, 0]);
        let (domain, image, injective) = psi_image_size(3).unwrap();
        assert_eq!(domain, 4);
        assert_eq!(image, 4);
        assert!(injective);
        let (domain, image, injective) = psi_image_size(12).unwrap();
        assert_eq!(domain, 4083); // 2^12 - 13
        assert_eq!(image, 4083);
        assert!(injective);
    }

    #[test]
    fn euler_weight_and_gk() {
        let one_pair = PairProfile::new(2, vec![5]).unwrap();
        assert_eq!(
            one_pair.euler_weight().unwrap(),
            BigRational::new(BigInt::from(4), BigInt::from(5))
        );
        // g_2(p) = 1 - 1/p
        for p in [2u64, 3, 5, 7] {
            assert_eq!(
                g_k_at_prime(2, p).unwrap(),
                BigRational::new(BigInt::from(p - 1), BigInt::from(p))
            );
        }
        // g_3(p) = 4 (1 - 1/p)^2
        for p in [2u64, 3, 5, 7] {
            let expect = BigRational::new(BigInt::from(p - 1), BigInt::from(p)).pow(2)
                * BigRational::from(BigInt::from(4));
            assert_eq!(g_k_at_prime(3, p).unwrap(), expect);
        }
    }

    #[test]
    fn gk_composite_is_multiplicative() {
        // squarefree composite: product of the prime parts
        let direct = g_k(3, 6).unwrap();
        let expect = g_k_at_prime(3, 2).unwrap() * g_k_at_prime(3, 3).unwrap();
        assert_eq!(direct, expect);
        // non-squarefree vanishes
        assert!(g_k(3, 12).unwrap().is_zero());
    }
}
