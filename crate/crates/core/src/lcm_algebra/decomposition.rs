//! The coprime decomposition of an lcm into subset components `u_S`:
//! `u` for the full set is the full gcd, and for smaller subsets each
//! `u_S` is `t_S` divided by all `u_T` with `T` a strict superset. The
//! components multiply back to every subset gcd, their full product is
//! the lcm, and superset products over two subsets meet exactly in the
//! product over the union.

use num::{BigInt, BigUint, One};

use super::{check_k, subset_gcds, subset_min_exponents, tuple_valuations, SubsetFamily};
use crate::arith::gcd;
use crate::error::{Error, Result};

/// The components `u_S` of a tuple together with the subset gcds `t_S`
/// they were derived from. Invariants are verified on construction.
#[derive(Debug, Clone)]
pub struct UsDecomposition {
    source: Vec<u64>,
    t: SubsetFamily,
    u: SubsetFamily,
}

impl UsDecomposition {
    pub fn k(&self) -> usize {
        self.u.k()
    }

    pub fn source(&self) -> &[u64] {
        &self.source
    }

    /// Subset gcds of the source tuple.
    pub fn subset_gcd(&self, mask: u32) -> u64 {
        self.t.value(mask)
    }

    pub fn component(&self, mask: u32) -> u64 {
        self.u.value(mask)
    }

    pub fn components(&self) -> &SubsetFamily {
        &self.u
    }

    /// Product of all components, equal to the lcm of the source tuple.
    pub fn product(&self) -> BigUint {
        let mut acc = BigUint::one();
        for mask in self.u.masks() {
            acc *= BigUint::from(self.u.value(mask));
        }
        acc
    }
}

/// Masks ordered by descending cardinality, then ascending value: the
/// deterministic order in which the recursion peels components.
fn recursion_order(k: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (1..(1u32 << k)).collect();
    masks.sort_by_key(|m| (std::cmp::Reverse(m.count_ones()), *m));
    masks
}

/// Decomposes a tuple into subset components and verifies integrality,
/// reconstruction, the lcm product and the superset-coprimality identity
/// before returning. Any violation is reported as a structured
/// counterexample carrying the tuple.
pub fn us_decompose(t: &[u64]) -> Result<UsDecomposition> {
    let k = t.len();
    check_k(k)?;
    let full = (1u32 << k) - 1;
    let valuations = tuple_valuations(t)?;
    let order = recursion_order(k);

    // Per prime: component exponents by the superset recursion.
    let mut comp_exps: Vec<Vec<i64>> = Vec::with_capacity(valuations.per_prime.len());
    for (_, exps) in &valuations.per_prime {
        let minima = subset_min_exponents(k, exps);
        let mut e = vec![0i64; 1 << k];
        for &mask in &order {
            if mask == full {
                e[mask as usize] = minima[mask as usize] as i64;
                continue;
            }
            // Sum over strict supersets: union mask with every nonempty
            // submask of its complement.
            let complement = full & !mask;
            let mut superset_sum = 0i64;
            let mut sub = complement;
            while sub != 0 {
                superset_sum += e[(mask | sub) as usize];
                sub = (sub - 1) & complement;
            }
            e[mask as usize] = minima[mask as usize] as i64 - superset_sum;
            if e[mask as usize] < 0 {
                return Err(Error::NonIntegralFactor {
                    tuple: t.to_vec(),
                    subset: mask,
                });
            }
        }
        comp_exps.push(e);
    }

    // Verify per prime: reconstruction (superset sums return the subset
    // minima), lcm product (total exponent is the max), and coprimality
    // (superset sums of two subsets meet in the union).
    for ((_, exps), e) in valuations.per_prime.iter().zip(&comp_exps) {
        let minima = subset_min_exponents(k, exps);
        let mut sos = vec![0i64; 1 << k];
        for mask in 1..=full {
            let complement = full & !mask;
            let mut total = e[mask as usize];
            let mut sub = complement;
            while sub != 0 {
                total += e[(mask | sub) as usize];
                sub = (sub - 1) & complement;
            }
            sos[mask as usize] = total;
            if total != minima[mask as usize] as i64 {
                return Err(Error::InvariantViolation {
                    tuple: t.to_vec(),
                    which: "reconstruction",
                });
            }
        }
        let total: i64 = (1..=full).map(|m| e[m as usize]).sum();
        if total != *exps.iter().max().expect("nonempty") as i64 {
            return Err(Error::InvariantViolation {
                tuple: t.to_vec(),
                which: "product-lcm",
            });
        }
        for s1 in 1..=full {
            for s2 in s1..=full {
                if sos[s1 as usize].min(sos[s2 as usize]) != sos[(s1 | s2) as usize] {
                    return Err(Error::InvariantViolation {
                        tuple: t.to_vec(),
                        which: "superset-coprimality",
                    });
                }
            }
        }
    }

    // Assemble integer components; each u_S divides t_S, so u64 suffices.
    let mut u_values = vec![1u64; 1 << k];
    for ((p, _), e) in valuations.per_prime.iter().zip(&comp_exps) {
        for mask in 1..=full {
            let exp = e[mask as usize];
            if exp > 0 {
                u_values[mask as usize] = u_values[mask as usize]
                    .checked_mul(p.checked_pow(exp as u32).ok_or(Error::Overflow("u_S"))?)
                    .ok_or(Error::Overflow("u_S"))?;
            }
        }
    }
    let u = SubsetFamily::from_fn(k, |mask| u_values[mask as usize]);
    let t_fam = subset_gcds(t)?;

    // Integer-level spot check of reconstruction, independent of the
    // exponent bookkeeping above.
    for mask in 1..=full {
        let mut prod: u128 = 1;
        for sup in 1..=full {
            if sup & mask == mask {
                prod = prod
                    .checked_mul(u.value(sup) as u128)
                    .ok_or(Error::Overflow("superset product"))?;
            }
        }
        if prod != t_fam.value(mask) as u128 {
            return Err(Error::InvariantViolation {
                tuple: t.to_vec(),
                which: "reconstruction-integer",
            });
        }
    }

    Ok(UsDecomposition {
        source: t.to_vec(),
        t: t_fam,
        u,
    })
}

/// The chain/discriminant quantities of a decomposition for a split point
/// `nu`: the tail set is `T0 = {nu..k}` (0-based), `V_i` collects the
/// components binding position `i` to earlier positions, `G` is the product
/// over subsets meeting the head, `a_j` the products omitting `T0`, and the
/// discriminants multiply the `a_j` with their pairwise differences.
#[derive(Debug, Clone)]
pub struct SectionProducts {
    pub nu: usize,
    /// Mask of the tail set `{nu..k}` (0-based positions).
    pub t0: u32,
    /// `V_0..V_nu`; `V_0 = 1`.
    pub v: Vec<u64>,
    /// Product of components over subsets meeting `{0..nu}`.
    pub g: BigUint,
    /// `a_j` for tail positions `j = nu..k`, each the product of
    /// components containing `j` other than the tail set itself.
    pub a: Vec<u64>,
    /// `prod a_j * prod |a_i - a_j|` over tail pairs.
    pub delta: BigUint,
    /// Signed variant built from one-sided products.
    pub delta_prime: BigInt,
    /// Whether the one-sided products are coprime for every tail pair.
    pub a_coprime_ok: bool,
    /// `delta != 0`, i.e. the `a_j` are pairwise distinct.
    pub delta_nonzero: bool,
}

/// Computes the chain products for `0 <= nu <= k-1`. Positions are
/// 0-based: the tail set is `{nu, .., k-1}` as a mask.
#[allow(clippy::needless_range_loop)] // positions index the math directly
pub fn section_products(dec: &UsDecomposition, nu: usize) -> Result<SectionProducts> {
    let k = dec.k();
    if nu >= k {
        return Err(Error::InvalidInput(format!("nu = {nu} out of range for k = {k}")));
    }
    let full = (1u32 << k) - 1;
    let head = (1u32 << nu) - 1; // positions 0..nu
    let t0 = full & !head;

    // V_0 = 1; V_i = product of u_S with position i in S and S meeting
    // positions 0..i.
    let mut v = vec![1u64; nu + 1];
    for i in 1..=nu {
        let below = (1u32 << i) - 1;
        let mut acc: u64 = 1;
        for mask in 1..=full {
            if mask & (1 << i) != 0 && mask & below != 0 {
                acc = acc
                    .checked_mul(dec.component(mask))
                    .ok_or(Error::Overflow("V_i"))?;
            }
        }
        v[i] = acc;
    }

    let mut g = BigUint::one();
    for mask in 1..=full {
        if mask & head != 0 {
            g *= BigUint::from(dec.component(mask));
        }
    }
    // Cross-check: G also telescopes as the product over head positions i
    // of t_{i} / V_{i-1}.
    let mut g_chain = BigUint::one();
    for i in 0..nu {
        let ti = dec.subset_gcd(1 << i);
        if !ti.is_multiple_of(v[i]) {
            return Err(Error::InvariantViolation {
                tuple: dec.source().to_vec(),
                which: "chain-divisibility",
            });
        }
        g_chain *= BigUint::from(ti / v[i]);
    }
    if g_chain != g {
        return Err(Error::InvariantViolation {
            tuple: dec.source().to_vec(),
            which: "chain-product",
        });
    }

    let mut a = Vec::with_capacity(k - nu);
    for j in nu..k {
        let mut acc: u64 = 1;
        for mask in 1..=full {
            if mask & (1 << j) != 0 && mask != t0 {
                acc = acc
                    .checked_mul(dec.component(mask))
                    .ok_or(Error::Overflow("a_j"))?;
            }
        }
        a.push(acc);
    }

    let mut delta = BigUint::one();
    for &aj in &a {
        delta *= BigUint::from(aj);
    }
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            delta *= BigUint::from(a[i].abs_diff(a[j]));
        }
    }
    let delta_nonzero = {
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.windows(2).all(|w| w[0] != w[1])
    };

    // One-sided products: components containing i but not j. Coprime for
    // every tail pair as a consequence of the superset-gcd identity.
    let one_sided = |i: usize, j: usize| -> Result<u64> {
        let mut acc: u64 = 1;
        for mask in 1..=full {
            if mask & (1 << i) != 0 && mask & (1 << j) == 0 {
                acc = acc
                    .checked_mul(dec.component(mask))
                    .ok_or(Error::Overflow("one-sided product"))?;
            }
        }
        Ok(acc)
    };
    let mut a_coprime_ok = true;
    let mut delta_prime = BigInt::one();
    for mask in 1..=full {
        if mask & head == 0 && mask != t0 {
            delta_prime *= BigInt::from(dec.component(mask));
        }
    }
    for i in nu..k {
        for j in (i + 1)..k {
            let left = one_sided(i, j)?;
            let right = one_sided(j, i)?;
            if gcd(left, right) != 1 {
                a_coprime_ok = false;
            }
            delta_prime *= BigInt::from(left) - BigInt::from(right);
        }
    }

    Ok(SectionProducts {
        nu,
        t0,
        v,
        g,
        a,
        delta,
        delta_prime,
        a_coprime_ok,
        delta_nonzero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    #[test]
    fn example_6_10_15() {
        let dec = us_decompose(&[6, 10, 15]).unwrap();
        assert_eq!(dec.component(0b111), 1);
        assert_eq!(dec.component(0b011), 2);
        assert_eq!(dec.component(0b101), 3);
        assert_eq!(dec.component(0b110), 5);
        for i in 0..3 {
            assert_eq!(dec.component(1 << i), 1);
        }
        assert_eq!(dec.product(), BigUint::from(30u32));
    }

    #[test]
    fn shared_prime_pair() {
        let p = 10_007u64;
        let dec = us_decompose(&[p, p, 1]).unwrap();
        assert_eq!(dec.component(0b011), p);
        for mask in dec.components().masks() {
            if mask != 0b011 {
                assert_eq!(dec.component(mask), 1, "mask {mask:#b}");
            }
        }
    }

    #[test]
    fn all_ones() {
        let dec = us_decompose(&[1, 1, 1, 1]).unwrap();
        for mask in dec.components().masks() {
            assert_eq!(dec.component(mask), 1);
        }
        assert_eq!(dec.product(), BigUint::one());
    }

    #[test]
    fn section_example() {
        // 0-based: head = {0}, tail = {1, 2}.
        let dec = us_decompose(&[6, 10, 15]).unwrap();
        let s = section_products(&dec, 1).unwrap();
        assert_eq!(s.t0, 0b110);
        assert_eq!(s.v, vec![1, 2]); // V_1 = u_{01} * u_{012} = 2
        assert_eq!(s.g, BigUint::from(6u32)); // u_0 u_{01} u_{02} u_{012}
        assert_eq!(s.a, vec![2, 3]); // a_1 = u_1 u_{01}, a_2 = u_2 u_{02}
        assert_eq!(s.delta, BigUint::from(6u32)); // 2 * 3 * |2 - 3|
        assert!(s.delta_nonzero);
        assert!(s.a_coprime_ok);
        assert!(!s.delta_prime.is_zero());
    }

    #[test]
    fn degenerate_collision() {
        let dec = us_decompose(&[1, 1, 1]).unwrap();
        let s = section_products(&dec, 0).unwrap();
        assert_eq!(s.a, vec![1, 1, 1]);
        assert!(!s.delta_nonzero);
        assert!(s.delta.is_zero());
    }

    #[test]
    fn nu_zero_has_unit_head() {
        let dec = us_decompose(&[6, 10, 15]).unwrap();
        let s = section_products(&dec, 0).unwrap();
        assert_eq!(s.t0, 0b111);
        assert_eq!(s.g, BigUint::one());
        assert_eq!(s.v, vec![1]);
        // a_j = t_j / u_{012} = t_j here
        assert_eq!(s.a, vec![6, 10, 15]);
        assert!(s.delta_nonzero);
    }

    #[test]
    fn decomposition_rejects_bad_k() {
        assert!(us_decompose(&[4]).is_err());
    }
}
