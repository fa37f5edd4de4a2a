//! The alternating gcd-product identity for the least common multiple:
//! `lcm(t_1..t_k)` equals the product of `t_S` over odd-size subsets divided
//! by the product over even-size subsets. A multiplicative analogue of
//! inclusion-exclusion; per prime it reduces to alternating sums of subset
//! minima telescoping to the maximum exponent.

use num::{BigUint, Integer, One, Zero};

use super::{check_k, subset_gcds, subset_min_exponents, tuple_valuations};
use crate::error::Result;

/// Outcome of evaluating both sides of the identity exactly. `equal` false
/// is a counterexample report for the implementation.
#[derive(Debug, Clone)]
pub struct LcmIdentity {
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub equal: bool,
    /// Remainder of the alternating-product division; zero when the
    /// even-size product divides the odd-size product as the identity
    /// demands.
    pub remainder: BigUint,
}

/// Evaluates the identity two independent ways: per-prime exponent
/// comparison and exact big-integer products. Both must agree.
pub fn lcm_identity_check(t: &[u64]) -> Result<LcmIdentity> {
    let k = t.len();
    check_k(k)?;

    // Valuation route: for each prime the alternating sum of subset minima
    // must equal the maximum exponent.
    let mut valuation_ok = true;
    let valuations = tuple_valuations(t)?;
    for (_, exps) in &valuations.per_prime {
        let minima = subset_min_exponents(k, exps);
        let max = *exps.iter().max().expect("nonempty tuple") as i64;
        let mut alternating: i64 = 0;
        for mask in 1..(1u32 << k) {
            let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
            alternating += sign * minima[mask as usize] as i64;
        }
        if alternating != max {
            valuation_ok = false;
        }
    }

    // Big-integer route: fold the lcm directly and form the alternating
    // product from the subset gcds.
    let fam = subset_gcds(t)?;
    let mut lhs = BigUint::one();
    for &ti in t {
        let b = BigUint::from(ti);
        let g = lhs.gcd(&b);
        lhs = &lhs / g * b;
    }
    let mut odd = BigUint::one();
    let mut even = BigUint::one();
    for mask in fam.masks() {
        let v = BigUint::from(fam.value(mask));
        if mask.count_ones() % 2 == 1 {
            odd *= v;
        } else {
            even *= v;
        }
    }
    let (rhs, remainder) = odd.div_rem(&even);
    let equal = valuation_ok && remainder.is_zero() && rhs == lhs;
    Ok(LcmIdentity {
        lhs,
        rhs,
        equal,
        remainder,
    })
}

/// Widened-integer route for small inputs: both sides in u128. Returns
/// `None` when an intermediate product leaves u128, so callers can fall
/// back to the exact path.
pub fn lcm_identity_check_widened(t: &[u64]) -> Result<Option<(u128, u128, bool)>> {
    let k = t.len();
    check_k(k)?;
    let fam = subset_gcds(t)?;
    let mut lhs: u128 = 1;
    for &ti in t {
        let mut a = lhs;
        let mut b = ti as u128;
        while b != 0 {
            let r = a % b;
            a = b;
            b = r;
        }
        lhs = match (lhs / a).checked_mul(ti as u128) {
            Some(v) => v,
            None => return Ok(None),
        };
    }
    let mut odd: u128 = 1;
    let mut even: u128 = 1;
    for mask in fam.masks() {
        let v = fam.value(mask) as u128;
        let acc = if mask.count_ones() % 2 == 1 {
            &mut odd
        } else {
            &mut even
        };
        *acc = match acc.checked_mul(v) {
            Some(x) => x,
            None => return Ok(None),
        };
    }
    if !odd.is_multiple_of(even) {
        return Ok(Some((lhs, odd / even, false)));
    }
    let rhs = odd / even;
    Ok(Some((lhs, rhs, lhs == rhs)))
}
