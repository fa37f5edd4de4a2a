//! Exact computations around the shifted-prime divisor function
//! `omega_star(n) = #{d | n : d + 1 is prime}`.
//!
//! The crate is organized as a stack:
//!
//! * [`arith`] — scalar primitives: gcd/lcm with overflow reporting,
//!   64-bit factorization, classical arithmetic functions, deterministic
//!   primality.
//! * [`sieves`] — bulk tables over `[1, x]`: primes, smallest prime
//!   factors, and the `omega_star` count table.
//! * [`lcm_algebra`] — subset-indexed gcd/lcm identities, the coprime
//!   decomposition of an lcm, pairwise-gcd profiles and their exhaustive
//!   enumeration at a prime.
//! * [`moments`] — moments of `omega_star`, tuple counts with lcm bounds,
//!   distribution tails and dyadic level profiles.
//! * [`multfunc`] — averages of nonnegative multiplicative functions and
//!   their shifted-prime analogues.
//! * [`verify`] — randomized and exhaustive verification campaigns with
//!   machine-readable reports.
//!
//! Everything that claims to be exact is computed in integer or rational
//! arithmetic with explicit overflow handling; floating point only appears
//! in ratios, fitted slopes and averaged series.

pub mod arith;
pub mod error;
pub mod fit;
pub mod lcm_algebra;
pub mod moments;
pub mod multfunc;
pub mod sieves;
pub mod verify;

pub use error::{Error, Result};
