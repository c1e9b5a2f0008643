//! Primality testing.
//!
//! Below `2^64` the verdict is deterministic: trial division for tiny values,
//! Miller-Rabin with the first twelve prime bases otherwise (exact for every
//! `n < 3.3 * 10^24`). Above `2^64` the test is Baillie-PSW: a strong
//! probable-prime test to base 2 followed by a strong Lucas test with
//! Selfridge parameters, optionally followed by extra Miller-Rabin rounds.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::modular::{jacobi, mul_mod, pow_mod};
use super::sieve::small_primes;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ProvenPrime,
    ProbablePrime,
    Composite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimalityMethod {
    TrialDivision,
    DeterministicSmall,
    StrongProbablePrimePlusLucas,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimalityResult {
    pub verdict: Verdict,
    pub method: PrimalityMethod,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_info: Option<String>,
}

impl PrimalityResult {
    fn new(verdict: Verdict, method: PrimalityMethod) -> Self {
        Self {
            verdict,
            method,
            witness_info: None,
        }
    }

    fn with_info(mut self, info: impl Into<String>) -> Self {
        self.witness_info = Some(info.into());
        self
    }

    /// True for both proven and probable primes.
    pub fn is_prime(&self) -> bool {
        self.verdict != Verdict::Composite
    }
}

/// Extra Miller-Rabin rounds run after Baillie-PSW on values above `2^64`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PrimalityConfig {
    pub extra_rounds: u32,
    /// Use the fixed bases 3, 5, 7, ... for the extra rounds instead of random ones.
    pub seedless: bool,
}

const TRIAL_LIMIT: u64 = 1 << 16;
const DETERMINISTIC_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub fn is_prime(n: &BigUint) -> PrimalityResult {
    is_prime_with(n, &PrimalityConfig::default())
}

pub fn is_prime_with(n: &BigUint, config: &PrimalityConfig) -> PrimalityResult {
    if let Some(small) = n.to_u64() {
        return is_prime_small(small);
    }
    for &p in small_primes().iter().take(168) {
        if (n % p).is_zero() {
            return PrimalityResult::new(Verdict::Composite, PrimalityMethod::TrialDivision)
                .with_info(format!("divisible by {p}"));
        }
    }
    let method = PrimalityMethod::StrongProbablePrimePlusLucas;
    if !strong_probable_prime(n, &BigUint::from(2u32)) {
        return PrimalityResult::new(Verdict::Composite, method).with_info("fails base-2 strong test");
    }
    if !strong_lucas_probable_prime(n) {
        return PrimalityResult::new(Verdict::Composite, method).with_info("fails strong Lucas test");
    }
    if config.extra_rounds > 0 {
        let mut rng = rand::thread_rng();
        let upper = n - 2u32;
        for round in 0..config.extra_rounds {
            let base = if config.seedless {
                BigUint::from(small_primes()[1 + round as usize % 1000])
            } else {
                rng.gen_biguint_range(&BigUint::from(3u32), &upper)
            };
            if !strong_probable_prime(n, &base) {
                return PrimalityResult::new(Verdict::Composite, method)
                    .with_info(format!("fails strong test to base {base}"));
            }
        }
    }
    PrimalityResult::new(Verdict::ProbablePrime, method)
}

fn is_prime_small(n: u64) -> PrimalityResult {
    if n < 2 {
        return PrimalityResult::new(Verdict::Composite, PrimalityMethod::TrialDivision)
            .with_info("values below 2 are not prime");
    }
    if n < TRIAL_LIMIT {
        return match smallest_factor_by_trial(n) {
            None => PrimalityResult::new(Verdict::ProvenPrime, PrimalityMethod::TrialDivision),
            Some(p) => PrimalityResult::new(Verdict::Composite, PrimalityMethod::TrialDivision)
                .with_info(format!("divisible by {p}")),
        };
    }
    if is_prime_u64(n) {
        PrimalityResult::new(Verdict::ProvenPrime, PrimalityMethod::DeterministicSmall)
    } else {
        PrimalityResult::new(Verdict::Composite, PrimalityMethod::DeterministicSmall)
    }
}

fn smallest_factor_by_trial(n: u64) -> Option<u64> {
    for &p in small_primes() {
        if p * p > n {
            return None;
        }
        if n % p == 0 {
            return Some(p);
        }
    }
    None
}

/// Deterministic primality for word-sized values.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &DETERMINISTIC_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &DETERMINISTIC_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Strong probable-prime test of odd `n > 2` to `base`.
pub(crate) fn strong_probable_prime(n: &BigUint, base: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let mut x = base.modpow(&d, n);
    if x == one || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
        if x == one {
            return false;
        }
    }
    false
}

/// Strong Lucas probable-prime test (Selfridge method A: P = 1, Q = (1 - D)/4).
/// `n` must be odd and greater than 2.
pub(crate) fn strong_lucas_probable_prime(n: &BigUint) -> bool {
    let mut d: i64 = 5;
    let mut attempts = 0;
    loop {
        let j = jacobi(&BigInt::from(d), n);
        if j == -1 {
            break;
        }
        if j == 0 && BigUint::from(d.unsigned_abs()) != *n {
            return false;
        }
        attempts += 1;
        if attempts == 10 {
            let r = n.sqrt();
            if &r * &r == *n {
                return false;
            }
        }
        d = if d > 0 { -(d + 2) } else { -d + 2 };
    }
    let q = (1 - d) / 4;
    let to_residue = |v: i64| -> BigUint {
        let m = BigUint::from(v.unsigned_abs()) % n;
        if v < 0 && !m.is_zero() {
            n - m
        } else {
            m
        }
    };
    let d_mod = to_residue(d);
    let q_mod = to_residue(q);

    let n_plus_1 = n + 1u32;
    let s = n_plus_1.trailing_zeros().unwrap_or(0);
    let k = &n_plus_1 >> s;

    let half = |x: BigUint| -> BigUint {
        if x.is_even() {
            x >> 1
        } else {
            (x + n) >> 1
        }
    };

    // index 1: U = 1, V = P = 1, Q^1
    let mut u = BigUint::one();
    let mut v = BigUint::one();
    let mut qk = q_mod.clone();
    let bits = k.bits();
    for i in (0..bits - 1).rev() {
        // doubling
        u = (&u * &v) % n;
        let two_qk = (&qk << 1u32) % n;
        v = ((&v * &v) + n - two_qk) % n;
        qk = (&qk * &qk) % n;
        if k.bit(i) {
            let nu = half((&u + &v) % n);
            let nv = half(((&d_mod * &u) + &v) % n);
            u = nu;
            v = nv;
            qk = (&qk * &q_mod) % n;
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        let two_qk = (&qk << 1u32) % n;
        v = ((&v * &v) + n - two_qk) % n;
        if v.is_zero() {
            return true;
        }
        qk = (&qk * &qk) % n;
    }
    false
}

/// The full Baillie-PSW check on an arbitrary odd value, bypassing the
/// deterministic word-sized path. Exposed for cross-checking.
pub fn baillie_psw(n: &BigUint) -> bool {
    if *n < BigUint::from(2u32) {
        return false;
    }
    if n.is_even() {
        return *n == BigUint::from(2u32);
    }
    if *n == BigUint::from(3u32) {
        return true;
    }
    strong_probable_prime(n, &BigUint::from(2u32)) && strong_lucas_probable_prime(n)
}
