//! Integer factorization: trial division, Pollard p-1 (stage one), and
//! Pollard rho with Brent's cycle detection.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::modular::{gcd_u64, mul_mod};
use super::primality::{is_prime, is_prime_u64};
use super::sieve::{isqrt, primes_upto_cached};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CofactorStatus {
    Unit,
    ProbablePrime,
    CompositeUnfactored,
}

/// A positive integer carried as its prime-power decomposition.
///
/// `value = cofactor * prod(prime^exponent)`. When factoring gives up, the
/// unsplit remainder is kept in `cofactor` with status `CompositeUnfactored`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FactoredInteger {
    value: BigUint,
    factors: Vec<(BigUint, u32)>,
    cofactor: BigUint,
    cofactor_status: CofactorStatus,
}

impl FactoredInteger {
    pub fn one() -> Self {
        Self {
            value: BigUint::one(),
            factors: Vec::new(),
            cofactor: BigUint::one(),
            cofactor_status: CofactorStatus::Unit,
        }
    }

    /// Builds a complete factorization from prime powers; repeated primes are merged.
    pub fn from_prime_powers<I>(powers: I) -> Self
    where
        I: IntoIterator<Item = (BigUint, u32)>,
    {
        let mut map: BTreeMap<BigUint, u32> = BTreeMap::new();
        for (p, k) in powers {
            if k > 0 {
                *map.entry(p).or_insert(0) += k;
            }
        }
        Self::from_map(map, BigUint::one(), CofactorStatus::Unit)
    }

    /// Squarefree product of distinct word-sized primes.
    pub fn from_primes_u64(primes: &[u64]) -> Self {
        Self::from_prime_powers(primes.iter().map(|&p| (BigUint::from(p), 1)))
    }

    /// Attaches a remaining cofactor with the given status.
    pub fn with_cofactor(mut self, cofactor: BigUint, status: CofactorStatus) -> Self {
        assert!(
            !cofactor.is_one() || status == CofactorStatus::Unit,
            "a unit cofactor must carry status Unit"
        );
        self.value *= &cofactor;
        self.cofactor = &self.cofactor * cofactor;
        self.cofactor_status = status;
        self
    }

    fn from_map(map: BTreeMap<BigUint, u32>, cofactor: BigUint, status: CofactorStatus) -> Self {
        let mut value = cofactor.clone();
        for (p, k) in &map {
            value *= p.pow(*k);
        }
        Self {
            value,
            factors: map.into_iter().collect(),
            cofactor,
            cofactor_status: status,
        }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn factors(&self) -> &[(BigUint, u32)] {
        &self.factors
    }

    pub fn cofactor(&self) -> &BigUint {
        &self.cofactor
    }

    pub fn cofactor_status(&self) -> CofactorStatus {
        self.cofactor_status
    }

    /// True unless an unfactored composite part remains.
    pub fn is_complete(&self) -> bool {
        self.cofactor_status != CofactorStatus::CompositeUnfactored
    }

    /// Prime-power view including a probable-prime cofactor as exponent one.
    pub fn prime_powers(&self) -> Vec<(BigUint, u32)> {
        let mut out = self.factors.clone();
        if self.cofactor_status == CofactorStatus::ProbablePrime {
            out.push((self.cofactor.clone(), 1));
            out.sort();
        }
        out
    }

    pub fn is_squarefree(&self) -> bool {
        self.is_complete() && self.prime_powers().iter().all(|(_, k)| *k == 1)
    }

    /// Product of two factorizations (exponents of shared primes add).
    pub fn multiply(&self, other: &Self) -> Self {
        let mut map: BTreeMap<BigUint, u32> = BTreeMap::new();
        for (p, k) in self.factors.iter().chain(other.factors.iter()) {
            *map.entry(p.clone()).or_insert(0) += k;
        }
        let cofactor = &self.cofactor * &other.cofactor;
        let status = match (self.cofactor_status, other.cofactor_status) {
            (CofactorStatus::Unit, s) | (s, CofactorStatus::Unit) => s,
            (CofactorStatus::ProbablePrime, CofactorStatus::ProbablePrime) => {
                // two prime cofactors: move them into the factor list
                let (a, b) = (self.cofactor.clone(), other.cofactor.clone());
                *map.entry(a).or_insert(0) += 1;
                *map.entry(b).or_insert(0) += 1;
                return Self::from_map(map, BigUint::one(), CofactorStatus::Unit);
            }
            _ => CofactorStatus::CompositeUnfactored,
        };
        Self::from_map(map, cofactor, status)
    }
}

/// Resource limits for [`factor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoringBudget {
    pub trial_bound: u64,
    /// Pollard rho iterations allowed per composite part.
    pub rho_iteration_cap: u64,
    /// Stage-one bound for Pollard p-1; zero disables it.
    pub pm1_bound: u64,
}

impl Default for FactoringBudget {
    fn default() -> Self {
        Self {
            trial_bound: 1_000_000,
            rho_iteration_cap: 100_000_000,
            pm1_bound: 100_000,
        }
    }
}

/// Factors `n >= 1` within `budget`.
pub fn factor(n: &BigUint, budget: &FactoringBudget) -> FactoredInteger {
    assert!(!n.is_zero(), "cannot factor zero");
    let mut map: BTreeMap<BigUint, u32> = BTreeMap::new();
    let mut rest = n.clone();

    if let Some(small) = rest.to_u64() {
        let (found, left) = trial_divide_u64(small, budget.trial_bound);
        for (p, k) in found {
            *map.entry(BigUint::from(p)).or_insert(0) += k;
        }
        rest = BigUint::from(left);
    } else {
        let primes = primes_upto_cached(budget.trial_bound);
        for &p in primes.iter() {
            if let Some(r) = rest.to_u64() {
                let (found, left) = trial_divide_u64_from(r, &primes, p);
                for (q, k) in found {
                    *map.entry(BigUint::from(q)).or_insert(0) += k;
                }
                rest = BigUint::from(left);
                break;
            }
            let (quotient, remainder) = rest.div_rem(&BigUint::from(p));
            if remainder.is_zero() {
                rest = quotient;
                let mut k = 1;
                loop {
                    let (q, r) = rest.div_rem(&BigUint::from(p));
                    if !r.is_zero() {
                        break;
                    }
                    rest = q;
                    k += 1;
                }
                *map.entry(BigUint::from(p)).or_insert(0) += k;
            }
        }
    }

    let mut unfactored = BigUint::one();
    let mut stack = vec![rest];
    while let Some(c) = stack.pop() {
        if c.is_one() {
            continue;
        }
        if is_prime(&c).is_prime() {
            *map.entry(c).or_insert(0) += 1;
            continue;
        }
        let root = c.sqrt();
        if &root * &root == c {
            stack.push(root.clone());
            stack.push(root);
            continue;
        }
        let split = pollard_pm1(&c, budget.pm1_bound).or_else(|| pollard_rho(&c, budget.rho_iteration_cap));
        match split {
            Some(d) => {
                let other = &c / &d;
                stack.push(d);
                stack.push(other);
            }
            None => unfactored *= c,
        }
    }
    let status = if unfactored.is_one() {
        CofactorStatus::Unit
    } else {
        CofactorStatus::CompositeUnfactored
    };
    FactoredInteger::from_map(map, unfactored, status)
}

/// Factors a machine word completely by trial division and rho.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "cannot factor zero");
    let (mut found, rest) = trial_divide_u64(n, 1 << 12);
    let mut stack = vec![rest];
    while let Some(c) = stack.pop() {
        if c == 1 {
            continue;
        }
        if is_prime_u64(c) {
            found.push((c, 1));
            continue;
        }
        let d = rho_u64(c, u64::MAX).expect("rho always splits a word-sized composite");
        stack.push(d);
        stack.push(c / d);
    }
    let mut map: BTreeMap<u64, u32> = BTreeMap::new();
    for (p, k) in found {
        *map.entry(p).or_insert(0) += k;
    }
    map.into_iter().collect()
}

fn trial_divide_u64(n: u64, bound: u64) -> (Vec<(u64, u32)>, u64) {
    let primes = primes_upto_cached(bound.min(isqrt(n) + 1));
    trial_divide_u64_from(n, &primes, 2)
}

fn trial_divide_u64_from(mut n: u64, primes: &[u64], from: u64) -> (Vec<(u64, u32)>, u64) {
    let mut out = Vec::new();
    let start = primes.partition_point(|&p| p < from);
    for &p in &primes[start..] {
        if p.saturating_mul(p) > n {
            break;
        }
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
    }
    if n > 1 {
        let last = primes.last().copied().unwrap_or(1);
        if last.saturating_mul(last) >= n || is_prime_u64(n) {
            out.push((n, 1));
            n = 1;
        }
    }
    (out, n)
}

/// Stage one of Pollard's p-1 method with smoothness bound `bound`.
pub fn pollard_pm1(n: &BigUint, bound: u64) -> Option<BigUint> {
    if bound < 2 || n.is_even() {
        return if n.is_even() && *n > BigUint::from(2u32) { Some(BigUint::from(2u32)) } else { None };
    }
    let one = BigUint::one();
    let mut a = BigUint::from(2u32);
    let primes = primes_upto_cached(bound);
    for (i, &p) in primes.iter().enumerate() {
        let mut pk = p;
        while pk <= bound / p {
            pk *= p;
        }
        a = a.modpow(&BigUint::from(pk), n);
        if i % 64 == 63 || i + 1 == primes.len() {
            if a.is_zero() {
                return None;
            }
            let g = (&a - &one).gcd(n);
            if g == *n {
                return None;
            }
            if !g.is_one() {
                return Some(g);
            }
        }
    }
    None
}

/// Pollard rho with Brent's cycle finding; returns a nontrivial factor of the
/// odd composite `n` or `None` once `iteration_cap` steps are spent.
pub fn pollard_rho(n: &BigUint, iteration_cap: u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    if let Some(small) = n.to_u64() {
        return rho_u64(small, iteration_cap).map(BigUint::from);
    }
    const BATCH: u64 = 128;
    let mut spent = 0u64;
    let mut c = 1u64;
    while spent < iteration_cap {
        let cc = BigUint::from(c);
        let step = |v: &BigUint| (v * v + &cc) % n;
        let mut y = BigUint::from(2u32);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut r = 1u64;
        while g.is_one() && spent < iteration_cap {
            x = y.clone();
            for _ in 0..r {
                y = step(&y);
            }
            spent += r;
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                let m = BATCH.min(r - k);
                for _ in 0..m {
                    y = step(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                spent += m;
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = step(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if !g.is_one() && g != *n {
            return Some(g);
        }
        c += 1;
    }
    None
}

fn rho_u64(n: u64, iteration_cap: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    const BATCH: u64 = 128;
    let mut spent = 0u64;
    let mut c = 1u64;
    while spent < iteration_cap {
        let step = |v: u64| (mul_mod(v, v, n) + c) % n;
        let (mut y, mut x, mut ys) = (2u64, 2u64, 2u64);
        let (mut q, mut g, mut r) = (1u64, 1u64, 1u64);
        while g == 1 && spent < iteration_cap {
            x = y;
            for _ in 0..r {
                y = step(y);
            }
            spent = spent.saturating_add(r);
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                let m = BATCH.min(r - k);
                for _ in 0..m {
                    y = step(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                spent = spent.saturating_add(m);
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = step(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g != 1 {
                    break;
                }
            }
        }
        if g != 1 && g != n {
            return Some(g);
        }
        c += 1;
    }
    None
}

/// Largest `y` with `p^y | n`. `n` must be nonzero.
pub fn valuation(n: &BigUint, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero is unbounded");
    assert!(p >= 2, "valuation needs a prime");
    let p = BigUint::from(p);
    let mut n = n.clone();
    let mut y = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return y;
        }
        n = q;
        y += 1;
    }
}
