//! Squarefree approximation of target values by products of prime values.
//!
//! All routines work with the oriented function `f~` (`f`, or `1/f` when
//! `f` diverges to infinity), whose prime values lie below one and whose
//! partial products tend to zero. Targets and achieved values refer to `f~`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multfunc::{MultiplicativeFunction, PositiveValue};
use crate::ntkernel::{next_prime, FactoredInteger, PrimeStream, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxError {
    #[error("target {0} must lie strictly between 0 and 1")]
    TargetOutOfRange(Rational),
    #[error("tolerance must be positive")]
    ToleranceNotPositive,
    #[error("prime stream exhausted after {steps} primes; partial product {partial}")]
    StreamExhausted { steps: usize, partial: PositiveValue },
    #[error("required primes exceed the stream cap {cap}; partial product {partial}")]
    StreamCap { cap: u64, partial: PositiveValue },
    #[error("approximation needed more than {0} primes")]
    TooManyPrimes(usize),
}

/// Output of the partial-product scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyResult {
    pub w: FactoredInteger,
    pub primes: Vec<u64>,
    /// Number of stream primes skipped before the product starts.
    pub start_index: usize,
    /// Index (1-based, in the stream) of the last prime taken.
    pub end_index: usize,
    /// `f~(w)`.
    pub achieved: PositiveValue,
    pub last_prime: u64,
}

/// Multiplies `f~(q_i)` over stream primes after the first `start_index`
/// until the product first drops to `c` or below.
///
/// With `l` the stopping index the result satisfies
/// `c * f~(q_l) < f~(w) <= c`.
pub fn greedy_ratio<I>(f: &MultiplicativeFunction, primes: I, c: &Rational, start_index: usize) -> Result<GreedyResult, ApproxError>
where
    I: IntoIterator<Item = u64>,
{
    check_target(c)?;
    let mut product = PositiveValue::one();
    let mut taken = Vec::new();
    let mut index = 0;
    for q in primes {
        index += 1;
        if index <= start_index {
            continue;
        }
        product = &product * &f.oriented_rule(&BigUint::from(q), 1);
        taken.push(q);
        if product.cmp_rational(c) != Ordering::Greater {
            return Ok(GreedyResult {
                w: FactoredInteger::from_primes_u64(&taken),
                last_prime: q,
                primes: taken,
                start_index,
                end_index: index,
                achieved: product,
            });
        }
    }
    Err(ApproxError::StreamExhausted { steps: taken.len(), partial: product })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxConfig {
    /// Largest prime the search may use.
    pub stream_cap: u64,
    /// Upper limit on the number of prime factors of `w`.
    pub max_primes: usize,
    /// How far a table-defined function is scanned prime by prime.
    pub scan_limit: u64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self { stream_cap: 10_000_000_000_000_000, max_primes: 256, scan_limit: 100_000_000 }
    }
}

/// A squarefree `w` with `f~(w)` close to a target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approximation {
    pub w: FactoredInteger,
    /// Prime factors of `w`, ascending.
    pub primes: Vec<u64>,
    /// `f~(w)`.
    pub achieved: PositiveValue,
    pub last_prime: u64,
}

fn check_target(c: &Rational) -> Result<(), ApproxError> {
    if !c.is_positive() || *c >= Rational::one() {
        return Err(ApproxError::TargetOutOfRange(c.clone()));
    }
    Ok(())
}

/// Finds squarefree `w`, coprime to `avoid`, with `c <= f~(w) <= c + tol`.
///
/// The product approaches `c` from above: each step appends the least
/// admissible prime `q`, larger than all previous ones, whose value keeps
/// the product at or above `c`. Because `f~(p) -> 1`, each step closes most
/// of the remaining gap, and the sequence of partial products does not depend
/// on `tol`; a smaller tolerance only stops the walk later.
pub fn approx_value(
    f: &MultiplicativeFunction,
    c: &Rational,
    avoid: &BTreeSet<u64>,
    tol: &Rational,
    config: &ApproxConfig,
) -> Result<Approximation, ApproxError> {
    check_target(c)?;
    if !tol.is_positive() {
        return Err(ApproxError::ToleranceNotPositive);
    }
    let target = PositiveValue::exact(c.clone());
    let stop = c + tol;
    let mut current = PositiveValue::one();
    let mut primes: Vec<u64> = Vec::new();
    loop {
        if current.cmp_rational(&stop) != Ordering::Greater {
            return Ok(Approximation {
                w: FactoredInteger::from_primes_u64(&primes),
                last_prime: primes.last().copied().unwrap_or(1),
                primes,
                achieved: current,
            });
        }
        if primes.len() >= config.max_primes {
            return Err(ApproxError::TooManyPrimes(config.max_primes));
        }
        let threshold = &target / &current;
        let after = primes.last().map_or(2, |&q| q + 1);
        let q = next_admissible(f, &threshold, after, avoid, config)
            .ok_or_else(|| ApproxError::StreamCap { cap: config.stream_cap, partial: current.clone() })?;
        current = &current * &f.oriented_rule(&BigUint::from(q), 1);
        primes.push(q);
    }
}

/// Least prime `q >= from` outside `avoid` with `threshold <= f~(q) < 1`.
fn next_admissible(
    f: &MultiplicativeFunction,
    threshold: &PositiveValue,
    from: u64,
    avoid: &BTreeSet<u64>,
    config: &ApproxConfig,
) -> Option<u64> {
    if f.as_builtin().is_some() {
        let start = f.oriented_threshold(threshold, from)?;
        let mut q = next_prime(start)?;
        while avoid.contains(&q) {
            q = next_prime(q + 1)?;
        }
        return (q <= config.stream_cap).then_some(q);
    }
    let one = PositiveValue::one();
    PrimeStream::new(from, config.scan_limit.min(config.stream_cap)).find(|q| {
        if avoid.contains(q) {
            return false;
        }
        let v = f.oriented_rule(&BigUint::from(*q), 1);
        v.compare(threshold) != Ordering::Less && v.compare(&one) == Ordering::Less
    })
}

/// Pairwise coprime `w_1..w_d`, each avoiding `avoid`, with
/// `c_i <= f~(w_i) <= c_i + tol`. Each `w_i` also avoids the primes of the
/// earlier ones.
pub fn approx_tuple(
    f: &MultiplicativeFunction,
    targets: &[Rational],
    avoid: &BTreeSet<u64>,
    tol: &Rational,
    config: &ApproxConfig,
) -> Result<Vec<Approximation>, ApproxError> {
    let mut used = avoid.clone();
    let mut out = Vec::with_capacity(targets.len());
    for c in targets {
        let a = approx_value(f, c, &used, tol, config)?;
        used.extend(a.primes.iter().copied());
        out.push(a);
    }
    Ok(out)
}

/// `|f~(w) - c|` bounded above by a rational, for reporting.
pub fn distance_upper(achieved: &PositiveValue, c: &Rational) -> Rational {
    let (lo, hi) = achieved.bounds(128);
    let a = (&hi - c).abs();
    let b = (c - &lo).abs();
    if a > b {
        a
    } else {
        b
    }
}
