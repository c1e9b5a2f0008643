//! Exact positive reals of the form `coeff * e^log` with rational parts.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::ntkernel::Rational;

/// A positive value `coeff * e^log`.
///
/// Pure rationals have `log = 0`; pure exponentials have `coeff = 1`. The set is
/// closed under multiplication and inversion, so values produced by any of the
/// builtin functions stay exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PositiveValue {
    coeff: Rational,
    log: Rational,
}

impl PositiveValue {
    pub fn exact(q: Rational) -> Self {
        assert!(q.is_positive(), "positive value required, got {q}");
        Self { coeff: q, log: Rational::zero() }
    }

    /// The value `e^q`.
    pub fn log_exact(q: Rational) -> Self {
        Self { coeff: Rational::one(), log: q }
    }

    pub fn new(coeff: Rational, log: Rational) -> Self {
        assert!(coeff.is_positive(), "positive coefficient required, got {coeff}");
        Self { coeff, log }
    }

    pub fn one() -> Self {
        Self::exact(Rational::one())
    }

    pub fn from_ratio(num: u64, den: u64) -> Self {
        Self::exact(Rational::new(num.into(), den.into()))
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn log(&self) -> &Rational {
        &self.log
    }

    /// `Some(q)` when the value is the rational `q`.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.log.is_zero().then_some(&self.coeff)
    }

    pub fn is_one(&self) -> bool {
        self.log.is_zero() && self.coeff.is_one()
    }

    pub fn inv(&self) -> Self {
        Self { coeff: self.coeff.recip(), log: -&self.log }
    }

    pub fn pow(&self, k: u32) -> Self {
        Self {
            coeff: num_traits::pow(self.coeff.clone(), k as usize),
            log: &self.log * Rational::from_integer(k.into()),
        }
    }

    /// Certified rational bounds `lo <= self <= hi` with roughly `bits` bits of accuracy.
    pub fn bounds(&self, bits: u64) -> (Rational, Rational) {
        if self.log.is_zero() {
            return (self.coeff.clone(), self.coeff.clone());
        }
        let (lo, hi) = exp_bounds(&self.log, bits);
        (&lo * &self.coeff, &hi * &self.coeff)
    }

    /// Rough floating-point value, for diagnostics only.
    pub fn to_f64(&self) -> f64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        let l = self.log.to_f64().unwrap_or(f64::NAN);
        c * l.exp()
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        self.compare(&PositiveValue::exact_or_zero(q))
    }

    fn exact_or_zero(q: &Rational) -> Self {
        Self { coeff: q.clone(), log: Rational::zero() }
    }

    /// Certified total order.
    ///
    /// When the exponential parts differ, the question reduces to `q` versus
    /// `e^z` with rational `z != 0`; since `e^z` is then irrational the
    /// refinement loop always terminates.
    pub fn compare(&self, other: &Self) -> Ordering {
        if !other.coeff.is_positive() {
            return if self.coeff.is_positive() { Ordering::Greater } else { self.coeff.cmp(&other.coeff) };
        }
        // self / other = (c1/c2) * e^(l1 - l2) versus 1, i.e. c2/c1 versus e^(l1 - l2)
        let z = &self.log - &other.log;
        let q = &other.coeff / &self.coeff;
        if z.is_zero() {
            return Rational::one().cmp(&q);
        }
        let mut bits = 64;
        loop {
            let (lo, hi) = exp_bounds(&z, bits);
            if hi < q {
                return Ordering::Less;
            }
            if lo > q {
                return Ordering::Greater;
            }
            bits *= 2;
        }
    }
}

impl PartialOrd for PositiveValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PositiveValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl Mul for &PositiveValue {
    type Output = PositiveValue;

    fn mul(self, rhs: &PositiveValue) -> PositiveValue {
        PositiveValue { coeff: &self.coeff * &rhs.coeff, log: &self.log + &rhs.log }
    }
}

impl Mul for PositiveValue {
    type Output = PositiveValue;

    fn mul(self, rhs: PositiveValue) -> PositiveValue {
        &self * &rhs
    }
}

impl Div for &PositiveValue {
    type Output = PositiveValue;

    fn div(self, rhs: &PositiveValue) -> PositiveValue {
        PositiveValue { coeff: &self.coeff / &rhs.coeff, log: &self.log - &rhs.log }
    }
}

impl Div for PositiveValue {
    type Output = PositiveValue;

    fn div(self, rhs: PositiveValue) -> PositiveValue {
        &self / &rhs
    }
}

impl fmt::Display for PositiveValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.coeff.is_one(), self.log.is_zero()) {
            (_, true) => write!(f, "{}", self.coeff),
            (true, false) => write!(f, "exp({})", self.log),
            (false, false) => write!(f, "{}*exp({})", self.coeff, self.log),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Exact(#[serde(with = "crate::json::rational")] Rational),
    Log {
        #[serde(default, skip_serializing_if = "Option::is_none", with = "optional_rational")]
        coeff: Option<Rational>,
        #[serde(with = "crate::json::rational")]
        log: Rational,
    },
}

mod optional_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match q {
            Some(q) => crate::json::rational::serialize(q, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        crate::json::rational::deserialize(d).map(Some)
    }
}

impl Serialize for PositiveValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = if self.log.is_zero() {
            ValueRepr::Exact(self.coeff.clone())
        } else {
            ValueRepr::Log {
                coeff: (!self.coeff.is_one()).then(|| self.coeff.clone()),
                log: self.log.clone(),
            }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PositiveValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (coeff, log) = match ValueRepr::deserialize(d)? {
            ValueRepr::Exact(q) => (q, Rational::zero()),
            ValueRepr::Log { coeff, log } => (coeff.unwrap_or_else(Rational::one), log),
        };
        if !coeff.is_positive() {
            return Err(serde::de::Error::custom("values must be positive"));
        }
        Ok(Self { coeff, log })
    }
}

/// Rational bounds `lo <= e^z <= hi`.
///
/// The argument is halved `k` times into `[0, 1/2)`, the series is summed in
/// fixed point with directed rounding, and the result is squared back `k`
/// times. Negative arguments use `e^z = 1 / e^-z`.
pub fn exp_bounds(z: &Rational, bits: u64) -> (Rational, Rational) {
    if z.is_zero() {
        return (Rational::one(), Rational::one());
    }
    if z.is_negative() {
        let (lo, hi) = exp_bounds(&-z, bits);
        return (hi.recip(), lo.recip());
    }
    // k with z / 2^k < 1/2
    let int_bits = z.ceil().to_integer().bits();
    let k = int_bits + 1;
    let w = bits + k + 16 + int_bits * 2;
    let scale = BigInt::one() << w;
    let scaled = z.numer() * &scale;
    let den = z.denom() << k;
    let (y_lo, rem) = scaled.div_rem(&den);
    let y_hi = if rem.is_zero() { y_lo.clone() } else { &y_lo + 1 };

    let mut lo = series_lower(&y_lo, &scale);
    let mut hi = series_upper(&y_hi, &scale);
    for _ in 0..k {
        lo = (&lo * &lo) >> w;
        hi = ceil_shift(&(&hi * &hi), w);
    }
    let denom = BigInt::one() << w;
    (Rational::new(lo, denom.clone()), Rational::new(hi, denom))
}

fn series_lower(y: &BigInt, scale: &BigInt) -> BigInt {
    let mut sum = scale.clone();
    let mut term = scale.clone();
    let mut i = 1u32;
    while !term.is_zero() {
        term = (&term * y).div_floor(&(scale * i));
        sum += &term;
        i += 1;
    }
    sum
}

fn series_upper(y: &BigInt, scale: &BigInt) -> BigInt {
    let mut sum = scale.clone();
    let mut term = scale.clone();
    let mut i = 1u32;
    // each term is rounded up; once a term reaches 1 the remaining tail is at most 1
    while term > BigInt::one() {
        term = div_ceil(&(&term * y), &(scale * i));
        sum += &term;
        i += 1;
    }
    sum + 2
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

fn ceil_shift(a: &BigInt, w: u64) -> BigInt {
    let q = a >> w;
    if &(&q << w) == a {
        q
    } else {
        q + 1
    }
}

/// Rational from a big unsigned numerator and denominator.
pub fn ratio_big(num: &BigUint, den: &BigUint) -> Rational {
    Rational::new(
        BigInt::from_biguint(Sign::Plus, num.clone()),
        BigInt::from_biguint(Sign::Plus, den.clone()),
    )
}
