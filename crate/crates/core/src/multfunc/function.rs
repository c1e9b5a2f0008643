//! Multiplicative functions defined by their values at prime powers.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::value::{ratio_big, PositiveValue};
use crate::ntkernel::{CofactorStatus, FactoredInteger, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctionError {
    #[error("unknown function {0:?}; available: phi_over_n, sigma_over_n, n_over_sigma, exp_valuation (aliases: phi, sigma)")]
    UnknownBuiltin(String),
    #[error("cannot evaluate multiplicative function on partial factorization (unfactored part {0})")]
    PartialFactorization(BigUint),
    #[error("invalid function table: {0}")]
    InvalidTable(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    PhiOverN,
    SigmaOverN,
    NOverSigma,
    ExpValuation,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::PhiOverN, Builtin::SigmaOverN, Builtin::NOverSigma, Builtin::ExpValuation];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::PhiOverN => "phi_over_n",
            Builtin::SigmaOverN => "sigma_over_n",
            Builtin::NOverSigma => "n_over_sigma",
            Builtin::ExpValuation => "exp_valuation",
        }
    }

    pub fn divergence(self) -> Divergence {
        match self {
            Builtin::PhiOverN | Builtin::NOverSigma => Divergence::ToZero,
            Builtin::SigmaOverN | Builtin::ExpValuation => Divergence::ToInfinity,
        }
    }

    pub fn rule(self, p: &BigUint, k: u32) -> PositiveValue {
        assert!(k >= 1, "prime-power rule needs exponent >= 1");
        let one = BigUint::one();
        match self {
            Builtin::PhiOverN => PositiveValue::exact(ratio_big(&(p - &one), p)),
            Builtin::SigmaOverN => PositiveValue::exact(sigma_ratio(p, k)),
            Builtin::NOverSigma => PositiveValue::exact(sigma_ratio(p, k).recip()),
            Builtin::ExpValuation => PositiveValue::log_exact(Rational::new(
                BigInt::from(k),
                BigInt::from_biguint(Sign::Plus, p.clone()),
            )),
        }
    }
}

fn sigma_ratio(p: &BigUint, k: u32) -> Rational {
    let one = BigUint::one();
    let num = p.pow(k + 1) - &one;
    let den = p.pow(k) * (p - &one);
    ratio_big(&num, &den)
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    /// `prod f(p)` over the witness set tends to zero.
    ToZero,
    ToInfinity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Rule {
    Builtin(Builtin),
    /// Explicit values at listed prime powers; unlisted ones use `fallback`,
    /// or the value 1 when there is no fallback.
    Table { entries: BTreeMap<(u64, u32), PositiveValue>, fallback: Option<Builtin> },
}

/// A positive multiplicative function with its divergence metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicativeFunction {
    name: String,
    rule: Rule,
    divergence: Divergence,
    witness: String,
    limit_at_primes_is_one: bool,
}

impl MultiplicativeFunction {
    pub fn builtin(b: Builtin) -> Self {
        Self {
            name: b.name().to_string(),
            rule: Rule::Builtin(b),
            divergence: b.divergence(),
            witness: "all primes".to_string(),
            limit_at_primes_is_one: true,
        }
    }

    pub fn by_name(name: &str) -> Result<Self, FunctionError> {
        Builtin::ALL
            .iter()
            .find(|b| b.name() == name)
            .map(|&b| Self::builtin(b))
            .ok_or_else(|| FunctionError::UnknownBuiltin(name.to_string()))
    }

    /// A user-declared function. The divergence data is taken on trust.
    pub fn table(
        name: &str,
        entries: BTreeMap<(u64, u32), PositiveValue>,
        fallback: Option<Builtin>,
        divergence: Divergence,
        witness: &str,
    ) -> Result<Self, FunctionError> {
        for &(p, k) in entries.keys() {
            if k == 0 || !crate::ntkernel::is_prime_u64(p) {
                return Err(FunctionError::InvalidTable(format!("entry ({p}, {k}) is not a prime power")));
            }
        }
        Ok(Self {
            name: name.to_string(),
            rule: Rule::Table { entries, fallback },
            divergence,
            witness: witness.to_string(),
            limit_at_primes_is_one: true,
        })
    }

    /// The function identically equal to one.
    pub fn constant_one() -> Self {
        Self::table("one", BTreeMap::new(), None, Divergence::ToZero, "none").expect("empty table is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn as_builtin(&self) -> Option<Builtin> {
        match self.rule {
            Rule::Builtin(b) => Some(b),
            Rule::Table { .. } => None,
        }
    }

    pub fn divergence(&self) -> Divergence {
        self.divergence
    }

    pub fn witness(&self) -> &str {
        &self.witness
    }

    pub fn limit_at_primes_is_one(&self) -> bool {
        self.limit_at_primes_is_one
    }

    /// True when the construction works with `1/f` rather than `f`.
    pub fn is_reciprocated(&self) -> bool {
        self.divergence == Divergence::ToInfinity
    }

    pub fn rule(&self, p: &BigUint, k: u32) -> PositiveValue {
        match &self.rule {
            Rule::Builtin(b) => b.rule(p, k),
            Rule::Table { entries, fallback } => {
                let listed = p.to_u64().and_then(|p| entries.get(&(p, k)));
                match (listed, fallback) {
                    (Some(v), _) => v.clone(),
                    (None, Some(b)) => b.rule(p, k),
                    (None, None) => PositiveValue::one(),
                }
            }
        }
    }

    pub fn rule_u64(&self, p: u64, k: u32) -> PositiveValue {
        self.rule(&BigUint::from(p), k)
    }

    /// `f` or `1/f`, whichever has product over the witness set tending to zero.
    pub fn oriented_rule(&self, p: &BigUint, k: u32) -> PositiveValue {
        let v = self.rule(p, k);
        if self.is_reciprocated() {
            v.inv()
        } else {
            v
        }
    }

    pub fn eval_factored(&self, n: &FactoredInteger) -> Result<PositiveValue, FunctionError> {
        if n.cofactor_status() == CofactorStatus::CompositeUnfactored {
            return Err(FunctionError::PartialFactorization(n.cofactor().clone()));
        }
        Ok(n.prime_powers().iter().fold(PositiveValue::one(), |acc, (p, k)| &acc * &self.rule(p, *k)))
    }

    pub fn eval_u64(&self, n: u64) -> PositiveValue {
        crate::ntkernel::factor_u64(n)
            .into_iter()
            .fold(PositiveValue::one(), |acc, (p, k)| &acc * &self.rule_u64(p, k))
    }

    pub fn oriented_eval(&self, n: &FactoredInteger) -> Result<PositiveValue, FunctionError> {
        let v = self.eval_factored(n)?;
        Ok(if self.is_reciprocated() { v.inv() } else { v })
    }

    /// Least integer `q >= from` whose oriented prime value `f~(q)` is at
    /// least `threshold`, for builtins (whose prime rule is monotone in `q`).
    /// `None` when the threshold is never reached below `2^63`, or for table
    /// functions.
    pub fn oriented_threshold(&self, threshold: &PositiveValue, from: u64) -> Option<u64> {
        let b = self.as_builtin()?;
        let reaches = |q: u64| {
            let v = b.rule(&BigUint::from(q), 1);
            let v = if self.is_reciprocated() { v.inv() } else { v };
            v.compare(threshold) != Ordering::Less
        };
        let from = from.max(2);
        if reaches(from) {
            return Some(from);
        }
        let (mut lo, mut hi) = (from, from.saturating_mul(2).max(4));
        const LIMIT: u64 = 1 << 63;
        while !reaches(hi) {
            if hi >= LIMIT {
                return None;
            }
            lo = hi;
            hi = hi.saturating_mul(2).min(LIMIT);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if reaches(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

impl fmt::Display for MultiplicativeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A function `f` paired with the scaling `h(n) = n^h_power`; the quantity
/// studied is `g = f * h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSpec {
    pub function: MultiplicativeFunction,
    pub h_power: u32,
}

impl FunctionSpec {
    pub fn new(function: MultiplicativeFunction, h_power: u32) -> Self {
        Self { function, h_power }
    }

    /// Resolves a name; `phi` and `sigma` stand for `phi_over_n` and
    /// `sigma_over_n` with `h_power = 1`.
    pub fn parse(name: &str, h_power: Option<u32>) -> Result<Self, FunctionError> {
        let (base, default_power) = match name {
            "phi" => ("phi_over_n", 1),
            "sigma" => ("sigma_over_n", 1),
            other => (other, 0),
        };
        Ok(Self::new(MultiplicativeFunction::by_name(base)?, h_power.unwrap_or(default_power)))
    }

    /// `g(b) / g(a)` for `g = f * n^h_power`, from factorizations of `a` and `b`.
    pub fn ratio(&self, a: &FactoredInteger, b: &FactoredInteger) -> Result<PositiveValue, FunctionError> {
        let fa = self.function.eval_factored(a)?;
        let fb = self.function.eval_factored(b)?;
        let h = PositiveValue::exact(ratio_big(b.value(), a.value())).pow(self.h_power);
        Ok(&(&fb / &fa) * &h)
    }
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    p: u64,
    k: u32,
    value: PositiveValue,
}

#[derive(Serialize, Deserialize)]
struct FunctionRepr {
    name: String,
    h_power: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<TableEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fallback: Option<Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    divergence: Option<Divergence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<String>,
}

impl Serialize for FunctionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = match &self.function.rule {
            Rule::Builtin(_) => FunctionRepr {
                name: self.function.name.clone(),
                h_power: self.h_power,
                table: None,
                fallback: None,
                divergence: None,
                witness: None,
            },
            Rule::Table { entries, fallback } => FunctionRepr {
                name: self.function.name.clone(),
                h_power: self.h_power,
                table: Some(
                    entries.iter().map(|(&(p, k), v)| TableEntry { p, k, value: v.clone() }).collect(),
                ),
                fallback: *fallback,
                divergence: Some(self.function.divergence),
                witness: Some(self.function.witness.clone()),
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FunctionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = FunctionRepr::deserialize(d)?;
        let function = match repr.table {
            None => MultiplicativeFunction::by_name(&repr.name).map_err(D::Error::custom)?,
            Some(rows) => {
                let divergence = repr
                    .divergence
                    .ok_or_else(|| D::Error::custom("a table function must declare its divergence"))?;
                let entries = rows.into_iter().map(|e| ((e.p, e.k), e.value)).collect();
                MultiplicativeFunction::table(
                    &repr.name,
                    entries,
                    repr.fallback,
                    divergence,
                    repr.witness.as_deref().unwrap_or("declared"),
                )
                .map_err(D::Error::custom)?
            }
        };
        Ok(Self { function, h_power: repr.h_power })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntkernel::factor_u64;
    use num_traits::Signed;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn fact(n: u64) -> FactoredInteger {
        FactoredInteger::from_prime_powers(factor_u64(n).into_iter().map(|(p, k)| (BigUint::from(p), k)))
    }

    #[test]
    fn examples() {
        let phi = MultiplicativeFunction::by_name("phi_over_n").unwrap();
        let nsig = MultiplicativeFunction::by_name("n_over_sigma").unwrap();
        assert_eq!(phi.eval_factored(&fact(12)).unwrap(), PositiveValue::exact(q(1, 3)));
        assert_eq!(phi.eval_factored(&fact(6)).unwrap(), PositiveValue::exact(q(1, 3)));
        assert_eq!(nsig.eval_factored(&fact(6)).unwrap(), PositiveValue::exact(q(1, 2)));
        assert!(phi.eval_factored(&FactoredInteger::one()).unwrap().is_one());
        assert_eq!(phi.rule_u64(5, 1), PositiveValue::exact(q(4, 5)));
        let sig = MultiplicativeFunction::by_name("sigma_over_n").unwrap();
        assert_eq!(sig.rule_u64(2, 1), PositiveValue::exact(q(3, 2)));
        let ev = MultiplicativeFunction::by_name("exp_valuation").unwrap();
        assert_eq!(ev.rule_u64(2, 3), PositiveValue::log_exact(q(3, 2)));
    }

    #[test]
    fn unknown_names_list_builtins() {
        let err = MultiplicativeFunction::by_name("mobius").unwrap_err();
        assert!(err.to_string().contains("phi_over_n"));
        assert!(FunctionSpec::parse("phi", None).unwrap().h_power == 1);
        assert!(FunctionSpec::parse("n_over_sigma", None).unwrap().h_power == 0);
    }

    #[test]
    fn partial_factorizations_are_refused() {
        let phi = MultiplicativeFunction::builtin(Builtin::PhiOverN);
        let n = FactoredInteger::one().with_cofactor(BigUint::from(35u32), CofactorStatus::CompositeUnfactored);
        assert!(matches!(phi.eval_factored(&n), Err(FunctionError::PartialFactorization(_))));
        let p = FactoredInteger::one().with_cofactor(BigUint::from(37u32), CofactorStatus::ProbablePrime);
        assert_eq!(phi.eval_factored(&p).unwrap(), PositiveValue::exact(q(36, 37)));
    }

    fn totient(n: u64) -> u64 {
        (1..=n).filter(|&k| num_integer::gcd(k, n) == 1).count() as u64
    }

    fn sigma(n: u64) -> u64 {
        (1..=n).filter(|d| n % d == 0).sum()
    }

    #[test]
    fn totient_and_sigma_match_brute_force() {
        let phi = MultiplicativeFunction::builtin(Builtin::PhiOverN);
        let sig = MultiplicativeFunction::builtin(Builtin::SigmaOverN);
        for n in 1..=10_000u64 {
            let nn = Rational::from_integer(n.into());
            let a = phi.eval_u64(n).as_rational().unwrap() * &nn;
            assert_eq!(a, Rational::from_integer(totient(n).into()), "phi({n})");
            let b = sig.eval_u64(n).as_rational().unwrap() * &nn;
            assert_eq!(b, Rational::from_integer(sigma(n).into()), "sigma({n})");
        }
    }

    #[test]
    fn prime_values_tend_to_one() {
        let one = PositiveValue::one();
        for &p in crate::ntkernel::primes_upto(100_000).iter() {
            let bound = q(2, p as i64);
            for b in Builtin::ALL {
                let v = b.rule(&BigUint::from(p), 1);
                let (lo, hi) = v.bounds(64);
                let dev = std::cmp::max((&hi - one.coeff()).abs(), (one.coeff() - &lo).abs());
                assert!(dev <= bound, "{b} at {p}");
            }
        }
    }

    #[test]
    fn thresholds_are_least() {
        let phi = MultiplicativeFunction::builtin(Builtin::PhiOverN);
        assert_eq!(phi.oriented_threshold(&PositiveValue::exact(q(4, 5)), 2), Some(5));
        assert_eq!(phi.oriented_threshold(&PositiveValue::exact(q(999, 1000)), 2), Some(1000));
        assert_eq!(phi.oriented_threshold(&PositiveValue::exact(q(1, 3)), 7), Some(7));
        assert_eq!(phi.oriented_threshold(&PositiveValue::one(), 2), None);
        let sig = MultiplicativeFunction::builtin(Builtin::SigmaOverN);
        // q/(q+1) >= 9/10 iff q >= 9
        assert_eq!(sig.oriented_threshold(&PositiveValue::exact(q(9, 10)), 2), Some(9));
        let ev = MultiplicativeFunction::builtin(Builtin::ExpValuation);
        // e^(-1/q) >= 0.9 iff q >= 1/ln(10/9) = 9.49...
        assert_eq!(ev.oriented_threshold(&PositiveValue::exact(q(9, 10)), 2), Some(10));
        assert_eq!(MultiplicativeFunction::constant_one().oriented_threshold(&PositiveValue::one(), 2), None);
    }

    #[test]
    fn h_scaled_ratio() {
        // phi(6)/phi(4) = 2/2
        let spec = FunctionSpec::parse("phi", None).unwrap();
        assert!(spec.ratio(&fact(4), &fact(6)).unwrap().is_one());
        let spec = FunctionSpec::parse("sigma", None).unwrap();
        // sigma(12)/sigma(10) = 28/18
        assert_eq!(spec.ratio(&fact(10), &fact(12)).unwrap(), PositiveValue::exact(q(14, 9)));
    }

    #[test]
    fn json_round_trip() {
        let spec = FunctionSpec::parse("phi", None).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"name":"phi_over_n","h_power":1}"#);
        assert_eq!(serde_json::from_str::<FunctionSpec>(&text).unwrap(), spec);

        let mut entries = BTreeMap::new();
        entries.insert((2, 1), PositiveValue::exact(q(1, 4)));
        let f = MultiplicativeFunction::table("custom", entries, Some(Builtin::PhiOverN), Divergence::ToZero, "all primes")
            .unwrap();
        let spec = FunctionSpec::new(f, 0);
        let text = serde_json::to_string(&spec).unwrap();
        let back: FunctionSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.function.rule_u64(2, 1), PositiveValue::exact(q(1, 4)));
        assert_eq!(back.function.rule_u64(3, 1), PositiveValue::exact(q(2, 3)));
        assert!(serde_json::from_str::<FunctionSpec>(r#"{"name":"custom","h_power":0,"table":[]}"#).is_err());
    }
}
