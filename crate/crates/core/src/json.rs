//! Serde adapters: big integers as decimal strings, rationals as
//! `["num", "den"]` pairs.

use num_bigint::{BigInt, BigUint};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ntkernel::Rational;

#[derive(Serialize, Deserialize)]
struct Pair(String, String);

pub fn rational_to_pair(q: &Rational) -> (String, String) {
    (q.numer().to_string(), q.denom().to_string())
}

pub(crate) fn pair_to_rational<E: serde::de::Error>(n: &str, d: &str) -> Result<Rational, E> {
    let n: BigInt = n.parse().map_err(|_| E::custom(format!("bad numerator {n:?}")))?;
    let d: BigInt = d.parse().map_err(|_| E::custom(format!("bad denominator {d:?}")))?;
    if d <= BigInt::from(0) {
        return Err(E::custom("denominator must be positive"));
    }
    let q = Rational::new(n.clone(), d.clone());
    if q.numer() != &n || q.denom() != &d {
        return Err(E::custom(format!("rational {n}/{d} is not in lowest terms")));
    }
    Ok(q)
}

pub mod rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        let (n, d) = rational_to_pair(q);
        Pair(n, d).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let Pair(n, den) = Pair::deserialize(d)?;
        pair_to_rational(&n, &den)
    }
}

pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<Pair> = v
            .iter()
            .map(|q| {
                let (n, d) = rational_to_pair(q);
                Pair(n, d)
            })
            .collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let pairs = Vec::<Pair>::deserialize(d)?;
        pairs.iter().map(|Pair(n, den)| pair_to_rational(n, den)).collect()
    }
}

pub mod biguint {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("bad unsigned integer {s:?}")))
    }
}

pub mod biguint_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|n| n.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(|_| D::Error::custom(format!("bad unsigned integer {s:?}"))))
            .collect()
    }
}

pub mod bigint {
    use super::*;

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("bad integer {s:?}")))
    }
}
