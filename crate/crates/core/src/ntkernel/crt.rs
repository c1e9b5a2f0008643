use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use super::modular::inverse_big;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CrtError {
    #[error("moduli {left} (congruence {i}) and {right} (congruence {j}) are not coprime")]
    NotCoprime {
        i: usize,
        j: usize,
        left: BigUint,
        right: BigUint,
    },
    #[error("congruence {0} has a zero modulus")]
    ZeroModulus(usize),
}

/// Solves `x = residue_i (mod modulus_i)` for pairwise coprime moduli.
///
/// Returns the least nonnegative solution together with the product of the
/// moduli. An empty system yields `(0, 1)`.
pub fn crt(congruences: &[(BigInt, BigUint)]) -> Result<(BigUint, BigUint), CrtError> {
    for (i, (_, m)) in congruences.iter().enumerate() {
        if m.is_zero() {
            return Err(CrtError::ZeroModulus(i));
        }
    }
    for i in 0..congruences.len() {
        for j in i + 1..congruences.len() {
            if !congruences[i].1.gcd(&congruences[j].1).is_one() {
                return Err(CrtError::NotCoprime {
                    i,
                    j,
                    left: congruences[i].1.clone(),
                    right: congruences[j].1.clone(),
                });
            }
        }
    }

    let mut x = BigInt::zero();
    let mut modulus = BigInt::one();
    for (r, m) in congruences {
        let m = BigInt::from_biguint(Sign::Plus, m.clone());
        let r = r.mod_floor(&m);
        // x + modulus * k = r (mod m)
        let inv = inverse_big(&modulus, &m).expect("coprimality checked above");
        let k = ((&r - &x) * inv).mod_floor(&m);
        x += &modulus * k;
        modulus *= &m;
        x = x.mod_floor(&modulus);
    }

    for (r, m) in congruences {
        let m = BigInt::from_biguint(Sign::Plus, m.clone());
        assert_eq!(x.mod_floor(&m), r.mod_floor(&m), "CRT self-check failed");
    }
    Ok((
        x.to_biguint().expect("reduced solution is nonnegative"),
        modulus.to_biguint().expect("product of positive moduli"),
    ))
}
