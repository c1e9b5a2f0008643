//! Word-sized and big-integer modular helpers shared by the kernel.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `a` modulo `m`, or `None` when `gcd(a, m) != 1`.
pub fn inverse_u64(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Inverse of `a` modulo `m` for big integers.
pub fn inverse_big(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let egcd = a.extended_gcd(m);
    if !egcd.gcd.is_one() {
        return None;
    }
    Some(egcd.x.mod_floor(m))
}

/// Residue of a signed big integer modulo a word-sized modulus, in `[0, m)`.
pub fn residue_u64(n: &BigInt, m: u64) -> u64 {
    let r = (n.abs() % m).iter_u64_digits().next().unwrap_or(0);
    if n.is_negative() && r != 0 {
        m - r
    } else {
        r
    }
}

pub fn residue_biguint_u64(n: &BigUint, m: u64) -> u64 {
    (n % m).iter_u64_digits().next().unwrap_or(0)
}

/// Jacobi symbol `(a / n)` for odd positive `n`.
pub fn jacobi(a: &BigInt, n: &BigUint) -> i32 {
    assert!(n.is_odd(), "jacobi symbol needs an odd modulus");
    let nn = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut a = a.mod_floor(&nn).to_biguint().unwrap_or_default();
    let mut n = n.clone();
    let mut t = 1i32;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        let n8 = low_bits(&n) & 7;
        if tz % 2 == 1 && (n8 == 3 || n8 == 5) {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        if low_bits(&a) & 3 == 3 && low_bits(&n) & 3 == 3 {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

#[inline]
fn low_bits(n: &BigUint) -> u64 {
    n.iter_u64_digits().next().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jacobi_by_euler(a: i64, p: u64) -> i32 {
        let r = pow_mod(a.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
        match r {
            0 => 0,
            1 => 1,
            _ => -1,
        }
    }

    #[test]
    fn jacobi_matches_euler_criterion_on_primes() {
        for &p in &[3u64, 5, 7, 11, 13, 101, 997] {
            for a in -30i64..30 {
                assert_eq!(
                    jacobi(&BigInt::from(a), &BigUint::from(p)),
                    jacobi_by_euler(a, p),
                    "a={a} p={p}"
                );
            }
        }
    }

    #[test]
    fn jacobi_is_multiplicative_in_modulus() {
        for a in -20i64..20 {
            let j = jacobi(&BigInt::from(a), &BigUint::from(15u32));
            let expect = jacobi_by_euler(a, 3) * jacobi_by_euler(a, 5);
            assert_eq!(j, expect);
        }
    }

    #[test]
    fn inverses() {
        assert_eq!(inverse_u64(900 % 7, 7), Some(2));
        assert_eq!(inverse_u64(6, 9), None);
        let inv = inverse_big(&BigInt::from(4), &BigInt::from(9)).unwrap();
        assert_eq!(inv, BigInt::from(7));
    }

    #[test]
    fn residues_of_negative_values() {
        assert_eq!(residue_u64(&BigInt::from(-1), 7), 6);
        assert_eq!(residue_u64(&BigInt::from(-14), 7), 0);
        assert_eq!(residue_u64(&BigInt::from(23), 7), 2);
    }
}
