mod common;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use primeshift::ntkernel::{crt, factor, factor_u64, is_prime, is_prime_u64, primes_upto, FactoringBudget};
use proptest::prelude::*;

use common::{trial_factor, trial_is_prime};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn factor_u64_matches_trial_division(n in 1u64..=1_000_000_000) {
        prop_assert_eq!(factor_u64(n), trial_factor(n));
    }

    #[test]
    fn big_factor_agrees_with_u64_path(n in 1u64..=1_000_000_000) {
        let f = factor(&BigUint::from(n), &FactoringBudget::default());
        prop_assert!(f.is_complete());
        let got: Vec<(u64, u32)> = f.prime_powers().iter().map(|(p, k)| (common::to_u64(p), *k)).collect();
        prop_assert_eq!(got, trial_factor(n));
    }

    #[test]
    fn primality_matches_trial_division(n in 0u64..2_000_000) {
        prop_assert_eq!(is_prime_u64(n), trial_is_prime(n));
        prop_assert_eq!(is_prime(&BigUint::from(n)).is_prime(), trial_is_prime(n));
    }

    #[test]
    fn semiprime_products_split(i in 0usize..1000, j in 0usize..1000) {
        let ps = primes_upto(1_000_000);
        let (a, b) = (ps[ps.len() - 1 - i], ps[ps.len() - 1 - j]);
        let n = BigUint::from(a) * BigUint::from(b);
        let f = factor(&n, &FactoringBudget::default());
        prop_assert!(f.is_complete());
        prop_assert_eq!(f.value(), &n);
        prop_assert!(!is_prime(&n).is_prime());
    }

    #[test]
    fn crt_solution_satisfies_every_congruence(
        residues in proptest::collection::vec(-1_000_000i64..1_000_000, 1..5),
        pick in proptest::collection::vec(0usize..200, 5),
    ) {
        let ps = primes_upto(2000);
        let mut moduli: Vec<u64> = pick.iter().take(residues.len()).map(|&i| ps[i]).collect();
        moduli.sort_unstable();
        moduli.dedup();
        let system: Vec<(BigInt, BigUint)> = residues.iter().zip(&moduli).map(|(&r, &m)| (BigInt::from(r), BigUint::from(m * m))).collect();
        let (x, modulus) = crt(&system).unwrap();
        prop_assert!(x < modulus);
        let x = BigInt::from(x);
        for (r, m) in &system {
            prop_assert!((&x - r).mod_floor(&BigInt::from(m.clone())) == BigInt::from(0));
        }
    }
}

#[test]
fn large_known_primes() {
    let m61 = (BigUint::from(1u32) << 61) - 1u32;
    assert!(is_prime(&m61).is_prime());
    let m89 = (BigUint::from(1u32) << 89) - 1u32;
    assert!(is_prime(&m89).is_prime());
    assert!(!is_prime(&(&m89 * &m61)).is_prime());
    let carmichael = BigUint::from(3_215_031_751u64);
    assert!(!is_prime(&carmichael).is_prime());
}
