mod common;

use num_integer::gcd;
use primeshift::multfunc::{Builtin, MultiplicativeFunction, PositiveValue};
use proptest::prelude::*;

use common::{phi_brute, q, sigma_brute};

fn exact(v: &PositiveValue) -> primeshift::ntkernel::Rational {
    v.as_rational().expect("rational value").clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn builtins_are_multiplicative(a in 1u64..100_000, b in 1u64..100_000, which in 0usize..4) {
        prop_assume!(gcd(a, b) == 1);
        let f = MultiplicativeFunction::builtin(Builtin::ALL[which]);
        prop_assert_eq!(f.eval_u64(a * b), &f.eval_u64(a) * &f.eval_u64(b));
    }

    #[test]
    fn phi_and_sigma_match_brute_force(n in 1u64..3000) {
        let phi = MultiplicativeFunction::builtin(Builtin::PhiOverN);
        prop_assert_eq!(exact(&phi.eval_u64(n)), q(phi_brute(n) as i64, n as i64));
        let sigma = MultiplicativeFunction::builtin(Builtin::SigmaOverN);
        prop_assert_eq!(exact(&sigma.eval_u64(n)), q(sigma_brute(n) as i64, n as i64));
        let inv = MultiplicativeFunction::builtin(Builtin::NOverSigma);
        prop_assert_eq!(exact(&inv.eval_u64(n)), q(n as i64, sigma_brute(n) as i64));
    }

    #[test]
    fn oriented_values_lie_in_unit_interval(p in prop::sample::select(primeshift::ntkernel::primes_upto(5000)), k in 1u32..5, which in 0usize..4) {
        let f = MultiplicativeFunction::builtin(Builtin::ALL[which]);
        let v = f.oriented_rule(&p.into(), k);
        prop_assert!(v.cmp_rational(&q(0, 1)) == std::cmp::Ordering::Greater);
        prop_assert!(v.cmp_rational(&q(1, 1)) == std::cmp::Ordering::Less);
    }
}
