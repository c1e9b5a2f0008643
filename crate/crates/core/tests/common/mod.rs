//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use primeshift::construct::{build_plan, ConstructionPlan, PlanOptions};
use primeshift::multfunc::FunctionSpec;
use primeshift::ntkernel::Rational;
use primeshift::tuples::TupleSpec;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn trial_is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Prime factorization by plain trial division.
pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut k = 2u64;
    while k * k <= n {
        let mut e = 0;
        while n % k == 0 {
            n /= k;
            e += 1;
        }
        if e > 0 {
            out.push((k, e));
        }
        k += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn smallest_factor_at_most(n: u64, bound: u64) -> Option<u64> {
    let mut k = 2u64;
    while k <= bound && k * k <= n {
        if n % k == 0 {
            return Some(k);
        }
        k += 1;
    }
    (n > 1 && n <= bound).then_some(n)
}

/// Covers every residue class modulo some prime up to 50.
pub fn brute_admissible(tuple: &[i64]) -> bool {
    (2..=50u64).filter(|&p| trial_is_prime(p)).all(|p| {
        let mut hit = vec![false; p as usize];
        for &b in tuple {
            hit[b.rem_euclid(p as i64) as usize] = true;
        }
        hit.contains(&false)
    })
}

/// `phi(n) / n` as an exact rational from a trial factorization.
pub fn phi_over_n(n: u64) -> Rational {
    trial_factor(n).into_iter().fold(q(1, 1), |acc, (p, _)| acc * q(p as i64 - 1, p as i64))
}

/// `sigma(n)` by summing divisors.
pub fn sigma_brute(n: u64) -> u64 {
    (1..=n).filter(|k| n % k == 0).sum()
}

pub fn phi_brute(n: u64) -> u64 {
    (1..=n).filter(|&k| num_integer::gcd(k, n) == 1).count() as u64
}

pub fn to_u64(n: &BigUint) -> u64 {
    n.to_u64().expect("value fits in u64")
}

/// The plan with `alpha = (1)`, `beta = (0, 2)`, `xi = 1/4`, `epsilon = 1/10`.
pub fn worked_plan() -> ConstructionPlan {
    let spec = TupleSpec::new(vec![1], vec![0, 2]).unwrap();
    let f = FunctionSpec::parse("phi_over_n", None).unwrap();
    build_plan(&f, &spec, &[q(1, 4)], &q(1, 10), &PlanOptions::default()).unwrap()
}

/// Least `t <= limit` meeting every hit condition of the worked plan, found
/// with trial division only.
pub fn brute_least_worked_hit(limit: u64) -> Option<u64> {
    let lo = q(9, 40);
    let hi = q(11, 40);
    (0..=limit).find(|&t| {
        let n = 900 * t + 29;
        let g = 30 * t + 1;
        if g <= 5 || !trial_is_prime(n) || !trial_is_prime(n + 2) || !trial_is_prime(g) {
            return false;
        }
        let v = phi_over_n(n + 1);
        v > lo && v < hi
    })
}

/// Random plan inputs: offsets, a builtin, per-row target jitter in
/// hundredths, and an epsilon denominator.
#[derive(Clone, Debug)]
pub struct PlanCase {
    pub alphas: Vec<i64>,
    pub betas: Vec<i64>,
    pub builtin: usize,
    pub jitter: Vec<i64>,
    pub eps_den: i64,
    pub consecutive: bool,
}

pub fn plan_case() -> impl proptest::strategy::Strategy<Value = PlanCase> {
    use proptest::prelude::*;
    (
        proptest::collection::btree_set(-10i64..=10, 1..=3),
        proptest::collection::btree_set(-10i64..=10, 1..=3),
        0usize..4,
        proptest::collection::vec(85i64..=115, 3),
        prop::sample::select(vec![10i64, 20, 100]),
        any::<bool>(),
    )
        .prop_map(|(a, b, builtin, jitter, eps_den, consecutive)| PlanCase {
            alphas: a.into_iter().collect(),
            betas: b.into_iter().collect(),
            builtin,
            jitter,
            eps_den,
            consecutive,
        })
}

/// Builds a plan whose targets sit near the reachable values, or `None` when
/// the offsets are unusable (shared entries or an inadmissible `beta`).
pub fn plan_from_case(case: &PlanCase) -> Option<Result<ConstructionPlan, primeshift::construct::PlanError>> {
    use primeshift::approx::ApproxConfig;
    use primeshift::construct::{compute_frame, compute_offsets, compute_r, phi_map, plan_for_goal, row_value, Goal, RatioForm};
    use primeshift::multfunc::{Builtin, MultiplicativeFunction};

    if case.alphas.iter().any(|a| case.betas.contains(a)) || !brute_admissible(&case.betas) {
        return None;
    }
    let spec = TupleSpec::new(case.alphas.clone(), case.betas.clone()).ok()?;
    let fun = MultiplicativeFunction::builtin(Builtin::ALL[case.builtin]);
    let recip = fun.is_reciprocated();
    let f = FunctionSpec::new(fun.clone(), 1);
    let (m, d) = (spec.m(), spec.d());
    let eps = q(1, case.eps_den);
    let orient = |x: Rational| if recip { x.recip() } else { x };
    let goal = if d == 1 {
        let (r, _) = compute_r(&fun, m, d);
        let u = q(90 + case.jitter[0].rem_euclid(10), 100);
        Goal::Values { targets: vec![orient(r.bounds(64).0 * u)], epsilon: eps }
    } else {
        let frame = compute_frame(m, d);
        let offsets = compute_offsets(&spec, &frame).ok()?;
        let rows: Vec<Rational> = offsets.x.iter().map(|x| row_value(&fun, &frame, x).bounds(64).0).collect();
        let anchored: Vec<Rational> =
            (1..d).map(|i| orient(&rows[i] / &rows[0] * q(case.jitter[i], 100))).collect();
        if case.consecutive {
            Goal::Ratios { form: RatioForm::Consecutive, targets: phi_map(&anchored), epsilon: eps }
        } else {
            Goal::Ratios { form: RatioForm::Anchored, targets: anchored, epsilon: eps }
        }
    };
    let options = PlanOptions { approx: ApproxConfig { max_primes: 1024, ..ApproxConfig::default() }, ..PlanOptions::default() };
    Some(plan_for_goal(&f, &spec, &goal, &options))
}

/// Plan invariants recomputed without the library's validator.
pub fn independent_plan_checks(plan: &ConstructionPlan) -> Result<(), String> {
    use num_bigint::BigInt;
    use num_traits::Zero;

    let divisor = |i: usize| -> BigUint {
        let small = plan.small_primes.iter().zip(&plan.x[i]).fold(BigUint::from(1u32), |acc, (&p, &k)| acc * BigUint::from(p).pow(k));
        small * &plan.w[i].value
    };
    let h0 = |t: &BigUint| BigInt::from(plan.modulus.clone() * t) + BigInt::from(plan.c.clone());
    for t in [0u64, 1, 2, 17, 1_000_003, u64::MAX] {
        let t = BigUint::from(t);
        for (i, &a) in plan.spec.alphas.iter().enumerate() {
            let g = BigInt::from(plan.g[i].leading.clone() * &t) + &plan.g[i].constant;
            if g * BigInt::from(divisor(i)) != h0(&t) + a {
                return Err(format!("identity fails for g_{}", i + 1));
            }
        }
        for (j, &b) in plan.spec.betas.iter().enumerate() {
            let h = BigInt::from(plan.h[j].leading.clone() * &t) + &plan.h[j].constant;
            if h != h0(&t) + b {
                return Err(format!("h_{} is not h_0 + beta", j + 1));
            }
        }
    }
    let m_plus_d = (plan.m() + plan.d()) as u64;
    for p in (2..=m_plus_d).filter(|&p| trial_is_prime(p)) {
        let forms = plan.polynomials();
        let ok = (0..p).any(|t| {
            let t = BigUint::from(t);
            forms.iter().all(|f| {
                let v = BigInt::from(f.leading.clone() * &t) + &f.constant;
                !(v % BigInt::from(p)).is_zero()
            })
        });
        if !ok {
            return Err(format!("product of forms vanishes identically mod {p}"));
        }
    }
    if plan.polynomials().iter().any(|f| f.leading.is_zero()) {
        return Err("zero leading coefficient".into());
    }
    Ok(())
}

/// Greedy scan from stream index `start` towards `num/100`, checked against
/// `C f(q_l) < f(w) <= C` and minimality of the stopping index.
pub fn check_greedy(num: i64, start: usize, which: usize) -> Result<(), proptest::test_runner::TestCaseError> {
    use primeshift::approx::greedy_ratio;
    use primeshift::multfunc::{Builtin, MultiplicativeFunction, PositiveValue};
    use primeshift::ntkernel::{primes_upto, PrimeStream};
    use proptest::{prop_assert, prop_assert_eq};
    use std::cmp::Ordering;

    let f = MultiplicativeFunction::builtin(Builtin::ALL[which]);
    let c = q(num, 100);
    let g = greedy_ratio(&f, PrimeStream::all(1 << 20), &c, start).unwrap();
    let product = g.primes.iter().fold(PositiveValue::one(), |acc, &p| &acc * &f.oriented_rule(&BigUint::from(p), 1));
    prop_assert_eq!(&product, &g.achieved);
    let last = f.oriented_rule(&BigUint::from(g.last_prime), 1);
    prop_assert!(g.achieved.cmp_rational(&c) != Ordering::Greater);
    prop_assert!((&PositiveValue::exact(c.clone()) * &last).compare(&g.achieved) == Ordering::Less);
    prop_assert!((&g.achieved / &last).cmp_rational(&c) == Ordering::Greater);
    let expected: Vec<u64> = primes_upto(g.last_prime).into_iter().skip(start).collect();
    prop_assert_eq!(&g.primes, &expected);
    Ok(())
}

/// `approx_tuple` output is pairwise coprime, avoids `P'`, and lands in
/// `[c, c + tol]`.
pub fn check_tuple(nums: &[i64], avoid_pick: &[usize], which: usize) -> Result<(), proptest::test_runner::TestCaseError> {
    use primeshift::approx::{approx_tuple, ApproxConfig};
    use primeshift::multfunc::{Builtin, MultiplicativeFunction};
    use primeshift::ntkernel::primes_upto;
    use proptest::{prop_assert, prop_assert_eq};
    use std::cmp::Ordering;
    use std::collections::BTreeSet;

    let f = MultiplicativeFunction::builtin(Builtin::ALL[which]);
    let small = primes_upto(200);
    let avoid: BTreeSet<u64> = avoid_pick.iter().map(|&i| small[i]).collect();
    let targets: Vec<_> = nums.iter().map(|&n| q(n, 100)).collect();
    let tol = q(1, 200);
    let out = approx_tuple(&f, &targets, &avoid, &tol, &ApproxConfig::default()).unwrap();
    let mut seen = BTreeSet::new();
    for (a, c) in out.iter().zip(&targets) {
        for &p in &a.primes {
            prop_assert!(trial_is_prime(p));
            prop_assert!(!avoid.contains(&p));
            prop_assert!(seen.insert(p), "prime {} shared", p);
        }
        prop_assert!(a.achieved.cmp_rational(c) != Ordering::Less);
        prop_assert!(a.achieved.cmp_rational(&(c + &tol)) != Ordering::Greater);
        let product = a.primes.iter().fold(BigUint::from(1u32), |acc, &p| acc * p);
        prop_assert_eq!(a.w.value(), &product);
    }
    for (i, a) in out.iter().enumerate() {
        for b in &out[i + 1..] {
            prop_assert_eq!(num_integer::Integer::gcd(a.w.value(), b.w.value()), BigUint::from(1u32));
        }
    }
    Ok(())
}

/// A random spec yields a plan passing validation and the independent checks.
pub fn check_plan(case: &PlanCase) -> Result<(), proptest::test_runner::TestCaseError> {
    use primeshift::construct::validate_plan;
    use proptest::test_runner::TestCaseError;

    let Some(built) = plan_from_case(case) else {
        return Err(TestCaseError::reject("unusable offsets"));
    };
    let plan = built.map_err(|e| TestCaseError::fail(format!("{case:?}: {e}")))?;
    let report = validate_plan(&plan);
    if !report.passed() {
        return Err(TestCaseError::fail(format!("{:?}", report.failures())));
    }
    independent_plan_checks(&plan).map_err(TestCaseError::fail)?;
    let back = ConstructionPlan::from_json(&plan.to_json()).unwrap();
    proptest::prop_assert_eq!(back.to_json(), plan.to_json());
    Ok(())
}

/// Survivors of one full default segment of the worked plan, recomputed by
/// trial division of every form value.
pub fn check_full_segment() -> Result<usize, String> {
    use primeshift::search::{sieve_residues, survivors, SearchConfig};

    let plan = worked_plan();
    let config = SearchConfig::default();
    let table = sieve_residues(&plan.polynomials(), config.sieve_bound).map_err(|e| e.to_string())?;
    let len = config.segment_length;
    let got = survivors(&table, 0, len);
    let bound = config.sieve_bound;
    let forms: Vec<(u64, u64)> =
        plan.polynomials().iter().map(|p| (to_u64(&p.leading), p.constant.clone().try_into().unwrap())).collect();
    let expected: Vec<u64> = (0..len)
        .filter(|&t| t < table.direct_below || forms.iter().all(|&(a, b)| smallest_factor_at_most(a * t + b, bound).is_none()))
        .collect();
    if got != expected {
        return Err(format!("{} survivors against {} by brute force", got.len(), expected.len()));
    }
    Ok(got.len())
}
