//! Independent re-derivation of every plan invariant.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::frame::{compute_frame, compute_offsets, compute_r, row_value};
use super::plan::{avoid_set, ConstructionPlan, PLAN_VERSION};
use crate::multfunc::PositiveValue;
use crate::ntkernel::{is_prime_u64, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect()
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, result: Result<(), String>) {
        let (passed, detail) = match result {
            Ok(()) => (true, String::new()),
            Err(e) => (false, e),
        };
        self.checks.push(CheckResult { name: name.to_string(), passed, detail });
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn big(n: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, n.clone())
}

pub fn validate_plan(plan: &ConstructionPlan) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (m, d) = (plan.m(), plan.d());
    report.push("version", ensure(plan.version == PLAN_VERSION, || format!("unknown version {}", plan.version)));
    let shape_ok = d >= 1
        && m >= 1
        && plan.x.len() == d
        && plan.x.iter().all(|r| r.len() == plan.small_primes.len())
        && plan.b.len() == plan.small_primes.len()
        && plan.e.len() == plan.small_primes.len()
        && plan.targets.len() == d
        && plan.row_values.len() == d
        && plan.intervals.len() == d
        && plan.w.len() == d
        && plan.g.len() == d
        && plan.h.len() == m;
    report.push("shape", ensure(shape_ok, || "field lengths disagree with m and d".into()));
    if !shape_ok {
        return report;
    }

    let frame = compute_frame(m, d);
    report.push(
        "frame",
        ensure(frame.l == plan.l && frame.s == plan.s && frame.small_primes == plan.small_primes, || {
            format!("expected L = {}, s = {}", frame.l, frame.s)
        }),
    );
    report.push(
        "offsets",
        match compute_offsets(&plan.spec, &frame) {
            Ok(o) => ensure(o.b == plan.b && o.e == plan.e && o.x == plan.x, || "b, e or x differ from recomputation".into()),
            Err(e) => Err(e.to_string()),
        },
    );
    report.push(
        "exponent_bound",
        ensure(plan.x.iter().flatten().all(|&x| x <= plan.s), || "some x_ij exceeds s".into()),
    );

    let f = &plan.function.function;
    let (r, _) = compute_r(f, m, d);
    let rows: Vec<PositiveValue> = plan.x.iter().map(|xi| row_value(f, &frame, xi)).collect();
    report.push(
        "radius",
        ensure(r == plan.r && row_value(f, &frame, &plan.r_exponents) == r, || "r differs from the exhaustive minimum".into()),
    );
    report.push("row_values", ensure(rows == plan.row_values, || "F_i differ from recomputation".into()));
    report.push(
        "radius_below_rows",
        ensure(rows.iter().all(|row| r.compare(row) != Ordering::Greater), || "r exceeds some F_i".into()),
    );

    report.push("intervals", check_intervals(plan));

    let avoid: Vec<u64> = avoid_set(&plan.spec, &plan.small_primes).into_iter().collect();
    report.push("avoid_set", ensure(avoid == plan.avoid, || "P' differs from recomputation".into()));
    report.push("w_factors", check_w(plan, &avoid));

    report.push("crt", check_crt(plan));
    let modulus = plan
        .w
        .iter()
        .map(|w| &w.value * &w.value)
        .chain(plan.small_primes.iter().map(|&p| BigUint::from(p).pow(plan.s + 1)))
        .fold(BigUint::one(), |acc, v| acc * v);
    report.push("modulus", ensure(modulus == plan.modulus, || format!("expected M = {modulus}")));
    let h_ok = plan.h0.leading == plan.modulus
        && plan.h0.constant == big(&plan.c)
        && plan.h.iter().zip(&plan.spec.betas).all(|(h, &b)| *h == plan.h0.shifted(b));
    report.push("h_forms", ensure(h_ok, || "h_0 or some h_j is not M t + c + beta_j".into()));

    report.push("g_integrality", check_integrality(plan));
    report.push("identity", check_identity(plan));
    report.push("nonvanishing", check_nonvanishing(plan, &frame.small_primes));
    report.push(
        "positive_leading",
        ensure(plan.polynomials().iter().chain([&plan.h0]).all(|p| !p.leading.is_zero()), || {
            "a leading coefficient is zero".into()
        }),
    );
    report
}

fn check_intervals(plan: &ConstructionPlan) -> Result<(), String> {
    let zero = Rational::zero();
    let one = Rational::one();
    for (i, iv) in plan.intervals.iter().enumerate() {
        if !(iv.lo > zero && iv.lo < iv.hi && iv.hi <= one) {
            return Err(format!("I_{} is empty or leaves (0, 1)", i + 1));
        }
        let win = plan.window(i);
        let row = &plan.row_values[i];
        let lo = row * &PositiveValue::exact(iv.lo.clone());
        let hi = row * &PositiveValue::exact(iv.hi.clone());
        if lo.cmp_rational(&win.lo) == Ordering::Less || hi.cmp_rational(&win.hi) == Ordering::Greater {
            return Err(format!("F_{0} I_{0} is not inside the target window", i + 1));
        }
    }
    Ok(())
}

fn check_w(plan: &ConstructionPlan, avoid: &[u64]) -> Result<(), String> {
    let f = &plan.function.function;
    let mut seen = std::collections::BTreeSet::new();
    for (i, w) in plan.w.iter().enumerate() {
        if !w.primes.windows(2).all(|p| p[0] < p[1]) || !w.primes.iter().all(|&q| is_prime_u64(q)) {
            return Err(format!("w_{} is not a product of distinct primes", i + 1));
        }
        if w.factored().value() != &w.value {
            return Err(format!("w_{} differs from the product of its primes", i + 1));
        }
        for &q in &w.primes {
            if avoid.binary_search(&q).is_ok() || !seen.insert(q) {
                return Err(format!("prime {q} of w_{} is in P' or shared", i + 1));
            }
        }
        let value = f.oriented_eval(&w.factored()).map_err(|e| e.to_string())?;
        if value != w.achieved {
            return Err(format!("f(w_{}) differs from the recorded value", i + 1));
        }
        if !plan.intervals[i].contains(&value) {
            return Err(format!("f(w_{0}) lies outside I_{0}", i + 1));
        }
    }
    Ok(())
}

fn check_crt(plan: &ConstructionPlan) -> Result<(), String> {
    ensure(plan.c < plan.modulus, || "c is not reduced modulo M".into())?;
    let c = big(&plan.c);
    for (j, &p) in plan.small_primes.iter().enumerate() {
        let q = BigInt::from(p).pow(plan.s + 1);
        let want = BigInt::from(plan.e[j]) * p + plan.b[j];
        ensure((&c - want).mod_floor(&q).is_zero(), || format!("c fails its congruence modulo {p}^{}", plan.s + 1))?;
    }
    for (w, &a) in plan.w.iter().zip(&plan.spec.alphas) {
        let sq = big(&(&w.value * &w.value));
        let want = big(&w.value) - a;
        ensure((&c - want).mod_floor(&sq).is_zero(), || format!("c fails its congruence modulo {}^2", w.value))?;
    }
    Ok(())
}

fn check_integrality(plan: &ConstructionPlan) -> Result<(), String> {
    for (i, &a) in plan.spec.alphas.iter().enumerate() {
        let dv = plan.row_divisor(i);
        let shifted = plan.h0.shifted(a).constant;
        let (lead, lr) = plan.modulus.div_rem(&dv);
        let (cons, cr) = shifted.div_rem(&big(&dv));
        if !lr.is_zero() || !cr.is_zero() {
            return Err(format!("h_0 + alpha_{} is not divisible by w_i prod p^x", i + 1));
        }
        if plan.g[i].leading != lead || plan.g[i].constant != cons {
            return Err(format!("g_{} has the wrong coefficients", i + 1));
        }
    }
    Ok(())
}

fn check_identity(plan: &ConstructionPlan) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..10 {
        let t = BigUint::from(rng.gen::<u64>());
        for (i, &a) in plan.spec.alphas.iter().enumerate() {
            let lhs = plan.g[i].eval(&t) * big(&plan.row_divisor(i));
            if lhs != plan.h0.eval(&t) + a {
                return Err(format!("identity for g_{} fails at t = {t}", i + 1));
            }
        }
    }
    Ok(())
}

fn check_nonvanishing(plan: &ConstructionPlan, primes: &[u64]) -> Result<(), String> {
    let polys = plan.polynomials();
    for &p in primes {
        let res: Vec<(u64, u64)> = polys.iter().map(|q| q.residues(p)).collect();
        let ok = (0..p).any(|t| res.iter().all(|&(a, b)| (a as u128 * t as u128 + b as u128) % p as u128 != 0));
        if !ok {
            return Err(format!("F vanishes identically modulo {p}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_plan, PlanOptions};
    use crate::multfunc::FunctionSpec;
    use crate::tuples::TupleSpec;

    fn worked() -> ConstructionPlan {
        let spec = TupleSpec::new(vec![1], vec![0, 2]).unwrap();
        let f = FunctionSpec::parse("phi_over_n", None).unwrap();
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        build_plan(&f, &spec, &[q(1, 4)], &q(1, 10), &PlanOptions::default()).unwrap()
    }

    #[test]
    fn worked_plan_passes_everything() {
        let plan = worked();
        let report = validate_plan(&plan);
        assert!(report.passed(), "{:?}", report.failures());
        let residues: Vec<_> = plan.polynomials().iter().map(|p| p.residues(5)).collect();
        assert_eq!(residues, vec![(0, 4), (0, 1), (0, 1)]);
    }

    #[test]
    fn corrupted_constant_breaks_integrality() {
        let mut plan = worked();
        plan.c += 1u32;
        plan.h0.constant += 1;
        let report = validate_plan(&plan);
        assert!(!report.check("g_integrality").unwrap().passed);
        assert!(!report.passed());
    }

    #[test]
    fn other_corruptions_are_caught() {
        let mut plan = worked();
        plan.x[0][0] = 5;
        assert!(!validate_plan(&plan).check("exponent_bound").unwrap().passed);
        let mut plan = worked();
        plan.w[0].primes = vec![7];
        plan.w[0].value = 7u32.into();
        assert!(!validate_plan(&plan).check("w_factors").unwrap().passed);
        let mut plan = worked();
        plan.g[0].constant += 1;
        let r = validate_plan(&plan);
        assert!(!r.check("identity").unwrap().passed && !r.check("g_integrality").unwrap().passed);
        let mut plan = worked();
        plan.h.pop();
        assert!(!validate_plan(&plan).check("shape").unwrap().passed);
    }
}
