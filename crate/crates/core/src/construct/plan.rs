//! Assembling a complete plan: intervals, the `w_i`, the CRT constant and the
//! linear forms `h_0`, `h_j`, `g_i`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::frame::{compute_frame, compute_offsets, compute_r, row_value};
use super::ratio::{ratio_to_value_targets, to_anchored, Goal};
use super::validate::validate_plan;
use super::PlanError;
use crate::approx::{approx_value, ApproxConfig};
use crate::multfunc::{FunctionSpec, PositiveValue};
use crate::ntkernel::{crt, factor_u64, FactoredInteger, Rational};
use crate::tuples::TupleSpec;

pub const PLAN_VERSION: &str = "plan-v1";

/// `t -> leading * t + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearPolynomial {
    #[serde(with = "crate::json::biguint")]
    pub leading: BigUint,
    #[serde(with = "crate::json::bigint")]
    pub constant: BigInt,
}

impl LinearPolynomial {
    pub fn new(leading: BigUint, constant: BigInt) -> Self {
        Self { leading, constant }
    }

    pub fn eval(&self, t: &BigUint) -> BigInt {
        BigInt::from_biguint(Sign::Plus, &self.leading * t) + &self.constant
    }

    /// `(leading mod p, constant mod p)`.
    pub fn residues(&self, p: u64) -> (u64, u64) {
        let a = (&self.leading % p).try_into().unwrap_or(0u64);
        let b = self.constant.mod_floor(&BigInt::from(p));
        (a, b.try_into().unwrap_or(0u64))
    }

    pub fn shifted(&self, by: i64) -> Self {
        Self::new(self.leading.clone(), &self.constant + by)
    }
}

impl std::fmt::Display for LinearPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.constant.sign() {
            Sign::Minus => write!(f, "{}t - {}", self.leading, self.constant.magnitude()),
            _ => write!(f, "{}t + {}", self.leading, self.constant),
        }
    }
}

/// Open rational interval `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "crate::json::rational")]
    pub lo: Rational,
    #[serde(with = "crate::json::rational")]
    pub hi: Rational,
}

impl Interval {
    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &PositiveValue) -> bool {
        v.cmp_rational(&self.lo) == Ordering::Greater && v.cmp_rational(&self.hi) == Ordering::Less
    }
}

/// One squarefree `w_i` with its primes and `f~(w_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WFactor {
    #[serde(with = "crate::json::biguint")]
    pub value: BigUint,
    pub primes: Vec<u64>,
    pub achieved: PositiveValue,
}

impl WFactor {
    pub fn factored(&self) -> FactoredInteger {
        FactoredInteger::from_primes_u64(&self.primes)
    }
}

/// How ratio goals are turned into value targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioStrategy {
    /// `x_1 = min(r/rho, r)/2`, `x_i = x_1 xi_i`; every target stays below `r`.
    Radius,
    /// Scale the ratio vector so the largest `x_i / F_i` sits just below one,
    /// which keeps each `w_i` to a few large primes.
    #[default]
    RowMaximal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanOptions {
    pub approx: ApproxConfig,
    /// Tolerance for `w_i` as a fraction of the interval width; the target is
    /// the interval midpoint.
    pub tolerance_fraction: Rational,
    pub ratio_strategy: RatioStrategy,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            approx: ApproxConfig::default(),
            tolerance_fraction: Rational::new(3.into(), 8.into()),
            ratio_strategy: RatioStrategy::default(),
        }
    }
}

/// Everything needed to search for hits, in the orientation of `f~`.
///
/// `r`, `targets`, `row_values`, `intervals` and `w[i].achieved` all refer to
/// `f~`, which is `f` itself or `1/f` when `reciprocated` is set. `goal`
/// states the request in terms of the original function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub version: String,
    pub function: FunctionSpec,
    pub reciprocated: bool,
    pub spec: TupleSpec,
    pub l: usize,
    pub s: u32,
    pub small_primes: Vec<u64>,
    pub b: Vec<u64>,
    pub e: Vec<u64>,
    pub x: Vec<Vec<u32>>,
    pub r: PositiveValue,
    pub r_exponents: Vec<u32>,
    #[serde(with = "crate::json::rational_vec")]
    pub targets: Vec<Rational>,
    #[serde(with = "crate::json::rational")]
    pub epsilon: Rational,
    /// `F_i = f~(prod_j p_j^x_ij)`.
    pub row_values: Vec<PositiveValue>,
    pub intervals: Vec<Interval>,
    pub avoid: Vec<u64>,
    pub w: Vec<WFactor>,
    #[serde(with = "crate::json::biguint")]
    pub c: BigUint,
    #[serde(with = "crate::json::biguint")]
    pub modulus: BigUint,
    pub h0: LinearPolynomial,
    pub h: Vec<LinearPolynomial>,
    pub g: Vec<LinearPolynomial>,
    pub goal: Goal,
}

impl ConstructionPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn m(&self) -> usize {
        self.spec.m()
    }

    pub fn d(&self) -> usize {
        self.spec.d()
    }

    /// `w_i * prod_j p_j^x_ij`, the cofactor of `g_i(t)` in `n + alpha_i`.
    pub fn row_divisor(&self, i: usize) -> BigUint {
        self.small_primes
            .iter()
            .zip(&self.x[i])
            .fold(self.w[i].value.clone(), |acc, (&p, &k)| acc * BigUint::from(p).pow(k))
    }

    /// Factorization of `row_divisor(i)`.
    pub fn row_factorization(&self, i: usize) -> FactoredInteger {
        let small = self.small_primes.iter().zip(&self.x[i]).map(|(&p, &k)| (BigUint::from(p), k));
        let w = self.w[i].primes.iter().map(|&q| (BigUint::from(q), 1));
        FactoredInteger::from_prime_powers(small.chain(w))
    }

    /// `max(w_i, p_L)`; a hit needs `g_i(t)` above it.
    pub fn g_floor(&self, i: usize) -> BigUint {
        let pl = BigUint::from(*self.small_primes.last().unwrap_or(&1));
        std::cmp::max(self.w[i].value.clone(), pl)
    }

    /// All `m + d` forms, `h` first.
    pub fn polynomials(&self) -> Vec<LinearPolynomial> {
        self.h.iter().chain(&self.g).cloned().collect()
    }

    /// Window `(xi_i (1 - eps), xi_i (1 + eps))` for `f~(n + alpha_i)`.
    pub fn window(&self, i: usize) -> Interval {
        let one = Rational::one();
        Interval {
            lo: &self.targets[i] * (&one - &self.epsilon),
            hi: &self.targets[i] * (&one + &self.epsilon),
        }
    }
}

/// Primes of `P'`: the small primes and every prime dividing a nonzero
/// `alpha_i`, `alpha_i - beta_j` or `alpha_i - alpha_k`.
pub(crate) fn avoid_set(spec: &TupleSpec, small_primes: &[u64]) -> BTreeSet<u64> {
    let mut out: BTreeSet<u64> = small_primes.iter().copied().collect();
    let mut add = |v: i128| {
        if v != 0 {
            out.extend(factor_u64(v.unsigned_abs() as u64).into_iter().map(|(p, _)| p));
        }
    };
    for (i, &a) in spec.alphas.iter().enumerate() {
        add(a as i128);
        for &b in &spec.betas {
            add(a as i128 - b as i128);
        }
        for &a2 in &spec.alphas[i + 1..] {
            add(a as i128 - a2 as i128);
        }
    }
    out
}

enum Cap {
    Radius,
    Row,
}

/// Plan for value targets `xi_i` for `f(n + alpha_i)`, each within a factor
/// `1 +- epsilon`.
pub fn build_plan(
    f: &FunctionSpec,
    spec: &TupleSpec,
    targets: &[Rational],
    epsilon: &Rational,
    options: &PlanOptions,
) -> Result<ConstructionPlan, PlanError> {
    plan_for_goal(f, spec, &Goal::Values { targets: targets.to_vec(), epsilon: epsilon.clone() }, options)
}

pub fn plan_for_goal(f: &FunctionSpec, spec: &TupleSpec, goal: &Goal, options: &PlanOptions) -> Result<ConstructionPlan, PlanError> {
    if !spec.admissible {
        return Err(PlanError::Inadmissible);
    }
    let eps = goal.epsilon();
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(PlanError::EpsilonOutOfRange);
    }
    let d = spec.d();
    let expected = match goal {
        Goal::Values { .. } => d,
        Goal::Ratios { .. } => d - 1,
    };
    if goal.targets().len() != expected {
        return Err(PlanError::TargetCount { expected, got: goal.targets().len() });
    }
    if let Some(i) = goal.targets().iter().position(|t| !t.is_positive()) {
        return Err(PlanError::TargetNotPositive(i));
    }

    let fun = &f.function;
    let reciprocated = fun.is_reciprocated();
    let frame = compute_frame(spec.m(), d);
    let offsets = compute_offsets(spec, &frame)?;
    let (r, r_exponents) = compute_r(fun, spec.m(), d);
    let rows: Vec<PositiveValue> = offsets.x.iter().map(|xi| row_value(fun, &frame, xi)).collect();

    let (targets, epsilon, cap) = match goal {
        Goal::Values { targets, epsilon } => {
            if reciprocated {
                let t = targets.iter().map(|x| x.recip()).collect();
                (t, epsilon / (Rational::one() + epsilon), Cap::Radius)
            } else {
                (targets.clone(), epsilon.clone(), Cap::Radius)
            }
        }
        Goal::Ratios { form, targets, epsilon } => {
            let mut anchored = to_anchored(targets, *form)?;
            if reciprocated {
                anchored = anchored.iter().map(|x| x.recip()).collect();
            }
            let delta = epsilon / Rational::from_integer(4.into());
            match options.ratio_strategy {
                RatioStrategy::Radius => (ratio_to_value_targets(&anchored, &r, super::RatioForm::Anchored)?, delta, Cap::Radius),
                RatioStrategy::RowMaximal => (row_maximal_targets(&anchored, &rows, &delta), delta, Cap::Row),
            }
        }
    };

    for (i, t) in targets.iter().enumerate() {
        match cap {
            Cap::Radius if r.cmp_rational(t) == Ordering::Less => {
                return Err(PlanError::TargetAboveRadius { index: i, target: t.to_string(), r: r.to_string() });
            }
            Cap::Row if rows[i].cmp_rational(t) != Ordering::Greater => {
                return Err(PlanError::TargetAboveRow { index: i, target: t.to_string(), row: rows[i].to_string() });
            }
            _ => {}
        }
    }

    let one = Rational::one();
    let mut intervals = Vec::with_capacity(d);
    for (i, (t, row)) in targets.iter().zip(&rows).enumerate() {
        let lo = &PositiveValue::exact(t * (&one - &epsilon)) / row;
        let hi = &PositiveValue::exact(t * (&one + &epsilon)) / row;
        let lo = lo.bounds(128).1;
        let hi = std::cmp::min(hi.bounds(128).0, one.clone());
        if lo >= hi {
            return Err(PlanError::DegenerateInterval(i));
        }
        intervals.push(Interval { lo, hi });
    }

    let avoid = avoid_set(spec, &frame.small_primes);
    let mut used = avoid.clone();
    let mut w = Vec::with_capacity(d);
    for iv in &intervals {
        let tol = iv.width() * &options.tolerance_fraction;
        let a = approx_value(fun, &iv.midpoint(), &used, &tol, &options.approx)?;
        used.extend(a.primes.iter().copied());
        w.push(WFactor { value: a.w.value().clone(), primes: a.primes, achieved: a.achieved });
    }

    let mut congruences = Vec::new();
    for (j, &p) in frame.small_primes.iter().enumerate() {
        let residue = BigInt::from(offsets.e[j]) * p + offsets.b[j];
        congruences.push((residue, BigUint::from(p).pow(frame.s + 1)));
    }
    for (wi, &a) in w.iter().zip(&spec.alphas) {
        if !wi.value.is_one() {
            let residue = BigInt::from_biguint(Sign::Plus, wi.value.clone()) - a;
            congruences.push((residue, &wi.value * &wi.value));
        }
    }
    let (c, modulus) = crt(&congruences)?;
    let h0 = LinearPolynomial::new(modulus.clone(), BigInt::from_biguint(Sign::Plus, c.clone()));
    let h = spec.betas.iter().map(|&b| h0.shifted(b)).collect();

    let mut plan = ConstructionPlan {
        version: PLAN_VERSION.to_string(),
        function: f.clone(),
        reciprocated,
        spec: spec.clone(),
        l: frame.l,
        s: frame.s,
        small_primes: frame.small_primes,
        b: offsets.b,
        e: offsets.e,
        x: offsets.x,
        r,
        r_exponents,
        targets,
        epsilon,
        row_values: rows,
        intervals,
        avoid: avoid.into_iter().collect(),
        w,
        c,
        modulus,
        h0,
        h,
        g: Vec::new(),
        goal: goal.clone(),
    };
    let mut g = Vec::with_capacity(d);
    for (i, &a) in spec.alphas.iter().enumerate() {
        let divisor = plan.row_divisor(i);
        let (lead, lead_rem) = plan.modulus.div_rem(&divisor);
        let shifted = plan.h0.shifted(a).constant;
        let (cons, cons_rem) = shifted.div_rem(&BigInt::from_biguint(Sign::Plus, divisor));
        if !lead_rem.is_zero() || !cons_rem.is_zero() {
            return Err(PlanError::Invalid(format!("h0 + alpha_{} is not divisible by its row divisor", i + 1)));
        }
        g.push(LinearPolynomial::new(lead, cons));
    }
    plan.g = g;

    let report = validate_plan(&plan);
    if !report.passed() {
        return Err(PlanError::Invalid(report.failures().join("; ")));
    }
    Ok(plan)
}

/// `lambda (1, rho_1, ...)` with `lambda` chosen so the largest `x_i / F_i`
/// equals `1 - 2 delta` (using rational lower bounds of `F_i`).
fn row_maximal_targets(anchored: &[Rational], rows: &[PositiveValue], delta: &Rational) -> Vec<Rational> {
    let one = Rational::one();
    let shape: Vec<Rational> = std::iter::once(one.clone()).chain(anchored.iter().cloned()).collect();
    let scale = &one - delta * Rational::from_integer(2.into());
    let lambda = shape
        .iter()
        .zip(rows)
        .map(|(rho, row)| row.bounds(128).0 * &scale / rho)
        .min()
        .expect("at least one row");
    shape.iter().map(|rho| &lambda * rho).collect()
}
