//! Segmented sieve over `t` for simultaneous primality of a plan's linear
//! forms, followed by exact acceptance of each full pass.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::construct::{relative_error, ConstructionPlan, GoalCheck, LinearPolynomial};
use crate::multfunc::decimal::{matched_digits, render_rational, render_value, Rounding};
use crate::multfunc::PositiveValue;
use crate::ntkernel::{
    inverse_u64, is_prime_u64, is_prime_with, primes_upto, FactoredInteger, PrimalityConfig, PrimalityResult,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("plan admits no candidates: every residue is forbidden modulo {0}")]
    NoCandidates(u64),
    #[error("a linear form vanishes identically modulo {0}")]
    VanishingForm(u64),
    #[error("sieve bound {bound} is below the largest small prime {pl}")]
    SieveBoundTooSmall { bound: u64, pl: u64 },
    #[error("segment length and worker count must be positive")]
    EmptyWork,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub sieve_bound: u64,
    pub segment_length: u64,
    pub t_start: u64,
    pub max_segments: u64,
    pub worker_count: usize,
    pub time_budget: Option<Duration>,
    pub primality: PrimalityConfig,
    pub near_miss_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            sieve_bound: 100_000,
            segment_length: 1 << 20,
            t_start: 0,
            max_segments: 64,
            worker_count: 1,
            time_budget: None,
            primality: PrimalityConfig { extra_rounds: 0, seedless: true },
            near_miss_cap: 16,
        }
    }
}

/// Forbidden residues of `t` modulo each sieving prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveTable {
    pub bound: u64,
    /// `(p, sorted forbidden residues)`; primes with no forbidden residue are kept
    /// with an empty list.
    pub entries: Vec<(u64, Vec<u64>)>,
    /// Below this `t` some form is at most `bound`, so sieving could discard a
    /// small prime value; such `t` are tested directly.
    pub direct_below: u64,
}

impl SieveTable {
    pub fn forbidden(&self, p: u64) -> Option<&[u64]> {
        self.entries.iter().find(|(q, _)| *q == p).map(|(_, r)| r.as_slice())
    }
}

/// Forbidden `t`-residues `-b a^{-1} mod p` for every form `a t + b` and prime
/// `p <= bound`. A form with `a = 0 mod p` never vanishes mod `p` unless
/// `b = 0` too, which is an error.
pub fn sieve_residues(polys: &[LinearPolynomial], bound: u64) -> Result<SieveTable, SearchError> {
    let mut entries = Vec::new();
    for p in primes_upto(bound) {
        let mut forbidden = Vec::new();
        for poly in polys {
            let (a, b) = poly.residues(p);
            if a == 0 {
                if b == 0 {
                    return Err(SearchError::VanishingForm(p));
                }
                continue;
            }
            let inv = inverse_u64(a, p).expect("p is prime and a is nonzero");
            forbidden.push(((p - b) % p) as u128 * inv as u128 % p as u128);
        }
        let mut forbidden: Vec<u64> = forbidden.into_iter().map(|r| r as u64).collect();
        forbidden.sort_unstable();
        forbidden.dedup();
        if forbidden.len() as u64 == p {
            return Err(SearchError::NoCandidates(p));
        }
        entries.push((p, forbidden));
    }
    let direct_below = polys.iter().map(|poly| first_t_above(poly, bound)).max().unwrap_or(0);
    Ok(SieveTable { bound, entries, direct_below })
}

/// Least `t >= 0` with `a t + b > bound`.
fn first_t_above(poly: &LinearPolynomial, bound: u64) -> u64 {
    let gap = BigInt::from(bound) - &poly.constant;
    if gap < BigInt::zero() {
        return 0;
    }
    let t: BigUint = gap.magnitude() / &poly.leading + 1u32;
    t.to_u64().unwrap_or(u64::MAX)
}

/// `t` in `[t0, t0 + len)` not eliminated by the sieve.
pub fn survivors(table: &SieveTable, t0: u64, len: u64) -> Vec<u64> {
    let mut marked = vec![false; len as usize];
    for (p, residues) in &table.entries {
        let p = *p;
        let base = t0 % p;
        for &r in residues {
            let mut i = ((r + p - base) % p) as usize;
            while i < marked.len() {
                marked[i] = true;
                i += p as usize;
            }
        }
    }
    (0..len)
        .filter(|&k| !marked[k as usize] || t0 + k < table.direct_below)
        .map(|k| t0 + k)
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCounters {
    pub segments: u64,
    pub candidates: u64,
    pub survivors: u64,
    pub primality_tests: u64,
    pub full_passes: u64,
    pub near_misses: u64,
}

impl SearchCounters {
    fn add(&mut self, other: &Self) {
        self.segments += other.segments;
        self.candidates += other.candidates;
        self.survivors += other.survivors;
        self.primality_tests += other.primality_tests;
        self.full_passes += other.full_passes;
        self.near_misses += other.near_misses;
    }
}

/// A `t` where every form is prime but some value misses its window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearMiss {
    pub t: u64,
    pub oriented_values: Vec<PositiveValue>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub t: u64,
    #[serde(with = "crate::json::biguint")]
    pub n: BigUint,
    /// Verdicts for `h_1..h_m` then `g_1..g_d`.
    pub primality: Vec<PrimalityResult>,
    #[serde(with = "crate::json::biguint_vec")]
    pub g_values: Vec<BigUint>,
    /// `f(n + alpha_i)` for the original function.
    pub values: Vec<PositiveValue>,
    /// `|f~(n + alpha_i) / xi_i - 1|` against the plan targets.
    pub errors_achieved: Vec<String>,
    /// The goal evaluated at `n` (values or ratios of `f * n^h`).
    pub goal: GoalCheck,
}

impl SearchHit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("hit serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub hit: Option<SearchHit>,
    pub counters: SearchCounters,
    pub near_misses: Vec<NearMiss>,
    pub wall_time_secs: f64,
    /// Why the search stopped without a hit.
    pub exhausted: Option<String>,
}

impl SearchOutcome {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes")
    }
}

struct SegmentResult {
    index: u64,
    completed: bool,
    hit: Option<SearchHit>,
    counters: SearchCounters,
    near_misses: Vec<NearMiss>,
}

struct Shared<'a> {
    plan: &'a ConstructionPlan,
    table: &'a SieveTable,
    config: &'a SearchConfig,
    /// Form indices sorted by value size, cheapest first.
    order: Vec<usize>,
    polys: Vec<LinearPolynomial>,
    floors: Vec<BigUint>,
    rows: Vec<FactoredInteger>,
    deadline: Option<Instant>,
    stop: AtomicBool,
}

/// Searches `t = t_start, t_start + 1, ...` in segments for the least `t`
/// whose forms are all prime and whose values meet the plan and goal.
pub fn find_hit(plan: &ConstructionPlan, config: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    let started = Instant::now();
    if config.segment_length == 0 || config.worker_count == 0 {
        return Err(SearchError::EmptyWork);
    }
    let pl = plan.small_primes.last().copied().unwrap_or(2);
    if config.sieve_bound < pl {
        return Err(SearchError::SieveBoundTooSmall { bound: config.sieve_bound, pl });
    }
    let polys = plan.polynomials();
    let table = sieve_residues(&polys, config.sieve_bound)?;
    let mut order: Vec<usize> = (0..polys.len()).collect();
    order.sort_by(|&a, &b| {
        (&polys[a].leading, &polys[a].constant).cmp(&(&polys[b].leading, &polys[b].constant))
    });
    let shared = Shared {
        plan,
        table: &table,
        config,
        order,
        floors: (0..plan.d()).map(|i| plan.g_floor(i)).collect(),
        rows: (0..plan.d()).map(|i| plan.row_factorization(i)).collect(),
        polys,
        deadline: config.time_budget.map(|b| started + b),
        stop: AtomicBool::new(false),
    };

    let next = AtomicU64::new(0);
    let best = AtomicU64::new(u64::MAX);
    let results = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..config.worker_count {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, AtomicOrdering::SeqCst);
                if k >= config.max_segments || k >= best.load(AtomicOrdering::SeqCst) || shared.stop.load(AtomicOrdering::SeqCst) {
                    break;
                }
                let res = run_segment(&shared, k);
                if res.hit.is_some() {
                    best.fetch_min(k, AtomicOrdering::SeqCst);
                }
                if !res.completed {
                    shared.stop.store(true, AtomicOrdering::SeqCst);
                }
                results.lock().expect("no worker panics").push(res);
            });
        }
    });

    let mut results = results.into_inner().expect("no worker panics");
    results.sort_by_key(|r| r.index);
    let mut counters = SearchCounters::default();
    let mut near_misses = Vec::new();
    for r in &results {
        counters.add(&r.counters);
    }
    let mut hit = None;
    let mut exhausted = None;
    for (expected, r) in (0u64..).zip(&results) {
        near_misses.extend(r.near_misses.iter().cloned());
        if r.index != expected || !r.completed && r.hit.is_none() {
            exhausted = Some("time budget exhausted".to_string());
            break;
        }
        if let Some(h) = &r.hit {
            hit = Some(h.clone());
            break;
        }
    }
    if hit.is_none() && exhausted.is_none() {
        exhausted = Some(format!("max_segments = {} exhausted", config.max_segments));
    }
    near_misses.truncate(config.near_miss_cap);
    Ok(SearchOutcome { hit, counters, near_misses, wall_time_secs: started.elapsed().as_secs_f64(), exhausted })
}

fn run_segment(shared: &Shared<'_>, index: u64) -> SegmentResult {
    let len = shared.config.segment_length;
    let t0 = shared.config.t_start.saturating_add(index.saturating_mul(len));
    let len = len.min(u64::MAX - t0);
    let mut counters = SearchCounters { segments: 1, candidates: len, ..SearchCounters::default() };
    let mut near_misses = Vec::new();
    let survivors = survivors(shared.table, t0, len);
    counters.survivors = survivors.len() as u64;
    for (k, &t) in survivors.iter().enumerate() {
        if k % 16 == 0 {
            let late = shared.deadline.is_some_and(|d| Instant::now() >= d);
            if late || shared.stop.load(AtomicOrdering::Relaxed) {
                return SegmentResult { index, completed: false, hit: None, counters, near_misses };
            }
        }
        let tb = BigUint::from(t);
        let mut values = vec![BigUint::zero(); shared.polys.len()];
        let mut all_prime = true;
        for &j in &shared.order {
            counters.primality_tests += 1;
            let v = shared.polys[j].eval(&tb);
            let prime = match v.to_biguint() {
                Some(v) => {
                    let p = is_probable_prime(&v, &shared.config.primality);
                    values[j] = v;
                    p
                }
                None => false,
            };
            if !prime {
                all_prime = false;
                break;
            }
        }
        if !all_prime {
            continue;
        }
        counters.full_passes += 1;
        match accept(shared, t, &values) {
            Ok(hit) => return SegmentResult { index, completed: true, hit: Some(hit), counters, near_misses },
            Err(miss) => {
                counters.near_misses += 1;
                if near_misses.len() < shared.config.near_miss_cap {
                    near_misses.push(miss);
                }
            }
        }
    }
    SegmentResult { index, completed: true, hit: None, counters, near_misses }
}

fn is_probable_prime(v: &BigUint, config: &PrimalityConfig) -> bool {
    match v.to_u64() {
        Some(small) => is_prime_u64(small),
        None => is_prime_with(v, config).is_prime(),
    }
}

/// Exact acceptance: `g_i(t) > max(w_i, p_L)`, each `f~(n + alpha_i)` inside
/// its plan window, and the goal met.
fn accept(shared: &Shared<'_>, t: u64, values: &[BigUint]) -> Result<SearchHit, NearMiss> {
    let plan = shared.plan;
    let m = plan.m();
    let g_values = &values[m..];
    let miss = |oriented: Vec<PositiveValue>, reason: String| NearMiss { t, oriented_values: oriented, reason };
    for (i, g) in g_values.iter().enumerate() {
        if g <= &shared.floors[i] {
            return Err(miss(Vec::new(), format!("g_{} = {g} is not above max(w, p_L)", i + 1)));
        }
    }
    let f = &plan.function.function;
    let mut oriented = Vec::with_capacity(plan.d());
    let mut plain = Vec::with_capacity(plan.d());
    for (row, g) in shared.rows.iter().zip(g_values) {
        let full = row.multiply(&FactoredInteger::from_prime_powers([(g.clone(), 1)]));
        oriented.push(f.oriented_eval(&full).expect("complete factorization"));
        plain.push(f.eval_factored(&full).expect("complete factorization"));
    }
    for (i, v) in oriented.iter().enumerate() {
        if !plan.window(i).contains(v) {
            return Err(miss(oriented.clone(), format!("value {} misses its window", i + 1)));
        }
    }
    let n = plan.h0.eval(&BigUint::from(t)).to_biguint().expect("h_0(t) > 0");
    let goal = plan.goal.check(&plan.function, &n, &plan.spec.alphas, &plain);
    if !goal.passed() {
        return Err(miss(oriented, "goal not met".to_string()));
    }
    let primality = values.iter().map(|v| is_prime_with(v, &shared.config.primality)).collect();
    let errors_achieved = oriented.iter().zip(&plan.targets).map(|(v, x)| relative_error(v, x)).collect();
    Ok(SearchHit { t, n, primality, g_values: g_values.to_vec(), values: plain, errors_achieved, goal })
}

/// Decimal rendering of a hit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitReport {
    pub t: u64,
    pub n: String,
    pub values: Vec<String>,
    /// Goal quantities (values, or ratios of `f * n^h`).
    pub achieved: Vec<String>,
    pub targets: Vec<String>,
    pub matched_digits: Vec<usize>,
    pub relative_errors: Vec<String>,
}

/// Renders values and goal quantities to `digits` places (rounded to nearest)
/// and counts the significant digits shared with each target.
pub fn hit_report(hit: &SearchHit, targets: &[crate::ntkernel::Rational], digits: usize) -> HitReport {
    let render = |v: &PositiveValue| render_value(v, digits, Rounding::Nearest);
    let achieved: Vec<String> = hit.goal.achieved.iter().map(render).collect();
    let target_strings: Vec<String> = targets.iter().map(|q| render_rational(q, digits, Rounding::Nearest)).collect();
    let matched = achieved.iter().zip(&target_strings).map(|(a, b)| matched_digits(a, b)).collect();
    HitReport {
        t: hit.t,
        n: hit.n.to_string(),
        values: hit.values.iter().map(render).collect(),
        achieved,
        targets: target_strings,
        matched_digits: matched,
        relative_errors: hit.goal.relative_errors.clone(),
    }
}

/// Compares `v` to a decimal reference by truncation; helper for reports.
pub fn compare_to_reference(v: &PositiveValue, reference: &str) -> (String, usize) {
    let places = reference.split('.').nth(1).map_or(0, str::len);
    let s = render_value(v, places, Rounding::Truncate);
    let k = matched_digits(&s, reference);
    (s, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_plan, PlanOptions};
    use crate::multfunc::FunctionSpec;
    use crate::ntkernel::Rational;
    use crate::tuples::TupleSpec;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn worked() -> ConstructionPlan {
        let spec = TupleSpec::new(vec![1], vec![0, 2]).unwrap();
        let f = FunctionSpec::parse("phi_over_n", None).unwrap();
        build_plan(&f, &spec, &[q(1, 4)], &q(1, 10), &PlanOptions::default()).unwrap()
    }

    fn lin(a: u64, b: i64) -> LinearPolynomial {
        LinearPolynomial::new(a.into(), BigInt::from(b))
    }

    #[test]
    fn residue_examples() {
        let plan = worked();
        let table = sieve_residues(&plan.polynomials(), 7).unwrap();
        let r7 = table.forbidden(7).unwrap();
        assert_eq!(r7.len(), 3);
        for (a, b) in [(900u64, 29u64), (900, 31), (30, 1)] {
            assert!(r7.iter().any(|&t| (a * t + b) % 7 == 0));
        }
        assert_eq!(table.forbidden(2), Some(&[][..]));
        assert_eq!(sieve_residues(&[lin(1, 1)], 3).unwrap().forbidden(3), Some(&[2u64][..]));
        assert_eq!(sieve_residues(&[lin(2, 0)], 3), Err(SearchError::VanishingForm(2)));
        assert_eq!(sieve_residues(&[lin(1, 0), lin(1, 1)], 3), Err(SearchError::NoCandidates(2)));
    }

    #[test]
    fn small_prime_values_survive() {
        let table = sieve_residues(&[lin(1, 0)], 100).unwrap();
        assert_eq!(table.direct_below, 101);
        let s = survivors(&table, 0, 120);
        assert!(s.contains(&7) && s.contains(&97) && s.contains(&101) && !s.contains(&110));
    }

    #[test]
    fn worked_plan_hit() {
        let plan = worked();
        let config = SearchConfig { sieve_bound: 1000, segment_length: 1 << 12, ..SearchConfig::default() };
        let out = find_hit(&plan, &config).unwrap();
        let hit = out.hit.expect("hit in the first segments");
        let t = hit.t;
        for (a, b) in [(900u64, 29u64), (900, 31), (30, 1)] {
            assert!(is_prime_u64(a * t + b));
        }
        let g = 30 * t + 1;
        let expect = q(4, 15) * (Rational::from_integer(1.into()) - q(1, g as i64));
        assert_eq!(hit.values, vec![PositiveValue::exact(expect)]);
        assert!(hit.goal.passed());
        for workers in [2, 3] {
            let c = SearchConfig { worker_count: workers, ..config.clone() };
            assert_eq!(find_hit(&plan, &c).unwrap().hit.unwrap(), hit);
        }
    }

    #[test]
    fn exhaustion_is_reported() {
        let plan = worked();
        let config = SearchConfig { sieve_bound: 1000, segment_length: 1, max_segments: 1, ..SearchConfig::default() };
        let out = find_hit(&plan, &config).unwrap();
        assert!(out.hit.is_none());
        assert!(out.exhausted.unwrap().contains("max_segments"));
        assert_eq!(out.counters.segments, 1);
    }

    #[test]
    fn report_rendering() {
        let plan = worked();
        let config = SearchConfig { sieve_bound: 1000, segment_length: 1 << 12, ..SearchConfig::default() };
        let hit = find_hit(&plan, &config).unwrap().hit.unwrap();
        let r = hit_report(&hit, &[q(1, 4)], 10);
        assert_eq!(r.targets, vec!["0.2500000000"]);
        assert!(r.matched_digits[0] >= 1);
        let (s, k) = compare_to_reference(&PositiveValue::exact(q(1, 3)), "0.3333");
        assert_eq!((s.as_str(), k), ("0.3333", 4));
    }
}
