use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::json;

use primeshift::approx::{approx_tuple, ApproxConfig};
use primeshift::construct::{
    plan_for_goal, validate_plan, ConstructionPlan, Goal, PlanOptions, RatioForm, RatioStrategy,
};
use primeshift::multfunc::decimal::{parse_decimal, render_value, Rounding};
use primeshift::multfunc::FunctionSpec;
use primeshift::ntkernel::{FactoringBudget, PrimalityConfig, Rational};
use primeshift::search::{find_hit, hit_report, SearchConfig, SearchOutcome};
use primeshift::tuples::{is_admissible, TupleSpec};
use primeshift::verify::{reproduce_table, verify_primality, verify_ratio, ClaimStatus};

#[derive(Parser)]
#[command(name = "primeshift", version, about = "Multiplicative functions at shifted primes")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a tuple of shifts is admissible.
    Admissible {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        tuple: Vec<i64>,
    },
    /// Find squarefree w with f(w) close to each target.
    Approximate {
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<String>,
        /// Absolute tolerance.
        #[arg(long)]
        epsilon: String,
        /// Primes w may not use.
        #[arg(long, value_delimiter = ',')]
        avoid: Vec<u64>,
    },
    /// Build a plan and print it as plan-v1 JSON.
    Construct {
        #[command(flatten)]
        goal: GoalArgs,
        /// Write the plan here instead of stdout.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Search a saved plan for a hit.
    Search {
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Construct a plan and search it.
    Run {
        #[command(flatten)]
        goal: GoalArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Also save the plan.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Check primality of p + beta and the ratio g(p + a_i) / g(p + a_1).
    Verify {
        #[arg(long)]
        p: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        betas: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alphas: Vec<i64>,
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long, default_value_t = 30)]
        digits: usize,
        #[arg(long, default_value_t = 100_000_000)]
        budget_rho: u64,
    },
    /// Re-verify a row of the embedded tables.
    ReproduceTable {
        /// 1 or 2.
        #[arg(long)]
        table: String,
        /// Row name (gamma, pi, e, sqrt, golden, xx, e-pi) or 1-based index.
        #[arg(long)]
        row: String,
        #[arg(long, default_value_t = 100_000_000)]
        budget_rho: u64,
    },
}

#[derive(Args)]
struct FunctionArgs {
    /// phi_over_n, sigma_over_n, n_over_sigma, exp_valuation, or phi / sigma
    /// (the same with h_power 1).
    #[arg(long, default_value = "phi_over_n")]
    function: String,
    #[arg(long)]
    h_power: Option<u32>,
}

impl FunctionArgs {
    fn spec(&self) -> Result<FunctionSpec, String> {
        FunctionSpec::parse(&self.function, self.h_power).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Value,
    RatioAnchored,
    RatioConsecutive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Radius,
    RowMaximal,
}

#[derive(Args)]
struct GoalArgs {
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    alphas: Vec<i64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    betas: Vec<i64>,
    /// Decimal or n/d targets: d values, or d - 1 ratios.
    #[arg(long, value_delimiter = ',', required = true)]
    targets: Vec<String>,
    /// Relative tolerance.
    #[arg(long)]
    epsilon: String,
    #[arg(long, value_enum, default_value = "value")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "row-maximal")]
    ratio_strategy: Strategy,
    /// Most primes allowed in any single w_i.
    #[arg(long, default_value_t = 256)]
    max_primes: usize,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 100_000)]
    sieve_bound: u64,
    #[arg(long, default_value_t = 1 << 20)]
    segment_length: u64,
    #[arg(long, default_value_t = 0)]
    t_start: u64,
    #[arg(long, default_value_t = 64)]
    max_segments: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_budget: Option<u64>,
    /// Use fixed instead of random bases for the extra Miller-Rabin rounds.
    #[arg(long)]
    seedless: bool,
    #[arg(long, default_value_t = 30)]
    digits: usize,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            sieve_bound: self.sieve_bound,
            segment_length: self.segment_length,
            t_start: self.t_start,
            max_segments: self.max_segments,
            worker_count: self.workers,
            time_budget: self.time_budget.map(Duration::from_secs),
            primality: PrimalityConfig { extra_rounds: 2, seedless: self.seedless },
            ..SearchConfig::default()
        }
    }
}

enum Failure {
    Usage(String),
    Negative(String),
}

type Outcome = Result<(), Failure>;

fn usage<E: ToString>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn parse_rational(s: &str) -> Result<Rational, Failure> {
    parse_decimal(s.trim()).ok_or_else(|| Failure::Usage(format!("cannot parse number {s:?}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Admissible { tuple } => admissible(cli.json, tuple),
        Command::Approximate { function, targets, epsilon, avoid } => approximate(cli.json, function, targets, epsilon, avoid),
        Command::Construct { goal, plan } => {
            let built = build(goal)?;
            let text = built.to_json();
            match plan {
                Some(path) => {
                    fs::write(path, &text).map_err(usage)?;
                    if cli.json {
                        println!("{}", json!({"version": "construct-v1", "plan": path, "validated": true}));
                    } else {
                        print_plan_summary(&built);
                        println!("plan written to {}", path.display());
                    }
                }
                None => println!("{text}"),
            }
            Ok(())
        }
        Command::Search { plan, search } => {
            let text = fs::read_to_string(plan).map_err(usage)?;
            let plan = ConstructionPlan::from_json(&text).map_err(usage)?;
            let report = validate_plan(&plan);
            if !report.passed() {
                return Err(Failure::Usage(format!("plan failed validation: {}", report.failures().join("; "))));
            }
            search_and_report(cli.json, &plan, search)
        }
        Command::Run { goal, search, plan } => {
            let built = build(goal)?;
            if let Some(path) = plan {
                fs::write(path, built.to_json()).map_err(usage)?;
            }
            if !cli.json {
                print_plan_summary(&built);
            }
            search_and_report(cli.json, &built, search)
        }
        Command::Verify { p, betas, alphas, function, digits, budget_rho } => {
            verify(cli.json, p, betas, alphas, function, *digits, *budget_rho)
        }
        Command::ReproduceTable { table, row, budget_rho } => {
            let budget = FactoringBudget { rho_iteration_cap: *budget_rho, ..FactoringBudget::default() };
            let report = reproduce_table(table, row, &budget).map_err(usage)?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(usage)?);
            } else {
                println!("table {} row {}: p = {}", report.table, report.row, report.p);
                let passed = report.primality.iter().filter(|v| v.is_prime()).count();
                println!("primality of p + {:?}: {passed}/{} prime", report.betas, report.primality.len());
                for c in &report.claims {
                    println!(
                        "ratio {:?}: {} (printed {}, underlined {} digits, matched {} printed / {} constant) {:?}",
                        c.pair,
                        c.rendered.as_deref().unwrap_or("unfactored"),
                        c.printed,
                        c.underlined_count,
                        c.matched_printed.unwrap_or(0),
                        c.matched_constant.unwrap_or(0),
                        c.status
                    );
                }
                println!("status: {:?}", report.status);
            }
            match report.status {
                ClaimStatus::Pass => Ok(()),
                _ => Err(Failure::Negative(String::new())),
            }
        }
    }
}

fn admissible(as_json: bool, tuple: &[i64]) -> Outcome {
    let a = is_admissible(tuple).map_err(usage)?;
    if as_json {
        println!("{}", json!({"version": "admissible-v1", "tuple": tuple, "result": a}));
    } else {
        match a.obstruction {
            None => println!("admissible: true"),
            Some(p) => println!("admissible: false (every residue mod {p} is covered)"),
        }
        for (p, r) in &a.missing_residues {
            println!("  mod {p}: residue {r} uncovered");
        }
    }
    Ok(())
}

fn approximate(as_json: bool, function: &FunctionArgs, targets: &[String], epsilon: &str, avoid: &[u64]) -> Outcome {
    let f = function.spec().map_err(Failure::Usage)?.function;
    let tol = parse_rational(epsilon)?;
    let targets: Vec<Rational> = targets.iter().map(|s| parse_rational(s)).collect::<Result<_, _>>()?;
    // for functions tending to infinity work with 1/f, keeping |f(w) - c| <= tol
    let (oriented, tol) = if f.is_reciprocated() {
        let c_max = targets.iter().max().cloned().unwrap_or_else(|| Rational::from_integer(1.into()));
        if tol >= c_max {
            return Err(Failure::Usage("tolerance must be below every target".into()));
        }
        let t = &tol / (&c_max * (&c_max - &tol));
        (targets.iter().map(|c| c.recip()).collect::<Vec<_>>(), t)
    } else {
        (targets.clone(), tol)
    };
    let avoid: BTreeSet<u64> = avoid.iter().copied().collect();
    let out = approx_tuple(&f, &oriented, &avoid, &tol, &ApproxConfig::default()).map_err(usage)?;
    let rows: Vec<_> = out
        .iter()
        .zip(&targets)
        .map(|(a, c)| {
            let value = if f.is_reciprocated() { a.achieved.inv() } else { a.achieved.clone() };
            json!({
                "target": primeshift::json::rational_to_pair(c),
                "w": a.w.value().to_string(),
                "primes": a.primes,
                "value": value,
                "decimal": render_value(&value, 30, Rounding::Nearest),
            })
        })
        .collect();
    if as_json {
        println!("{}", json!({"version": "approximate-v1", "function": f.name(), "results": rows}));
    } else {
        for (a, c) in out.iter().zip(&targets) {
            let value = if f.is_reciprocated() { a.achieved.inv() } else { a.achieved.clone() };
            println!("target {c}: w = {} = {:?}, f(w) = {}", a.w.value(), a.primes, render_value(&value, 30, Rounding::Nearest));
        }
    }
    Ok(())
}

fn build(args: &GoalArgs) -> Result<ConstructionPlan, Failure> {
    let f = args.function.spec().map_err(Failure::Usage)?;
    let spec = TupleSpec::new(args.alphas.clone(), args.betas.clone()).map_err(usage)?;
    let targets: Vec<Rational> = args.targets.iter().map(|s| parse_rational(s)).collect::<Result<_, _>>()?;
    let epsilon = parse_rational(&args.epsilon)?;
    let goal = match args.mode {
        Mode::Value => Goal::Values { targets, epsilon },
        Mode::RatioAnchored => Goal::Ratios { form: RatioForm::Anchored, targets, epsilon },
        Mode::RatioConsecutive => Goal::Ratios { form: RatioForm::Consecutive, targets, epsilon },
    };
    let options = PlanOptions {
        ratio_strategy: match args.ratio_strategy {
            Strategy::Radius => RatioStrategy::Radius,
            Strategy::RowMaximal => RatioStrategy::RowMaximal,
        },
        approx: ApproxConfig { max_primes: args.max_primes, ..ApproxConfig::default() },
        ..PlanOptions::default()
    };
    plan_for_goal(&f, &spec, &goal, &options).map_err(usage)
}

fn print_plan_summary(plan: &ConstructionPlan) {
    println!("L = {}, s = {}, r = {}", plan.l, plan.s, plan.r);
    for (i, w) in plan.w.iter().enumerate() {
        println!("w_{} = {} {:?}", i + 1, w.value, w.primes);
    }
    println!("M = {}", plan.modulus);
    println!("c = {}", plan.c);
    for (j, h) in plan.h.iter().enumerate() {
        println!("h_{} = {h}", j + 1);
    }
    for (i, g) in plan.g.iter().enumerate() {
        println!("g_{} = {g}", i + 1);
    }
}

fn search_and_report(as_json: bool, plan: &ConstructionPlan, args: &SearchArgs) -> Outcome {
    let outcome: SearchOutcome = find_hit(plan, &args.config()).map_err(usage)?;
    let report = outcome.hit.as_ref().map(|h| hit_report(h, plan.goal.targets(), args.digits));
    if as_json {
        println!("{}", serde_json::to_string_pretty(&json!({"version": "hit-v1", "outcome": outcome, "report": report})).map_err(usage)?);
    } else {
        let c = &outcome.counters;
        println!(
            "segments {} candidates {} survivors {} primality tests {} full passes {} near misses {} ({:.2}s)",
            c.segments, c.candidates, c.survivors, c.primality_tests, c.full_passes, c.near_misses, outcome.wall_time_secs
        );
        if let Some(r) = &report {
            println!("hit: t = {}", r.t);
            println!("n = {}", r.n);
            for (i, v) in r.values.iter().enumerate() {
                println!("f({}) = {v}", shifted("n", plan.spec.alphas[i]));
            }
            for ((a, t), k) in r.achieved.iter().zip(&r.targets).zip(&r.matched_digits) {
                println!("achieved {a} target {t} ({k} digits agree)");
            }
        }
    }
    match &outcome.exhausted {
        None => Ok(()),
        Some(why) => Err(Failure::Negative(format!("no hit: {why}"))),
    }
}

fn verify(as_json: bool, p: &str, betas: &[i64], alphas: &[i64], function: &FunctionArgs, digits: usize, budget_rho: u64) -> Outcome {
    let p: BigUint = p.trim().parse().map_err(|_| Failure::Usage(format!("cannot parse p = {p:?}")))?;
    let f = function.spec().map_err(Failure::Usage)?;
    let primality = verify_primality(&p, betas);
    let budget = FactoringBudget { rho_iteration_cap: budget_rho, ..FactoringBudget::default() };
    let mut ratios = Vec::new();
    if let Some((&a1, rest)) = alphas.split_first() {
        for &a in rest {
            ratios.push(verify_ratio(&p, (a1, a), &f, digits, &budget, None).map_err(usage)?);
        }
    }
    let all_prime = primality.iter().all(|v| v.is_prime());
    let complete = ratios.iter().all(|r| r.is_complete());
    if as_json {
        let out = json!({"version": "verify-v1", "p": p.to_string(), "betas": betas, "primality": primality, "ratios": ratios});
        println!("{}", serde_json::to_string_pretty(&out).map_err(usage)?);
    } else {
        for (b, v) in betas.iter().zip(&primality) {
            println!("{}: {:?}", shift(*b), v.verdict);
        }
        for r in &ratios {
            match &r.decimal {
                Some(d) => println!("g({}) / g({}) = {d}", shift(r.pair.1), shift(r.pair.0)),
                None => println!("g({}) / g({}): partial, unfactored {:?}", shift(r.pair.1), shift(r.pair.0), r.unfactored),
            }
        }
    }
    if all_prime && complete {
        Ok(())
    } else {
        Err(Failure::Negative(String::new()))
    }
}

fn shift(a: i64) -> String {
    shifted("p", a)
}

fn shifted(base: &str, a: i64) -> String {
    match a {
        0 => base.to_string(),
        a if a < 0 => format!("{base} - {}", -a),
        a => format!("{base} + {a}"),
    }
}
