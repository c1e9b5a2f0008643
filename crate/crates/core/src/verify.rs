//! Independent checks of published examples: primality of `p + beta_j` and
//! exact ratios from fresh factorizations of `p + alpha_i`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multfunc::decimal::{matched_digits, render_value, significant_digits, Rounding};
use crate::multfunc::{FunctionSpec, PositiveValue};
use crate::ntkernel::{factor, is_prime, CofactorStatus, FactoredInteger, FactoringBudget, PrimalityResult};

const TABLE_DATA: &str = include_str!("../data/tables-v1.json");

/// Rho caps tried in turn on whatever remains unfactored.
pub const RHO_ESCALATION: [u64; 3] = [1_000_000, 10_000_000, 100_000_000];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("table {table} has no row {row}")]
    UnknownRow { table: String, row: String },
    #[error("p + {0} is not positive")]
    NonPositiveShift(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceConstant {
    pub value: String,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub pair: (i64, i64),
    /// Digits the table marks as agreeing with the constant.
    pub underlined: String,
    /// Printed digits after the underlined prefix.
    pub trailing: String,
    pub constant: String,
}

impl Claim {
    pub fn printed(&self) -> String {
        format!("{}{}", self.underlined, self.trailing)
    }

    pub fn underlined_count(&self) -> usize {
        significant_digits(&self.underlined)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub name: String,
    #[serde(default)]
    pub betas: Option<Vec<i64>>,
    pub alphas: Vec<i64>,
    #[serde(with = "crate::json::biguint")]
    pub p: BigUint,
    pub claims: Vec<Claim>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub id: String,
    /// Shared constraint tuple; rows may override it.
    pub betas: Option<Vec<i64>>,
    pub rows: Vec<TableRow>,
}

impl Table {
    pub fn row_betas<'a>(&'a self, row: &'a TableRow) -> &'a [i64] {
        row.betas.as_deref().or(self.betas.as_deref()).unwrap_or(&[])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableData {
    pub version: String,
    pub function: String,
    pub constants: BTreeMap<String, ReferenceConstant>,
    pub tables: Vec<Table>,
}

impl TableData {
    pub fn table(&self, id: &str) -> Result<&Table, VerifyError> {
        let id = id.trim_start_matches(['T', 't']);
        self.tables.iter().find(|t| t.id == id).ok_or_else(|| VerifyError::UnknownTable(id.to_string()))
    }

    /// A row by name or 1-based index.
    pub fn row(&self, table: &str, row: &str) -> Result<(&Table, &TableRow), VerifyError> {
        let t = self.table(table)?;
        let found = match row.parse::<usize>() {
            Ok(k) if k >= 1 => t.rows.get(k - 1),
            _ => t.rows.iter().find(|r| r.name == row),
        };
        found.map(|r| (t, r)).ok_or_else(|| VerifyError::UnknownRow { table: t.id.clone(), row: row.to_string() })
    }
}

/// The embedded table data.
pub fn tables() -> &'static TableData {
    static DATA: OnceLock<TableData> = OnceLock::new();
    DATA.get_or_init(|| serde_json::from_str(TABLE_DATA).expect("embedded table data parses"))
}

fn shifted(p: &BigUint, a: i64) -> Result<BigUint, VerifyError> {
    let v = BigInt::from_biguint(Sign::Plus, p.clone()) + a;
    if !v.is_positive() {
        return Err(VerifyError::NonPositiveShift(a));
    }
    Ok(v.magnitude().clone())
}

/// `is_prime(p + beta_j)` for each `j`.
pub fn verify_primality(p: &BigUint, betas: &[i64]) -> Vec<PrimalityResult> {
    betas
        .iter()
        .map(|&b| match shifted(p, b) {
            Ok(v) => is_prime(&v),
            Err(_) => is_prime(&BigUint::from(0u32)),
        })
        .collect()
}

/// Factors `n` with trial division and then rho at each escalating cap not
/// above `budget.rho_iteration_cap`, retrying only the unfactored remainder.
pub fn factor_escalating(n: &BigUint, budget: &FactoringBudget) -> FactoredInteger {
    let caps: Vec<u64> = RHO_ESCALATION.iter().copied().filter(|&c| c < budget.rho_iteration_cap).chain([budget.rho_iteration_cap]).collect();
    let mut result = factor(n, &FactoringBudget { rho_iteration_cap: caps[0], ..*budget });
    for &cap in &caps[1..] {
        if result.is_complete() {
            break;
        }
        let rest = result.cofactor().clone();
        let known = FactoredInteger::from_prime_powers(result.factors().iter().cloned());
        let more = factor(&rest, &FactoringBudget { rho_iteration_cap: cap, ..*budget });
        result = known.multiply(&more);
    }
    result
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    Pass,
    Fail,
    Partial,
}

/// Factorization of one shifted value, as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftFactorization {
    pub alpha: i64,
    pub value: String,
    pub prime_powers: Vec<(String, u32)>,
    pub cofactor: String,
    pub cofactor_status: CofactorStatus,
}

impl ShiftFactorization {
    fn new(alpha: i64, f: &FactoredInteger) -> Self {
        Self {
            alpha,
            value: f.value().to_string(),
            prime_powers: f.prime_powers().iter().map(|(p, k)| (p.to_string(), *k)).collect(),
            cofactor: f.cofactor().to_string(),
            cofactor_status: f.cofactor_status(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioVerification {
    pub pair: (i64, i64),
    pub factorizations: Vec<ShiftFactorization>,
    /// `g(p + a_b) / g(p + a_a)`, absent when a factorization is partial.
    pub ratio: Option<PositiveValue>,
    /// Truncated to the requested number of places.
    pub decimal: Option<String>,
    /// Values left unfactored, when partial.
    pub unfactored: Vec<String>,
    pub matched: Option<usize>,
}

impl RatioVerification {
    pub fn is_complete(&self) -> bool {
        self.ratio.is_some()
    }
}

/// `g(p + a_b) / g(p + a_a)` from fresh factorizations, rendered to `digits`
/// places by truncation and compared with `claimed` when given.
pub fn verify_ratio(
    p: &BigUint,
    pair: (i64, i64),
    f: &FunctionSpec,
    digits: usize,
    budget: &FactoringBudget,
    claimed: Option<&str>,
) -> Result<RatioVerification, VerifyError> {
    let na = shifted(p, pair.0)?;
    let nb = shifted(p, pair.1)?;
    let (fa, fb) = std::thread::scope(|s| {
        let ha = s.spawn(|| factor_escalating(&na, budget));
        let fb = factor_escalating(&nb, budget);
        (ha.join().expect("factoring thread"), fb)
    });
    let factorizations = vec![ShiftFactorization::new(pair.0, &fa), ShiftFactorization::new(pair.1, &fb)];
    let unfactored: Vec<String> = [&fa, &fb].iter().filter(|x| !x.is_complete()).map(|x| x.cofactor().to_string()).collect();
    if !unfactored.is_empty() {
        return Ok(RatioVerification { pair, factorizations, ratio: None, decimal: None, unfactored, matched: None });
    }
    let ratio = f.ratio(&fa, &fb).expect("complete factorizations");
    let decimal = render_value(&ratio, digits, Rounding::Truncate);
    let matched = claimed.map(|c| matched_digits(&decimal, c));
    Ok(RatioVerification { pair, factorizations, ratio: Some(ratio), decimal: Some(decimal), unfactored, matched })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub pair: (i64, i64),
    pub underlined: String,
    pub printed: String,
    pub rendered: Option<String>,
    /// Significant digits shared with the printed value.
    pub matched_printed: Option<usize>,
    /// Significant digits shared with the reference constant.
    pub matched_constant: Option<usize>,
    pub underlined_count: usize,
    pub status: ClaimStatus,
    pub verification: RatioVerification,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub version: String,
    pub table: String,
    pub row: String,
    #[serde(with = "crate::json::biguint")]
    pub p: BigUint,
    pub betas: Vec<i64>,
    pub primality: Vec<PrimalityResult>,
    pub primality_pass: bool,
    pub claims: Vec<ClaimReport>,
    pub status: ClaimStatus,
}

/// Checks one embedded row: primality of every `p + beta_j` and each ratio
/// claim. A claim passes when the truncated rendering starts with the
/// underlined digits.
pub fn reproduce_table(table: &str, row: &str, budget: &FactoringBudget) -> Result<TableReport, VerifyError> {
    let data = tables();
    let (t, r) = data.row(table, row)?;
    let f = FunctionSpec::parse(&data.function, None).expect("embedded function name");
    let betas = t.row_betas(r).to_vec();
    let primality = verify_primality(&r.p, &betas);
    let primality_pass = primality.iter().all(|v| v.is_prime());
    let mut claims = Vec::new();
    for claim in &r.claims {
        let printed = claim.printed();
        let places = printed.split('.').nth(1).map_or(0, str::len);
        let v = verify_ratio(&r.p, claim.pair, &f, places, budget, Some(&printed))?;
        let constant = data.constants.get(&claim.constant).map(|c| c.value.as_str());
        let rendered = v.ratio.as_ref().map(|x| render_value(x, places, Rounding::Truncate));
        let long = v.ratio.as_ref().map(|x| render_value(x, 44, Rounding::Truncate));
        let matched_constant = long.as_deref().zip(constant).map(|(a, c)| matched_digits(a, c));
        let status = match &rendered {
            None => ClaimStatus::Partial,
            Some(s) if s.starts_with(&claim.underlined) && matched_digits(s, &claim.underlined) >= claim.underlined_count() => {
                ClaimStatus::Pass
            }
            Some(_) => ClaimStatus::Fail,
        };
        claims.push(ClaimReport {
            pair: claim.pair,
            underlined: claim.underlined.clone(),
            printed,
            matched_printed: v.matched,
            matched_constant,
            rendered,
            underlined_count: claim.underlined_count(),
            status,
            verification: v,
        });
    }
    let status = if !primality_pass || claims.iter().any(|c| c.status == ClaimStatus::Fail) {
        ClaimStatus::Fail
    } else if claims.iter().any(|c| c.status == ClaimStatus::Partial) {
        ClaimStatus::Partial
    } else {
        ClaimStatus::Pass
    };
    Ok(TableReport {
        version: data.version.clone(),
        table: t.id.clone(),
        row: r.name.clone(),
        p: r.p.clone(),
        betas,
        primality,
        primality_pass,
        claims,
        status,
    })
}
