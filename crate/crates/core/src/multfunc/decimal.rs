//! Decimal rendering of exact values and digit-prefix comparison.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::value::PositiveValue;
use crate::ntkernel::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    /// Round half away from zero.
    Nearest,
    Truncate,
}

/// Renders `q` with exactly `places` digits after the decimal point.
pub fn render_rational(q: &Rational, places: usize, mode: Rounding) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = q.abs() * Rational::from_integer(scale);
    let units = match mode {
        Rounding::Truncate => scaled.to_integer(),
        Rounding::Nearest => {
            let (n, d) = (scaled.numer(), scaled.denom());
            let twice: BigInt = n * 2 + d;
            twice.div_floor(&(d * 2))
        }
    };
    let negative = q.is_negative() && !units.is_zero();
    let mut digits = units.to_string();
    if places > 0 {
        if digits.len() <= places {
            digits = format!("{}{}", "0".repeat(places + 1 - digits.len()), digits);
        }
        digits.insert(digits.len() - places, '.');
    }
    if negative {
        format!("-{digits}")
    } else {
        digits
    }
}

/// Renders a positive value to `places` decimals, refining certified bounds
/// until both ends produce the same string.
pub fn render_value(v: &PositiveValue, places: usize, mode: Rounding) -> String {
    if let Some(q) = v.as_rational() {
        return render_rational(q, places, mode);
    }
    let mut bits = (places as u64) * 4 + 64;
    loop {
        let (lo, hi) = v.bounds(bits);
        let a = render_rational(&lo, places, mode);
        if a == render_rational(&hi, places, mode) {
            return a;
        }
        bits *= 2;
        if bits > (places as u64 + 64) * 64 {
            // the value sits on a rounding boundary of this many places; the
            // lower end is the truncation-consistent answer
            return a;
        }
    }
}

/// Number of significant digits on which `rendered` agrees with `reference`,
/// reading both left to right from the first nonzero digit. The integer parts
/// must coincide in length for any digit to count.
pub fn matched_digits(rendered: &str, reference: &str) -> usize {
    let split = |s: &str| -> (String, String) {
        let s = s.trim().trim_start_matches('+');
        match s.split_once('.') {
            Some((i, f)) => (i.to_string(), f.to_string()),
            None => (s.to_string(), String::new()),
        }
    };
    let (ri, rf) = split(rendered);
    let (fi, ff) = split(reference);
    if ri.starts_with('-') != fi.starts_with('-') {
        return 0;
    }
    let ri = ri.trim_start_matches('-').trim_start_matches('0');
    let fi = fi.trim_start_matches('-').trim_start_matches('0');
    if ri.len() != fi.len() {
        return 0;
    }
    let a: Vec<char> = ri.chars().chain(rf.chars()).collect();
    let b: Vec<char> = fi.chars().chain(ff.chars()).collect();
    let lead = if ri.is_empty() {
        // value below one: skip shared leading zeros of the fraction
        let za = a.iter().take_while(|&&c| c == '0').count();
        let zb = b.iter().take_while(|&&c| c == '0').count();
        if za != zb {
            return 0;
        }
        za
    } else {
        0
    };
    a[lead..]
        .iter()
        .zip(&b[lead..])
        .take_while(|(x, y)| x == y && x.is_ascii_digit())
        .count()
}

/// Count of significant digits in a decimal string.
pub fn significant_digits(s: &str) -> usize {
    let digits: String = s.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.trim_start_matches('0').len()
}

/// Parses a decimal literal such as `-1.25e-3` into an exact rational.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        return (!d.is_zero()).then(|| Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10u32);
    let mut q = if shift >= 0 {
        Rational::from_integer(digits * ten.pow(shift as u32))
    } else {
        Rational::new(digits, ten.pow((-shift) as u32))
    };
    if neg {
        q = -q;
    }
    Some(q)
}
