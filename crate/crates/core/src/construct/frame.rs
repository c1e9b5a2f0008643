//! Frame constants `L`, `s`, the radius `r`, and the residue data `b`, `e`, `x`.

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::multfunc::{MultiplicativeFunction, PositiveValue};
use crate::ntkernel::{prime_count, primes_upto};
use crate::tuples::{find_nonvanishing_residue, TupleError, TupleSpec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    /// `pi(m + d)`.
    pub l: usize,
    /// `floor(log2 d) + 1`.
    pub s: u32,
    /// The first `l` primes.
    pub small_primes: Vec<u64>,
}

impl Frame {
    /// `p_j^(s+1)` for each small prime.
    pub fn prime_moduli(&self) -> Vec<u64> {
        self.small_primes.iter().map(|&p| p.pow(self.s + 1)).collect()
    }
}

pub fn compute_frame(m: usize, d: usize) -> Frame {
    assert!(m >= 1 && d >= 1, "frame needs m, d >= 1");
    let bound = (m + d) as u64;
    let l = prime_count(bound);
    let s = d.ilog2() + 1;
    Frame { l, s, small_primes: primes_upto(bound) }
}

const EXHAUSTIVE_LIMIT: u64 = 1 << 20;

/// `min f~(prod p_j^x_j)` over `0 <= x_j <= s`, with a minimizing exponent
/// vector.
///
/// Every vector is evaluated when there are at most `2^20` of them; beyond
/// that the minimum is taken prime by prime, which gives the same value for
/// a positive multiplicative function.
pub fn compute_r(f: &MultiplicativeFunction, m: usize, d: usize) -> (PositiveValue, Vec<u32>) {
    let frame = compute_frame(m, d);
    let count = (frame.s as u64 + 1).checked_pow(frame.l as u32);
    match count {
        Some(c) if c <= EXHAUSTIVE_LIMIT => compute_r_exhaustive(f, &frame),
        _ => compute_r_by_prime(f, &frame),
    }
}

pub(crate) fn compute_r_exhaustive(f: &MultiplicativeFunction, frame: &Frame) -> (PositiveValue, Vec<u32>) {
    let table = power_values(f, frame);
    let mut exps = vec![0u32; frame.l];
    let mut best = (PositiveValue::one(), exps.clone());
    loop {
        let v = exps
            .iter()
            .zip(&table)
            .fold(PositiveValue::one(), |acc, (&x, row)| &acc * &row[x as usize]);
        if v < best.0 {
            best = (v, exps.clone());
        }
        let mut j = 0;
        while j < frame.l && exps[j] == frame.s {
            exps[j] = 0;
            j += 1;
        }
        if j == frame.l {
            return best;
        }
        exps[j] += 1;
    }
}

pub(crate) fn compute_r_by_prime(f: &MultiplicativeFunction, frame: &Frame) -> (PositiveValue, Vec<u32>) {
    let table = power_values(f, frame);
    let mut value = PositiveValue::one();
    let mut exps = Vec::with_capacity(frame.l);
    for row in &table {
        let (k, v) = row.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).expect("row has s + 1 entries");
        value = &value * v;
        exps.push(k as u32);
    }
    (value, exps)
}

/// `table[j][k] = f~(p_j^k)` for `0 <= k <= s`.
fn power_values(f: &MultiplicativeFunction, frame: &Frame) -> Vec<Vec<PositiveValue>> {
    frame
        .small_primes
        .iter()
        .map(|&p| {
            std::iter::once(PositiveValue::one())
                .chain((1..=frame.s).map(|k| f.oriented_rule(&BigUint::from(p), k)))
                .collect()
        })
        .collect()
}

/// `f~(prod_j p_j^x_j)` for one row of exponents.
pub fn row_value(f: &MultiplicativeFunction, frame: &Frame, exps: &[u32]) -> PositiveValue {
    frame
        .small_primes
        .iter()
        .zip(exps)
        .filter(|(_, &k)| k > 0)
        .fold(PositiveValue::one(), |acc, (&p, &k)| &acc * &f.oriented_rule(&BigUint::from(p), k))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Offsets {
    pub b: Vec<u64>,
    pub e: Vec<u64>,
    /// `x[i][j]`, the exponent of `p_j` in `alpha_i + e_j p_j + b_j`.
    pub x: Vec<Vec<u32>>,
}

pub fn compute_offsets(spec: &TupleSpec, frame: &Frame) -> Result<Offsets, TupleError> {
    let d = spec.d();
    let mut b = Vec::with_capacity(frame.l);
    let mut e = Vec::with_capacity(frame.l);
    let mut x = vec![Vec::with_capacity(frame.l); d];
    for &p in &frame.small_primes {
        let bj = find_nonvanishing_residue(&spec.betas, p)?;
        let ps = p.pow(frame.s);
        let modulus = (ps * p) as i128;
        let ej = (0..ps)
            .find(|&ej| {
                spec.alphas
                    .iter()
                    .all(|&a| (a as i128 + (ej * p) as i128 + bj as i128).rem_euclid(modulus) != 0)
            })
            .expect("p^s > d leaves a free multiple of p");
        for (i, &a) in spec.alphas.iter().enumerate() {
            let v = BigInt::from(a) + BigInt::from(ej * p + bj);
            x[i].push(crate::ntkernel::valuation(v.magnitude(), p));
        }
        b.push(bj);
        e.push(ej);
    }
    Ok(Offsets { b, e, x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multfunc::Builtin;
    use crate::ntkernel::Rational;

    #[test]
    fn frames() {
        assert_eq!(compute_frame(2, 1), Frame { l: 2, s: 1, small_primes: vec![2, 3] });
        assert_eq!(compute_frame(2, 2), Frame { l: 2, s: 2, small_primes: vec![2, 3] });
        assert_eq!(compute_frame(1, 1), Frame { l: 1, s: 1, small_primes: vec![2] });
        assert_eq!(compute_frame(5, 3).s, 2);
        assert_eq!(compute_frame(1, 4).s, 3);
        assert_eq!(compute_frame(4, 4).l, 4);
    }

    #[test]
    fn radius_examples() {
        let phi = MultiplicativeFunction::builtin(Builtin::PhiOverN);
        let nsig = MultiplicativeFunction::builtin(Builtin::NOverSigma);
        let (r, exps) = compute_r(&phi, 2, 1);
        assert_eq!(r, PositiveValue::exact(Rational::new(1.into(), 3.into())));
        assert_eq!(exps, vec![1, 1]);
        assert_eq!(compute_r(&nsig, 2, 1).0, PositiveValue::exact(Rational::new(1.into(), 2.into())));
        assert!(compute_r(&MultiplicativeFunction::constant_one(), 3, 2).0.is_one());
    }

    #[test]
    fn radius_is_attained_and_agrees_across_methods() {
        for b in Builtin::ALL {
            let f = MultiplicativeFunction::builtin(b);
            for (m, d) in [(1, 1), (2, 1), (2, 3), (4, 3), (5, 3), (2, 5)] {
                let frame = compute_frame(m, d);
                let (r1, e1) = compute_r_exhaustive(&f, &frame);
                let (r2, _) = compute_r_by_prime(&f, &frame);
                assert_eq!(r1, r2, "{b} m={m} d={d}");
                assert_eq!(row_value(&f, &frame, &e1), r1);
            }
        }
    }

    #[test]
    fn offsets_examples() {
        let spec = TupleSpec::new(vec![1], vec![0, 2]).unwrap();
        let o = compute_offsets(&spec, &compute_frame(2, 1)).unwrap();
        assert_eq!((o.b.clone(), o.e.clone(), o.x.clone()), (vec![1, 2], vec![0, 0], vec![vec![1, 1]]));

        let spec = TupleSpec::new(vec![-1, 1], vec![0, 2]).unwrap();
        let frame = compute_frame(2, 2);
        let o = compute_offsets(&spec, &frame).unwrap();
        assert!(o.x.iter().flatten().all(|&x| x <= frame.s));

        let spec = TupleSpec::new(vec![1], vec![0]).unwrap();
        let o = compute_offsets(&spec, &compute_frame(1, 1)).unwrap();
        assert_eq!((o.b, o.e, o.x), (vec![1], vec![0], vec![vec![1]]));
    }

    #[test]
    fn inadmissible_tuples_are_refused() {
        let spec = TupleSpec::new(vec![5], vec![0, 1]).unwrap();
        assert_eq!(compute_offsets(&spec, &compute_frame(2, 1)), Err(TupleError::Inadmissible(2)));
    }
}
