//! Admissible tuples and the offset data `alpha`, `beta`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ntkernel::primes_upto;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TupleError {
    #[error("duplicate entry {0} in tuple")]
    Duplicate(i64),
    #[error("tuple must be nonempty")]
    Empty,
    #[error("inadmissible at p = {0}: the tuple covers every residue class")]
    Inadmissible(u64),
    #[error("alpha {0} coincides with a beta")]
    AlphaEqualsBeta(i64),
}

/// Outcome of an admissibility check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Prime whose residue classes are all covered, when inadmissible.
    pub obstruction: Option<u64>,
    /// For each prime `p <= m`, the least residue left uncovered.
    pub missing_residues: Vec<(u64, u64)>,
}

fn check_distinct(values: &[i64]) -> Result<(), TupleError> {
    if values.is_empty() {
        return Err(TupleError::Empty);
    }
    let mut seen = BTreeSet::new();
    for &v in values {
        if !seen.insert(v) {
            return Err(TupleError::Duplicate(v));
        }
    }
    Ok(())
}

/// Checks whether `betas` avoids some residue class modulo every prime.
/// Only primes `p <= m` need checking since `m` values cannot cover more.
pub fn is_admissible(betas: &[i64]) -> Result<Admissibility, TupleError> {
    check_distinct(betas)?;
    let mut missing_residues = Vec::new();
    for p in primes_upto(betas.len() as u64) {
        match least_uncovered(betas, p) {
            Some(b) => missing_residues.push((p, b)),
            None => {
                return Ok(Admissibility { admissible: false, obstruction: Some(p), missing_residues });
            }
        }
    }
    Ok(Admissibility { admissible: true, obstruction: None, missing_residues })
}

fn least_uncovered(values: &[i64], p: u64) -> Option<u64> {
    let mut covered = vec![false; p as usize];
    for &v in values {
        covered[v.rem_euclid(p as i64) as usize] = true;
    }
    covered.iter().position(|&c| !c).map(|r| r as u64)
}

/// Least `b` in `[0, p)` with `p` dividing none of the `b + beta_i`.
pub fn find_nonvanishing_residue(betas: &[i64], p: u64) -> Result<u64, TupleError> {
    (0..p)
        .find(|&b| betas.iter().all(|&beta| (b as i128 + beta as i128).rem_euclid(p as i128) != 0))
        .ok_or(TupleError::Inadmissible(p))
}

/// The shifts `alpha_1..alpha_d` and prime constraints `beta_1..beta_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleSpec {
    pub alphas: Vec<i64>,
    pub betas: Vec<i64>,
    pub admissible: bool,
}

impl TupleSpec {
    pub fn new(alphas: Vec<i64>, betas: Vec<i64>) -> Result<Self, TupleError> {
        check_distinct(&alphas)?;
        let adm = is_admissible(&betas)?;
        if let Some(a) = alphas.iter().find(|a| betas.contains(a)) {
            return Err(TupleError::AlphaEqualsBeta(*a));
        }
        Ok(Self { alphas, betas, admissible: adm.admissible })
    }

    pub fn m(&self) -> usize {
        self.betas.len()
    }

    pub fn d(&self) -> usize {
        self.alphas.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!(is_admissible(&[0, 2]).unwrap().admissible);
        let a = is_admissible(&[0, 1]).unwrap();
        assert_eq!((a.admissible, a.obstruction), (false, Some(2)));
        let a = is_admissible(&[0, 2, 4]).unwrap();
        assert_eq!((a.admissible, a.obstruction), (false, Some(3)));
        let a = is_admissible(&[0, 6, 12, 18]).unwrap();
        assert!(a.admissible);
        assert_eq!(a.missing_residues, vec![(2, 1), (3, 1)]);
        assert!(is_admissible(&[0, 10, 12, 64, 88]).unwrap().admissible);
        assert!(is_admissible(&[0, 2, 56, 80, 196884]).unwrap().admissible);
        assert_eq!(is_admissible(&[1, 1]), Err(TupleError::Duplicate(1)));
        assert_eq!(is_admissible(&[]), Err(TupleError::Empty));
    }

    #[test]
    fn residues() {
        assert_eq!(find_nonvanishing_residue(&[0, 2], 2), Ok(1));
        assert_eq!(find_nonvanishing_residue(&[0, 2], 3), Ok(2));
        assert_eq!(find_nonvanishing_residue(&[0], 5), Ok(1));
        assert_eq!(find_nonvanishing_residue(&[0, 1], 2), Err(TupleError::Inadmissible(2)));
        assert_eq!(find_nonvanishing_residue(&[-3, -1], 3), Ok(2));
    }

    #[test]
    fn spec_validation() {
        assert_eq!(TupleSpec::new(vec![0], vec![0, 2]), Err(TupleError::AlphaEqualsBeta(0)));
        assert_eq!(TupleSpec::new(vec![1, 1], vec![0, 2]), Err(TupleError::Duplicate(1)));
        let s = TupleSpec::new(vec![-1, 1], vec![0, 2]).unwrap();
        assert!(s.admissible);
        assert_eq!((s.m(), s.d()), (2, 2));
        assert!(!TupleSpec::new(vec![5], vec![0, 1]).unwrap().admissible);
    }
}
