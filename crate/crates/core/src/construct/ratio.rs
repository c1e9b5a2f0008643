//! Ratio targets: the maps between anchored and consecutive forms, the
//! reduction to value targets, and exact goal checking.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::multfunc::decimal::{render_rational, Rounding};
use crate::multfunc::{FunctionSpec, PositiveValue};
use crate::ntkernel::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioForm {
    /// `g(n + a_i) / g(n + a_1)` for `i = 2..d`.
    Anchored,
    /// `g(n + a_i) / g(n + a_(i+1))` for `i = 1..d-1`.
    Consecutive,
}

/// Anchored to consecutive: `(1/y1, y1/y2, ..., y_(k-1)/y_k)`.
pub fn phi_map(y: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(y.len());
    for (i, yi) in y.iter().enumerate() {
        out.push(if i == 0 { yi.recip() } else { &y[i - 1] / yi });
    }
    out
}

/// Consecutive to anchored: `(1/x1, 1/(x1 x2), ...)`; inverse of [`phi_map`].
pub fn psi_map(x: &[Rational]) -> Vec<Rational> {
    let mut prod = Rational::one();
    x.iter()
        .map(|xi| {
            prod *= xi;
            prod.recip()
        })
        .collect()
}

fn check_positive(targets: &[Rational]) -> Result<(), PlanError> {
    match targets.iter().position(|t| !t.is_positive()) {
        Some(i) => Err(PlanError::TargetNotPositive(i)),
        None => Ok(()),
    }
}

/// Anchored form of a ratio target vector.
pub fn to_anchored(targets: &[Rational], form: RatioForm) -> Result<Vec<Rational>, PlanError> {
    check_positive(targets)?;
    Ok(match form {
        RatioForm::Anchored => targets.to_vec(),
        RatioForm::Consecutive => psi_map(targets),
    })
}

/// Value targets `x_1 = min(r/rho, r)/2`, `x_(i+1) = x_1 * xi_i`, all in `(0, r)`.
///
/// A rational lower bound of `r` is used when `r` is not itself rational.
pub fn ratio_to_value_targets(ratio_targets: &[Rational], r: &PositiveValue, form: RatioForm) -> Result<Vec<Rational>, PlanError> {
    let anchored = to_anchored(ratio_targets, form)?;
    let r_lo = r.bounds(128).0;
    let rho = anchored.iter().max().cloned().unwrap_or_else(Rational::one);
    let x1 = std::cmp::min(&r_lo / &rho, r_lo.clone()) / Rational::from_integer(2.into());
    let mut out = vec![x1.clone()];
    out.extend(anchored.iter().map(|xi| &x1 * xi));
    for x in &out {
        debug_assert!(x.is_positive() && r.cmp_rational(x) == Ordering::Greater);
    }
    Ok(out)
}

/// What a hit must achieve, stated for the user's function (not its reciprocal).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Goal {
    /// `f(n + a_i)` in `(xi_i (1 - eps), xi_i (1 + eps))`.
    Values {
        #[serde(with = "crate::json::rational_vec")]
        targets: Vec<Rational>,
        #[serde(with = "crate::json::rational")]
        epsilon: Rational,
    },
    /// Ratios of `g = f * n^h` in `(rho_i (1 - eps), rho_i (1 + eps))`.
    Ratios {
        form: RatioForm,
        #[serde(with = "crate::json::rational_vec")]
        targets: Vec<Rational>,
        #[serde(with = "crate::json::rational")]
        epsilon: Rational,
    },
}

/// Per-component outcome of a goal check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalCheck {
    pub achieved: Vec<PositiveValue>,
    pub within: Vec<bool>,
    /// `|achieved / target - 1|`, rendered to 30 decimal places (upper end of a
    /// certified enclosure).
    pub relative_errors: Vec<String>,
}

impl GoalCheck {
    pub fn passed(&self) -> bool {
        self.within.iter().all(|&b| b)
    }
}

impl Goal {
    pub fn epsilon(&self) -> &Rational {
        match self {
            Goal::Values { epsilon, .. } | Goal::Ratios { epsilon, .. } => epsilon,
        }
    }

    pub fn targets(&self) -> &[Rational] {
        match self {
            Goal::Values { targets, .. } | Goal::Ratios { targets, .. } => targets,
        }
    }

    /// Evaluates the goal at `n`, given `f(n + a_i)` for each shift.
    pub fn check(&self, f: &FunctionSpec, n: &BigUint, alphas: &[i64], values: &[PositiveValue]) -> GoalCheck {
        let achieved: Vec<PositiveValue> = match self {
            Goal::Values { .. } => values.to_vec(),
            Goal::Ratios { form, .. } => {
                let shifted: Vec<Rational> = alphas
                    .iter()
                    .map(|&a| Rational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()) + a))
                    .collect();
                let g_ratio = |num: usize, den: usize| {
                    let h = PositiveValue::exact(&shifted[num] / &shifted[den]).pow(f.h_power);
                    &(&values[num] / &values[den]) * &h
                };
                match form {
                    RatioForm::Anchored => (1..values.len()).map(|i| g_ratio(i, 0)).collect(),
                    RatioForm::Consecutive => (0..values.len() - 1).map(|i| g_ratio(i, i + 1)).collect(),
                }
            }
        };
        let eps = self.epsilon();
        let one = Rational::one();
        let mut within = Vec::new();
        let mut relative_errors = Vec::new();
        for (v, t) in achieved.iter().zip(self.targets()) {
            let lo = t * (&one - eps);
            let hi = t * (&one + eps);
            within.push(v.cmp_rational(&lo) == Ordering::Greater && v.cmp_rational(&hi) == Ordering::Less);
            relative_errors.push(relative_error(v, t));
        }
        GoalCheck { achieved, within, relative_errors }
    }
}

pub(crate) fn relative_error(v: &PositiveValue, target: &Rational) -> String {
    if target.is_zero() {
        return "inf".to_string();
    }
    let (lo, hi) = v.bounds(160);
    let a = (&hi / target - Rational::one()).abs();
    let b = (&lo / target - Rational::one()).abs();
    render_rational(if a > b { &a } else { &b }, 30, Rounding::Nearest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn value_target_examples() {
        let r = PositiveValue::exact(q(1, 3));
        assert_eq!(ratio_to_value_targets(&[q(1, 1)], &r, RatioForm::Anchored).unwrap(), vec![q(1, 6), q(1, 6)]);
        let cons = ratio_to_value_targets(&[q(1, 1), q(1, 1)], &r, RatioForm::Consecutive).unwrap();
        assert_eq!(cons, vec![q(1, 6); 3]);
        assert_eq!(psi_map(&[q(1, 1), q(1, 1)]), vec![q(1, 1), q(1, 1)]);
        let t = ratio_to_value_targets(&[q(7, 2)], &r, RatioForm::Anchored).unwrap();
        assert_eq!(t, vec![q(1, 21), q(1, 6)]);
        assert!(matches!(
            ratio_to_value_targets(&[q(0, 1)], &r, RatioForm::Anchored),
            Err(PlanError::TargetNotPositive(0))
        ));
    }

    #[test]
    fn exponential_radius_uses_a_lower_bound() {
        let r = PositiveValue::log_exact(q(-1, 2));
        let t = ratio_to_value_targets(&[q(2, 1)], &r, RatioForm::Anchored).unwrap();
        assert!(t.iter().all(|x| r.cmp_rational(x) == Ordering::Greater));
    }

    #[test]
    fn maps_are_inverse() {
        let y = vec![q(3, 2), q(5, 7), q(11, 3)];
        assert_eq!(psi_map(&phi_map(&y)), y);
        assert_eq!(phi_map(&psi_map(&y)), y);
        assert_eq!(phi_map(&y), vec![q(2, 3), q(21, 10), q(15, 77)]);
    }

    #[test]
    fn goal_checks_include_h_ratio() {
        // phi(6)/phi(4) = 1 with phi = (phi/n) * n
        let f = FunctionSpec::parse("phi", None).unwrap();
        let values = [PositiveValue::exact(q(1, 2)), PositiveValue::exact(q(1, 3))];
        let goal = Goal::Ratios { form: RatioForm::Anchored, targets: vec![q(1, 1)], epsilon: q(1, 100) };
        let c = goal.check(&f, &BigUint::from(5u32), &[-1, 1], &values);
        assert_eq!(c.achieved, vec![PositiveValue::one()]);
        assert!(c.passed());
        assert_eq!(c.relative_errors[0], format!("0.{}", "0".repeat(30)));
        let goal = Goal::Ratios { form: RatioForm::Consecutive, targets: vec![q(1, 1)], epsilon: q(1, 100) };
        assert!(goal.check(&f, &BigUint::from(5u32), &[-1, 1], &values).passed());
        let goal = Goal::Values { targets: vec![q(1, 2), q(1, 3)], epsilon: q(1, 100) };
        assert!(goal.check(&f, &BigUint::from(5u32), &[-1, 1], &values).passed());
        let goal = Goal::Values { targets: vec![q(1, 2), q(1, 4)], epsilon: q(1, 100) };
        let c = goal.check(&f, &BigUint::from(5u32), &[-1, 1], &values);
        assert_eq!(c.within, vec![true, false]);
    }
}
