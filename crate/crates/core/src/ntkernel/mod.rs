//! Number-theoretic kernel shared by every other module.

mod crt;
mod factor;
mod modular;
mod primality;
mod sieve;

pub use crt::{crt, CrtError};
pub use factor::{
    factor, factor_u64, pollard_pm1, pollard_rho, valuation, CofactorStatus, FactoredInteger,
    FactoringBudget,
};
pub use modular::{gcd_u64, inverse_big, inverse_u64, jacobi, mul_mod, pow_mod, residue_biguint_u64, residue_u64};
pub use primality::{
    baillie_psw, is_prime, is_prime_u64, is_prime_with, PrimalityConfig, PrimalityMethod,
    PrimalityResult, Verdict,
};
pub use sieve::{next_prime, prime_count, primes_upto, small_primes, PrimeStream};

/// Exact rational number in lowest terms.
pub type Rational = num_rational::BigRational;
