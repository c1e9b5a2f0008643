//! Multiplicative functions, exact positive values, and decimal rendering.

pub mod decimal;
mod function;
mod value;

pub use function::{Builtin, Divergence, FunctionError, FunctionSpec, MultiplicativeFunction};
pub use value::{exp_bounds, ratio_big, PositiveValue};
