//! Explicit parameter formulas and exponent recursions.

mod expr;
mod params;

pub use expr::{EvalCtx, ExponentExpr, Value};
pub use params::*;
