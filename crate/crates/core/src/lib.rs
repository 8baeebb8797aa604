pub mod error;
pub mod checks;
pub mod constants;
pub mod decompose;
pub mod energy;
pub mod exact;
pub mod kp;
pub mod set;

pub use error::{Error, Result};
pub use set::{IntSet, RatSet};
