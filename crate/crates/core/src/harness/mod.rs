//! Inequality checks and the reporting layer.

mod checks;
mod report;
mod suite;

pub use checks::*;
pub use report::*;
pub use suite::*;
