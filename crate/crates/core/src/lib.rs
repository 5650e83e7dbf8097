//! Numerical laboratory for generalized (λ-)Yamabe constants of symmetric
//! model manifolds.
//!
//! Models are warped products `dt² + f(t)²·g_fiber` glued along an interval
//! ([`geometry`]). Test functions depend on `t` only and are piecewise linear
//! on a grid ([`functional`]). [`solver`] minimizes the energy on the mixed
//! constraint set, [`constructions`] implements the gluing and covering
//! devices, and [`harness`] turns inequalities into checked reports.

pub mod cli;
pub mod constructions;
pub mod error;
pub mod functional;
pub mod geometry;
pub mod harness;
pub mod numeric;
pub mod solver;

pub use error::{Error, Result};
