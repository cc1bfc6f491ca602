//! Exact local calculus of differential operators and jets on graded
//! manifolds: graded polynomials, operators in their canonical frame,
//! symbols, brackets, connections and jet prolongation.

pub mod check;
pub mod diffop;
pub mod error;
pub mod galg;
pub mod gcore;
pub mod gvb;
pub mod jets;
pub mod json;
pub mod parallel;
pub mod symbol;

pub use error::{Error, OrderWitness, Result};
pub use galg::{Point, Poly, Rational};
pub use gcore::{CoordinateContext, Ctx, MultiIndex};
