//! Numerical and symbolic toolkit for value-distribution experiments on
//! meromorphic functions: expressions, differential polynomials, zero/pole
//! location, Nevanlinna functionals and an inequality harness.

pub mod expr;
pub mod quad;
pub mod diffpoly;
pub mod locator;
pub mod nevanlinna;
pub mod theorems;
