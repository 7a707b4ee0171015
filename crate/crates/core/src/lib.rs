//! Smallest intersecting ball solvers built on a multiplicative-weights
//! method for zero-sum games over products of second-order cones.

pub mod bodies;
pub mod eja;
pub mod game;
pub mod io;
#[cfg(any(test, feature = "test-support"))]
pub mod reference;
pub mod sib;
pub mod soft;
