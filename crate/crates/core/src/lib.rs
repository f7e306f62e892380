//! Greedy max-min frontiers for resource-sharing network topologies.
//!
//! A topology is a family of resources, each shared by a set of routes. Every
//! route `i` carries a continuous nondecreasing cost function `h_i`, and at time
//! `t` the admissible vectors are those with `a_i <= t` and, for every
//! resource `j`, `sum_{i in G_j} h_i(a_i) <= t`. The frontier `F(t)` is the
//! greatest admissible vector under the min-sensitive order: its minimum is as
//! large as possible, then its next minimum, and so on.
//!
//! All arithmetic is exact ([`Rational`]). The crate is split into
//!
//! - [`order`]: the min-sensitive partial order,
//! - [`pwl`]: exact piecewise-linear cost functions,
//! - [`solver`]: the stage construction of `F(t)` and the closed-form recursion,
//! - [`linear`]: closed-form analysis of instances with single-kink costs,
//! - [`analysis`]: trajectory sampling and regularity verdicts,
//! - [`oracle`]: independent lattice brute force used for verification,
//! - [`method`]: a name-keyed registry of interchangeable frontier methods.

pub mod analysis;
pub mod error;
pub mod instance;
pub mod linear;
pub mod method;
pub mod oracle;
pub mod order;
pub mod pwl;
pub mod rational;
pub mod solver;

pub use error::{Error, Result};
pub use instance::{shift_reduce, OffsetInstance, ProblemInstance};
pub use order::{OrderResult, RVector};
pub use pwl::PiecewiseLinear;
pub use rational::{Extended, Rational};
pub use solver::{solve, FrontierValue, OrderedPartition, Stage, StageDecomposition};
