//! Aggregation of linear Diophantine systems `A x = b`, `x >= 0` integer,
//! into equivalent systems with fewer rows, and counting of their solutions.
//!
//! * [`aggregation`] builds strong aggregations (same solution set) for
//!   bounded systems, pointed cones and the general case, plus weak
//!   aggregations (same feasibility) of size one.
//! * [`counting`] extracts solution counts of one knapsack equation by
//!   dynamic programming or by sampling its generating function.
//! * [`oracle`] enumerates solutions in a box to check both.

pub mod aggregation;
pub mod cone;
pub mod coprime;
pub mod counting;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod lp;
pub mod oracle;

pub use aggregation::{
    aggregate_bounded, aggregate_bounded_explicit, aggregate_general, aggregate_pointed,
    aggregate_strong, aggregate_weak, lower_bound_witness, AggregationKind, AggregationMatrix,
    DiophantineSystem, Provenance,
};
pub use counting::{
    count_dp, count_solutions, count_system, CountLimits, CountMethod, CountResult,
    KnapsackEquation, MethodChoice, SystemCount,
};
pub use error::{Error, Result};
pub use linalg::{IntMatrix, RatMatrix};
pub use oracle::{certify_strong, enumerate, Certificate, Enumerator, SolutionSet};
