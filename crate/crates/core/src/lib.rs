//! Iterative scaling of nonnegative matrices to prescribed row and column
//! sums, with exact computation of the limit-point block structure.
//!
//! The scaling sequence `B(k)`, `C(k)` always has limits, but they differ
//! when no matrix with the target marginals fits inside the support of `A`.
//! Some entries then drift to zero, often slowly. This crate finds the
//! block structure of the limits combinatorially (exact max-flow on the
//! support) and then scales each block on its own, where convergence is
//! fast.

// Error values carry exact rationals.
#![allow(clippy::result_large_err)]

pub mod blocks;
pub mod cli;
pub mod decompose;
pub mod exact;
pub mod feasibility;
pub mod fixtures;
pub mod flow;
pub mod grid;
pub mod problem;
pub mod scaling;

pub use blocks::{Block, Decomposition, Splitting};
pub use decompose::{decompose, limit_pair, phi, prune, step_one, step_two, LimitOptions, LimitPair, PhiResult};
pub use exact::Ratio;
pub use feasibility::{flexible_support, hall_check, max_gap_set, HallCertificate, Verdict};
pub use grid::Grid;
pub use problem::{validate_problem, IndexSet, Problem, ProblemError, SupportPattern};
pub use scaling::{isp_run, isp_run_exact, IspOptions, ScalingTrace, StopCriterion};
