//! Solvers and tooling for the side-access compact retrieval problem
//! (SACRP): given a slice of UL stacks served by a side-entry shuttle,
//! retrieve a pick list of targets in vertical cycles while lifting as few
//! ULs as possible.
//!
//! The crate is organised around a small core:
//!
//! * [`instance`] / [`state`] — problem data and derived slice snapshots;
//! * [`sim`] — the cycle simulator, the one place retrieval semantics live;
//! * [`feasibility`] / [`sparse`] — instance analysis and the closed-form
//!   cycle energy;
//! * [`geometry`] — which target sets fit into a single cycle, their
//!   canonical plans, and their enumeration;
//! * [`dp`] (exact), [`greedy`] (heuristic), [`oracle`] (brute force) —
//!   the solvers;
//! * [`mip`] — export to an LP-format integer model and import of solver
//!   assignments;
//! * [`gen`] / [`benchmark`] — seeded instance generation and the CSV
//!   benchmark harness.

pub mod benchmark;
pub mod dp;
pub mod feasibility;
pub mod gen;
pub mod geometry;
pub mod greedy;
pub mod instance;
pub mod mip;
pub mod oracle;
pub mod sim;
pub mod solution;
pub mod sparse;
pub mod state;

#[cfg(test)]
pub(crate) mod testutil;

pub use benchmark::{run_benchmark, BenchRow, BenchSolver};
pub use dp::{solve_dp, DpOptions, DpOutcome, DpStats};
pub use gen::{generate_instance, GenConfig, GenError};
pub use geometry::{classify_extension, enumerate_batches, plan_cycle, ExtensionRule};
pub use greedy::{solve_greedy, GreedyTrace};
pub use instance::{parse_instance, write_instance, Instance, InstanceError, Target};
pub use mip::{export_model, import_solution, write_model, ImportError, ModelCounts};
pub use sim::{simulate_cycle, simulate_solution, SimError};
pub use solution::{CyclePlan, Solution, SolutionFile};
pub use state::SliceState;
