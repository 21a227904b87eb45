//! LP and MILP solving: a bounded dual simplex, best-first branch and
//! bound, a greedy warm start, and exhaustive oracles for small cases.

mod bnb;
mod heuristic;
pub mod oracle;
mod pipeline;
mod simplex;

pub use bnb::{branch_and_bound, BbOptions, BbOutcome, BbStatus};
pub use heuristic::{greedy_allocation, normalize_symmetric};
pub use pipeline::{
    active_servers, build_instance, solve_scenario, Formulation, Solution, SolveOptions, SolveStats, SolveStatus,
};
pub use simplex::{simplex_solve, Basis, Factor, LpSolution, LpStatus, PreparedLp, SolverError};
