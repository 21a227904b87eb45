use std::collections::BTreeSet;
use std::time::Instant;

use super::bnb::{branch_and_bound, BbOptions, BbStatus};
use super::heuristic::greedy_allocation;
use super::simplex::SolverError;
use crate::milp::{
    build_aggregated_milp, build_milp, evaluate_power, BuildError, BuildOptions, MilpInstance,
    PowerBreakdown,
};
use crate::model::{Allocation, Scenario, ServerId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// Identical tasks merged into groups.
    #[default]
    Aggregated,
    /// One set of columns per task.
    PerTask,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveOptions {
    pub bb: BbOptions,
    pub build: BuildOptions,
    pub formulation: Formulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// A limit stopped the search; the allocation is feasible but unproven.
    NonProven,
    /// A limit stopped the search before any feasible allocation was found.
    NoIncumbent,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NonProven => "nonproven",
            SolveStatus::NoIncumbent => "noincumbent",
        }
    }

    pub fn parse(s: &str) -> Option<SolveStatus> {
        [
            SolveStatus::Optimal,
            SolveStatus::Infeasible,
            SolveStatus::NonProven,
            SolveStatus::NoIncumbent,
        ]
        .into_iter()
        .find(|v| v.as_str() == s)
    }

    pub fn has_allocation(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NonProven)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub bb_nodes: u64,
    pub lp_iterations: u64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    /// The solver's objective value; `None` without an allocation.
    pub objective_w: Option<f64>,
    pub allocation: Allocation,
    /// Servers carrying load, in topology order.
    pub activations: Vec<ServerId>,
    pub breakdown: Option<PowerBreakdown>,
    pub stats: SolveStats,
}

impl Solution {
    fn empty(status: SolveStatus, stats: SolveStats) -> Self {
        Solution {
            status,
            objective_w: None,
            allocation: Allocation::new(),
            activations: Vec::new(),
            breakdown: None,
            stats,
        }
    }
}

/// Servers with positive load, in topology order.
pub fn active_servers(scenario: &Scenario, allocation: &Allocation) -> Vec<ServerId> {
    let loaded: BTreeSet<&ServerId> = allocation
        .iter()
        .filter(|(_, &v)| v > 0.0)
        .map(|((_, s), _)| s)
        .collect();
    scenario
        .topology()
        .servers()
        .iter()
        .filter(|s| loaded.contains(&s.id))
        .map(|s| s.id.clone())
        .collect()
}

pub fn build_instance(
    scenario: &Scenario,
    opts: &SolveOptions,
) -> Result<MilpInstance, BuildError> {
    match opts.formulation {
        Formulation::Aggregated => build_aggregated_milp(scenario, opts.build),
        Formulation::PerTask => build_milp(scenario, opts.build),
    }
}

/// Builds the MILP, seeds it with the greedy allocation, runs branch and
/// bound and decodes the result. The solver's objective must agree with the
/// power recomputed from the decoded allocation.
pub fn solve_scenario(scenario: &Scenario, opts: &SolveOptions) -> Result<Solution, SolverError> {
    let start = Instant::now();
    let elapsed = |start: Instant| start.elapsed().as_secs_f64() * 1e3;
    if scenario.tasks().is_empty() {
        let mut sol = Solution::empty(SolveStatus::Optimal, SolveStats::default());
        sol.objective_w = Some(0.0);
        sol.breakdown = evaluate_power(&Allocation::new(), scenario).ok();
        sol.stats.runtime_ms = elapsed(start);
        return Ok(sol);
    }
    let milp = match build_instance(scenario, opts) {
        Ok(m) => m,
        Err(BuildError::StructurallyInfeasible(_)) => {
            let stats = SolveStats {
                runtime_ms: elapsed(start),
                ..SolveStats::default()
            };
            return Ok(Solution::empty(SolveStatus::Infeasible, stats));
        }
    };
    let layout = milp.layout().expect("builders attach a layout");
    let seed = greedy_allocation(scenario).and_then(|a| layout.encode(&a, milp.num_vars()));
    let out = branch_and_bound(&milp, &opts.bb, seed)?;
    let mut stats = SolveStats {
        bb_nodes: out.nodes,
        lp_iterations: out.lp_iterations,
        runtime_ms: 0.0,
    };
    let status = match (out.status, out.x.is_some()) {
        (BbStatus::Optimal, _) => SolveStatus::Optimal,
        (BbStatus::Infeasible, _) => SolveStatus::Infeasible,
        (_, true) => SolveStatus::NonProven,
        (_, false) => SolveStatus::NoIncumbent,
    };
    let Some(x) = out.x else {
        stats.runtime_ms = elapsed(start);
        return Ok(Solution::empty(status, stats));
    };
    let allocation = layout.decode(&x);
    let breakdown = evaluate_power(&allocation, scenario)
        .map_err(|e| SolverError::NumericalFailure(format!("decoded allocation: {e}")))?;
    let z = out.objective.expect("incumbent objective");
    if (z - breakdown.total_w).abs() > 1e-6 * breakdown.total_w.abs().max(1.0) {
        return Err(SolverError::NumericalFailure(format!(
            "solver objective {z} disagrees with recomputed power {}",
            breakdown.total_w
        )));
    }
    let activations = active_servers(scenario, &allocation);
    stats.runtime_ms = elapsed(start);
    Ok(Solution {
        status,
        objective_w: Some(z),
        allocation,
        activations,
        breakdown: Some(breakdown),
        stats,
    })
}
