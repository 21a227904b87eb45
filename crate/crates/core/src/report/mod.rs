//! Breakdowns, the independent validator, and CSV / JSON serialization.

mod csv;
mod json;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use self::csv::{emit_csv, format_real, parse_csv, CsvError, CSV_HEADER};
pub use self::json::{emit_solution_json, parse_solution_json, JsonError};
use crate::milp::evaluate_power;
use crate::model::{RowViolation, Scenario, Tier, VfId};
use crate::solver::{active_servers, Solution};

/// Tolerance for the solver-vs-recomputed objective cross-check.
pub const OBJECTIVE_REL_TOL: f64 = 1e-6;

/// MIPS placed on each node class.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NodeBreakdown {
    pub cc: f64,
    pub lf: f64,
    pub nf: f64,
    pub vf: f64,
}

impl NodeBreakdown {
    pub fn total(&self) -> f64 {
        self.cc + self.lf + self.nf + self.vf
    }
}

pub fn node_breakdown(solution: &Solution, scenario: &Scenario) -> NodeBreakdown {
    let mut out = NodeBreakdown::default();
    for ((_, server), &mips) in &solution.allocation {
        let Some(spec) = scenario.topology().server(server) else {
            continue;
        };
        let slot = match spec.tier {
            Tier::Cc => &mut out.cc,
            Tier::Lf => &mut out.lf,
            Tier::Nf => &mut out.nf,
            Tier::Vn => &mut out.vf,
        };
        *slot += mips;
    }
    out
}

/// MIPS placed on each Fogbank's vehicles; every Fogbank has an entry.
pub fn vf_breakdown(solution: &Solution, scenario: &Scenario) -> BTreeMap<VfId, f64> {
    let mut out: BTreeMap<VfId, f64> =
        (1..=scenario.topology().vf_count()).map(|v| (VfId(v), 0.0)).collect();
    for ((_, server), &mips) in &solution.allocation {
        if let Some(vf) = scenario.topology().server(server).and_then(|s| s.vf_id) {
            *out.entry(vf).or_default() += mips;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<RowViolation>,
}

/// Checks a solution against rows re-derived from the scenario, and its
/// reported objective and activations against a fresh power evaluation.
pub fn validate(solution: &Solution, scenario: &Scenario) -> ValidationReport {
    let mut violations = Vec::new();
    if !solution.status.has_allocation() {
        if !solution.allocation.is_empty() {
            violations.push(RowViolation {
                row: "status".into(),
                lhs: solution.allocation.len() as f64,
                rhs: 0.0,
                slack: -(solution.allocation.len() as f64),
            });
        }
        return ValidationReport {
            ok: violations.is_empty(),
            violations,
        };
    }
    violations.extend(scenario.allocation_violations(&solution.allocation));
    if violations.is_empty() {
        let p = evaluate_power(&solution.allocation, scenario).expect("rows already checked");
        let reported = solution.objective_w.unwrap_or(f64::NAN);
        let diff = reported - p.total_w;
        if !(diff.abs() <= OBJECTIVE_REL_TOL * p.total_w.abs().max(1.0)) {
            violations.push(RowViolation {
                row: "objective".into(),
                lhs: reported,
                rhs: p.total_w,
                slack: p.total_w - reported,
            });
        }
    }
    let expected = active_servers(scenario, &solution.allocation);
    if expected != solution.activations {
        violations.push(RowViolation {
            row: "activations".into(),
            lhs: solution.activations.len() as f64,
            rhs: expected.len() as f64,
            slack: expected.len() as f64 - solution.activations.len() as f64,
        });
    }
    ValidationReport {
        ok: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_topology, make_tasks, Allocation, ModelConfig, ServerId, Strategy, TaskId, TaskSet,
        Variant, WorkloadMode,
    };
    use crate::solver::{solve_scenario, SolveOptions, SolveStats, SolveStatus};

    fn scenario(variant: Variant, strategy: Strategy, count: usize, w: f64) -> Scenario {
        let cfg = ModelConfig::default();
        let topo = build_topology(&cfg, variant).unwrap();
        let tasks = make_tasks(count, WorkloadMode::Fixed(w), 0, 0.01, VfId(1)).unwrap();
        Scenario::new(topo, tasks, strategy, variant, VfId(1)).unwrap()
    }

    fn hand_solution(sc: &Scenario, alloc: Allocation) -> Solution {
        let p = evaluate_power(&alloc, sc).ok();
        Solution {
            status: SolveStatus::Optimal,
            objective_w: p.as_ref().map(|p| p.total_w),
            activations: active_servers(sc, &alloc),
            allocation: alloc,
            breakdown: p,
            stats: SolveStats::default(),
        }
    }

    #[test]
    fn all_cloud_breakdown() {
        let sc = scenario(Variant::CcOnly, Strategy::Single, 50, 3000.0);
        let sol = solve_scenario(&sc, &SolveOptions::default()).unwrap();
        let nb = node_breakdown(&sol, &sc);
        assert_eq!(
            nb,
            NodeBreakdown {
                cc: 150000.0,
                lf: 0.0,
                nf: 0.0,
                vf: 0.0
            }
        );
        assert_eq!(sol.activations, vec![ServerId::new("cc1")]);
    }

    #[test]
    fn zero_tasks_break_down_to_zeros() {
        let sc = scenario(Variant::LowDensity, Strategy::Single, 1, 500.0)
            .with_tasks(TaskSet::empty())
            .unwrap();
        let sol = solve_scenario(&sc, &SolveOptions::default()).unwrap();
        assert_eq!(node_breakdown(&sol, &sc), NodeBreakdown::default());
        assert!(vf_breakdown(&sol, &sc).values().all(|&v| v == 0.0));
    }

    #[test]
    fn vehicle_share_within_fleet_capacity() {
        let sc = scenario(Variant::LowDensity, Strategy::Single, 50, 500.0);
        let sol = solve_scenario(&sc, &SolveOptions::default()).unwrap();
        let nb = node_breakdown(&sol, &sc);
        assert!(nb.vf <= (50.0 * 500.0f64).min(20.0 * 3200.0));
        assert!((nb.total() - 25000.0).abs() < 1e-6);
        let vf_sum: f64 = vf_breakdown(&sol, &sc).values().sum();
        assert!((vf_sum - nb.vf).abs() < 1e-9);
    }

    #[test]
    fn solver_output_validates() {
        let sc = scenario(Variant::HighDensity, Strategy::Distributed, 50, 2500.0);
        let sol = solve_scenario(&sc, &SolveOptions::default()).unwrap();
        let report = validate(&sol, &sc);
        assert!(report.ok, "{:?}", report.violations);
    }

    #[test]
    fn overfilled_vehicle_reported() {
        let sc = scenario(Variant::LowDensity, Strategy::Single, 1, 3201.0)
            .with_strategy(Strategy::Distributed);
        let mut alloc = Allocation::new();
        alloc.insert((TaskId(1), ServerId::new("vf1_vn1")), 3201.0);
        let report = validate(&hand_solution(&sc, alloc), &sc);
        assert!(!report.ok);
        let cap = report.violations.iter().find(|v| v.row == "cap_vf1_vn1").unwrap();
        assert!((cap.slack + 1.0).abs() < 1e-9);
    }

    #[test]
    fn stale_objective_is_flagged() {
        let sc = scenario(Variant::LowDensity, Strategy::Distributed, 3, 1000.0);
        let sol = solve_scenario(&sc, &SolveOptions::default()).unwrap();
        assert!(validate(&sol, &sc).ok);
        let doubled = sc.with_scaled_power_parts(1.0, 2.0);
        let report = validate(&sol, &doubled);
        assert!(!report.ok);
        assert_eq!(report.violations[0].row, "objective");
    }

    #[test]
    fn phantom_activation_is_flagged() {
        let sc = scenario(Variant::LowDensity, Strategy::Single, 1, 500.0);
        let mut sol = solve_scenario(&sc, &SolveOptions::default()).unwrap();
        sol.activations.push(ServerId::new("cc1"));
        assert!(!validate(&sol, &sc).ok);
    }
}
