//! Exhaustive reference solvers for small scenarios.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pipeline::{solve_scenario, Formulation, SolveOptions, SolveStatus};
use super::simplex::{simplex_solve, LpStatus, SolverError};
use crate::milp::{evaluate_power, Integrality, MilpInstance, PowerBreakdown, Relation, VarRole};
use crate::model::{
    build_topology, Allocation, ModelConfig, Scenario, ServerSpec, Strategy, Task, TaskId, TaskSet,
    Tier, Topology, Variant, VfId,
};

/// Largest task and server counts [`enumerate_single`] accepts.
pub const SINGLE_TASK_LIMIT: usize = 6;
pub const SINGLE_SERVER_LIMIT: usize = 6;
/// Largest server count [`enumerate_distributed`] accepts.
pub const DISTRIBUTED_SERVER_LIMIT: usize = 12;

const RANDOM_DISTRIBUTED_SERVERS: usize = DISTRIBUTED_SERVER_LIMIT;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best allocation found, `None` if nothing is feasible.
    pub solution: Option<(Allocation, PowerBreakdown)>,
    pub candidates: u64,
}

impl OracleResult {
    pub fn total_w(&self) -> Option<f64> {
        self.solution.as_ref().map(|(_, p)| p.total_w)
    }
}

fn keep_better(best: &mut Option<(Allocation, PowerBreakdown)>, alloc: Allocation, p: PowerBreakdown) {
    if best.as_ref().is_none_or(|(_, b)| p.total_w < b.total_w) {
        *best = Some((alloc, p));
    }
}

/// Tries every task-to-server assignment.
pub fn enumerate_single(scenario: &Scenario) -> Result<OracleResult, SolverError> {
    let servers = scenario.topology().servers();
    let tasks = scenario.tasks().as_slice();
    if tasks.len() > SINGLE_TASK_LIMIT || servers.len() > SINGLE_SERVER_LIMIT {
        return Err(SolverError::TooLarge(format!(
            "{} tasks on {} servers; single enumeration takes at most {SINGLE_TASK_LIMIT} on {SINGLE_SERVER_LIMIT}",
            tasks.len(),
            servers.len()
        )));
    }
    let (s, k) = (servers.len() as u64, tasks.len() as u32);
    let total = s.pow(k);
    let mut best = None;
    let mut choice = vec![0usize; tasks.len()];
    for code in 0..total {
        let mut c = code;
        for slot in choice.iter_mut() {
            *slot = (c % s) as usize;
            c /= s;
        }
        let alloc: Allocation = tasks
            .iter()
            .zip(&choice)
            .map(|(t, &i)| ((t.id, servers[i].id.clone()), t.workload_mips))
            .collect();
        if let Ok(p) = evaluate_power(&alloc, scenario) {
            keep_better(&mut best, alloc, p);
        }
    }
    Ok(OracleResult {
        solution: best,
        candidates: total,
    })
}

/// Tries every set of active servers; for each, the cheapest split is a
/// plain LP over the active servers only.
pub fn enumerate_distributed(scenario: &Scenario) -> Result<OracleResult, SolverError> {
    let servers = scenario.topology().servers();
    if servers.len() > DISTRIBUTED_SERVER_LIMIT {
        return Err(SolverError::TooLarge(format!(
            "{} servers; distributed enumeration takes at most {DISTRIBUTED_SERVER_LIMIT}",
            servers.len()
        )));
    }
    let demand = scenario.total_demand_mips();
    let mut best = None;
    let mut candidates = 0u64;
    for mask in 1u32..(1 << servers.len()) {
        let active: Vec<usize> = (0..servers.len()).filter(|i| mask & (1 << i) != 0).collect();
        let cap: f64 = active.iter().map(|&i| servers[i].capacity_mips).sum();
        if cap < demand {
            continue;
        }
        candidates += 1;
        let (lp, cols) = split_lp(scenario, &active);
        let sol = simplex_solve(&lp)?;
        if sol.status != LpStatus::Optimal {
            continue;
        }
        let mut alloc = Allocation::new();
        for (k, t) in scenario.tasks().iter().enumerate() {
            for (a, &s) in active.iter().enumerate() {
                let v = sol.x[cols[k][a]];
                if v > 1e-9 * t.workload_mips {
                    alloc.insert((t.id, servers[s].id.clone()), v);
                }
            }
        }
        if let Ok(p) = evaluate_power(&alloc, scenario) {
            keep_better(&mut best, alloc, p);
        }
    }
    if scenario.tasks().is_empty() {
        let p = evaluate_power(&Allocation::new(), scenario).expect("empty allocation");
        keep_better(&mut best, Allocation::new(), p);
    }
    Ok(OracleResult {
        solution: best,
        candidates,
    })
}

/// Continuous split of every task over `active`, costed per MIPS.
fn split_lp(scenario: &Scenario, active: &[usize]) -> (MilpInstance, Vec<Vec<usize>>) {
    let topo = scenario.topology();
    let servers = topo.servers();
    let mut lp = MilpInstance::new();
    let mut cols = Vec::new();
    for t in scenario.tasks() {
        let row: Vec<usize> = active
            .iter()
            .map(|&s| {
                let srv = &servers[s];
                let cost = srv.marginal_w_per_mips()
                    + t.traffic_per_mips() * scenario.path_energy_w_per_mbps(s);
                lp.add_var(
                    format!("t{}_{}", t.id, srv.id),
                    0.0,
                    t.workload_mips,
                    Integrality::Continuous,
                    VarRole::Load,
                    cost,
                )
            })
            .collect();
        let coeffs = row.iter().map(|&c| (c, 1.0)).collect();
        lp.add_row(format!("demand_{}", t.id), coeffs, Relation::Eq, t.workload_mips);
        cols.push(row);
    }
    for (a, &s) in active.iter().enumerate() {
        let coeffs = cols.iter().map(|row| (row[a], 1.0)).collect();
        lp.add_row(format!("capacity_{a}"), coeffs, Relation::Le, servers[s].capacity_mips);
    }
    for dev in topo.devices() {
        let mut coeffs = Vec::new();
        for (a, &s) in active.iter().enumerate() {
            if scenario.routes().get(s).devices.contains(&dev.id) {
                for (k, t) in scenario.tasks().iter().enumerate() {
                    coeffs.push((cols[k][a], t.traffic_per_mips()));
                }
            }
        }
        if !coeffs.is_empty() {
            lp.add_row(format!("link_{}", dev.id), coeffs, Relation::Le, dev.capacity_mbps);
        }
    }
    (lp, cols)
}

pub fn enumerate(scenario: &Scenario) -> Result<OracleResult, SolverError> {
    match scenario.strategy() {
        Strategy::Single => enumerate_single(scenario),
        Strategy::Distributed => enumerate_distributed(scenario),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckOptions {
    pub trials: u32,
    pub seed: u64,
    pub max_tasks: usize,
}

impl Default for OracleCheckOptions {
    fn default() -> Self {
        OracleCheckOptions {
            trials: 200,
            seed: 42,
            max_tasks: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub trials: u32,
    pub failures: Vec<String>,
    /// Largest `|solver - oracle| / max(1, oracle)` over both formulations.
    pub max_rel_gap: f64,
    pub infeasible_trials: u32,
    pub elapsed: Duration,
}

impl OracleReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.failures.is_empty() && self.max_rel_gap <= tol
    }
}

/// A random small scenario drawn from the high-density architecture:
/// a mixed subset of servers, a few tasks, and sometimes a tight link or
/// a perturbed idle power.
pub fn random_scenario(rng: &mut ChaCha8Rng, max_tasks: usize) -> Scenario {
    let cfg = ModelConfig::default();
    let full = build_topology(&cfg, Variant::HighDensity).expect("default topology");
    let strategy = if rng.gen_bool(0.5) {
        Strategy::Single
    } else {
        Strategy::Distributed
    };
    let task_count = rng.gen_range(1..=max_tasks.max(1));
    let max_servers = match strategy {
        Strategy::Single => SINGLE_SERVER_LIMIT,
        Strategy::Distributed => RANDOM_DISTRIBUTED_SERVERS,
    };
    let server_count = rng.gen_range(2..=max_servers);
    // draw a tier first so vehicles do not crowd out the fixed servers
    let mut by_tier: Vec<Vec<usize>> = Vec::new();
    for tier in [Tier::Cc, Tier::Lf, Tier::Nf, Tier::Vn] {
        let mut ids: Vec<usize> = (0..full.servers().len())
            .filter(|&i| full.servers()[i].tier == tier)
            .collect();
        ids.shuffle(rng);
        by_tier.push(ids);
    }
    let mut picked = Vec::new();
    while picked.len() < server_count {
        let open: Vec<usize> = (0..by_tier.len()).filter(|&t| !by_tier[t].is_empty()).collect();
        let t = open[rng.gen_range(0..open.len())];
        picked.push(by_tier[t].pop().expect("nonempty tier"));
    }
    picked.sort_unstable();
    let mut servers: Vec<ServerSpec> = picked.iter().map(|&i| full.servers()[i].clone()).collect();
    if rng.gen_bool(0.3) {
        let s = rng.gen_range(0..servers.len());
        let f = rng.gen_range(0.5..1.0);
        servers[s].idle_power_w *= f;
    }
    let mut topo =
        Topology::new(servers, full.devices().to_vec(), full.vf_count()).expect("valid subset");
    let source = VfId(rng.gen_range(1..=full.vf_count()));
    let tasks: Vec<Task> = (1..=task_count)
        .map(|k| {
            let w = rng.gen_range(500..=5000) as f64;
            Task::new(TaskId(k as u32), w, w * cfg.tasks.traffic_per_mips, source)
                .expect("valid task")
        })
        .collect();
    if rng.gen_bool(0.25) {
        let traffic: f64 = tasks.iter().map(|t| t.traffic_mbps).sum();
        let dev = topo.devices()[rng.gen_range(0..topo.devices().len())].id.clone();
        topo = topo.with_device_capacity(&dev, traffic * rng.gen_range(0.4..1.2));
    }
    Scenario::new(
        topo,
        TaskSet::new(tasks).expect("unique ids"),
        strategy,
        Variant::HighDensity,
        source,
    )
    .expect("valid scenario")
}

/// Solves random small scenarios with both formulations and compares them
/// against exhaustive enumeration.
pub fn oracle_check(opts: &OracleCheckOptions) -> OracleReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut failures = Vec::new();
    let mut max_rel_gap = 0.0f64;
    let mut infeasible_trials = 0;
    for trial in 0..opts.trials {
        let sc = random_scenario(&mut rng, opts.max_tasks);
        let label = format!(
            "trial {trial} ({} tasks, {} servers, {})",
            sc.tasks().len(),
            sc.topology().servers().len(),
            sc.strategy().as_str()
        );
        let reference = match enumerate(&sc) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{label}: oracle failed: {e}"));
                continue;
            }
        };
        if reference.solution.is_none() {
            infeasible_trials += 1;
        }
        for formulation in [Formulation::Aggregated, Formulation::PerTask] {
            let so = SolveOptions {
                formulation,
                ..SolveOptions::default()
            };
            let got = match solve_scenario(&sc, &so) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("{label} {formulation:?}: solver error: {e}"));
                    continue;
                }
            };
            match (reference.total_w(), got.status, got.objective_w) {
                (None, SolveStatus::Infeasible, _) => {}
                (Some(want), SolveStatus::Optimal, Some(have)) => {
                    let gap = (have - want).abs() / want.abs().max(1.0);
                    max_rel_gap = max_rel_gap.max(gap);
                    if gap > 1e-6 {
                        failures.push(format!(
                            "{label} {formulation:?}: solver {have} W, oracle {want} W"
                        ));
                    }
                }
                (want, status, _) => failures.push(format!(
                    "{label} {formulation:?}: status {} but oracle {}",
                    status.as_str(),
                    if want.is_some() { "feasible" } else { "infeasible" }
                )),
            }
        }
    }
    OracleReport {
        trials: opts.trials,
        failures,
        max_rel_gap,
        infeasible_trials,
        elapsed: start.elapsed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_tasks, WorkloadMode};

    fn tiny(strategy: Strategy, w: f64, n: usize) -> Scenario {
        let cfg = ModelConfig::default();
        let topo = build_topology(&cfg, Variant::LowDensity)
            .unwrap()
            .retain_servers(|s| ["lf1", "nf1", "vf1_vn1", "vf2_vn1"].contains(&s.id.as_str()));
        let tasks = make_tasks(n, WorkloadMode::Fixed(w), 0, 0.01, VfId(1)).unwrap();
        Scenario::new(topo, tasks, strategy, Variant::LowDensity, VfId(1)).unwrap()
    }

    #[test]
    fn single_counts_every_assignment() {
        let r = enumerate_single(&tiny(Strategy::Single, 1000.0, 3)).unwrap();
        assert_eq!(r.candidates, 64);
        assert!(r.solution.is_some());
        let cfg = ModelConfig::default();
        let topo = build_topology(&cfg, Variant::CcOnly).unwrap();
        let tasks = make_tasks(1, WorkloadMode::Fixed(500.0), 0, 0.01, VfId(1)).unwrap();
        let sc = Scenario::new(topo, tasks, Strategy::Single, Variant::CcOnly, VfId(1)).unwrap();
        assert_eq!(enumerate_single(&sc).unwrap().candidates, 2);
    }

    #[test]
    fn distributed_split_forced_by_capacity() {
        let cfg = ModelConfig::default();
        let topo = build_topology(&cfg, Variant::LowDensity)
            .unwrap()
            .retain_servers(|s| ["vf1_vn1", "vf1_vn2"].contains(&s.id.as_str()));
        let tasks = make_tasks(1, WorkloadMode::Fixed(4000.0), 0, 0.01, VfId(1)).unwrap();
        let sc = Scenario::new(topo, tasks, Strategy::Distributed, Variant::LowDensity, VfId(1))
            .unwrap();
        let r = enumerate_distributed(&sc).unwrap();
        // the two singleton subsets lack capacity
        assert_eq!(r.candidates, 1);
        let (alloc, _) = r.solution.unwrap();
        assert_eq!(alloc.len(), 2);
        assert!((alloc.values().sum::<f64>() - 4000.0).abs() < 1e-9);
        assert!(alloc.values().all(|&v| v <= 3200.0 + 1e-9));
    }

    #[test]
    fn single_oracle_prefers_local_vehicle() {
        let r = enumerate_single(&tiny(Strategy::Single, 1000.0, 1)).unwrap();
        let (alloc, _) = r.solution.unwrap();
        assert_eq!(alloc.keys().next().unwrap().1.as_str(), "vf1_vn1");
    }

    #[test]
    fn distributed_never_worse_than_single() {
        for n in 1..=3 {
            let s = enumerate(&tiny(Strategy::Single, 2500.0, n)).unwrap();
            let d = enumerate(&tiny(Strategy::Distributed, 2500.0, n)).unwrap();
            assert!(d.total_w().unwrap() <= s.total_w().unwrap() + 1e-9);
        }
    }

    #[test]
    fn oversized_single_enumeration_refused() {
        let cfg = ModelConfig::default();
        let topo = build_topology(&cfg, Variant::HighDensity).unwrap();
        let tasks = make_tasks(2, WorkloadMode::Fixed(500.0), 0, 0.01, VfId(1)).unwrap();
        let sc = Scenario::new(topo, tasks, Strategy::Single, Variant::HighDensity, VfId(1)).unwrap();
        assert!(matches!(enumerate_single(&sc), Err(SolverError::TooLarge(_))));
        let sc = sc.with_strategy(Strategy::Distributed);
        assert!(matches!(enumerate_distributed(&sc), Err(SolverError::TooLarge(_))));
    }

    #[test]
    fn short_oracle_check_passes() {
        let report = oracle_check(&OracleCheckOptions {
            trials: 20,
            seed: 7,
            max_tasks: 3,
        });
        assert!(report.passed(1e-6), "{:?}", report.failures);
    }
}
