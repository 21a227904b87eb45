use std::collections::HashMap;

use thiserror::Error;

use super::{Integrality, MilpInstance, Relation, VarRole};
use crate::model::{Allocation, Scenario, ServerId, Strategy, TaskId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Order identical servers: `a[s+1] <= a[s]` and `load[s+1] <= load[s]`.
    pub symmetry_breaking: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            symmetry_breaking: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("structurally infeasible: {0}")]
    StructurallyInfeasible(String),
}

/// Tasks sharing one workload/traffic pair, treated as interchangeable.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskGroup {
    pub tasks: Vec<TaskId>,
    pub workload_mips: f64,
    pub traffic_mbps: f64,
}

/// Unit of the load columns: MIPS, or a count of whole tasks from the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadUnit {
    Mips,
    TaskCount,
}

/// Maps instance columns back to tasks and servers.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpLayout {
    pub strategy: Strategy,
    pub unit: LoadUnit,
    pub servers: Vec<ServerId>,
    pub groups: Vec<TaskGroup>,
    /// `load[g][s]`: load column of group `g` on server `s`, if any.
    pub load: Vec<Vec<Option<usize>>>,
    /// `assign[g][s]`: assignment binary (per-task single allocation only).
    pub assign: Vec<Vec<Option<usize>>>,
    pub active: Vec<usize>,
}

// Loads below this many MIPS are solver noise.
const LOAD_SNAP_MIPS: f64 = 1e-6;

impl MilpLayout {
    /// Turns a column vector into a per-task allocation.
    pub fn decode(&self, values: &[f64]) -> Allocation {
        let mut alloc = Allocation::new();
        for (g, group) in self.groups.iter().enumerate() {
            match self.unit {
                LoadUnit::TaskCount => {
                    let mut pending = group.tasks.iter();
                    for (s, col) in self.load[g].iter().enumerate() {
                        let Some(col) = col else { continue };
                        let n = values[*col].round().max(0.0) as usize;
                        for task in pending.by_ref().take(n) {
                            alloc.insert((*task, self.servers[s].clone()), group.workload_mips);
                        }
                    }
                }
                LoadUnit::Mips => {
                    let w = group.workload_mips;
                    let snap = LOAD_SNAP_MIPS * w.max(1.0);
                    let mut tasks = group.tasks.iter();
                    let mut current = tasks.next();
                    let mut need = w;
                    let mut pieces: Vec<(TaskId, usize, f64)> = Vec::new();
                    for (s, col) in self.load[g].iter().enumerate() {
                        let Some(col) = col else { continue };
                        let mut left = values[*col];
                        if left <= snap {
                            continue;
                        }
                        while left > snap {
                            let Some(task) = current else { break };
                            let piece = left.min(need);
                            pieces.push((*task, s, piece));
                            left -= piece;
                            need -= piece;
                            if need <= snap {
                                current = tasks.next();
                                need = w;
                            }
                        }
                    }
                    // make each task's pieces sum to its workload exactly
                    let mut by_task: HashMap<TaskId, Vec<usize>> = HashMap::new();
                    for (i, p) in pieces.iter().enumerate() {
                        by_task.entry(p.0).or_default().push(i);
                    }
                    for idxs in by_task.values() {
                        let sum: f64 = idxs.iter().map(|&i| pieces[i].2).sum();
                        let biggest = *idxs
                            .iter()
                            .max_by(|&&a, &&b| pieces[a].2.total_cmp(&pieces[b].2).then(b.cmp(&a)))
                            .expect("nonempty");
                        pieces[biggest].2 += w - sum;
                    }
                    for (task, s, mips) in pieces {
                        if mips > snap {
                            *alloc.entry((task, self.servers[s].clone())).or_default() += mips;
                        }
                    }
                }
            }
        }
        alloc
    }

    /// Column vector for an allocation; `None` if it uses a column the
    /// instance does not have (or splits a task in a count layout).
    pub fn encode(&self, alloc: &Allocation, num_vars: usize) -> Option<Vec<f64>> {
        let mut x = vec![0.0; num_vars];
        let server_pos: HashMap<&ServerId, usize> =
            self.servers.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut group_of: HashMap<TaskId, usize> = HashMap::new();
        for (g, group) in self.groups.iter().enumerate() {
            for t in &group.tasks {
                group_of.insert(*t, g);
            }
        }
        let mut server_load = vec![0.0; self.servers.len()];
        for ((task, server), &mips) in alloc {
            if mips <= 0.0 {
                continue;
            }
            let s = *server_pos.get(server)?;
            let g = *group_of.get(task)?;
            let col = self.load[g][s]?;
            match self.unit {
                LoadUnit::Mips => x[col] += mips,
                LoadUnit::TaskCount => {
                    let w = self.groups[g].workload_mips;
                    if (mips - w).abs() > 1e-9 * w {
                        return None;
                    }
                    x[col] += 1.0;
                }
            }
            if let Some(row) = self.assign.get(g) {
                x[row[s]?] = 1.0;
            }
            server_load[s] += mips;
        }
        for (s, &col) in self.active.iter().enumerate() {
            if server_load[s] > 0.0 {
                x[col] = 1.0;
            }
        }
        Some(x)
    }
}

/// Rejects scenarios that no allocation can satisfy, before any solve.
pub fn structural_check(scenario: &Scenario) -> Result<(), BuildError> {
    let demand = scenario.total_demand_mips();
    let capacity = scenario.total_capacity_mips();
    if demand > capacity * (1.0 + 1e-12) {
        return Err(BuildError::StructurallyInfeasible(format!(
            "total demand {demand} MIPS exceeds reachable capacity {capacity} MIPS"
        )));
    }
    let servers = scenario.topology().servers();
    if scenario.strategy() == Strategy::Single {
        let largest = servers.iter().map(|s| s.capacity_mips).fold(0.0, f64::max);
        if let Some(t) = scenario.tasks().iter().find(|t| t.workload_mips > largest) {
            return Err(BuildError::StructurallyInfeasible(format!(
                "task {} needs {} MIPS, largest server holds {largest}",
                t.id, t.workload_mips
            )));
        }
    }
    // every route starts at the source RSU
    let traffic: f64 = scenario.tasks().iter().map(|t| t.traffic_mbps).sum();
    let src = crate::model::rsu_id(scenario.source_vf());
    if let Some(dev) = scenario.topology().device(&src) {
        if !servers.is_empty() && traffic > dev.capacity_mbps * (1.0 + 1e-12) {
            return Err(BuildError::StructurallyInfeasible(format!(
                "total traffic {traffic} Mbps exceeds source RSU capacity {}",
                dev.capacity_mbps
            )));
        }
    }
    Ok(())
}

/// Runs of consecutive servers that are interchangeable: same tier,
/// Fogbank, power profile and route.
pub fn symmetry_groups(scenario: &Scenario) -> Vec<Vec<usize>> {
    let servers = scenario.topology().servers();
    let routes = scenario.routes();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, s) in servers.iter().enumerate() {
        let same_as_prev = i > 0 && {
            let p = &servers[i - 1];
            p.tier == s.tier
                && p.vf_id == s.vf_id
                && p.capacity_mips == s.capacity_mips
                && p.idle_power_w == s.idle_power_w
                && p.max_power_w == s.max_power_w
                && routes.get(i - 1).devices == routes.get(i).devices
        };
        if same_as_prev {
            groups.last_mut().expect("previous group").push(i);
        } else {
            groups.push(vec![i]);
        }
    }
    groups
}

struct Coefficients {
    marginal: Vec<f64>,
    path_energy: Vec<f64>,
    /// For each device, the servers whose route crosses it.
    device_servers: Vec<Vec<usize>>,
}

impl Coefficients {
    fn new(scenario: &Scenario) -> Self {
        let topo = scenario.topology();
        let marginal = topo.servers().iter().map(|s| s.marginal_w_per_mips()).collect();
        let path_energy = (0..topo.servers().len())
            .map(|i| scenario.path_energy_w_per_mbps(i))
            .collect();
        let device_servers = topo
            .devices()
            .iter()
            .map(|d| {
                scenario
                    .routes()
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.devices.contains(&d.id))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Coefficients {
            marginal,
            path_energy,
            device_servers,
        }
    }
}

fn add_shared_rows(
    m: &mut MilpInstance,
    scenario: &Scenario,
    coef: &Coefficients,
    layout: &MilpLayout,
    mips_per_unit: impl Fn(usize) -> f64,
    mbps_per_unit: impl Fn(usize) -> f64,
    opts: BuildOptions,
) {
    let servers = scenario.topology().servers();
    let groups = layout.groups.len();
    let server_load = |s: usize| -> Vec<(usize, f64)> {
        (0..groups)
            .filter_map(|g| layout.load[g][s].map(|c| (c, mips_per_unit(g))))
            .collect()
    };

    for (s, server) in servers.iter().enumerate() {
        let mut coeffs = server_load(s);
        coeffs.push((layout.active[s], -server.capacity_mips));
        m.add_row(format!("cap_{}", server.id), coeffs, Relation::Le, 0.0);
    }
    for (d, device) in scenario.topology().devices().iter().enumerate() {
        let coeffs: Vec<(usize, f64)> = coef.device_servers[d]
            .iter()
            .flat_map(|&s| (0..groups).filter_map(move |g| layout.load[g][s].map(|c| (c, g))))
            .map(|(c, g)| (c, mbps_per_unit(g)))
            .collect();
        if !coeffs.is_empty() {
            m.add_row(format!("dev_{}", device.id), coeffs, Relation::Le, device.capacity_mbps);
        }
    }
    if opts.symmetry_breaking {
        for group in symmetry_groups(scenario) {
            for pair in group.windows(2) {
                let (prev, next) = (pair[0], pair[1]);
                let id = &servers[next].id;
                m.add_row(
                    format!("sb_act_{id}"),
                    vec![(layout.active[next], 1.0), (layout.active[prev], -1.0)],
                    Relation::Le,
                    0.0,
                );
                let mut coeffs = server_load(next);
                coeffs.extend(server_load(prev).into_iter().map(|(c, a)| (c, -a)));
                m.add_row(format!("sb_load_{id}"), coeffs, Relation::Le, 0.0);
            }
        }
    }
}

/// Per-task formulation.
///
/// Objective: `sum_s idle_s a[s] + sum_{k,s} (e_s + F_k/W_k * psi_s) x[k][s]`
/// where `e_s` is the marginal W/MIPS and `psi_s` the summed W/Mbps along the
/// route to `s`. Rows: `dem_k` (full workload placed), `cap_s` (load within
/// capacity, coupled to activation), `dev_n` (traffic within device
/// capacity), and under single allocation `asg_k_s` (`x = W d`) plus
/// `one_k` (`sum_s d = 1`).
pub fn build_milp(scenario: &Scenario, opts: BuildOptions) -> Result<MilpInstance, BuildError> {
    structural_check(scenario)?;
    let coef = Coefficients::new(scenario);
    let servers = scenario.topology().servers();
    let tasks = scenario.tasks().as_slice();
    let single = scenario.strategy() == Strategy::Single;
    let mut m = MilpInstance::new();

    let mut load = vec![vec![None; servers.len()]; tasks.len()];
    for (k, t) in tasks.iter().enumerate() {
        for (s, srv) in servers.iter().enumerate() {
            let cost = coef.marginal[s] + t.traffic_per_mips() * coef.path_energy[s];
            load[k][s] = Some(m.add_var(
                format!("x[{}][{}]", t.id, srv.id),
                0.0,
                t.workload_mips.min(srv.capacity_mips),
                Integrality::Continuous,
                VarRole::Load,
                cost,
            ));
        }
    }
    let mut assign = Vec::new();
    if single {
        for t in tasks {
            let row = servers
                .iter()
                .map(|srv| {
                    let fits = t.workload_mips <= srv.capacity_mips;
                    Some(m.add_var(
                        format!("d[{}][{}]", t.id, srv.id),
                        0.0,
                        if fits { 1.0 } else { 0.0 },
                        Integrality::Binary,
                        VarRole::Assignment,
                        0.0,
                    ))
                })
                .collect();
            assign.push(row);
        }
    }
    let active: Vec<usize> = servers
        .iter()
        .map(|srv| {
            m.add_var(
                format!("a[{}]", srv.id),
                0.0,
                1.0,
                Integrality::Binary,
                VarRole::Activation,
                srv.idle_power_w,
            )
        })
        .collect();

    let layout = MilpLayout {
        strategy: scenario.strategy(),
        unit: LoadUnit::Mips,
        servers: servers.iter().map(|s| s.id.clone()).collect(),
        groups: tasks
            .iter()
            .map(|t| TaskGroup {
                tasks: vec![t.id],
                workload_mips: t.workload_mips,
                traffic_mbps: t.traffic_mbps,
            })
            .collect(),
        load,
        assign,
        active,
    };

    for (k, t) in tasks.iter().enumerate() {
        let coeffs = layout.load[k].iter().flatten().map(|&c| (c, 1.0)).collect();
        m.add_row(format!("dem_{}", t.id), coeffs, Relation::Eq, t.workload_mips);
    }
    add_shared_rows(
        &mut m,
        scenario,
        &coef,
        &layout,
        |_| 1.0,
        |k| tasks[k].traffic_per_mips(),
        opts,
    );
    if single {
        for (k, t) in tasks.iter().enumerate() {
            for (s, srv) in servers.iter().enumerate() {
                let (x, d) = (layout.load[k][s].unwrap(), layout.assign[k][s].unwrap());
                m.add_row(
                    format!("asg_{}_{}", t.id, srv.id),
                    vec![(x, 1.0), (d, -t.workload_mips)],
                    Relation::Eq,
                    0.0,
                );
            }
            let coeffs = layout.assign[k].iter().flatten().map(|&d| (d, 1.0)).collect();
            m.add_row(format!("one_{}", t.id), coeffs, Relation::Eq, 1.0);
        }
    }
    m.set_layout(layout);
    Ok(m)
}

fn task_groups(scenario: &Scenario) -> Vec<TaskGroup> {
    let mut groups: Vec<TaskGroup> = Vec::new();
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    for t in scenario.tasks() {
        let key = (t.workload_mips.to_bits(), t.traffic_mbps.to_bits());
        match index.get(&key) {
            Some(&g) => groups[g].tasks.push(t.id),
            None => {
                index.insert(key, groups.len());
                groups.push(TaskGroup {
                    tasks: vec![t.id],
                    workload_mips: t.workload_mips,
                    traffic_mbps: t.traffic_mbps,
                });
            }
        }
    }
    groups
}

/// Group formulation: tasks with identical workload and traffic are merged.
///
/// Under single allocation the load columns are integer task counts
/// `n[g][s] <= min(|g|, floor(cap_s / W_g))`; under distributed allocation
/// they carry the group's MIPS on each server. Both add the coupling rows
/// `link_g_s: load <= ub * a[s]`, which are implied by the per-task model
/// and tighten the relaxation. Any solution decodes to a per-task
/// allocation with the same objective.
pub fn build_aggregated_milp(
    scenario: &Scenario,
    opts: BuildOptions,
) -> Result<MilpInstance, BuildError> {
    structural_check(scenario)?;
    let coef = Coefficients::new(scenario);
    let servers = scenario.topology().servers();
    let groups = task_groups(scenario);
    let single = scenario.strategy() == Strategy::Single;
    let mut m = MilpInstance::new();

    let mut load = vec![vec![None; servers.len()]; groups.len()];
    let mut link_ub = vec![vec![0.0; servers.len()]; groups.len()];
    for (g, group) in groups.iter().enumerate() {
        let count = group.tasks.len() as f64;
        let (w, f) = (group.workload_mips, group.traffic_mbps);
        for (s, srv) in servers.iter().enumerate() {
            let path = coef.path_energy[s];
            if single {
                let fit = (srv.capacity_mips / w + 1e-9).floor();
                let ub = count.min(fit);
                if ub < 1.0 {
                    continue;
                }
                link_ub[g][s] = ub;
                load[g][s] = Some(m.add_var(
                    format!("n[g{}][{}]", g + 1, srv.id),
                    0.0,
                    ub,
                    Integrality::Integer,
                    VarRole::Count,
                    w * coef.marginal[s] + f * path,
                ));
            } else {
                let ub = (count * w).min(srv.capacity_mips);
                link_ub[g][s] = ub;
                load[g][s] = Some(m.add_var(
                    format!("x[g{}][{}]", g + 1, srv.id),
                    0.0,
                    ub,
                    Integrality::Continuous,
                    VarRole::Load,
                    coef.marginal[s] + (f / w) * path,
                ));
            }
        }
    }
    let active: Vec<usize> = servers
        .iter()
        .map(|srv| {
            m.add_var(
                format!("a[{}]", srv.id),
                0.0,
                1.0,
                Integrality::Binary,
                VarRole::Activation,
                srv.idle_power_w,
            )
        })
        .collect();

    let layout = MilpLayout {
        strategy: scenario.strategy(),
        unit: if single {
            LoadUnit::TaskCount
        } else {
            LoadUnit::Mips
        },
        servers: servers.iter().map(|s| s.id.clone()).collect(),
        groups,
        load,
        assign: Vec::new(),
        active,
    };

    for (g, group) in layout.groups.iter().enumerate() {
        let coeffs = layout.load[g].iter().flatten().map(|&c| (c, 1.0)).collect();
        let count = group.tasks.len() as f64;
        let rhs = if single {
            count
        } else {
            count * group.workload_mips
        };
        m.add_row(format!("dem_g{}", g + 1), coeffs, Relation::Eq, rhs);
    }
    let groups = &layout.groups;
    let (mips, mbps): (Vec<f64>, Vec<f64>) = groups
        .iter()
        .map(|g| {
            if single {
                (g.workload_mips, g.traffic_mbps)
            } else {
                (1.0, g.traffic_mbps / g.workload_mips)
            }
        })
        .unzip();
    add_shared_rows(&mut m, scenario, &coef, &layout, |g| mips[g], |g| mbps[g], opts);
    for g in 0..groups.len() {
        for (s, srv) in servers.iter().enumerate() {
            if let Some(col) = layout.load[g][s] {
                m.add_row(
                    format!("link_g{}_{}", g + 1, srv.id),
                    vec![(col, 1.0), (layout.active[s], -link_ub[g][s])],
                    Relation::Le,
                    0.0,
                );
            }
        }
    }
    m.set_layout(layout);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_topology, make_tasks, ModelConfig, Variant, VfId, WorkloadMode,
    };

    fn scenario(variant: Variant, strategy: Strategy, count: usize, w: f64) -> Scenario {
        let cfg = ModelConfig::default();
        let topo = build_topology(&cfg, variant).unwrap();
        let tasks = make_tasks(count, WorkloadMode::Fixed(w), 0, 0.01, VfId(1)).unwrap();
        Scenario::new(topo, tasks, strategy, variant, VfId(1)).unwrap()
    }

    #[test]
    fn smallest_cc_only_single_instance() {
        let sc = scenario(Variant::CcOnly, Strategy::Single, 1, 500.0);
        let m = build_milp(&sc, BuildOptions::default()).unwrap();
        for name in ["x[1][cc1]", "x[1][cc2]", "d[1][cc1]", "d[1][cc2]", "a[cc1]", "a[cc2]"] {
            assert!(m.column(name).is_some(), "missing {name}");
        }
        assert_eq!(m.num_vars(), 6);
        let count = |prefix: &str| m.rows().iter().filter(|r| r.name.starts_with(prefix)).count();
        assert_eq!(count("dem_"), 1);
        assert_eq!(count("cap_"), 2);
        assert_eq!(count("dev_"), 5);
        assert_eq!(count("one_"), 1);
        assert_eq!(count("asg_"), 2);
        assert_eq!(count("sb_"), 2);
    }

    #[test]
    fn distributed_has_no_assignment_binaries() {
        let sc = scenario(Variant::LowDensity, Strategy::Distributed, 2, 1000.0);
        let m = build_milp(&sc, BuildOptions::default()).unwrap();
        assert!(m.variables().iter().all(|v| !v.name.starts_with("d[")));
        let actives = m.variables().iter().filter(|v| v.name.starts_with("a[")).count();
        assert_eq!(actives, sc.topology().servers().len());
    }

    #[test]
    fn load_bounds_and_costs_follow_invariants() {
        let sc = scenario(Variant::HighDensity, Strategy::Single, 3, 3500.0);
        let m = build_milp(&sc, BuildOptions::default()).unwrap();
        for srv in sc.topology().servers() {
            for k in 1..=3 {
                let x = m.column(&format!("x[{k}][{}]", srv.id)).unwrap();
                assert_eq!(m.variables()[x].upper, 3500f64.min(srv.capacity_mips));
                let d = m.column(&format!("d[{k}][{}]", srv.id)).unwrap();
                // a 3500-MIPS task can never sit on a 3200-MIPS vehicle
                let expect = if srv.capacity_mips < 3500.0 { 0.0 } else { 1.0 };
                assert_eq!(m.variables()[d].upper, expect);
            }
        }
        assert!(m.objective().iter().all(|c| c.is_finite() && *c >= 0.0));
    }

    #[test]
    fn demand_above_capacity_is_structurally_infeasible() {
        let cfg = ModelConfig::default();
        let topo = build_topology(&cfg, Variant::CloudFog)
            .unwrap()
            .retain_servers(|s| s.tier != crate::model::Tier::Cc);
        let tasks = make_tasks(50, WorkloadMode::Fixed(5000.0), 0, 0.01, VfId(1)).unwrap();
        let sc = Scenario::new(topo, tasks, Strategy::Distributed, Variant::CloudFog, VfId(1))
            .unwrap();
        assert!(matches!(
            build_milp(&sc, BuildOptions::default()),
            Err(BuildError::StructurallyInfeasible(_))
        ));
    }

    #[test]
    fn symmetry_groups_split_by_fogbank() {
        let sc = scenario(Variant::LowDensity, Strategy::Single, 1, 500.0);
        let sizes: Vec<usize> = symmetry_groups(&sc).iter().map(|g| g.len()).collect();
        // cc pool, lf, nf, then four Fogbanks of five
        assert_eq!(sizes, vec![2, 1, 1, 5, 5, 5, 5]);
    }

    #[test]
    fn aggregation_merges_identical_tasks() {
        let sc = scenario(Variant::LowDensity, Strategy::Single, 50, 1500.0);
        let m = build_aggregated_milp(&sc, BuildOptions::default()).unwrap();
        let layout = m.layout().unwrap();
        assert_eq!(layout.groups.len(), 1);
        assert_eq!(layout.groups[0].tasks.len(), 50);
        let n = m.column("n[g1][vf1_vn1]").unwrap();
        assert_eq!(m.variables()[n].upper, 2.0);
        let n = m.column("n[g1][cc1]").unwrap();
        assert_eq!(m.variables()[n].upper, 50.0);
    }

    #[test]
    fn encode_decode_round_trip() {
        let sc = scenario(Variant::LowDensity, Strategy::Single, 4, 1500.0);
        let m = build_aggregated_milp(&sc, BuildOptions::default()).unwrap();
        let layout = m.layout().unwrap();
        let mut alloc = Allocation::new();
        // decode hands out group members in server order, so use that order here
        alloc.insert((TaskId(1), ServerId::new("nf1")), 1500.0);
        alloc.insert((TaskId(2), ServerId::new("nf1")), 1500.0);
        alloc.insert((TaskId(3), ServerId::new("vf1_vn1")), 1500.0);
        alloc.insert((TaskId(4), ServerId::new("vf1_vn1")), 1500.0);
        let x = layout.encode(&alloc, m.num_vars()).unwrap();
        assert_eq!(x[m.column("n[g1][vf1_vn1]").unwrap()], 2.0);
        assert_eq!(x[m.column("a[nf1]").unwrap()], 1.0);
        assert!(m.max_violation(&x) < 1e-12);
        assert_eq!(layout.decode(&x), alloc);
    }

    #[test]
    fn split_group_decodes_to_whole_workloads() {
        let sc = scenario(Variant::LowDensity, Strategy::Distributed, 3, 2000.0);
        let m = build_aggregated_milp(&sc, BuildOptions::default()).unwrap();
        let layout = m.layout().unwrap();
        let mut x = vec![0.0; m.num_vars()];
        x[m.column("x[g1][vf1_vn1]").unwrap()] = 3200.0;
        x[m.column("x[g1][vf1_vn2]").unwrap()] = 2800.0;
        let alloc = layout.decode(&x);
        let mut per_task = std::collections::BTreeMap::new();
        for ((t, _), v) in &alloc {
            *per_task.entry(*t).or_insert(0.0) += v;
        }
        assert_eq!(per_task.len(), 3);
        assert!(per_task.values().all(|v| (v - 2000.0).abs() < 1e-9));
    }
}
