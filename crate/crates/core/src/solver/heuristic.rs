use crate::milp::symmetry_groups;
use crate::model::{Allocation, Scenario, ServerId, Strategy};

struct State<'a> {
    scenario: &'a Scenario,
    load: Vec<f64>,
    traffic: Vec<f64>,
    route_devices: Vec<Vec<usize>>,
    unit_cost: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        let topo = scenario.topology();
        let route_devices = scenario
            .routes()
            .iter()
            .map(|r| {
                r.devices
                    .iter()
                    .filter_map(|d| topo.devices().iter().position(|x| &x.id == d))
                    .collect()
            })
            .collect();
        State {
            scenario,
            load: vec![0.0; topo.servers().len()],
            traffic: vec![0.0; topo.devices().len()],
            route_devices,
            unit_cost: topo.servers().iter().map(|s| s.marginal_w_per_mips()).collect(),
        }
    }

    /// MIPS that server `s` can still take for a task with `per_mips` Mbps/MIPS.
    fn room(&self, s: usize, per_mips: f64) -> f64 {
        let topo = self.scenario.topology();
        let mut room = topo.servers()[s].capacity_mips - self.load[s];
        if per_mips > 0.0 {
            for &d in &self.route_devices[s] {
                let left = topo.devices()[d].capacity_mbps - self.traffic[d];
                room = room.min(left / per_mips);
            }
        }
        room.max(0.0)
    }

    fn cost(&self, s: usize, mips: f64, per_mips: f64) -> f64 {
        let srv = &self.scenario.topology().servers()[s];
        let idle = if self.load[s] > 0.0 { 0.0 } else { srv.idle_power_w };
        idle + mips * (self.unit_cost[s] + per_mips * self.scenario.path_energy_w_per_mbps(s))
    }

    fn place(&mut self, s: usize, mips: f64, per_mips: f64) {
        self.load[s] += mips;
        for &d in &self.route_devices[s] {
            self.traffic[d] += mips * per_mips;
        }
    }
}

/// Largest tasks first, each on the server with the smallest power increase
/// (idle power included when the server is still off). Under distributed
/// allocation a task that fits nowhere whole is spread over the cheapest
/// servers per MIPS. Returns `None` when the greedy pass gets stuck.
pub fn greedy_allocation(scenario: &Scenario) -> Option<Allocation> {
    let mut state = State::new(scenario);
    let servers = scenario.topology().servers();
    let mut tasks: Vec<_> = scenario.tasks().iter().collect();
    tasks.sort_by(|a, b| b.workload_mips.total_cmp(&a.workload_mips).then(a.id.cmp(&b.id)));

    let mut alloc = Allocation::new();
    for task in tasks {
        let w = task.workload_mips;
        let per_mips = task.traffic_per_mips();
        let whole = (0..servers.len())
            .filter(|&s| state.room(s, per_mips) >= w * (1.0 - 1e-12))
            .map(|s| (state.cost(s, w, per_mips), s))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((_, s)) = whole {
            state.place(s, w, per_mips);
            alloc.insert((task.id, servers[s].id.clone()), w);
            continue;
        }
        if scenario.strategy() == Strategy::Single {
            return None;
        }
        let mut left = w;
        while left > 1e-9 * w {
            let pick = (0..servers.len())
                .filter_map(|s| {
                    let take = state.room(s, per_mips).min(left);
                    (take > 1e-9 * w).then(|| (state.cost(s, take, per_mips) / take, s, take))
                })
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let (_, s, take) = pick?;
            state.place(s, take, per_mips);
            *alloc.entry((task.id, servers[s].id.clone())).or_default() += take;
            left -= take;
        }
    }
    Some(normalize_symmetric(scenario, alloc))
}

/// Relabels interchangeable servers so their loads are non-increasing in
/// server order. Power is unchanged.
pub fn normalize_symmetric(scenario: &Scenario, alloc: Allocation) -> Allocation {
    let topo = scenario.topology();
    let mut load = vec![0.0; topo.servers().len()];
    for ((_, server), mips) in &alloc {
        if let Some(s) = topo.server_index(server) {
            load[s] += mips;
        }
    }
    let mut relabel: Vec<usize> = (0..load.len()).collect();
    for group in symmetry_groups(scenario) {
        let mut sorted = group.clone();
        sorted.sort_by(|&a, &b| load[b].total_cmp(&load[a]).then(a.cmp(&b)));
        for (slot, &old) in group.iter().zip(&sorted) {
            relabel[old] = *slot;
        }
    }
    let ids: Vec<&ServerId> = topo.servers().iter().map(|s| &s.id).collect();
    alloc
        .into_iter()
        .map(|((task, server), mips)| {
            let s = topo.server_index(&server).map(|s| ids[relabel[s]].clone());
            ((task, s.unwrap_or(server)), mips)
        })
        .collect()
}
