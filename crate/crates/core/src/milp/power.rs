use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Allocation, DeviceId, RowViolation, Scenario, ServerId};

/// Power of an allocation split into processing and networking parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    pub processing_w: f64,
    pub networking_w: f64,
    pub total_w: f64,
    pub per_server_w: BTreeMap<ServerId, f64>,
    pub per_device_w: BTreeMap<DeviceId, f64>,
}

impl PowerBreakdown {
    pub fn zero() -> Self {
        PowerBreakdown {
            processing_w: 0.0,
            networking_w: 0.0,
            total_w: 0.0,
            per_server_w: BTreeMap::new(),
            per_device_w: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerError {
    #[error("allocation violates {} row(s): {}", .0.len(), summarize(.0))]
    Infeasible(Vec<RowViolation>),
}

fn summarize(v: &[RowViolation]) -> String {
    v.iter()
        .take(5)
        .map(|r| format!("{} (lhs {}, rhs {})", r.row, r.lhs, r.rhs))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Recomputes the power of `allocation` from the scenario's server and
/// device profiles.
///
/// A server draws `idle + e * load` when its load is positive and nothing
/// otherwise; a device draws its W/Mbps times the traffic crossing it, where
/// a task's traffic follows its workload split.
pub fn evaluate_power(
    allocation: &Allocation,
    scenario: &Scenario,
) -> Result<PowerBreakdown, PowerError> {
    let violations = scenario.allocation_violations(allocation);
    if !violations.is_empty() {
        return Err(PowerError::Infeasible(violations));
    }
    let topo = scenario.topology();
    let servers = topo.servers();
    let mut load = vec![0.0; servers.len()];
    let mut traffic: BTreeMap<&DeviceId, f64> = BTreeMap::new();
    for ((task_id, server_id), &mips) in allocation {
        if mips <= 0.0 {
            continue;
        }
        let s = topo.server_index(server_id).expect("checked above");
        let task = scenario.tasks().get(*task_id).expect("checked above");
        load[s] += mips;
        let mbps = task.traffic_mbps * mips / task.workload_mips;
        for d in &scenario.routes().get(s).devices {
            *traffic.entry(d).or_default() += mbps;
        }
    }

    let mut per_server_w = BTreeMap::new();
    let mut processing_w = 0.0;
    for (srv, &l) in servers.iter().zip(&load) {
        let p = if l > 0.0 {
            srv.idle_power_w + srv.marginal_w_per_mips() * l
        } else {
            0.0
        };
        processing_w += p;
        per_server_w.insert(srv.id.clone(), p);
    }
    let mut per_device_w = BTreeMap::new();
    let mut networking_w = 0.0;
    for dev in topo.devices() {
        let p = traffic.get(&dev.id).copied().unwrap_or(0.0) * dev.energy_per_mbps_w;
        networking_w += p;
        per_device_w.insert(dev.id.clone(), p);
    }
    Ok(PowerBreakdown {
        processing_w,
        networking_w,
        total_w: processing_w + networking_w,
        per_server_w,
        per_device_w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_topology, make_tasks, ModelConfig, Strategy, TaskId, TaskSet, Variant, VfId,
        WorkloadMode,
    };

    /// Profile with RSU at 0.006 W/Mbps for the hand-computed example.
    fn cfg_low_network() -> ModelConfig {
        let mut cfg = ModelConfig::default();
        cfg.network.rsu.energy_per_mbps_w = 0.006;
        cfg.network.onu.energy_per_mbps_w = 0.003;
        cfg.network.olt.energy_per_mbps_w = 0.002;
        cfg.network.metro.energy_per_mbps_w = 0.005;
        cfg.network.core.energy_per_mbps_w = 0.010;
        cfg
    }

    fn scenario(cfg: &ModelConfig, count: usize, w: f64) -> Scenario {
        let topo = build_topology(cfg, Variant::LowDensity).unwrap();
        let tasks = make_tasks(count, WorkloadMode::Fixed(w), 0, 0.01, VfId(1)).unwrap();
        Scenario::new(topo, tasks, Strategy::Distributed, Variant::LowDensity, VfId(1)).unwrap()
    }

    #[test]
    fn zero_tasks_cost_nothing() {
        let cfg = ModelConfig::default();
        let topo = build_topology(&cfg, Variant::CcOnly).unwrap();
        let sc = Scenario::new(topo, TaskSet::empty(), Strategy::Single, Variant::CcOnly, VfId(1))
            .unwrap();
        let p = evaluate_power(&Allocation::new(), &sc).unwrap();
        assert_eq!(p.total_w, 0.0);
    }

    #[test]
    fn one_small_task_on_a_local_vehicle() {
        let sc = scenario(&cfg_low_network(), 1, 500.0);
        let mut alloc = Allocation::new();
        alloc.insert((TaskId(1), ServerId::new("vf1_vn1")), 500.0);
        let p = evaluate_power(&alloc, &sc).unwrap();
        // 4 W idle + (12 - 4) / 3200 * 500 = 5.25 W; 5 Mbps * 0.006 = 0.03 W
        assert!((p.processing_w - 5.25).abs() < 1e-12);
        assert!((p.networking_w - 0.03).abs() < 1e-12);
        assert!((p.total_w - 5.28).abs() < 1e-12);
        assert_eq!(p.total_w, p.processing_w + p.networking_w);
    }

    #[test]
    fn doubling_coefficients_doubles_power() {
        let sc = scenario(&ModelConfig::default(), 3, 2000.0);
        let mut alloc = Allocation::new();
        alloc.insert((TaskId(1), ServerId::new("vf1_vn1")), 2000.0);
        alloc.insert((TaskId(2), ServerId::new("vf2_vn1")), 1000.0);
        alloc.insert((TaskId(2), ServerId::new("cc1")), 1000.0);
        alloc.insert((TaskId(3), ServerId::new("lf1")), 2000.0);
        let base = evaluate_power(&alloc, &sc).unwrap();
        let doubled = evaluate_power(&alloc, &sc.with_scaled_power(2.0)).unwrap();
        assert!((doubled.total_w - 2.0 * base.total_w).abs() < 1e-9 * base.total_w);
        let by_server: f64 = base.per_server_w.values().sum();
        let by_device: f64 = base.per_device_w.values().sum();
        assert!((by_server - base.processing_w).abs() < 1e-9 * base.processing_w);
        assert!((by_device - base.networking_w).abs() < 1e-9 * base.networking_w);
    }

    #[test]
    fn overfilled_vehicle_rejected() {
        let sc = scenario(&ModelConfig::default(), 1, 3201.0);
        let mut alloc = Allocation::new();
        alloc.insert((TaskId(1), ServerId::new("vf1_vn1")), 3201.0);
        match evaluate_power(&alloc, &sc) {
            Err(PowerError::Infeasible(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].row, "cap_vf1_vn1");
                assert!((v[0].slack + 1.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partial_coverage_rejected() {
        let sc = scenario(&ModelConfig::default(), 1, 1000.0);
        let mut alloc = Allocation::new();
        alloc.insert((TaskId(1), ServerId::new("nf1")), 900.0);
        assert!(evaluate_power(&alloc, &sc).is_err());
    }
}
