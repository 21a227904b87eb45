//! Domain model of the cloud / fixed-fog / vehicular-fog architecture.
//!
//! Processing happens on servers in four tiers (central cloud, OLT fog,
//! ONU fog, vehicles grouped into Fogbanks). Task traffic enters at the
//! roadside unit of the source Fogbank and crosses a fixed chain of
//! network devices to reach the chosen server.

mod config;
mod tasks;
mod topology;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    load_config, ConfigError, DeviceConfig, ModelConfig, NetworkConfig, ServerTierConfig,
    ServersConfig, SweepConfig, TasksConfig, VehicleTierConfig, CONFIG_VERSION,
};
pub use tasks::{make_tasks, Task, TaskSet, WorkloadMode, RANDOM_WORKLOAD_RANGE};
pub use topology::{build_topology, derive_routes, rsu_id, Route, RouteTable, Topology, VF_COUNT};

/// Relative slack used when checking an allocation against capacities and demands.
pub const FEASIBILITY_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Fogbank (vehicular cluster) number, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VfId(pub u32);

impl fmt::Display for VfId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vf{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ServerId(pub String);

impl ServerId {
    pub fn new(id: impl Into<String>) -> Self {
        ServerId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ServerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub String);

impl DeviceId {
    pub fn new(id: impl Into<String>) -> Self {
        DeviceId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Processing tier of a server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    /// Central cloud.
    Cc,
    /// Fog server attached to the OLT.
    Lf,
    /// Fog server attached to the ONU.
    Nf,
    /// Vehicle on-board processor.
    Vn,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Cc => "CC",
            Tier::Lf => "LF",
            Tier::Nf => "NF",
            Tier::Vn => "VN",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DeviceKind {
    Rsu,
    Onu,
    Olt,
    Metro,
    Core,
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeviceKind::Rsu => "RSU",
            DeviceKind::Onu => "ONU",
            DeviceKind::Olt => "OLT",
            DeviceKind::Metro => "METRO",
            DeviceKind::Core => "CORE",
        })
    }
}

/// A processing node with a linear power profile above idle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerSpec {
    pub id: ServerId,
    pub tier: Tier,
    pub capacity_mips: f64,
    pub idle_power_w: f64,
    pub max_power_w: f64,
    pub vf_id: Option<VfId>,
}

impl ServerSpec {
    pub fn new(
        id: ServerId,
        tier: Tier,
        capacity_mips: f64,
        idle_power_w: f64,
        max_power_w: f64,
        vf_id: Option<VfId>,
    ) -> Result<Self, ModelError> {
        let spec = ServerSpec {
            id,
            tier,
            capacity_mips,
            idle_power_w,
            max_power_w,
            vf_id,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Incremental watts per allocated MIPS above idle.
    pub fn marginal_w_per_mips(&self) -> f64 {
        (self.max_power_w - self.idle_power_w) / self.capacity_mips
    }

    pub(crate) fn check(&self) -> Result<(), ModelError> {
        let bad = |field: &str, reason: &str| ModelError::InvalidServer {
            id: self.id.clone(),
            field: field.to_string(),
            reason: reason.to_string(),
        };
        if !(self.capacity_mips.is_finite() && self.capacity_mips > 0.0) {
            return Err(bad("capacity_mips", "must be positive and finite"));
        }
        if !(self.idle_power_w.is_finite() && self.idle_power_w >= 0.0) {
            return Err(bad("idle_power_w", "must be nonnegative and finite"));
        }
        if !(self.max_power_w.is_finite() && self.max_power_w > 0.0) {
            return Err(bad("max_power_w", "must be positive and finite"));
        }
        if self.idle_power_w > self.max_power_w {
            return Err(bad("idle_power_w", "exceeds max_power_w"));
        }
        if self.vf_id.is_some() != (self.tier == Tier::Vn) {
            return Err(bad("vf_id", "must be set exactly for vehicle servers"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDeviceSpec {
    pub id: DeviceId,
    pub kind: DeviceKind,
    pub energy_per_mbps_w: f64,
    pub capacity_mbps: f64,
}

impl NetworkDeviceSpec {
    pub fn new(
        id: DeviceId,
        kind: DeviceKind,
        energy_per_mbps_w: f64,
        capacity_mbps: f64,
    ) -> Result<Self, ModelError> {
        if !(energy_per_mbps_w.is_finite() && energy_per_mbps_w >= 0.0) {
            return Err(ModelError::InvalidDevice {
                id,
                field: "energy_per_mbps_w".into(),
            });
        }
        if !(capacity_mbps.is_finite() && capacity_mbps > 0.0) {
            return Err(ModelError::InvalidDevice {
                id,
                field: "capacity_mbps".into(),
            });
        }
        Ok(NetworkDeviceSpec {
            id,
            kind,
            energy_per_mbps_w,
            capacity_mbps,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Every task runs whole on one server.
    Single,
    /// A task may be split over several servers.
    Distributed,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::Single, Strategy::Distributed];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Single => "single",
            Strategy::Distributed => "distributed",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        match s {
            "single" => Some(Strategy::Single),
            "distributed" => Some(Strategy::Distributed),
            _ => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which tiers exist in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Central cloud only.
    CcOnly,
    /// Cloud plus LF and NF, no vehicles.
    CloudFog,
    /// Cloud, fog and a sparse vehicle population.
    LowDensity,
    /// Cloud, fog and a dense vehicle population.
    HighDensity,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::CcOnly,
        Variant::CloudFog,
        Variant::LowDensity,
        Variant::HighDensity,
    ];

    /// Short name used on the command line and in CSV output.
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::CcOnly => "cc",
            Variant::CloudFog => "cf",
            Variant::LowDensity => "low",
            Variant::HighDensity => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "cc" => Some(Variant::CcOnly),
            "cf" => Some(Variant::CloudFog),
            "low" => Some(Variant::LowDensity),
            "high" => Some(Variant::HighDensity),
            _ => None,
        }
    }

    pub fn allows(&self, tier: Tier) -> bool {
        match self {
            Variant::CcOnly => tier == Tier::Cc,
            Variant::CloudFog => tier != Tier::Vn,
            Variant::LowDensity | Variant::HighDensity => true,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("server {id}: invalid {field}: {reason}")]
    InvalidServer {
        id: ServerId,
        field: String,
        reason: String,
    },
    #[error("device {id}: invalid {field}")]
    InvalidDevice { id: DeviceId, field: String },
    #[error("task {id}: invalid {field}")]
    InvalidTask { id: TaskId, field: String },
    #[error("task count must be at least 1")]
    EmptyTaskSet,
    #[error("unknown Fogbank {0}")]
    UnknownFogbank(VfId),
    #[error("duplicate identifier {0}")]
    DuplicateId(String),
    #[error("task {task} originates in {found}, scenario source is {expected}")]
    MixedSource {
        task: TaskId,
        expected: VfId,
        found: VfId,
    },
    #[error("variant {variant} does not admit {tier} server {server}")]
    TierNotInVariant {
        variant: Variant,
        tier: Tier,
        server: ServerId,
    },
    #[error("route to {server} is malformed: {reason}")]
    BadRoute { server: ServerId, reason: String },
}

/// Workload placed on each (task, server) pair, in MIPS.
pub type Allocation = BTreeMap<(TaskId, ServerId), f64>;

/// Everything needed to state one placement problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    topology: Topology,
    routes: RouteTable,
    tasks: TaskSet,
    strategy: Strategy,
    variant: Variant,
    source_vf: VfId,
}

impl Scenario {
    pub fn new(
        topology: Topology,
        tasks: TaskSet,
        strategy: Strategy,
        variant: Variant,
        source_vf: VfId,
    ) -> Result<Self, ModelError> {
        for server in topology.servers() {
            if !variant.allows(server.tier) {
                return Err(ModelError::TierNotInVariant {
                    variant,
                    tier: server.tier,
                    server: server.id.clone(),
                });
            }
        }
        for task in tasks.iter() {
            if task.source_vf != source_vf {
                return Err(ModelError::MixedSource {
                    task: task.id,
                    expected: source_vf,
                    found: task.source_vf,
                });
            }
        }
        let routes = derive_routes(&topology, source_vf)?;
        Ok(Scenario {
            topology,
            routes,
            tasks,
            strategy,
            variant,
            source_vf,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn routes(&self) -> &RouteTable {
        &self.routes
    }

    pub fn tasks(&self) -> &TaskSet {
        &self.tasks
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn source_vf(&self) -> VfId {
        self.source_vf
    }

    pub fn with_strategy(&self, strategy: Strategy) -> Scenario {
        Scenario {
            strategy,
            ..self.clone()
        }
    }

    pub fn with_tasks(&self, tasks: TaskSet) -> Result<Scenario, ModelError> {
        Scenario::new(
            self.topology.clone(),
            tasks,
            self.strategy,
            self.variant,
            self.source_vf,
        )
    }

    /// Copy with every power coefficient (idle, max, per-Mbps) multiplied by `factor`.
    pub fn with_scaled_power(&self, factor: f64) -> Scenario {
        self.with_scaled_power_parts(factor, factor)
    }

    /// Scales server power and network energy independently.
    pub fn with_scaled_power_parts(&self, server_factor: f64, network_factor: f64) -> Scenario {
        let topology = self.topology.scaled_power(server_factor, network_factor);
        Scenario {
            routes: derive_routes(&topology, self.source_vf)
                .expect("scaling keeps the topology shape"),
            topology,
            ..self.clone()
        }
    }

    /// Sum of W/Mbps over the devices on the route to server `idx`.
    pub fn path_energy_w_per_mbps(&self, server_idx: usize) -> f64 {
        self.routes
            .get(server_idx)
            .devices
            .iter()
            .map(|d| {
                self.topology
                    .device(d)
                    .map(|spec| spec.energy_per_mbps_w)
                    .unwrap_or(0.0)
            })
            .sum()
    }

    pub fn total_demand_mips(&self) -> f64 {
        self.tasks.iter().map(|t| t.workload_mips).sum()
    }

    pub fn total_capacity_mips(&self) -> f64 {
        self.topology.servers().iter().map(|s| s.capacity_mips).sum()
    }

    /// Re-derives processing, link and demand rows directly from the
    /// scenario and reports the ones `allocation` breaks.
    pub fn allocation_violations(&self, allocation: &Allocation) -> Vec<RowViolation> {
        let mut out = Vec::new();
        let servers = self.topology.servers();
        let mut server_load = vec![0.0; servers.len()];
        let mut task_sum: BTreeMap<TaskId, f64> = BTreeMap::new();
        let mut task_servers: BTreeMap<TaskId, usize> = BTreeMap::new();
        let mut device_traffic: BTreeMap<&DeviceId, f64> = BTreeMap::new();

        for ((task_id, server_id), &mips) in allocation {
            let task = self.tasks.get(*task_id);
            let server_idx = self.topology.server_index(server_id);
            let (Some(task), Some(server_idx)) = (task, server_idx) else {
                out.push(RowViolation {
                    row: format!("unknown_{task_id}_{server_id}"),
                    lhs: mips,
                    rhs: 0.0,
                    slack: -mips.abs(),
                });
                continue;
            };
            if !mips.is_finite() || mips < -FEASIBILITY_REL_TOL * task.workload_mips {
                out.push(RowViolation {
                    row: format!("lb_{task_id}_{server_id}"),
                    lhs: mips,
                    rhs: 0.0,
                    slack: mips,
                });
            }
            server_load[server_idx] += mips;
            *task_sum.entry(*task_id).or_default() += mips;
            if mips > 0.0 {
                *task_servers.entry(*task_id).or_default() += 1;
            }
            let traffic = task.traffic_mbps * mips / task.workload_mips;
            for device in &self.routes.get(server_idx).devices {
                *device_traffic.entry(device).or_default() += traffic;
            }
        }

        for task in self.tasks.iter() {
            let lhs = task_sum.get(&task.id).copied().unwrap_or(0.0);
            let slack = task.workload_mips - lhs;
            if slack.abs() > FEASIBILITY_REL_TOL * task.workload_mips.max(1.0) {
                out.push(RowViolation {
                    row: format!("dem_{}", task.id),
                    lhs,
                    rhs: task.workload_mips,
                    slack,
                });
            }
            if self.strategy == Strategy::Single {
                let count = task_servers.get(&task.id).copied().unwrap_or(0);
                if count != 1 {
                    out.push(RowViolation {
                        row: format!("one_{}", task.id),
                        lhs: count as f64,
                        rhs: 1.0,
                        slack: 1.0 - count as f64,
                    });
                }
            }
        }
        for (server, load) in servers.iter().zip(&server_load) {
            let slack = server.capacity_mips - load;
            if slack < -FEASIBILITY_REL_TOL * server.capacity_mips {
                out.push(RowViolation {
                    row: format!("cap_{}", server.id),
                    lhs: *load,
                    rhs: server.capacity_mips,
                    slack,
                });
            }
        }
        for device in self.topology.devices() {
            let lhs = device_traffic.get(&device.id).copied().unwrap_or(0.0);
            let slack = device.capacity_mbps - lhs;
            if slack < -FEASIBILITY_REL_TOL * device.capacity_mbps {
                out.push(RowViolation {
                    row: format!("dev_{}", device.id),
                    lhs,
                    rhs: device.capacity_mbps,
                    slack,
                });
            }
        }
        out
    }
}

/// One violated constraint row: `slack = rhs - lhs` (negative when over).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowViolation {
    pub row: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}
