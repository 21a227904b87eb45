use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{
    DeviceId, DeviceKind, ModelConfig, ModelError, NetworkDeviceSpec, ServerId, ServerSpec, Tier,
    Variant, VfId,
};

/// Number of Fogbanks in the architecture.
pub const VF_COUNT: u32 = 4;

pub fn rsu_id(vf: VfId) -> DeviceId {
    DeviceId(format!("rsu{}", vf.0))
}

fn onu_id() -> DeviceId {
    DeviceId::new("onu")
}

fn olt_id() -> DeviceId {
    DeviceId::new("olt")
}

/// Servers and network devices. Servers keep construction order, which is
/// also the column order of every MILP built from this topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    servers: Vec<ServerSpec>,
    devices: Vec<NetworkDeviceSpec>,
    vf_count: u32,
    server_index: BTreeMap<ServerId, usize>,
    device_index: BTreeMap<DeviceId, usize>,
}

impl Topology {
    pub fn new(
        servers: Vec<ServerSpec>,
        devices: Vec<NetworkDeviceSpec>,
        vf_count: u32,
    ) -> Result<Self, ModelError> {
        let mut server_index = BTreeMap::new();
        for (i, s) in servers.iter().enumerate() {
            s.check()?;
            if let Some(vf) = s.vf_id {
                if vf.0 == 0 || vf.0 > vf_count {
                    return Err(ModelError::UnknownFogbank(vf));
                }
            }
            if server_index.insert(s.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(s.id.to_string()));
            }
        }
        let mut device_index = BTreeMap::new();
        for (i, d) in devices.iter().enumerate() {
            if device_index.insert(d.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(d.id.to_string()));
            }
        }
        Ok(Topology {
            servers,
            devices,
            vf_count,
            server_index,
            device_index,
        })
    }

    pub fn servers(&self) -> &[ServerSpec] {
        &self.servers
    }

    pub fn devices(&self) -> &[NetworkDeviceSpec] {
        &self.devices
    }

    pub fn vf_count(&self) -> u32 {
        self.vf_count
    }

    pub fn server_index(&self, id: &ServerId) -> Option<usize> {
        self.server_index.get(id).copied()
    }

    pub fn server(&self, id: &ServerId) -> Option<&ServerSpec> {
        self.server_index(id).map(|i| &self.servers[i])
    }

    pub fn device(&self, id: &DeviceId) -> Option<&NetworkDeviceSpec> {
        self.device_index.get(id).map(|&i| &self.devices[i])
    }

    pub fn count_tier(&self, tier: Tier) -> usize {
        self.servers.iter().filter(|s| s.tier == tier).count()
    }

    /// Copy keeping only servers accepted by `keep`; devices are unchanged.
    pub fn retain_servers(&self, keep: impl Fn(&ServerSpec) -> bool) -> Topology {
        let servers = self.servers.iter().filter(|s| keep(s)).cloned().collect();
        Topology::new(servers, self.devices.clone(), self.vf_count)
            .expect("subset of a valid topology is valid")
    }

    /// Replaces one device's link capacity.
    pub fn with_device_capacity(&self, id: &DeviceId, capacity_mbps: f64) -> Topology {
        let mut t = self.clone();
        if let Some(&i) = t.device_index.get(id) {
            t.devices[i].capacity_mbps = capacity_mbps;
        }
        t
    }

    pub(crate) fn scaled_power(&self, server_factor: f64, network_factor: f64) -> Topology {
        let mut t = self.clone();
        for s in &mut t.servers {
            s.idle_power_w *= server_factor;
            s.max_power_w *= server_factor;
        }
        for d in &mut t.devices {
            d.energy_per_mbps_w *= network_factor;
        }
        t
    }
}

fn tier_server(
    id: String,
    tier: Tier,
    capacity: f64,
    idle: f64,
    max: f64,
    vf: Option<VfId>,
) -> Result<ServerSpec, ModelError> {
    ServerSpec::new(ServerId(id), tier, capacity, idle, max, vf)
}

/// Number of cloud servers needed so the pool can hold the worst-case
/// demand, both as a MIPS total and as whole tasks of the largest size.
pub(crate) fn cloud_pool_size(cfg: &ModelConfig) -> u32 {
    if let Some(n) = cfg.servers.cc.count {
        return n;
    }
    let cap = cfg.servers.cc.capacity_mips;
    let by_mips = (cfg.worst_case_demand_mips() / cap - 1e-9).ceil().max(1.0) as u32;
    let per_server = (cap / cfg.sweep.to + 1e-9).floor();
    let by_tasks = if per_server >= 1.0 {
        (cfg.tasks.count as f64 / per_server - 1e-9).ceil() as u32
    } else {
        by_mips
    };
    by_mips.max(by_tasks)
}

/// Builds the architecture for one scenario variant: a cloud pool, one LF,
/// one NF, four Fogbanks with the variant's vehicle count, and the
/// RSU / ONU / OLT / metro / core devices.
pub fn build_topology(cfg: &ModelConfig, variant: Variant) -> Result<Topology, ModelError> {
    let mut servers = Vec::new();
    let cc = &cfg.servers.cc;
    for i in 1..=cloud_pool_size(cfg) {
        servers.push(tier_server(
            format!("cc{i}"),
            Tier::Cc,
            cc.capacity_mips,
            cc.idle_power_w,
            cc.max_power_w,
            None,
        )?);
    }
    if variant.allows(Tier::Lf) {
        let lf = &cfg.servers.lf;
        for i in 1..=lf.count.unwrap_or(1) {
            servers.push(tier_server(
                format!("lf{i}"),
                Tier::Lf,
                lf.capacity_mips,
                lf.idle_power_w,
                lf.max_power_w,
                None,
            )?);
        }
        let nf = &cfg.servers.nf;
        for i in 1..=nf.count.unwrap_or(1) {
            servers.push(tier_server(
                format!("nf{i}"),
                Tier::Nf,
                nf.capacity_mips,
                nf.idle_power_w,
                nf.max_power_w,
                None,
            )?);
        }
    }
    let per_vf = match variant {
        Variant::CcOnly | Variant::CloudFog => 0,
        Variant::LowDensity => cfg.servers.vn.vehicles_per_vf_low,
        Variant::HighDensity => cfg.servers.vn.vehicles_per_vf_high,
    };
    let vn = &cfg.servers.vn;
    for vf in 1..=VF_COUNT {
        for i in 1..=per_vf {
            servers.push(tier_server(
                format!("vf{vf}_vn{i}"),
                Tier::Vn,
                vn.capacity_mips,
                vn.idle_power_w,
                vn.max_power_w,
                Some(VfId(vf)),
            )?);
        }
    }

    let net = &cfg.network;
    let mut devices = Vec::new();
    for vf in 1..=VF_COUNT {
        devices.push(NetworkDeviceSpec::new(
            rsu_id(VfId(vf)),
            DeviceKind::Rsu,
            net.rsu.energy_per_mbps_w,
            net.rsu.capacity_mbps,
        )?);
    }
    let rest = [
        (onu_id(), DeviceKind::Onu, &net.onu),
        (olt_id(), DeviceKind::Olt, &net.olt),
        (DeviceId::new("metro"), DeviceKind::Metro, &net.metro),
        (DeviceId::new("core"), DeviceKind::Core, &net.core),
    ];
    for (id, kind, dev) in rest {
        devices.push(NetworkDeviceSpec::new(
            id,
            kind,
            dev.energy_per_mbps_w,
            dev.capacity_mbps,
        )?);
    }
    Topology::new(servers, devices, VF_COUNT)
}

/// Ordered device path from the source RSU to a server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub target_server: ServerId,
    pub devices: Vec<DeviceId>,
}

impl Route {
    fn check(&self, source_rsu: &DeviceId, remote_vf: Option<VfId>) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::BadRoute {
            server: self.target_server.clone(),
            reason: reason.to_string(),
        };
        if self.devices.first() != Some(source_rsu) {
            return Err(bad("does not start at the source RSU"));
        }
        let unique: BTreeSet<_> = self.devices.iter().collect();
        if unique.len() != self.devices.len() {
            return Err(bad("repeats a device"));
        }
        if remote_vf.is_some() && !self.devices.contains(&onu_id()) {
            return Err(bad("crosses Fogbanks without the ONU"));
        }
        Ok(())
    }
}

/// One route per server, aligned with the topology's server order.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTable {
    routes: Vec<Route>,
}

impl RouteTable {
    pub fn get(&self, server_idx: usize) -> &Route {
        &self.routes[server_idx]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Route> {
        self.routes.iter()
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn route_for(&self, server: &ServerId) -> Option<&Route> {
        self.routes.iter().find(|r| &r.target_server == server)
    }
}

/// Routes from the RSU of `source_vf`. Vehicles in other Fogbanks are
/// reached through the ONU and their own RSU; fog and cloud servers sit
/// progressively further up the access/metro/core chain.
pub fn derive_routes(topology: &Topology, source_vf: VfId) -> Result<RouteTable, ModelError> {
    if source_vf.0 == 0 || source_vf.0 > topology.vf_count() {
        return Err(ModelError::UnknownFogbank(source_vf));
    }
    let src = rsu_id(source_vf);
    if topology.device(&src).is_none() {
        return Err(ModelError::UnknownFogbank(source_vf));
    }
    let mut routes = Vec::with_capacity(topology.servers().len());
    for s in topology.servers() {
        let mut devices = vec![src.clone()];
        let mut remote = None;
        match s.tier {
            Tier::Vn => {
                let vf = s.vf_id.expect("vehicle servers carry a Fogbank id");
                if vf != source_vf {
                    devices.push(onu_id());
                    devices.push(rsu_id(vf));
                    remote = Some(vf);
                }
            }
            Tier::Nf => devices.push(onu_id()),
            Tier::Lf => devices.extend([onu_id(), olt_id()]),
            Tier::Cc => devices.extend([
                onu_id(),
                olt_id(),
                DeviceId::new("metro"),
                DeviceId::new("core"),
            ]),
        }
        for d in &devices {
            if topology.device(d).is_none() {
                return Err(ModelError::BadRoute {
                    server: s.id.clone(),
                    reason: format!("device {d} missing from topology"),
                });
            }
        }
        let route = Route {
            target_server: s.id.clone(),
            devices,
        };
        route.check(&src, remote)?;
        routes.push(route);
    }
    Ok(RouteTable { routes })
}
