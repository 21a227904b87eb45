//! JSON configuration: power profiles, network devices, task generation and
//! the workload sweep. Every key is optional; omitted keys fall back to the
//! shipped defaults (`configs/default.json`). Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerTierConfig {
    pub capacity_mips: f64,
    pub idle_power_w: f64,
    pub max_power_w: f64,
    /// `None` sizes the pool automatically (cloud tier only).
    pub count: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTierConfig {
    pub capacity_mips: f64,
    pub idle_power_w: f64,
    pub max_power_w: f64,
    pub vehicles_per_vf_low: u32,
    pub vehicles_per_vf_high: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServersConfig {
    pub cc: ServerTierConfig,
    pub lf: ServerTierConfig,
    pub nf: ServerTierConfig,
    pub vn: VehicleTierConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig {
    pub energy_per_mbps_w: f64,
    pub capacity_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub rsu: DeviceConfig,
    pub onu: DeviceConfig,
    pub olt: DeviceConfig,
    pub metro: DeviceConfig,
    pub core: DeviceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TasksConfig {
    pub count: u32,
    pub traffic_per_mips: f64,
    pub source_vf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl SweepConfig {
    /// Workloads `from, from+step, ...` up to and including `to`.
    pub fn workloads(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.from + self.step * i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub version: u32,
    pub servers: ServersConfig,
    pub network: NetworkConfig,
    pub tasks: TasksConfig,
    pub sweep: SweepConfig,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let link = 5000.0;
        ModelConfig {
            version: CONFIG_VERSION,
            servers: ServersConfig {
                cc: ServerTierConfig {
                    capacity_mips: 160_000.0,
                    idle_power_w: 301.0,
                    max_power_w: 365.0,
                    count: None,
                },
                lf: ServerTierConfig {
                    capacity_mips: 54_400.0,
                    idle_power_w: 120.0,
                    max_power_w: 175.0,
                    count: Some(1),
                },
                nf: ServerTierConfig {
                    capacity_mips: 6_000.0,
                    idle_power_w: 4.0,
                    max_power_w: 16.0,
                    count: Some(1),
                },
                vn: VehicleTierConfig {
                    capacity_mips: 3_200.0,
                    idle_power_w: 4.0,
                    max_power_w: 12.0,
                    vehicles_per_vf_low: 5,
                    vehicles_per_vf_high: 15,
                },
            },
            network: NetworkConfig {
                rsu: DeviceConfig {
                    energy_per_mbps_w: 0.1,
                    capacity_mbps: link,
                },
                onu: DeviceConfig {
                    energy_per_mbps_w: 0.25,
                    capacity_mbps: link,
                },
                olt: DeviceConfig {
                    energy_per_mbps_w: 0.02,
                    capacity_mbps: link,
                },
                metro: DeviceConfig {
                    energy_per_mbps_w: 0.01,
                    capacity_mbps: link,
                },
                core: DeviceConfig {
                    energy_per_mbps_w: 0.08,
                    capacity_mbps: link,
                },
            },
            tasks: TasksConfig {
                count: 50,
                traffic_per_mips: 0.01,
                source_vf: 1,
            },
            sweep: SweepConfig {
                from: 500.0,
                to: 5000.0,
                step: 500.0,
            },
            seed: 0,
        }
    }
}

impl ModelConfig {
    /// Worst-case aggregate demand the cloud pool must be able to absorb.
    pub fn worst_case_demand_mips(&self) -> f64 {
        self.tasks.count as f64 * self.sweep.to
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid(
                "version",
                format!("unsupported version {}, expected {CONFIG_VERSION}", self.version),
            ));
        }
        let tiers = [
            ("servers.cc", &self.servers.cc),
            ("servers.lf", &self.servers.lf),
            ("servers.nf", &self.servers.nf),
        ];
        for (path, tier) in tiers {
            check_power(path, tier.capacity_mips, tier.idle_power_w, tier.max_power_w)?;
        }
        if self.servers.cc.count == Some(0) {
            return Err(invalid("servers.cc.count", "the cloud pool cannot be empty"));
        }
        let vn = &self.servers.vn;
        check_power("servers.vn", vn.capacity_mips, vn.idle_power_w, vn.max_power_w)?;
        if vn.vehicles_per_vf_low > vn.vehicles_per_vf_high {
            return Err(invalid(
                "servers.vn.vehicles_per_vf_low",
                "exceeds vehicles_per_vf_high",
            ));
        }
        let devices = [
            ("network.rsu", &self.network.rsu),
            ("network.onu", &self.network.onu),
            ("network.olt", &self.network.olt),
            ("network.metro", &self.network.metro),
            ("network.core", &self.network.core),
        ];
        for (path, dev) in devices {
            if !(dev.energy_per_mbps_w.is_finite() && dev.energy_per_mbps_w >= 0.0) {
                return Err(invalid(
                    format!("{path}.energy_per_mbps_w"),
                    "must be nonnegative and finite",
                ));
            }
            if !(dev.capacity_mbps.is_finite() && dev.capacity_mbps > 0.0) {
                return Err(invalid(
                    format!("{path}.capacity_mbps"),
                    "must be positive and finite",
                ));
            }
        }
        if self.tasks.count == 0 {
            return Err(invalid("tasks.count", "must be at least 1"));
        }
        if !(self.tasks.traffic_per_mips.is_finite() && self.tasks.traffic_per_mips > 0.0) {
            return Err(invalid("tasks.traffic_per_mips", "must be positive and finite"));
        }
        if !(1..=super::VF_COUNT).contains(&self.tasks.source_vf) {
            return Err(invalid(
                "tasks.source_vf",
                format!("must be in 1..={}", super::VF_COUNT),
            ));
        }
        let s = &self.sweep;
        if !(s.from.is_finite() && s.from > 0.0) {
            return Err(invalid("sweep.from", "must be positive and finite"));
        }
        if !(s.step.is_finite() && s.step > 0.0) {
            return Err(invalid("sweep.step", "must be positive and finite"));
        }
        if !(s.to.is_finite() && s.to >= s.from) {
            return Err(invalid("sweep.to", "must be finite and at least sweep.from"));
        }
        Ok(())
    }
}

fn check_power(path: &str, capacity: f64, idle: f64, max: f64) -> Result<(), ConfigError> {
    if !(capacity.is_finite() && capacity > 0.0) {
        return Err(invalid(format!("{path}.capacity_mips"), "must be positive and finite"));
    }
    if !(idle.is_finite() && idle >= 0.0) {
        return Err(invalid(format!("{path}.idle_power_w"), "must be nonnegative and finite"));
    }
    if !(max.is_finite() && max > 0.0) {
        return Err(invalid(format!("{path}.max_power_w"), "must be positive and finite"));
    }
    if idle > max {
        return Err(invalid(
            format!("{path}.idle_power_w"),
            format!("idle power {idle} W exceeds max power {max} W"),
        ));
    }
    Ok(())
}

// Partial mirror of the document; every field optional, unknown keys rejected.

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    version: Option<u32>,
    servers: Option<RawServers>,
    network: Option<RawNetwork>,
    tasks: Option<RawTasks>,
    sweep: Option<RawSweep>,
    seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawServers {
    cc: Option<RawTier>,
    lf: Option<RawTier>,
    nf: Option<RawTier>,
    vn: Option<RawVehicles>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTier {
    capacity_mips: Option<f64>,
    idle_power_w: Option<f64>,
    max_power_w: Option<f64>,
    // outer None: key absent; inner None: explicit null (auto-size)
    #[serde(default, deserialize_with = "explicit_null")]
    count: Option<Option<u32>>,
}

fn explicit_null<'de, D>(d: D) -> Result<Option<Option<u32>>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    Option::<u32>::deserialize(d).map(Some)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawVehicles {
    capacity_mips: Option<f64>,
    idle_power_w: Option<f64>,
    max_power_w: Option<f64>,
    vehicles_per_vf_low: Option<u32>,
    vehicles_per_vf_high: Option<u32>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    rsu: Option<RawDevice>,
    onu: Option<RawDevice>,
    olt: Option<RawDevice>,
    metro: Option<RawDevice>,
    core: Option<RawDevice>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    energy_per_mbps_w: Option<f64>,
    capacity_mbps: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTasks {
    count: Option<u32>,
    traffic_per_mips: Option<f64>,
    source_vf: Option<u32>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    from: Option<f64>,
    to: Option<f64>,
    step: Option<f64>,
}

fn merge<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn merge_tier(dst: &mut ServerTierConfig, raw: Option<RawTier>) {
    let raw = raw.unwrap_or_default();
    merge(&mut dst.capacity_mips, raw.capacity_mips);
    merge(&mut dst.idle_power_w, raw.idle_power_w);
    merge(&mut dst.max_power_w, raw.max_power_w);
    merge(&mut dst.count, raw.count);
}

fn merge_device(dst: &mut DeviceConfig, raw: Option<RawDevice>) {
    let raw = raw.unwrap_or_default();
    merge(&mut dst.energy_per_mbps_w, raw.energy_per_mbps_w);
    merge(&mut dst.capacity_mbps, raw.capacity_mbps);
}

/// Parses and validates a configuration document.
pub fn load_config(text: &str) -> Result<ModelConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut cfg = ModelConfig::default();
    merge(&mut cfg.version, raw.version);
    merge(&mut cfg.seed, raw.seed);

    let servers = raw.servers.unwrap_or_default();
    merge_tier(&mut cfg.servers.cc, servers.cc);
    merge_tier(&mut cfg.servers.lf, servers.lf);
    merge_tier(&mut cfg.servers.nf, servers.nf);
    let vn = servers.vn.unwrap_or_default();
    merge(&mut cfg.servers.vn.capacity_mips, vn.capacity_mips);
    merge(&mut cfg.servers.vn.idle_power_w, vn.idle_power_w);
    merge(&mut cfg.servers.vn.max_power_w, vn.max_power_w);
    merge(&mut cfg.servers.vn.vehicles_per_vf_low, vn.vehicles_per_vf_low);
    merge(&mut cfg.servers.vn.vehicles_per_vf_high, vn.vehicles_per_vf_high);

    let net = raw.network.unwrap_or_default();
    merge_device(&mut cfg.network.rsu, net.rsu);
    merge_device(&mut cfg.network.onu, net.onu);
    merge_device(&mut cfg.network.olt, net.olt);
    merge_device(&mut cfg.network.metro, net.metro);
    merge_device(&mut cfg.network.core, net.core);

    let tasks = raw.tasks.unwrap_or_default();
    merge(&mut cfg.tasks.count, tasks.count);
    merge(&mut cfg.tasks.traffic_per_mips, tasks.traffic_per_mips);
    merge(&mut cfg.tasks.source_vf, tasks.source_vf);

    let sweep = raw.sweep.unwrap_or_default();
    merge(&mut cfg.sweep.from, sweep.from);
    merge(&mut cfg.sweep.to, sweep.to);
    merge(&mut cfg.sweep.step, sweep.step);

    cfg.validate()?;
    Ok(cfg)
}
