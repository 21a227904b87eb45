use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::PowerBreakdown;
use crate::model::{Allocation, DeviceId, ServerId, TaskId};
use crate::solver::{Solution, SolveStats, SolveStatus};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("solution json: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("solution json: unknown status {0:?}")]
    Status(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationDoc {
    task: u32,
    server: String,
    mips: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BreakdownDoc {
    processing_w: f64,
    networking_w: f64,
    total_w: f64,
    per_server_w: BTreeMap<String, f64>,
    per_device_w: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsDoc {
    bb_nodes: u64,
    lp_iterations: u64,
    runtime_ms: f64,
}

// Fields in alphabetical order so the output key order is stable.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionDoc {
    activations: Vec<String>,
    allocation: Vec<AllocationDoc>,
    breakdown: Option<BreakdownDoc>,
    objective_w: Option<f64>,
    stats: StatsDoc,
    status: String,
}

/// Pretty-printed solution document with a trailing newline.
pub fn emit_solution_json(solution: &Solution) -> String {
    let doc = SolutionDoc {
        activations: solution.activations.iter().map(|s| s.0.clone()).collect(),
        allocation: solution
            .allocation
            .iter()
            .map(|((t, s), &mips)| AllocationDoc {
                task: t.0,
                server: s.0.clone(),
                mips,
            })
            .collect(),
        breakdown: solution.breakdown.as_ref().map(|b| BreakdownDoc {
            processing_w: b.processing_w,
            networking_w: b.networking_w,
            total_w: b.total_w,
            per_server_w: b.per_server_w.iter().map(|(k, v)| (k.0.clone(), *v)).collect(),
            per_device_w: b.per_device_w.iter().map(|(k, v)| (k.0.clone(), *v)).collect(),
        }),
        objective_w: solution.objective_w,
        stats: StatsDoc {
            bb_nodes: solution.stats.bb_nodes,
            lp_iterations: solution.stats.lp_iterations,
            runtime_ms: solution.stats.runtime_ms,
        },
        status: solution.status.as_str().to_string(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

pub fn parse_solution_json(text: &str) -> Result<Solution, JsonError> {
    let doc: SolutionDoc = serde_json::from_str(text)?;
    let status = SolveStatus::parse(&doc.status).ok_or(JsonError::Status(doc.status.clone()))?;
    let mut allocation = Allocation::new();
    for a in doc.allocation {
        *allocation.entry((TaskId(a.task), ServerId(a.server))).or_default() += a.mips;
    }
    Ok(Solution {
        status,
        objective_w: doc.objective_w,
        allocation,
        activations: doc.activations.into_iter().map(ServerId).collect(),
        breakdown: doc.breakdown.map(|b| PowerBreakdown {
            processing_w: b.processing_w,
            networking_w: b.networking_w,
            total_w: b.total_w,
            per_server_w: b.per_server_w.into_iter().map(|(k, v)| (ServerId(k), v)).collect(),
            per_device_w: b.per_device_w.into_iter().map(|(k, v)| (DeviceId(k), v)).collect(),
        }),
        stats: SolveStats {
            bb_nodes: doc.stats.bb_nodes,
            lp_iterations: doc.stats.lp_iterations,
            runtime_ms: doc.stats.runtime_ms,
        },
    })
}
