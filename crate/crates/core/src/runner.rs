//! The experiment grid: every (variant, strategy, workload) cell solved,
//! validated and reduced to one row.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{
    build_topology, make_tasks, ModelConfig, ModelError, Scenario, Strategy, Variant, VfId,
    WorkloadMode, VF_COUNT,
};
use crate::report::{node_breakdown, validate, vf_breakdown, ValidationReport};
use crate::solver::{solve_scenario, Solution, SolveOptions, SolveStatus, SolverError};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub solve: SolveOptions,
    /// Keep wall-clock runtimes; otherwise they are written as zero so
    /// repeated runs produce identical bytes.
    pub timings: bool,
}

/// One point of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variant: Variant,
    pub strategy: Strategy,
    pub workload_mips: f64,
    pub status: SolveStatus,
    pub total_w: Option<f64>,
    pub processing_w: Option<f64>,
    pub networking_w: Option<f64>,
    pub alloc_cc: f64,
    pub alloc_lf: f64,
    pub alloc_nf: f64,
    pub alloc_vf: [f64; VF_COUNT as usize],
    pub bb_nodes: u64,
    pub runtime_ms: f64,
}

impl SweepRow {
    pub fn alloc_total(&self) -> f64 {
        self.alloc_cc + self.alloc_lf + self.alloc_nf + self.alloc_vf.iter().sum::<f64>()
    }

    pub fn alloc_vf_total(&self) -> f64 {
        self.alloc_vf.iter().sum()
    }
}

/// Identifies a sweep cell in error messages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub variant: Variant,
    pub strategy: Strategy,
    pub workload_mips: f64,
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}/{}/{}",
            self.variant.as_str(),
            self.strategy.as_str(),
            self.workload_mips
        )
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{cell}: {source}")]
    Model { cell: Cell, source: ModelError },
    #[error("{cell}: workload outside the sweep range {from}..={to}")]
    OutOfRange { cell: Cell, from: f64, to: f64 },
    #[error("{cell}: {source}")]
    Solver { cell: Cell, source: SolverError },
    #[error("{cell}: solution failed validation: {report:?}")]
    Validation {
        cell: Cell,
        report: ValidationReport,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

/// The scenario for one cell: the variant's topology and `tasks.count`
/// identical tasks of `workload_mips`.
pub fn build_scenario(
    config: &ModelConfig,
    variant: Variant,
    strategy: Strategy,
    workload_mips: f64,
) -> Result<Scenario, ModelError> {
    let topo = build_topology(config, variant)?;
    let source = VfId(config.tasks.source_vf);
    let tasks = make_tasks(
        config.tasks.count as usize,
        WorkloadMode::Fixed(workload_mips),
        config.seed,
        config.tasks.traffic_per_mips,
        source,
    )?;
    Scenario::new(topo, tasks, strategy, variant, source)
}

/// Reduces a validated solution to a sweep row.
pub fn sweep_row(cell: Cell, solution: &Solution, scenario: &Scenario, timings: bool) -> SweepRow {
    let nodes = node_breakdown(solution, scenario);
    let vfs = vf_breakdown(solution, scenario);
    let mut alloc_vf = [0.0; VF_COUNT as usize];
    for (vf, mips) in vfs {
        if let Some(slot) = alloc_vf.get_mut(vf.0 as usize - 1) {
            *slot = mips;
        }
    }
    let b = solution.breakdown.as_ref().filter(|_| solution.status.has_allocation());
    SweepRow {
        variant: cell.variant,
        strategy: cell.strategy,
        workload_mips: cell.workload_mips,
        status: solution.status,
        total_w: b.map(|b| b.total_w),
        processing_w: b.map(|b| b.processing_w),
        networking_w: b.map(|b| b.networking_w),
        alloc_cc: nodes.cc,
        alloc_lf: nodes.lf,
        alloc_nf: nodes.nf,
        alloc_vf,
        bb_nodes: solution.stats.bb_nodes,
        runtime_ms: if timings {
            solution.stats.runtime_ms
        } else {
            0.0
        },
    }
}

/// Solves and validates one cell, returning the row and the full solution.
pub fn run_point_detailed(
    config: &ModelConfig,
    variant: Variant,
    strategy: Strategy,
    workload_mips: f64,
    opts: &RunOptions,
) -> Result<(SweepRow, Solution), RunError> {
    let cell = Cell {
        variant,
        strategy,
        workload_mips,
    };
    let (from, to) = (config.sweep.from, config.sweep.to);
    if !(from..=to).contains(&workload_mips) {
        return Err(RunError::OutOfRange { cell, from, to });
    }
    let scenario = build_scenario(config, variant, strategy, workload_mips)
        .map_err(|source| RunError::Model { cell, source })?;
    let solution = solve_scenario(&scenario, &opts.solve)
        .map_err(|source| RunError::Solver { cell, source })?;
    let report = validate(&solution, &scenario);
    if !report.ok {
        return Err(RunError::Validation { cell, report });
    }
    Ok((sweep_row(cell, &solution, &scenario, opts.timings), solution))
}

pub fn run_point(
    config: &ModelConfig,
    variant: Variant,
    strategy: Strategy,
    workload_mips: f64,
    opts: &RunOptions,
) -> Result<SweepRow, RunError> {
    run_point_detailed(config, variant, strategy, workload_mips, opts).map(|(row, _)| row)
}

/// Grid order: variant, then strategy, then ascending workload.
pub fn sweep_cells(config: &ModelConfig) -> Vec<Cell> {
    let workloads = config.sweep.workloads();
    let mut cells = Vec::with_capacity(8 * workloads.len());
    for variant in Variant::ALL {
        for strategy in Strategy::ALL {
            for &workload_mips in &workloads {
                cells.push(Cell {
                    variant,
                    strategy,
                    workload_mips,
                });
            }
        }
    }
    cells
}

/// Runs every cell on `workers` threads. Rows come back in grid order
/// regardless of the worker count; the first failing cell (in grid order)
/// aborts the sweep.
pub fn run_sweep(
    config: &ModelConfig,
    opts: &RunOptions,
    workers: usize,
) -> Result<Vec<SweepRow>, RunError> {
    let cells = sweep_cells(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let results: Vec<Result<SweepRow, RunError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_point(config, c.variant, c.strategy, c.workload_mips, opts))
            .collect()
    });
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_eighty_cells_in_order() {
        let cells = sweep_cells(&ModelConfig::default());
        assert_eq!(cells.len(), 80);
        assert_eq!(cells[0].variant, Variant::CcOnly);
        assert_eq!(cells[0].strategy, Strategy::Single);
        assert_eq!(cells[0].workload_mips, 500.0);
        assert_eq!(cells[9].workload_mips, 5000.0);
        assert_eq!(cells[10].strategy, Strategy::Distributed);
        assert_eq!(cells[79].variant, Variant::HighDensity);
    }

    #[test]
    fn cloud_cliff_between_3000_and_3500() {
        let cfg = ModelConfig::default();
        let opts = RunOptions::default();
        let (_, at3000) =
            run_point_detailed(&cfg, Variant::CcOnly, Strategy::Single, 3000.0, &opts).unwrap();
        let (_, at3500) =
            run_point_detailed(&cfg, Variant::CcOnly, Strategy::Single, 3500.0, &opts).unwrap();
        assert_eq!(at3000.activations.len(), 1);
        assert!(at3500.activations.len() >= 2);
        let w2500 = run_point(&cfg, Variant::CcOnly, Strategy::Single, 2500.0, &opts).unwrap();
        let (t2500, t3000) = (w2500.total_w.unwrap(), at3000.objective_w.unwrap());
        assert!(at3500.objective_w.unwrap() - t3000 > t3000 - t2500);
    }

    #[test]
    fn no_vehicles_for_whole_tasks_above_their_capacity() {
        let row = run_point(
            &ModelConfig::default(),
            Variant::LowDensity,
            Strategy::Single,
            3500.0,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(row.alloc_vf, [0.0; 4]);
        assert!((row.alloc_total() - 175000.0).abs() < 1e-6);
    }

    #[test]
    fn out_of_range_workload_rejected() {
        let err = run_point(
            &ModelConfig::default(),
            Variant::CcOnly,
            Strategy::Single,
            6000.0,
            &RunOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, RunError::OutOfRange { .. }));
        assert!(err.to_string().starts_with("cc/single/6000"));
    }

    #[test]
    fn structural_infeasibility_becomes_a_row() {
        let mut cfg = ModelConfig::default();
        cfg.servers.cc.count = Some(1);
        let row = run_point(&cfg, Variant::CcOnly, Strategy::Single, 5000.0, &RunOptions::default())
            .unwrap();
        assert_eq!(row.status, SolveStatus::Infeasible);
        assert_eq!(row.total_w, None);
        assert_eq!(row.alloc_total(), 0.0);
    }
}
