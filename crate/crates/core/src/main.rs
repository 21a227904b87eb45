use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use fogbank::milp::to_lp_format;
use fogbank::model::{
    build_topology, load_config, make_tasks, ModelConfig, Scenario, Strategy, Variant, VfId,
    WorkloadMode,
};
use fogbank::report::{emit_csv, emit_solution_json, parse_solution_json, validate};
use fogbank::runner::run_sweep;
use fogbank::runner::RunOptions;
use fogbank::solver::oracle::{oracle_check, OracleCheckOptions};
use fogbank::solver::{build_instance, solve_scenario, BbOptions, Formulation, SolveOptions, SolveStatus};

/// Energy-aware task placement over cloud, fog and vehicular servers.
#[derive(Parser)]
#[command(name = "fogbank", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write the solution as JSON.
    Solve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep the wall-clock runtime instead of writing zero.
        #[arg(long)]
        timings: bool,
    },
    /// Run the full variant x strategy x workload grid and write CSV.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timings: bool,
    },
    /// Compare branch and bound against exhaustive enumeration.
    OracleCheck {
        #[arg(long, default_value_t = 200)]
        trials: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_tasks: usize,
    },
    /// Check a solution JSON against the scenario it claims to solve.
    Validate {
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Write the scenario's MILP in CPLEX LP format.
    ExportLp {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = FormulationArg::PerTask)]
        formulation: FormulationArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    #[arg(long, value_parser = parse_strategy)]
    strategy: Strategy,
    /// Per-task MIPS; omitted means seeded random workloads.
    #[arg(long)]
    workload: Option<f64>,
    /// Task count (overrides the config).
    #[arg(long)]
    tasks: Option<u32>,
    /// Seed for random workloads (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-9)]
    gap_abs: f64,
    #[arg(long, default_value_t = 1e-9)]
    gap_rel: f64,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    #[arg(long, value_enum, default_value_t = FormulationArg::Aggregated)]
    formulation: FormulationArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Aggregated,
    PerTask,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Aggregated => Formulation::Aggregated,
            FormulationArg::PerTask => Formulation::PerTask,
        }
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("expected one of cc, cf, low, high; got {s:?}"))
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    Strategy::parse(s).ok_or_else(|| format!("expected single or distributed; got {s:?}"))
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            bb: BbOptions {
                gap_abs: self.gap_abs,
                gap_rel: self.gap_rel,
                node_limit: self.node_limit,
                time_limit: self.time_limit_ms.map(Duration::from_millis),
                ..BbOptions::default()
            },
            formulation: self.formulation.into(),
            ..SolveOptions::default()
        }
    }
}

/// Failures that are the caller's fault exit with 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn read_config(path: Option<&Path>) -> Result<ModelConfig> {
    let Some(path) = path else {
        return Ok(ModelConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    load_config(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())).into())
}

impl ScenarioArgs {
    fn build(&self) -> Result<Scenario> {
        let mut cfg = read_config(self.config.as_deref())?;
        if let Some(n) = self.tasks {
            cfg.tasks.count = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let mode = match self.workload {
            Some(w) if w.is_finite() && w > 0.0 => WorkloadMode::Fixed(w),
            Some(w) => return Err(UsageError(format!("--workload must be positive, got {w}")).into()),
            None => WorkloadMode::Randomized,
        };
        let topo = build_topology(&cfg, self.variant)?;
        let source = VfId(cfg.tasks.source_vf);
        let tasks = make_tasks(
            cfg.tasks.count as usize,
            mode,
            cfg.seed,
            cfg.tasks.traffic_per_mips,
            source,
        )
        .map_err(|e| UsageError(e.to_string()))?;
        Ok(Scenario::new(topo, tasks, self.strategy, self.variant, source)?)
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            scenario,
            solver,
            out,
            timings,
        } => {
            let sc = scenario.build()?;
            let mut sol = solve_scenario(&sc, &solver.options())?;
            if !timings {
                sol.stats.runtime_ms = 0.0;
            }
            write_output(out.as_deref(), &emit_solution_json(&sol))?;
            Ok(match sol.status {
                SolveStatus::Optimal => ExitCode::SUCCESS,
                SolveStatus::NonProven => {
                    eprintln!("warning: search stopped at a limit; solution not proven optimal");
                    ExitCode::SUCCESS
                }
                SolveStatus::Infeasible | SolveStatus::NoIncumbent => {
                    eprintln!("no feasible allocation: {}", sol.status.as_str());
                    ExitCode::from(1)
                }
            })
        }
        Command::Sweep {
            config,
            workers,
            solver,
            out,
            timings,
        } => {
            let cfg = read_config(config.as_deref())?;
            if workers == 0 {
                bail!(UsageError("--workers must be at least 1".into()));
            }
            let opts = RunOptions {
                solve: solver.options(),
                timings,
            };
            let rows = run_sweep(&cfg, &opts, workers)?;
            write_output(out.as_deref(), &emit_csv(&rows))?;
            let infeasible = rows.iter().filter(|r| r.status == SolveStatus::Infeasible).count();
            eprintln!("{} rows ({} infeasible)", rows.len(), infeasible);
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleCheck {
            trials,
            seed,
            max_tasks,
        } => {
            if max_tasks == 0 || max_tasks > fogbank::solver::oracle::SINGLE_TASK_LIMIT {
                bail!(UsageError(format!(
                    "--max-tasks must be between 1 and {}",
                    fogbank::solver::oracle::SINGLE_TASK_LIMIT
                )));
            }
            let report = oracle_check(&OracleCheckOptions {
                trials,
                seed,
                max_tasks,
            });
            for f in &report.failures {
                println!("FAIL {f}");
            }
            println!("trials: {}", report.trials);
            println!("infeasible trials: {}", report.infeasible_trials);
            println!("failures: {}", report.failures.len());
            println!("max relative gap: {:e}", report.max_rel_gap);
            Ok(if report.passed(1e-6) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Validate { solution, scenario } => {
            let sc = scenario.build()?;
            let text = fs::read_to_string(&solution)
                .map_err(|e| UsageError(format!("cannot read {}: {e}", solution.display())))?;
            let sol = parse_solution_json(&text).map_err(|e| UsageError(e.to_string()))?;
            let report = validate(&sol, &sc);
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::ExportLp {
            scenario,
            formulation,
            out,
        } => {
            let sc = scenario.build()?;
            let opts = SolveOptions {
                formulation: formulation.into(),
                ..SolveOptions::default()
            };
            let milp = build_instance(&sc, &opts)?;
            write_output(out.as_deref(), &to_lp_format(&milp))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
