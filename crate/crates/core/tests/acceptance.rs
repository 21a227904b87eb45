//! Acceptance gates. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use fogbank::milp::evaluate_power;
use fogbank::model::{ModelConfig, Strategy, Variant};
use fogbank::report::emit_csv;
use fogbank::runner::{build_scenario, run_point_detailed, run_sweep, sweep_cells, RunOptions, SweepRow};
use fogbank::solver::oracle::{oracle_check, OracleCheckOptions};
use fogbank::solver::{Solution, SolveStatus};

const TOL: f64 = 1e-6;

struct Gate {
    failed: usize,
}

impl Gate {
    fn report(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed += 1;
        }
    }
}

type Key = (Variant, Strategy, u64);

fn key(v: Variant, s: Strategy, w: f64) -> Key {
    (v, s, w.to_bits())
}

fn total(rows: &BTreeMap<Key, SweepRow>, v: Variant, s: Strategy, w: f64) -> f64 {
    rows[&key(v, s, w)].total_w.unwrap_or(f64::NAN)
}

fn pct(saved: f64, base: f64) -> f64 {
    100.0 * saved / base
}

fn oracle(g: &mut Gate) {
    let r = oracle_check(&OracleCheckOptions {
        trials: 200,
        seed: 42,
        max_tasks: 5,
    });
    let ok = r.passed(TOL) && r.elapsed < Duration::from_secs(60);
    g.report(
        "oracle exactness",
        ok,
        format!(
            "{} trials, {} failures, max relative gap {:.3e}, {:.1} s",
            r.trials,
            r.failures.len(),
            r.max_rel_gap,
            r.elapsed.as_secs_f64()
        ),
    );
}

fn dominance(g: &mut Gate, cfg: &ModelConfig, rows: &BTreeMap<Key, SweepRow>) {
    let mut pairs = 0;
    let mut bad = Vec::new();
    let mut best = (0.0f64, Variant::CcOnly, 0.0);
    for v in Variant::ALL {
        for w in cfg.sweep.workloads() {
            let (single, split) = (
                total(rows, v, Strategy::Single, w),
                total(rows, v, Strategy::Distributed, w),
            );
            pairs += 1;
            if !(split <= single + 1e-9) {
                bad.push(format!("{}/{w}", v.as_str()));
            }
            let saving = pct(single - split, single);
            if saving > best.0 {
                best = (saving, v, w);
            }
        }
    }
    g.report(
        "dominance",
        bad.is_empty() && pairs == 40,
        format!(
            "{}/{pairs} pairs hold; largest distributed saving {:.1}% ({} at {} MIPS){}",
            pairs - bad.len(),
            best.0,
            best.1.as_str(),
            best.2,
            if bad.is_empty() { String::new() } else { format!("; violated at {bad:?}") }
        ),
    );
}

fn monotonicity(g: &mut Gate, cfg: &ModelConfig, rows: &BTreeMap<Key, SweepRow>) {
    let mut bad = Vec::new();
    let mut savings: BTreeMap<Variant, (f64, f64)> = BTreeMap::new();
    for s in Strategy::ALL {
        for w in cfg.sweep.workloads() {
            let t: Vec<f64> = Variant::ALL.iter().map(|&v| total(rows, v, s, w)).collect();
            if !t.windows(2).all(|p| p[1] <= p[0] + 1e-9) {
                bad.push(format!("{}/{w}", s.as_str()));
            }
            for (i, &v) in Variant::ALL.iter().enumerate().skip(1) {
                let p = pct(t[0] - t[i], t[0]);
                let e = savings.entry(v).or_insert((f64::INFINITY, f64::NEG_INFINITY));
                *e = (e.0.min(p), e.1.max(p));
            }
        }
    }
    let summary: Vec<String> = savings
        .iter()
        .map(|(v, (lo, hi))| format!("{} {lo:.1}..{hi:.1}%", v.as_str()))
        .collect();
    g.report(
        "density monotonicity",
        bad.is_empty(),
        format!(
            "cc >= cf >= low >= high at {} points; saving vs cc: {}{}",
            2 * cfg.sweep.workloads().len() - bad.len(),
            summary.join(", "),
            if bad.is_empty() { String::new() } else { format!("; violated at {bad:?}") }
        ),
    );
}

fn cliff(g: &mut Gate, rows: &BTreeMap<Key, SweepRow>, sols: &BTreeMap<Key, Solution>) {
    let vf_at_3500: Vec<(Variant, f64)> = [Variant::LowDensity, Variant::HighDensity]
        .into_iter()
        .map(|v| (v, rows[&key(v, Strategy::Single, 3500.0)].alloc_vf_total()))
        .collect();
    let vf_ok = vf_at_3500.iter().all(|&(_, m)| m == 0.0);
    let cc_active = |s: Strategy, w: f64| sols[&key(Variant::CcOnly, s, w)].activations.len();
    let mut cc_ok = true;
    let mut counts = Vec::new();
    for s in Strategy::ALL {
        let (a3000, a3500) = (cc_active(s, 3000.0), cc_active(s, 3500.0));
        cc_ok &= a3000 == 1 && a3500 >= 2;
        counts.push(format!("{} {a3000}->{a3500}", s.as_str()));
    }
    let jump = total(rows, Variant::CcOnly, Strategy::Single, 3500.0)
        - total(rows, Variant::CcOnly, Strategy::Single, 3000.0);
    let step = total(rows, Variant::CcOnly, Strategy::Single, 3000.0)
        - total(rows, Variant::CcOnly, Strategy::Single, 2500.0);
    g.report(
        "cliff",
        vf_ok && cc_ok,
        format!(
            "single VF MIPS at 3500: {vf_at_3500:?}; cc servers 3000->3500: {}; cc single power step {step:.1} W then {jump:.1} W",
            counts.join(", ")
        ),
    );
}

fn gates(g: &mut Gate, cfg: &ModelConfig, rows: &BTreeMap<Key, SweepRow>) {
    let a = &rows[&key(Variant::HighDensity, Strategy::Distributed, 3500.0)];
    g.report(
        "calibration gate (a)",
        a.status == SolveStatus::Optimal && a.alloc_vf_total() > 0.0,
        format!("high/distributed/3500 places {} MIPS on VFs", a.alloc_vf_total()),
    );

    let fleet = cfg.servers.vn.capacity_mips * cfg.servers.vn.vehicles_per_vf_low as f64;
    let run = |tasks: u32| {
        let mut c = cfg.clone();
        c.tasks.count = tasks;
        run_point_detailed(&c, Variant::LowDensity, Strategy::Distributed, 2000.0, &RunOptions::default())
            .map(|(row, _)| row)
    };
    let remote = |r: &SweepRow| r.alloc_vf_total() - r.alloc_vf[0];

    // 20000 MIPS: the local fleet saturates and the NF has room for the rest.
    match run(10) {
        Ok(r) => g.report(
            "calibration gate (b)",
            (r.alloc_vf[0] - fleet).abs() <= TOL * fleet && r.alloc_nf > 0.0 && remote(&r) == 0.0,
            format!(
                "10 x 2000 on low/distributed: vf1 {} of {fleet}, nf {}, remote vf {}, lf {}, cc {}",
                r.alloc_vf[0], r.alloc_nf, remote(&r), r.alloc_lf, r.alloc_cc
            ),
        ),
        Err(e) => g.report("calibration gate (b)", false, e.to_string()),
    }

    // 30000 MIPS: local fleet plus NF fall short by 8000.
    match run(15) {
        Ok(r) => g.report(
            "calibration gate (c)",
            remote(&r) > 0.0 && r.alloc_lf == 0.0 && r.alloc_cc == 0.0,
            format!(
                "15 x 2000 on low/distributed: vf1 {}, nf {}, remote vf {}, lf {}, cc {}",
                r.alloc_vf[0], r.alloc_nf, remote(&r), r.alloc_lf, r.alloc_cc
            ),
        ),
        Err(e) => g.report("calibration gate (c)", false, e.to_string()),
    }
}

fn two_path(g: &mut Gate, cfg: &ModelConfig, sols: &BTreeMap<Key, Solution>) {
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (&(v, s, w), sol) in sols {
        if sol.status != SolveStatus::Optimal {
            continue;
        }
        let w = f64::from_bits(w);
        let sc = build_scenario(cfg, v, s, w).expect("sweep scenario builds");
        let recomputed = evaluate_power(&sol.allocation, &sc).map(|p| p.total_w);
        let gap = match (sol.objective_w, recomputed) {
            (Some(o), Ok(p)) => (o - p).abs() / p.abs().max(1.0),
            _ => f64::INFINITY,
        };
        checked += 1;
        worst = worst.max(gap);
        if !(gap <= TOL) {
            bad.push(format!("{}/{}/{w}", v.as_str(), s.as_str()));
        }
    }
    g.report(
        "two-path objective",
        bad.is_empty() && checked > 0,
        format!("{checked} optimal solutions, max relative difference {worst:.3e}{}",
            if bad.is_empty() { String::new() } else { format!("; off at {bad:?}") }),
    );
}

fn determinism_and_runtime(g: &mut Gate, cfg: &ModelConfig) {
    let opts = RunOptions::default();
    let start = Instant::now();
    let one = run_sweep(cfg, &opts, 1).map(|r| emit_csv(&r));
    let elapsed = start.elapsed();
    let eight = run_sweep(cfg, &opts, 8).map(|r| emit_csv(&r));
    match (&one, &eight) {
        (Ok(a), Ok(b)) => g.report(
            "determinism",
            a == b,
            format!("workers 1 vs 8: {} vs {} bytes, identical: {}", a.len(), b.len(), a == b),
        ),
        _ => g.report("determinism", false, format!("sweep failed: {one:?} / {eight:?}")),
    }
    g.report(
        "runtime",
        one.is_ok() && elapsed < Duration::from_secs(600),
        format!("full sweep on one worker took {:.1} s", elapsed.as_secs_f64()),
    );
}

fn main() {
    let cfg = ModelConfig::default();
    let mut g = Gate { failed: 0 };

    oracle(&mut g);

    let mut rows = BTreeMap::new();
    let mut sols = BTreeMap::new();
    for c in sweep_cells(&cfg) {
        let (row, sol) = run_point_detailed(&cfg, c.variant, c.strategy, c.workload_mips, &RunOptions::default())
            .unwrap_or_else(|e| panic!("sweep cell failed: {e}"));
        let k = key(c.variant, c.strategy, c.workload_mips);
        rows.insert(k, row);
        sols.insert(k, sol);
    }
    if sols.values().any(|s| s.status != SolveStatus::Optimal) {
        println!("note: not every sweep point solved to proven optimality");
    }

    dominance(&mut g, &cfg, &rows);
    monotonicity(&mut g, &cfg, &rows);
    cliff(&mut g, &rows, &sols);
    gates(&mut g, &cfg, &rows);
    two_path(&mut g, &cfg, &sols);
    determinism_and_runtime(&mut g, &cfg);

    if g.failed > 0 {
        println!("{} acceptance criteria failed", g.failed);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
