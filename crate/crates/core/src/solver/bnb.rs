use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use super::simplex::{Basis, Factor, LpStatus, PreparedLp, SolverError};
use crate::milp::{MilpInstance, VarRole};

#[derive(Debug, Clone, PartialEq)]
pub struct BbOptions {
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub int_tol: f64,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Default for BbOptions {
    fn default() -> Self {
        BbOptions {
            gap_abs: 1e-9,
            gap_rel: 1e-9,
            int_tol: 1e-6,
            node_limit: None,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbStatus {
    /// Search exhausted; the incumbent is optimal within the gap.
    Optimal,
    /// Search exhausted without any feasible point.
    Infeasible,
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbOutcome {
    pub status: BbStatus,
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Best proven lower bound on the optimum.
    pub bound: f64,
    pub nodes: u64,
    pub lp_iterations: u64,
}

struct Node {
    id: u64,
    parent: Option<u64>,
    bound: f64,
    changes: Vec<(usize, f64, f64)>,
    basis: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: the smallest bound, then the smallest id, comes out first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    milp: &'a MilpInstance,
    opts: &'a BbOptions,
    lp: PreparedLp,
    root_lo: Vec<f64>,
    root_up: Vec<f64>,
    incumbent: Option<(Vec<f64>, f64)>,
    lp_iterations: u64,
}

impl Search<'_> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((_, z)) => z - self.opts.gap_abs.max(self.opts.gap_rel * z.abs()),
            None => f64::INFINITY,
        }
    }

    fn bounds_with(&self, changes: &[(usize, f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.root_lo.clone();
        let mut up = self.root_up.clone();
        for &(j, l, u) in changes {
            lo[j] = l;
            up[j] = u;
        }
        (lo, up)
    }

    fn offer(&mut self, x: Vec<f64>) -> bool {
        let z = self.milp.objective_value(&x);
        let better = self.incumbent.as_ref().is_none_or(|(_, best)| z < *best);
        if better
            && self.milp.max_violation(&x) <= 1e-9
            && self.milp.is_integral(&x, self.opts.int_tol)
        {
            self.incumbent = Some((x, z));
            return true;
        }
        false
    }

    /// Re-solves with integer columns pinned to `fix` and offers the result.
    fn solve_fixed(&mut self, base: &(Vec<f64>, Vec<f64>), fix: &[f64]) -> Result<(), SolverError> {
        let (mut lo, mut up) = base.clone();
        for (j, v) in self.milp.variables().iter().enumerate() {
            if v.is_integer() {
                let f = fix[j].clamp(lo[j], up[j]);
                lo[j] = f;
                up[j] = f;
            }
        }
        self.lp.set_bounds(&lo, &up);
        let sol = self.lp.solve()?;
        self.lp_iterations += sol.iterations as u64;
        if sol.status == LpStatus::Optimal {
            let mut x = sol.x;
            for (j, v) in self.milp.variables().iter().enumerate() {
                if v.is_integer() {
                    x[j] = fix[j].clamp(lo[j], up[j]);
                }
            }
            self.offer(x);
        }
        Ok(())
    }

    /// Most fractional integer column, activations first, lowest index on ties.
    fn branch_column(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(bool, f64, usize)> = None;
        for (j, v) in self.milp.variables().iter().enumerate() {
            if !v.is_integer() {
                continue;
            }
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist <= self.opts.int_tol {
                continue;
            }
            let act = v.role == VarRole::Activation;
            let better = match best {
                None => true,
                Some((b_act, b_dist, _)) => (act && !b_act) || (act == b_act && dist > b_dist),
            };
            if better {
                best = Some((act, dist, j));
            }
        }
        best.map(|(_, _, j)| j)
    }

    /// Rounds activations up and keeps other integers where they are, if
    /// they are already integral.
    fn round_up_heuristic(&mut self, x: &[f64]) -> Result<(), SolverError> {
        let mut fix = x.to_vec();
        for (j, v) in self.milp.variables().iter().enumerate() {
            if !v.is_integer() {
                continue;
            }
            let r = x[j].round();
            if v.role == VarRole::Activation {
                fix[j] = if x[j] > self.opts.int_tol { x[j].ceil() } else { 0.0 };
            } else if (x[j] - r).abs() > self.opts.int_tol {
                return Ok(());
            } else {
                fix[j] = r;
            }
        }
        let base = (self.root_lo.clone(), self.root_up.clone());
        self.solve_fixed(&base, &fix)
    }
}

/// Best-first branch and bound over the LP relaxation.
///
/// `incumbent`, if feasible and integral, seeds the cutoff.
pub fn branch_and_bound(
    milp: &MilpInstance,
    opts: &BbOptions,
    incumbent: Option<Vec<f64>>,
) -> Result<BbOutcome, SolverError> {
    let start = Instant::now();
    let root_lo: Vec<f64> = milp.variables().iter().map(|v| v.lower).collect();
    let root_up: Vec<f64> = milp.variables().iter().map(|v| v.upper).collect();
    let mut s = Search {
        milp,
        opts,
        lp: PreparedLp::new(milp),
        root_lo,
        root_up,
        incumbent: None,
        lp_iterations: 0,
    };
    if let Some(x) = incumbent {
        if x.len() == milp.num_vars() {
            s.offer(x);
        }
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        id: 0,
        parent: None,
        bound: f64::NEG_INFINITY,
        changes: Vec::new(),
        basis: None,
    });
    let mut next_id = 1u64;
    let mut nodes = 0u64;
    let mut lp_holds: Option<u64> = None;
    // inverse at the last branching node, so its second child skips a refactor
    let mut sibling: Option<(u64, Factor)> = None;
    let mut limit: Option<BbStatus> = None;

    while let Some(node) = heap.peek() {
        if node.bound >= s.cutoff() {
            heap.clear();
            break;
        }
        if opts.node_limit.is_some_and(|l| nodes >= l) {
            limit = Some(BbStatus::NodeLimit);
            break;
        }
        if opts.time_limit.is_some_and(|t| start.elapsed() >= t) {
            limit = Some(BbStatus::TimeLimit);
            break;
        }
        let node = heap.pop().expect("peeked");
        let bounds = s.bounds_with(&node.changes);
        s.lp.set_bounds(&bounds.0, &bounds.1);
        if node.parent.is_none() || node.parent != lp_holds {
            match &sibling {
                Some((id, f)) if node.parent == Some(*id) => s.lp.load_factor(f),
                _ => {
                    if let Some(b) = &node.basis {
                        s.lp.load_basis(b);
                    }
                }
            }
        }
        let sol = s.lp.solve()?;
        nodes += 1;
        s.lp_iterations += sol.iterations as u64;
        lp_holds = Some(node.id);
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Err(SolverError::NumericalFailure(
                    "relaxation is unbounded".into(),
                ))
            }
            LpStatus::Optimal => {}
        }
        let z = sol.objective;
        if z >= s.cutoff() {
            continue;
        }
        let Some(j) = s.branch_column(&sol.x) else {
            let fix: Vec<f64> = sol.x.iter().map(|v| v.round()).collect();
            s.solve_fixed(&bounds, &fix)?;
            lp_holds = None;
            continue;
        };
        let basis = s.lp.basis().map(Rc::new);
        sibling = s.lp.factor().map(|f| (node.id, f));
        if node.id == 0 {
            s.round_up_heuristic(&sol.x)?;
            if let Some(b) = &basis {
                s.lp.set_bounds(&bounds.0, &bounds.1);
                s.lp.load_basis(b);
            }
            if z >= s.cutoff() {
                continue;
            }
        }
        let v = sol.x[j];
        let (lo, up) = (bounds.0[j], bounds.1[j]);
        for (l, u) in [(lo, v.floor()), (v.ceil(), up)] {
            let mut changes = node.changes.clone();
            changes.push((j, l, u));
            heap.push(Node {
                id: next_id,
                parent: Some(node.id),
                bound: z,
                changes,
                basis: basis.clone(),
            });
            next_id += 1;
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let (x, objective) = match s.incumbent {
        Some((x, z)) => (Some(x), Some(z)),
        None => (None, None),
    };
    let status = match (limit, &objective) {
        (Some(l), _) => l,
        (None, Some(_)) => BbStatus::Optimal,
        (None, None) => BbStatus::Infeasible,
    };
    let bound = match status {
        BbStatus::Optimal => objective.expect("incumbent"),
        BbStatus::Infeasible => f64::INFINITY,
        _ => open_bound.min(objective.unwrap_or(f64::INFINITY)),
    };
    Ok(BbOutcome {
        status,
        x,
        objective,
        bound,
        nodes,
        lp_iterations: s.lp_iterations,
    })
}
