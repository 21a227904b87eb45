//! Bounded dual simplex over a dense basis inverse.
//!
//! Each row `a_i . x (rel) b_i` becomes `a_i . x - r_i = 0` with the row
//! variable `r_i` carrying the bounds (`Le`: `r <= b`, `Ge`: `r >= b`,
//! `Eq`: `r = b`). The all-slack basis is then always available, and with
//! every column boxed the starting point is dual feasible, so no phase one
//! is needed. Infinite bounds are replaced by a large artificial box; an
//! optimum resting on that box means the original LP is unbounded.

use thiserror::Error;

use crate::milp::{MilpInstance, Relation};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
const ART_BOUND: f64 = 1e9;
const RESIDUAL_CHECK_EVERY: usize = 50;
const DEGENERATE_BEFORE_BLAND: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("simplex gave up after {0} iterations")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Column values in the instance's own units.
    pub x: Vec<f64>,
    pub objective: f64,
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    /// Largest scaled row or bound violation of `x`.
    pub primal_residual: f64,
    /// Largest reduced cost with the wrong sign for its bound.
    pub dual_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pos {
    Basic,
    Lower,
    Upper,
}

/// A basis snapshot that can be reloaded into the same [`PreparedLp`].
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    head: Vec<usize>,
    pos: Vec<Pos>,
}

/// A basis with its dense inverse, for reloading without a refactor.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    basis: Basis,
    binv: Vec<f64>,
}

/// An LP kept in scaled form between solves, so branch and bound can change
/// column bounds and re-solve from the previous basis.
#[derive(Debug, Clone)]
pub struct PreparedLp {
    m: usize,
    n: usize,
    cols: Vec<Vec<(usize, f64)>>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    art_lo: Vec<bool>,
    art_up: Vec<bool>,
    head: Vec<usize>,
    pos: Vec<Pos>,
    x: Vec<f64>,
    d: Vec<f64>,
    binv: Vec<f64>,
    factored: bool,
    max_iter: usize,
    unscaled: MilpInstance,
}

fn pow2(v: f64) -> f64 {
    if !v.is_finite() || v <= 0.0 {
        return 1.0;
    }
    2f64.powi(v.log2().round().clamp(-60.0, 60.0) as i32)
}

fn scale_factors(m: usize, cols: &[Vec<(usize, f64)>]) -> (Vec<f64>, Vec<f64>) {
    let mut r = vec![1.0; m];
    let mut c = vec![1.0; cols.len()];
    for _ in 0..6 {
        let mut lo = vec![f64::INFINITY; m];
        let mut hi = vec![0.0f64; m];
        for (j, col) in cols.iter().enumerate() {
            for &(i, a) in col {
                let v = (a * c[j]).abs();
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        for i in 0..m {
            if hi[i] > 0.0 {
                r[i] = 1.0 / (lo[i] * hi[i]).sqrt();
            }
        }
        for (j, col) in cols.iter().enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &(i, a) in col {
                let v = (a * r[i]).abs();
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi > 0.0 {
                c[j] = 1.0 / (lo * hi).sqrt();
            }
        }
    }
    (
        r.into_iter().map(pow2).collect(),
        c.into_iter().map(pow2).collect(),
    )
}

/// In-place Gauss-Jordan with partial pivoting on a dense `k x k` matrix.
/// Returns the inverse, or `None` when a pivot falls below tolerance.
fn gauss_jordan(a: &mut [f64], k: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    for c in 0..k {
        let mut p = c;
        let mut best = a[c * k + c].abs();
        for i in c + 1..k {
            let v = a[i * k + c].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best < SINGULAR_TOL {
            return None;
        }
        if p != c {
            for j in 0..k {
                a.swap(p * k + j, c * k + j);
                inv.swap(p * k + j, c * k + j);
            }
        }
        let piv = 1.0 / a[c * k + c];
        for j in c..k {
            a[c * k + j] *= piv;
        }
        for j in 0..k {
            inv[c * k + j] *= piv;
        }
        let (arow, irow) = (a[c * k..(c + 1) * k].to_vec(), inv[c * k..(c + 1) * k].to_vec());
        for i in 0..k {
            if i == c {
                continue;
            }
            let f = a[i * k + c];
            if f == 0.0 {
                continue;
            }
            for j in c..k {
                a[i * k + j] -= f * arow[j];
            }
            for (v, p) in inv[i * k..(i + 1) * k].iter_mut().zip(&irow) {
                *v -= f * p;
            }
        }
    }
    Some(inv)
}

impl PreparedLp {
    pub fn new(milp: &MilpInstance) -> Self {
        let m = milp.num_rows();
        let n = milp.num_vars();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in milp.rows().iter().enumerate() {
            for &(j, a) in &row.coeffs {
                cols[j].push((i, a));
            }
        }
        let (row_scale, col_scale) = scale_factors(m, &cols);
        for (j, col) in cols.iter_mut().enumerate() {
            for (i, a) in col.iter_mut() {
                *a *= row_scale[*i] * col_scale[j];
            }
        }
        let mut cost = vec![0.0; n + m];
        for j in 0..n {
            cost[j] = milp.objective()[j] * col_scale[j];
        }
        let mut lp = PreparedLp {
            m,
            n,
            cols,
            row_scale,
            col_scale,
            cost,
            lo: vec![0.0; n + m],
            up: vec![0.0; n + m],
            art_lo: vec![false; n + m],
            art_up: vec![false; n + m],
            head: Vec::new(),
            pos: Vec::new(),
            x: vec![0.0; n + m],
            d: vec![0.0; n + m],
            binv: Vec::new(),
            factored: false,
            max_iter: 20_000.max(50 * (n + m)),
            unscaled: milp.clone(),
        };
        for (i, row) in milp.rows().iter().enumerate() {
            let b = row.rhs * lp.row_scale[i];
            let (lo, up) = match row.relation {
                Relation::Le => (f64::NEG_INFINITY, b),
                Relation::Ge => (b, f64::INFINITY),
                Relation::Eq => (b, b),
            };
            lp.set_var_bounds(n + i, lo, up);
        }
        let lo: Vec<f64> = milp.variables().iter().map(|v| v.lower).collect();
        let up: Vec<f64> = milp.variables().iter().map(|v| v.upper).collect();
        lp.set_bounds(&lo, &up);
        lp
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    fn set_var_bounds(&mut self, j: usize, lo: f64, up: f64) {
        self.art_lo[j] = lo == f64::NEG_INFINITY;
        self.art_up[j] = up == f64::INFINITY;
        self.lo[j] = if self.art_lo[j] { -ART_BOUND } else { lo };
        self.up[j] = if self.art_up[j] { ART_BOUND } else { up };
    }

    /// Replaces the column bounds (instance units). The basis is kept.
    pub fn set_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        for j in 0..self.n {
            let c = self.col_scale[j];
            self.set_var_bounds(j, lower[j] / c, upper[j] / c);
        }
        if self.factored {
            for j in 0..self.n + self.m {
                self.place_nonbasic(j);
            }
        }
    }

    fn place_nonbasic(&mut self, j: usize) {
        match self.pos[j] {
            Pos::Basic => {}
            Pos::Lower => self.x[j] = self.lo[j],
            Pos::Upper => self.x[j] = self.up[j],
        }
    }

    pub fn basis(&self) -> Option<Basis> {
        self.factored.then(|| Basis {
            head: self.head.clone(),
            pos: self.pos.clone(),
        })
    }

    /// The current basis together with its inverse.
    pub fn factor(&self) -> Option<Factor> {
        self.factored.then(|| Factor {
            basis: Basis {
                head: self.head.clone(),
                pos: self.pos.clone(),
            },
            binv: self.binv.clone(),
        })
    }

    /// Reloads a [`Factor`] taken from this LP without refactoring.
    pub fn load_factor(&mut self, f: &Factor) {
        self.head.clone_from(&f.basis.head);
        self.pos.clone_from(&f.basis.pos);
        self.binv.clone_from(&f.binv);
        self.factored = true;
        for j in 0..self.n + self.m {
            self.place_nonbasic(j);
        }
        self.recompute_primal();
        self.recompute_duals();
    }

    /// Reloads a snapshot taken from this LP, refactoring the inverse.
    pub fn load_basis(&mut self, basis: &Basis) {
        self.head = basis.head.clone();
        self.pos = basis.pos.clone();
        for j in 0..self.n + self.m {
            self.place_nonbasic(j);
        }
        if self.refactor() {
            self.factored = true;
            self.recompute_primal();
            self.recompute_duals();
        } else {
            self.cold_start();
        }
    }

    fn column(&self, j: usize) -> ColIter<'_> {
        if j < self.n {
            ColIter::Struct(self.cols[j].iter())
        } else {
            ColIter::Slack(Some(j - self.n))
        }
    }

    fn dot_col(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.n {
            self.cols[j].iter().map(|&(i, a)| a * v[i]).sum()
        } else {
            -v[j - self.n]
        }
    }

    fn cold_start(&mut self) {
        let (n, m) = (self.n, self.m);
        self.head = (n..n + m).collect();
        self.pos = vec![Pos::Basic; n + m];
        for j in 0..n {
            self.pos[j] = if self.cost[j] >= 0.0 {
                Pos::Lower
            } else {
                Pos::Upper
            };
            self.place_nonbasic(j);
        }
        self.binv = vec![0.0; m * m];
        for i in 0..m {
            self.binv[i * m + i] = -1.0;
        }
        self.factored = true;
        self.recompute_primal();
        self.recompute_duals();
    }

    /// Inverts the current basis. False when singular.
    ///
    /// Basic slacks cover their own rows, so with rows and columns permuted
    /// the basis is `[[-I, T1], [0, T2]]` and only the structural block `T2`
    /// needs a Gauss-Jordan pass: the inverse is `[[-I, T1 T2^-1], [0, T2^-1]]`.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        // slack_pos[i]: head position of row i's slack, if basic
        let mut slack_pos = vec![usize::MAX; m];
        let mut structs = Vec::new();
        for (k, &j) in self.head.iter().enumerate() {
            if j >= self.n {
                slack_pos[j - self.n] = k;
            } else {
                structs.push(k);
            }
        }
        let t_rows: Vec<usize> = (0..m).filter(|&i| slack_pos[i] == usize::MAX).collect();
        let kk = structs.len();
        if t_rows.len() != kk {
            return false;
        }
        let mut row_of = vec![usize::MAX; m];
        for (a, &i) in t_rows.iter().enumerate() {
            row_of[i] = a;
        }
        let mut t2 = vec![0.0; kk * kk];
        for (b, &k) in structs.iter().enumerate() {
            for &(i, v) in &self.cols[self.head[k]] {
                if row_of[i] != usize::MAX {
                    t2[row_of[i] * kk + b] = v;
                }
            }
        }
        let Some(inv) = gauss_jordan(&mut t2, kk) else {
            return false;
        };

        self.binv.clear();
        self.binv.resize(m * m, 0.0);
        for (b, &k) in structs.iter().enumerate() {
            let dst = &mut self.binv[k * m..(k + 1) * m];
            for (a, &i) in t_rows.iter().enumerate() {
                dst[i] = inv[b * kk + a];
            }
        }
        for (i, &k) in slack_pos.iter().enumerate() {
            if k != usize::MAX {
                self.binv[k * m + i] = -1.0;
            }
        }
        for (b, &k) in structs.iter().enumerate() {
            for &(i, v) in &self.cols[self.head[k]] {
                let s = slack_pos[i];
                if s == usize::MAX || v == 0.0 {
                    continue;
                }
                let src = &inv[b * kk..(b + 1) * kk];
                let dst = &mut self.binv[s * m..(s + 1) * m];
                for (a, &r) in t_rows.iter().enumerate() {
                    dst[r] += v * src[a];
                }
            }
        }
        true
    }

    fn recompute_primal(&mut self) {
        let m = self.m;
        let mut w = vec![0.0; m];
        for j in 0..self.n + self.m {
            if self.pos[j] == Pos::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            for (i, a) in self.column(j) {
                w[i] += a * xj;
            }
        }
        for k in 0..m {
            let row = &self.binv[k * m..(k + 1) * m];
            let v: f64 = row.iter().zip(&w).map(|(b, w)| b * w).sum();
            self.x[self.head[k]] = -v;
        }
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for k in 0..m {
            let cb = self.cost[self.head[k]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[k * m..(k + 1) * m];
            for (yi, b) in y.iter_mut().zip(row) {
                *yi += cb * b;
            }
        }
        y
    }

    fn recompute_duals(&mut self) {
        let y = self.duals();
        for j in 0..self.n + self.m {
            self.d[j] = if self.pos[j] == Pos::Basic {
                0.0
            } else {
                self.cost[j] - self.dot_col(j, &y)
            };
        }
    }

    /// Moves boxed nonbasics whose reduced cost has the wrong sign to the
    /// other bound. Returns whether anything moved.
    fn restore_dual_feasibility(&mut self) -> bool {
        let mut moved = false;
        for j in 0..self.n + self.m {
            let target = match self.pos[j] {
                Pos::Lower if self.d[j] < -DUAL_TOL => Pos::Upper,
                Pos::Upper if self.d[j] > DUAL_TOL => Pos::Lower,
                _ => continue,
            };
            if self.lo[j] == self.up[j] {
                continue;
            }
            self.pos[j] = target;
            self.place_nonbasic(j);
            moved = true;
        }
        moved
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        if x < self.lo[j] - PRIMAL_TOL * self.lo[j].abs().max(1.0) {
            self.lo[j] - x
        } else if x > self.up[j] + PRIMAL_TOL * self.up[j].abs().max(1.0) {
            x - self.up[j]
        } else {
            0.0
        }
    }

    fn residual(&self) -> f64 {
        let mut act = vec![0.0; self.m];
        let mut mag = vec![0.0f64; self.m];
        for j in 0..self.n + self.m {
            let xj = self.x[j];
            for (i, a) in self.column(j) {
                act[i] += a * xj;
                mag[i] = mag[i].max((a * xj).abs());
            }
        }
        act.iter()
            .zip(&mag)
            .map(|(a, m)| a.abs() / m.max(1.0))
            .fold(0.0, f64::max)
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for (i, a) in self.column(j) {
            for (k, o) in out.iter_mut().enumerate() {
                *o += self.binv[k * m + i] * a;
            }
        }
        out
    }

    fn pivot(&mut self, r: usize, q: usize, col: &[f64]) {
        let m = self.m;
        let piv = col[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (prow, after) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        for (k, chunk) in before.chunks_mut(m).enumerate() {
            let f = col[k];
            if f != 0.0 {
                for (v, p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        for (k, chunk) in after.chunks_mut(m).enumerate() {
            let f = col[r + 1 + k];
            if f != 0.0 {
                for (v, p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        self.head[r] = q;
    }

    /// Solves from the current basis (or the slack basis on first use).
    pub fn solve(&mut self) -> Result<LpSolution, SolverError> {
        if !self.factored {
            self.cold_start();
        }
        self.recompute_primal();
        if self.restore_dual_feasibility() {
            self.recompute_primal();
        }
        let mut iters = 0usize;
        let mut since_check = 0usize;
        let mut fresh = true;
        let mut degenerate_run = 0usize;
        let mut alpha = vec![0.0; self.n + self.m];
        loop {
            if iters >= self.max_iter {
                return Err(SolverError::IterationLimit(iters));
            }
            if since_check >= RESIDUAL_CHECK_EVERY {
                since_check = 0;
                if self.residual() > 1e-9 {
                    self.refresh()?;
                    fresh = true;
                }
            }
            let bland = degenerate_run >= DEGENERATE_BEFORE_BLAND;

            // leaving row
            let mut leave: Option<(usize, f64)> = None;
            for k in 0..self.m {
                let inf = self.infeasibility(self.head[k]);
                if inf <= 0.0 {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((r, best)) => {
                        if bland {
                            self.head[k] < self.head[r]
                        } else {
                            inf > best
                        }
                    }
                };
                if better {
                    leave = Some((k, inf));
                }
            }
            let Some((r, _)) = leave else {
                if fresh {
                    return Ok(self.finish(LpStatus::Optimal, iters));
                }
                // Clear drift in x and d; refactor only if the inverse itself drifted.
                self.recompute_primal();
                self.recompute_duals();
                if self.restore_dual_feasibility() {
                    self.recompute_primal();
                }
                if self.residual() > 1e-9 {
                    self.refresh()?;
                }
                since_check = 0;
                fresh = true;
                continue;
            };
            let p = self.head[r];
            let to_lower = self.x[p] < self.lo[p];

            // pivot row
            let rho = self.binv[r * self.m..(r + 1) * self.m].to_vec();
            for j in 0..self.n + self.m {
                alpha[j] = if self.pos[j] == Pos::Basic || self.lo[j] == self.up[j] {
                    0.0
                } else {
                    self.dot_col(j, &rho)
                };
            }
            let eligible = |j: usize, a: f64, pos: Pos| -> bool {
                if a.abs() <= PIVOT_TOL {
                    return false;
                }
                match (pos, to_lower) {
                    (Pos::Lower, true) => a < 0.0,
                    (Pos::Upper, true) => a > 0.0,
                    (Pos::Lower, false) => a > 0.0,
                    (Pos::Upper, false) => a < 0.0,
                    (Pos::Basic, _) => {
                        let _ = j;
                        false
                    }
                }
            };
            let slack_of = |d: f64, pos: Pos| -> f64 {
                match pos {
                    Pos::Lower => d.max(0.0),
                    Pos::Upper => (-d).max(0.0),
                    Pos::Basic => 0.0,
                }
            };
            let mut t_max = f64::INFINITY;
            for j in 0..self.n + self.m {
                let a = alpha[j];
                if a == 0.0 || !eligible(j, a, self.pos[j]) {
                    continue;
                }
                let bound = if bland {
                    slack_of(self.d[j], self.pos[j]) / a.abs()
                } else {
                    (slack_of(self.d[j], self.pos[j]) + DUAL_TOL) / a.abs()
                };
                t_max = t_max.min(bound);
            }
            let mut enter: Option<usize> = None;
            if t_max.is_finite() {
                let mut best = 0.0;
                for j in 0..self.n + self.m {
                    let a = alpha[j];
                    if a == 0.0 || !eligible(j, a, self.pos[j]) {
                        continue;
                    }
                    let ratio = slack_of(self.d[j], self.pos[j]) / a.abs();
                    if bland {
                        if ratio <= t_max + 1e-12 {
                            enter = Some(j);
                            break;
                        }
                    } else if ratio <= t_max && a.abs() > best {
                        best = a.abs();
                        enter = Some(j);
                    }
                }
            }
            let Some(q) = enter else {
                if fresh {
                    return Ok(self.finish(LpStatus::Infeasible, iters));
                }
                self.refresh()?;
                fresh = true;
                continue;
            };

            let col = self.ftran(q);
            let aq = alpha[q];
            if (col[r] - aq).abs() > 1e-7 * (1.0 + aq.abs()) || col[r].abs() <= PIVOT_TOL {
                if fresh {
                    return Err(SolverError::NumericalFailure(format!(
                        "pivot mismatch {} vs {} after refactor",
                        col[r], aq
                    )));
                }
                self.refresh()?;
                fresh = true;
                continue;
            }

            // duals
            let theta_d = self.d[q] / col[r];
            if theta_d.abs() < 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for j in 0..self.n + self.m {
                if alpha[j] != 0.0 {
                    self.d[j] -= theta_d * alpha[j];
                }
            }
            self.d[q] = 0.0;
            self.d[p] = -theta_d;

            // primal
            let beta = if to_lower { self.lo[p] } else { self.up[p] };
            let delta = (self.x[p] - beta) / col[r];
            self.x[q] += delta;
            for k in 0..self.m {
                if col[k] != 0.0 {
                    let j = self.head[k];
                    self.x[j] -= col[k] * delta;
                }
            }
            self.x[p] = beta;
            self.pos[p] = if to_lower { Pos::Lower } else { Pos::Upper };
            self.pos[q] = Pos::Basic;
            self.pivot(r, q, &col);

            iters += 1;
            since_check += 1;
            fresh = false;
        }
    }

    /// Refactor and recompute everything from the current basis.
    fn refresh(&mut self) -> Result<(), SolverError> {
        if !self.refactor() {
            self.cold_start();
        }
        self.recompute_primal();
        self.recompute_duals();
        if self.restore_dual_feasibility() {
            self.recompute_primal();
        }
        Ok(())
    }

    fn finish(&self, status: LpStatus, iterations: usize) -> LpSolution {
        let x: Vec<f64> = (0..self.n).map(|j| self.x[j] * self.col_scale[j]).collect();
        let y = self.duals();
        let row_duals: Vec<f64> = (0..self.m).map(|i| y[i] * self.row_scale[i]).collect();
        let reduced_costs: Vec<f64> = (0..self.n).map(|j| self.d[j] / self.col_scale[j]).collect();
        let dual_residual = (0..self.n + self.m)
            .map(|j| match self.pos[j] {
                Pos::Lower if self.lo[j] != self.up[j] => (-self.d[j]).max(0.0),
                Pos::Upper if self.lo[j] != self.up[j] => self.d[j].max(0.0),
                _ => 0.0,
            })
            .fold(0.0, f64::max);
        let at_art = (0..self.n + self.m).any(|j| {
            self.pos[j] != Pos::Basic
                && ((self.art_lo[j] && self.pos[j] == Pos::Lower)
                    || (self.art_up[j] && self.pos[j] == Pos::Upper))
        });
        let status = if status == LpStatus::Optimal && at_art {
            LpStatus::Unbounded
        } else {
            status
        };
        let objective = match status {
            LpStatus::Optimal => self.unscaled.objective_value(&x),
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
        };
        LpSolution {
            status,
            primal_residual: self.unscaled_bounds_violation(&x),
            x,
            objective,
            row_duals,
            reduced_costs,
            iterations,
            dual_residual,
        }
    }

    fn unscaled_bounds_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .unscaled
            .rows()
            .iter()
            .map(|r| r.scaled_violation(x))
            .fold(0.0, f64::max);
        let bounds = (0..self.n)
            .map(|j| {
                let c = self.col_scale[j];
                let (lo, up) = (self.lo[j] * c, self.up[j] * c);
                let scale = lo.abs().max(up.abs()).max(1.0);
                (lo - x[j]).max(x[j] - up).max(0.0) / scale
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }
}

enum ColIter<'a> {
    Struct(std::slice::Iter<'a, (usize, f64)>),
    Slack(Option<usize>),
}

impl Iterator for ColIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColIter::Struct(it) => it.next().copied(),
            ColIter::Slack(i) => i.take().map(|i| (i, -1.0)),
        }
    }
}

/// Solves the continuous relaxation of `milp` from scratch.
pub fn simplex_solve(milp: &MilpInstance) -> Result<LpSolution, SolverError> {
    PreparedLp::new(milp).solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{Integrality, VarRole};

    fn var(m: &mut MilpInstance, name: &str, lo: f64, hi: f64, c: f64) -> usize {
        m.add_var(name, lo, hi, Integrality::Continuous, VarRole::Other, c)
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut m = MilpInstance::new();
        let x = var(&mut m, "x", 0.0, f64::INFINITY, -3.0);
        let y = var(&mut m, "y", 0.0, f64::INFINITY, -5.0);
        m.add_row("a", vec![(x, 1.0)], Relation::Le, 4.0);
        m.add_row("b", vec![(y, 2.0)], Relation::Le, 12.0);
        m.add_row("c", vec![(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
        let s = simplex_solve(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        assert!(s.primal_residual < 1e-12);
        assert!(s.dual_residual < 1e-9);
        // strong duality: b . y = objective
        let by: f64 = [4.0, 12.0, 18.0].iter().zip(&s.row_duals).map(|(b, y)| b * y).sum();
        assert!((by - s.objective).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y st x + y = 10, x >= 3, x <= 6 -> x = 6, y = 4, 14
        let mut m = MilpInstance::new();
        let x = var(&mut m, "x", 0.0, 100.0, 1.0);
        let y = var(&mut m, "y", 0.0, 100.0, 2.0);
        m.add_row("sum", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 10.0);
        m.add_row("lo", vec![(x, 1.0)], Relation::Ge, 3.0);
        m.add_row("hi", vec![(x, 1.0)], Relation::Le, 6.0);
        let s = simplex_solve(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 14.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut m = MilpInstance::new();
        let x = var(&mut m, "x", 0.0, 5.0, 1.0);
        m.add_row("r", vec![(x, 1.0)], Relation::Ge, 6.0);
        assert_eq!(simplex_solve(&m).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut m = MilpInstance::new();
        let x = var(&mut m, "x", 0.0, f64::INFINITY, -1.0);
        let y = var(&mut m, "y", 0.0, f64::INFINITY, 0.0);
        m.add_row("r", vec![(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        assert_eq!(simplex_solve(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn warm_resolve_after_bound_change() {
        let mut m = MilpInstance::new();
        let x = var(&mut m, "x", 0.0, 10.0, -1.0);
        let y = var(&mut m, "y", 0.0, 10.0, -1.0);
        m.add_row("r", vec![(x, 1.0), (y, 2.0)], Relation::Le, 14.0);
        let mut lp = PreparedLp::new(&m);
        let s = lp.solve().unwrap();
        assert!((s.objective + 12.0).abs() < 1e-9);
        lp.set_bounds(&[0.0, 0.0], &[3.0, 10.0]);
        let s = lp.solve().unwrap();
        // x = 3, y = 5.5
        assert!((s.objective + 8.5).abs() < 1e-9);
        let basis = lp.basis().unwrap();
        lp.set_bounds(&[0.0, 0.0], &[10.0, 10.0]);
        lp.load_basis(&basis);
        let s = lp.solve().unwrap();
        assert!((s.objective + 12.0).abs() < 1e-9);
    }

    #[test]
    fn badly_scaled_rows() {
        // min 300 a + 0.001 x st x <= 160000 a, x = 50000, a in [0, 1]
        let mut m = MilpInstance::new();
        let x = var(&mut m, "x", 0.0, 160000.0, 0.001);
        let a = var(&mut m, "a", 0.0, 1.0, 300.0);
        m.add_row("cap", vec![(x, 1.0), (a, -160000.0)], Relation::Le, 0.0);
        m.add_row("dem", vec![(x, 1.0)], Relation::Eq, 50000.0);
        let s = simplex_solve(&m).unwrap();
        assert!((s.objective - (300.0 * 50000.0 / 160000.0 + 50.0)).abs() < 1e-9);
    }

    #[test]
    fn relaxation_of_one_cloud_task() {
        use crate::milp::{build_milp, BuildOptions};
        use crate::model::{
            build_topology, make_tasks, ModelConfig, Scenario, Strategy, Variant, VfId,
            WorkloadMode,
        };
        let topo = build_topology(&ModelConfig::default(), Variant::CcOnly).unwrap();
        let tasks = make_tasks(1, WorkloadMode::Fixed(500.0), 0, 0.01, VfId(1)).unwrap();
        let sc = Scenario::new(topo, tasks, Strategy::Single, Variant::CcOnly, VfId(1)).unwrap();
        let m = build_milp(&sc, BuildOptions::default()).unwrap();
        let s = simplex_solve(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        let a = s.x[m.column("a[cc1]").unwrap()];
        assert!((a - 500.0 / 160000.0).abs() < 1e-12, "{a}");
        assert!(s.x[m.column("a[cc2]").unwrap()].abs() < 1e-12);
        assert!((s.x[m.column("x[1][cc1]").unwrap()] - 500.0).abs() < 1e-9);
    }
}
