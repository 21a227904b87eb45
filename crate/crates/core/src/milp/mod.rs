//! MILP instances for the placement problem.
//!
//! [`build_milp`] produces the per-task formulation: continuous splits
//! `x[k][s]`, assignment binaries `d[k][s]` (single allocation only) and
//! activation binaries `a[s]`. [`build_aggregated_milp`] merges tasks with
//! identical demand into groups and is what the production solve path uses;
//! both encode the same optimum.
//!
//! [`evaluate_power`] recomputes the objective of an allocation straight
//! from the scenario and never looks at an instance.

mod build;
mod lp_format;
mod power;

use std::collections::BTreeMap;

use serde::Serialize;

pub use build::{
    build_aggregated_milp, build_milp, structural_check, symmetry_groups, BuildError,
    BuildOptions, LoadUnit, MilpLayout, TaskGroup,
};
pub use lp_format::to_lp_format;
pub use power::{evaluate_power, PowerBreakdown, PowerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Integrality {
    Continuous,
    Binary,
    Integer,
}

/// What a column means to the branching rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum VarRole {
    Activation,
    Assignment,
    Count,
    Load,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integrality: Integrality,
    pub role: VarRole,
}

impl Variable {
    pub fn is_integer(&self) -> bool {
        self.integrality != Integrality::Continuous
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// Sparse constraint row `coeffs . x (relation) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` breaks this row, scaled by the row's magnitude.
    pub fn scaled_violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        let scale = self
            .coeffs
            .iter()
            .map(|&(j, a)| (a * x[j]).abs())
            .fold(self.rhs.abs(), f64::max)
            .max(1.0);
        let raw = match self.relation {
            Relation::Le => lhs - self.rhs,
            Relation::Ge => self.rhs - lhs,
            Relation::Eq => (lhs - self.rhs).abs(),
        };
        raw.max(0.0) / scale
    }
}

/// A mixed-integer program `min c.x` over bounded columns.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MilpInstance {
    variables: Vec<Variable>,
    rows: Vec<Row>,
    objective: Vec<f64>,
    var_index: BTreeMap<String, usize>,
    #[serde(skip)]
    layout: Option<MilpLayout>,
}

impl MilpInstance {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a column. Panics on a duplicate name, which is always a builder bug.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integrality: Integrality,
        role: VarRole,
        cost: f64,
    ) -> usize {
        let name = name.into();
        let idx = self.variables.len();
        let prev = self.var_index.insert(name.clone(), idx);
        assert!(prev.is_none(), "duplicate column {name}");
        let (lower, upper) = match integrality {
            Integrality::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        self.variables.push(Variable {
            name,
            lower,
            upper,
            integrality,
            role,
        });
        self.objective.push(cost);
        idx
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let coeffs = coeffs.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn set_cost(&mut self, col: usize, cost: f64) {
        self.objective[col] = cost;
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.variables[col].lower = lower;
        self.variables[col].upper = upper;
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    pub fn row(&self, name: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn layout(&self) -> Option<&MilpLayout> {
        self.layout.as_ref()
    }

    pub(crate) fn set_layout(&mut self, layout: MilpLayout) {
        self.layout = Some(layout);
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest scaled row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .rows
            .iter()
            .map(|r| r.scaled_violation(x))
            .fold(0.0, f64::max);
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xv)| {
                let scale = v.lower.abs().max(v.upper.abs()).max(1.0);
                ((v.lower - xv).max(xv - v.upper).max(0.0)) / scale
            })
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn is_integral(&self, x: &[f64], tol: f64) -> bool {
        self.variables
            .iter()
            .zip(x)
            .all(|(v, &xv)| !v.is_integer() || (xv - xv.round()).abs() <= tol)
    }

    /// Same instance with every integrality requirement dropped.
    pub fn relaxed(&self) -> MilpInstance {
        let mut lp = self.clone();
        for v in &mut lp.variables {
            v.integrality = Integrality::Continuous;
        }
        lp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_bounds_are_clamped() {
        let mut m = MilpInstance::new();
        let j = m.add_var("b", -3.0, 7.0, Integrality::Binary, VarRole::Other, 0.0);
        assert_eq!(m.variables()[j].lower, 0.0);
        assert_eq!(m.variables()[j].upper, 1.0);
    }

    #[test]
    fn violation_is_scaled() {
        let mut m = MilpInstance::new();
        let x = m.add_var("x", 0.0, 1e6, Integrality::Continuous, VarRole::Other, 1.0);
        m.add_row("r", vec![(x, 1.0)], Relation::Le, 1000.0);
        assert_eq!(m.max_violation(&[1000.0]), 0.0);
        assert!((m.max_violation(&[1001.0]) - 1.0 / 1001.0).abs() < 1e-12);
    }
}
