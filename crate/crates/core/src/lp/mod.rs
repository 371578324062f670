//! Linear and mixed-binary programming.
//!
//! [`LpProblem`] is a small modelling layer: bounded variables, sparse rows,
//! a linear objective and separable convex piecewise-linear cost terms.
//! Problems are compiled to a column-oriented standard form and solved by a
//! bounded primal revised simplex ([`DenseSimplex`]) under a best-bound
//! branch-and-bound driver for the binary variables.
//!
//! Rows can be flagged lazy. Lazy rows start outside the working problem and
//! are added only when the current optimum violates them, which keeps the
//! basis small for families such as voltage limits where few rows bind.

mod branch;
mod format;
mod simplex;
mod standard;

pub use branch::{solve_with, BranchStats};
pub use format::write_lp;
pub use simplex::{DenseSimplex, WarmStart};
pub use standard::StandardForm;

use crate::error::{Error, Result};

pub type VarId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub lazy: bool,
}

/// Convex piecewise-linear cost on one variable.
///
/// The variable ranges over `[breakpoints[0], breakpoints[K]]`; the cost is
/// `base_value` at the first breakpoint and grows with `slopes[k]` across
/// segment `k`. Slopes must be non-decreasing.
#[derive(Debug, Clone)]
pub struct PiecewiseTerm {
    pub var: VarId,
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<f64>,
    pub base_value: f64,
}

impl PiecewiseTerm {
    pub fn value_at(&self, x: f64) -> f64 {
        let mut acc = self.base_value;
        for (k, slope) in self.slopes.iter().enumerate() {
            let lo = self.breakpoints[k];
            let hi = self.breakpoints[k + 1];
            if x <= lo {
                break;
            }
            acc += slope * (x.min(hi) - lo);
        }
        acc
    }
}

#[derive(Debug, Clone, Default)]
pub struct LpProblem {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub piecewise: Vec<PiecewiseTerm>,
    pub objective_offset: f64,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            cost,
            kind: VarKind::Continuous,
        });
        self.variables.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            cost,
            kind: VarKind::Binary,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            sense,
            rhs,
            lazy: false,
        });
        self.constraints.len() - 1
    }

    pub fn add_lazy_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        let k = self.add_constraint(name, terms, sense, rhs);
        self.constraints[k].lazy = true;
        k
    }

    /// Attaches a convex piecewise-linear cost; the variable's bounds are
    /// reset to the breakpoint range.
    pub fn add_piecewise(&mut self, var: VarId, breakpoints: Vec<f64>, slopes: Vec<f64>, base_value: f64) {
        let v = &mut self.variables[var];
        v.lower = breakpoints[0];
        v.upper = *breakpoints.last().expect("non-empty breakpoints");
        self.piecewise.push(PiecewiseTerm {
            var,
            breakpoints,
            slopes,
            base_value,
        });
    }

    /// Structural checks: references, piecewise shape and convexity.
    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for c in &self.constraints {
            if let Some(&(v, _)) = c.terms.iter().find(|(v, _)| *v >= n) {
                return Err(Error::Model(format!(
                    "constraint '{}' references undeclared variable {v}",
                    c.name
                )));
            }
        }
        let mut has_pwl = vec![false; n];
        for p in &self.piecewise {
            if p.var >= n {
                return Err(Error::Model(format!("piecewise term on undeclared variable {}", p.var)));
            }
            let name = &self.variables[p.var].name;
            if std::mem::replace(&mut has_pwl[p.var], true) {
                return Err(Error::Model(format!("variable '{name}' has two piecewise terms")));
            }
            if self.variables[p.var].kind != VarKind::Continuous {
                return Err(Error::Model(format!("piecewise term on binary '{name}'")));
            }
            if p.slopes.is_empty() || p.breakpoints.len() != p.slopes.len() + 1 {
                return Err(Error::Model(format!("piecewise term on '{name}' is malformed")));
            }
            if p.breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Model(format!(
                    "piecewise breakpoints on '{name}' are not increasing"
                )));
            }
            if p.slopes.windows(2).any(|w| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0)) {
                return Err(Error::Model(format!(
                    "piecewise slopes on '{name}' are not monotone (non-convex)"
                )));
            }
        }
        Ok(())
    }

    /// Objective value at `x`, with piecewise terms evaluated exactly.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        let linear: f64 = self.variables.iter().zip(x).map(|(v, xi)| v.cost * xi).sum();
        let pwl: f64 = self.piecewise.iter().map(|p| p.value_at(x[p.var])).sum();
        self.objective_offset + linear + pwl
    }

    /// First constraint or bound violated by more than `tol` at `x`.
    pub fn first_violation(&self, x: &[f64], tol: f64) -> Option<String> {
        for (v, xi) in self.variables.iter().zip(x) {
            if *xi < v.lower - tol || *xi > v.upper + tol {
                return Some(format!(
                    "variable '{}' = {xi} outside [{}, {}]",
                    v.name, v.lower, v.upper
                ));
            }
            if v.kind == VarKind::Binary && (xi - xi.round()).abs() > tol {
                return Some(format!("binary '{}' = {xi} is fractional", v.name));
            }
        }
        for c in &self.constraints {
            let act: f64 = c.terms.iter().map(|&(v, a)| a * x[v]).sum();
            let scale = tol * (1.0 + c.rhs.abs());
            let bad = match c.sense {
                Sense::Le => act > c.rhs + scale,
                Sense::Ge => act < c.rhs - scale,
                Sense::Eq => (act - c.rhs).abs() > scale,
            };
            if bad {
                return Some(format!(
                    "constraint '{}' activity {act} violates {:?} {}",
                    c.name, c.sense, c.rhs
                ));
            }
        }
        None
    }

    pub fn variable_index(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name)
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Relative objective gap at which branch-and-bound stops.
    pub mip_gap: f64,
    pub node_limit: usize,
    /// Treat binary variables as continuous in [0, 1].
    pub relax_integrality: bool,
    /// Simplex iteration cap per relaxation; 0 picks a size-dependent default.
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            mip_gap: 1e-6,
            node_limit: 100_000,
            relax_integrality: false,
            max_iterations: 0,
        }
    }
}

/// Optimal point of an [`LpProblem`].
#[derive(Debug, Clone)]
pub struct LpSolution {
    /// Values of the declared variables.
    pub values: Vec<f64>,
    pub objective: f64,
    pub stats: BranchStats,
    /// Basis of the final relaxation, reusable for a structurally identical problem.
    pub warm_start: Option<WarmStart>,
}

/// Solves with the bundled simplex backend.
pub fn solve(problem: &LpProblem, options: &SolveOptions) -> Result<LpSolution> {
    solve_with(&DenseSimplex, problem, options, None)
}

/// Interface for relaxation solvers usable by the branch-and-bound driver.
pub trait LpBackend: Sync {
    /// Solves the continuous relaxation of `form` with column bounds
    /// `lower`/`upper` (which override the form's own bounds).
    fn solve_relaxation(
        &self,
        form: &StandardForm,
        lower: &[f64],
        upper: &[f64],
        warm: Option<&WarmStart>,
        options: &SolveOptions,
    ) -> Result<Relaxation>;
}

/// Outcome of a continuous relaxation.
#[derive(Debug, Clone)]
pub struct Relaxation {
    /// Column values in standard-form space.
    pub columns: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub warm_start: WarmStart,
}

#[cfg(test)]
mod tests;
