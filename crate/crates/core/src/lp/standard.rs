use super::{LpProblem, Sense, VarKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
enum VarMap {
    Column(usize),
    /// value = base + sum of the segment columns `start..start+len`
    Segments { base: f64, start: usize, len: usize },
}

/// Column-oriented form `row_lower <= A x <= row_upper`, `col_lower <= x <= col_upper`.
///
/// Piecewise-linear terms are expanded into one bounded column per segment
/// that carries the slope as its cost; convexity guarantees that cheaper
/// segments fill first, so no ordering constraints are needed.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub col_cost: Vec<f64>,
    pub col_integer: Vec<bool>,
    /// Sparse columns: (row, coefficient).
    pub cols: Vec<Vec<(usize, f64)>>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    pub row_lazy: Vec<bool>,
    pub offset: f64,
    row_names: Vec<String>,
    col_names: Vec<String>,
    var_map: Vec<VarMap>,
}

impl StandardForm {
    pub fn compile(problem: &LpProblem) -> Result<Self> {
        problem.validate()?;
        let mut pwl_of = vec![None; problem.variables.len()];
        for (k, p) in problem.piecewise.iter().enumerate() {
            pwl_of[p.var] = Some(k);
        }

        let mut form = StandardForm {
            col_lower: Vec::new(),
            col_upper: Vec::new(),
            col_cost: Vec::new(),
            col_integer: Vec::new(),
            cols: Vec::new(),
            row_lower: Vec::with_capacity(problem.constraints.len()),
            row_upper: Vec::with_capacity(problem.constraints.len()),
            row_lazy: Vec::with_capacity(problem.constraints.len()),
            offset: problem.objective_offset,
            row_names: Vec::with_capacity(problem.constraints.len()),
            col_names: Vec::new(),
            var_map: Vec::with_capacity(problem.variables.len()),
        };

        for (i, var) in problem.variables.iter().enumerate() {
            match pwl_of[i] {
                None => {
                    form.var_map.push(VarMap::Column(form.col_cost.len()));
                    form.push_col(var.lower, var.upper, var.cost, var.kind == VarKind::Binary, var.name.clone());
                }
                Some(k) => {
                    let p = &problem.piecewise[k];
                    let base = p.breakpoints[0];
                    form.offset += p.base_value + var.cost * base;
                    let start = form.col_cost.len();
                    for (s, slope) in p.slopes.iter().enumerate() {
                        let width = p.breakpoints[s + 1] - p.breakpoints[s];
                        form.push_col(0.0, width, slope + var.cost, false, format!("{}#{s}", var.name));
                    }
                    form.var_map.push(VarMap::Segments {
                        base,
                        start,
                        len: p.slopes.len(),
                    });
                }
            }
        }

        for (r, c) in problem.constraints.iter().enumerate() {
            let mut shift = 0.0;
            for &(v, a) in &c.terms {
                if a == 0.0 {
                    continue;
                }
                match form.var_map[v] {
                    VarMap::Column(col) => form.cols[col].push((r, a)),
                    VarMap::Segments { base, start, len } => {
                        shift += a * base;
                        for col in start..start + len {
                            form.cols[col].push((r, a));
                        }
                    }
                }
            }
            let rhs = c.rhs - shift;
            let (lo, hi) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, rhs),
                Sense::Ge => (rhs, f64::INFINITY),
                Sense::Eq => (rhs, rhs),
            };
            form.row_lower.push(lo);
            form.row_upper.push(hi);
            form.row_lazy.push(c.lazy);
            form.row_names.push(c.name.clone());
        }
        // merge duplicate entries (a row listing the same variable twice)
        for col in &mut form.cols {
            col.sort_by_key(|e| e.0);
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
        }
        Ok(form)
    }

    fn push_col(&mut self, lo: f64, hi: f64, cost: f64, integer: bool, name: String) {
        self.col_lower.push(lo);
        self.col_upper.push(hi);
        self.col_cost.push(cost);
        self.col_integer.push(integer);
        self.cols.push(Vec::new());
        self.col_names.push(name);
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn n_rows(&self) -> usize {
        self.row_lower.len()
    }

    pub fn row_name(&self, r: usize) -> &str {
        &self.row_names[r]
    }

    pub fn col_name(&self, c: usize) -> &str {
        &self.col_names[c]
    }

    /// Column holding declared variable `var`, unless it was expanded into segments.
    pub fn column_of(&self, var: usize) -> Option<usize> {
        match self.var_map[var] {
            VarMap::Column(c) => Some(c),
            VarMap::Segments { .. } => None,
        }
    }

    /// Maps standard-form column values back to the declared variables.
    pub fn recover(&self, columns: &[f64]) -> Vec<f64> {
        self.var_map
            .iter()
            .map(|m| match *m {
                VarMap::Column(c) => columns[c],
                VarMap::Segments { base, start, len } => base + columns[start..start + len].iter().sum::<f64>(),
            })
            .collect()
    }

    pub fn objective(&self, columns: &[f64]) -> f64 {
        self.offset + self.col_cost.iter().zip(columns).map(|(c, x)| c * x).sum::<f64>()
    }

    /// Row activities `A x` for every row, active or lazy.
    pub fn activities(&self, columns: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.n_rows()];
        for (col, &x) in self.cols.iter().zip(columns) {
            if x != 0.0 {
                for &(r, a) in col {
                    act[r] += a * x;
                }
            }
        }
        act
    }

    /// Fails on empty boxes before any pivoting happens.
    pub(crate) fn check_bounds(&self, lower: &[f64], upper: &[f64], tol: f64) -> Result<()> {
        for c in 0..self.n_cols() {
            if lower[c] > upper[c] + tol {
                return Err(Error::Infeasible(format!(
                    "variable '{}' has empty bounds [{}, {}]",
                    self.col_names[c], lower[c], upper[c]
                )));
            }
        }
        for r in 0..self.n_rows() {
            if self.row_lower[r] > self.row_upper[r] + tol {
                return Err(Error::Infeasible(format!(
                    "constraint '{}' has empty range [{}, {}]",
                    self.row_names[r], self.row_lower[r], self.row_upper[r]
                )));
            }
        }
        Ok(())
    }
}
