use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{LpBackend, LpProblem, LpSolution, Relaxation, SolveOptions, StandardForm, WarmStart};
use crate::error::{Error, Result};

/// Search effort of a solve.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BranchStats {
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Lowest bound over the open nodes when the search stopped.
    pub best_bound: f64,
    /// Relative gap between the incumbent and `best_bound`.
    pub gap: f64,
}

struct Node {
    bound: f64,
    depth: usize,
    fixings: Vec<(usize, f64)>,
    warm: WarmStart,
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
    // max-heap: lowest bound first, deeper first on ties
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
    }
}

const INT_TOL: f64 = 1e-6;

/// Solves `problem` with `backend` for the relaxations, branching on binaries.
pub fn solve_with<B: LpBackend>(
    backend: &B,
    problem: &LpProblem,
    options: &SolveOptions,
    warm: Option<&WarmStart>,
) -> Result<LpSolution> {
    let form = StandardForm::compile(problem)?;
    let int_cols: Vec<usize> = if options.relax_integrality {
        Vec::new()
    } else {
        (0..form.n_cols()).filter(|&c| form.col_integer[c]).collect()
    };
    let mut stats = BranchStats::default();

    let root = backend.solve_relaxation(&form, &form.col_lower, &form.col_upper, warm, options)?;
    stats.nodes = 1;
    stats.lp_iterations = root.iterations;
    if fractional(&root.columns, &int_cols).is_none() {
        stats.best_bound = root.objective;
        return Ok(finish(&form, root, stats, &int_cols));
    }

    let mut incumbent: Option<Relaxation> = rounding_dive(backend, &form, &root, &int_cols, options, &mut stats);
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: root.objective,
        depth: 0,
        fixings: Vec::new(),
        warm: root.warm_start.clone(),
    });
    let mut root = Some(root);

    while let Some(node) = heap.pop() {
        if let Some(inc) = &incumbent {
            if !improves(node.bound, inc.objective, options.mip_gap) {
                heap.push(node);
                break;
            }
        }
        if stats.nodes >= options.node_limit {
            return Err(Error::ExactnessLost(stats.nodes));
        }
        let relax = match root.take() {
            Some(r) => r,
            None => {
                let (lower, upper) = bounds_with(&form, &node.fixings);
                stats.nodes += 1;
                match backend.solve_relaxation(&form, &lower, &upper, Some(&node.warm), options) {
                    Ok(r) => {
                        stats.lp_iterations += r.iterations;
                        r
                    }
                    Err(Error::Infeasible(_)) => continue,
                    Err(e) => return Err(e),
                }
            }
        };
        if let Some(inc) = &incumbent {
            if !improves(relax.objective, inc.objective, options.mip_gap) {
                continue;
            }
        }
        match fractional(&relax.columns, &int_cols) {
            None => incumbent = Some(relax),
            Some(c) => {
                for value in [relax.columns[c].round(), 1.0 - relax.columns[c].round()] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((c, value));
                    heap.push(Node {
                        bound: relax.objective,
                        depth: node.depth + 1,
                        fixings,
                        warm: relax.warm_start.clone(),
                    });
                }
            }
        }
    }

    let best = incumbent.ok_or_else(|| Error::Infeasible("no assignment of the binary variables is feasible".into()))?;
    let open_bound = heap.peek().map_or(best.objective, |n| n.bound.min(best.objective));
    stats.best_bound = open_bound;
    stats.gap = (best.objective - open_bound) / best.objective.abs().max(1.0);
    Ok(finish(&form, best, stats, &int_cols))
}

fn improves(bound: f64, incumbent: f64, gap: f64) -> bool {
    bound < incumbent - gap * incumbent.abs().max(1.0)
}

/// Most fractional integer column, if any.
fn fractional(columns: &[f64], int_cols: &[usize]) -> Option<usize> {
    int_cols
        .iter()
        .map(|&c| (c, (columns[c] - columns[c].round()).abs()))
        .filter(|&(_, f)| f > INT_TOL)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, _)| c)
}

fn bounds_with(form: &StandardForm, fixings: &[(usize, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut lower = form.col_lower.clone();
    let mut upper = form.col_upper.clone();
    for &(c, v) in fixings {
        lower[c] = v;
        upper[c] = v;
    }
    (lower, upper)
}

/// Fixes every binary to its rounded relaxation value and re-solves.
fn rounding_dive<B: LpBackend>(
    backend: &B,
    form: &StandardForm,
    root: &Relaxation,
    int_cols: &[usize],
    options: &SolveOptions,
    stats: &mut BranchStats,
) -> Option<Relaxation> {
    let fixings: Vec<(usize, f64)> = int_cols.iter().map(|&c| (c, root.columns[c].round())).collect();
    let (lower, upper) = bounds_with(form, &fixings);
    let r = backend
        .solve_relaxation(form, &lower, &upper, Some(&root.warm_start), options)
        .ok()?;
    stats.lp_iterations += r.iterations;
    Some(r)
}

fn finish(form: &StandardForm, mut relax: Relaxation, stats: BranchStats, int_cols: &[usize]) -> LpSolution {
    for &c in int_cols {
        relax.columns[c] = relax.columns[c].round();
    }
    LpSolution {
        values: form.recover(&relax.columns),
        objective: relax.objective,
        stats,
        warm_start: Some(relax.warm_start),
    }
}
