//! Bounded primal revised simplex with an explicit dense basis inverse.
//!
//! Every row `r` carries a logical variable `s_r = a_r x` bounded by the row
//! range, so the working system is `A x - s = 0` with all variables boxed.
//! Phase one minimises the sum of bound infeasibilities of the basic
//! variables; phase two the true objective. Ties in the ratio test use the
//! Harris two-pass rule and long degenerate runs fall back to Bland's rule.

use super::{LpBackend, Relaxation, SolveOptions, StandardForm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
    /// Non-basic free variable held at zero.
    Zero,
}

/// Final basis of a relaxation plus the lazy rows it activated.
#[derive(Debug, Clone)]
pub struct WarmStart {
    n_cols: usize,
    n_rows: usize,
    active_rows: Vec<usize>,
    status: Vec<Status>,
}

/// The bundled relaxation solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseSimplex;

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 100;
const MAX_LAZY_PER_ROUND: usize = 400;

impl LpBackend for DenseSimplex {
    fn solve_relaxation(
        &self,
        form: &StandardForm,
        lower: &[f64],
        upper: &[f64],
        warm: Option<&WarmStart>,
        options: &SolveOptions,
    ) -> Result<Relaxation> {
        form.check_bounds(lower, upper, options.feasibility_tol)?;
        let mut work = Work::new(form, lower, upper, warm, options);
        work.run()?;
        log::debug!(
            "relaxation: {} columns, {} active rows, {} pivots ({} flips, {} in phase one), {} refactors, {} lazy rounds",
            work.n,
            work.m,
            work.iterations,
            work.flips,
            work.phase_one_pivots,
            work.refactors,
            work.lazy_rounds
        );
        let columns = work.x[..work.n].to_vec();
        Ok(Relaxation {
            objective: form.objective(&columns),
            columns,
            iterations: work.iterations,
            warm_start: work.warm_start(),
        })
    }
}

/// Scales row `pr` of the row-major `aug` (width `w`) so that column `c` is one
/// and clears column `c` from every other row.
fn eliminate(aug: &mut [f64], w: usize, pr: usize, c: usize, nz: &mut Vec<usize>) {
    let inv = 1.0 / aug[pr * w + c];
    nz.clear();
    for k in c..w {
        let v = &mut aug[pr * w + k];
        if *v != 0.0 {
            *v *= inv;
            nz.push(k);
        }
    }
    let (before, rest) = aug.split_at_mut(pr * w);
    let (prow, after) = rest.split_at_mut(w);
    for block in [before, after] {
        for row in block.chunks_exact_mut(w) {
            let f = row[c];
            if f != 0.0 {
                for &k in nz.iter() {
                    row[k] -= f * prow[k];
                }
            }
        }
    }
}

struct Work<'a> {
    form: &'a StandardForm,
    feas_tol: f64,
    opt_tol: f64,
    max_iter: usize,
    n: usize,
    m: usize,
    rows: Vec<usize>,
    row_pos: Vec<Option<usize>>,
    acols: Vec<Vec<(usize, f64)>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    status: Vec<Status>,
    head: Vec<usize>,
    binv: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    refactors: usize,
    flips: usize,
    phase_one_pivots: usize,
    lazy_rounds: usize,
    basis_version: u64,
}

impl<'a> Work<'a> {
    fn new(
        form: &'a StandardForm,
        lower: &[f64],
        upper: &[f64],
        warm: Option<&WarmStart>,
        options: &SolveOptions,
    ) -> Self {
        let n = form.n_cols();
        let warm = warm.filter(|w| w.n_cols == n && w.n_rows == form.n_rows());
        let rows: Vec<usize> = match warm {
            Some(w) => w.active_rows.clone(),
            None => (0..form.n_rows()).filter(|&r| !form.row_lazy[r]).collect(),
        };
        let max_iter = if options.max_iterations > 0 {
            options.max_iterations
        } else {
            50_000 + 50 * (n + form.n_rows())
        };
        let mut work = Work {
            form,
            feas_tol: options.feasibility_tol,
            opt_tol: options.optimality_tol,
            max_iter,
            n,
            m: 0,
            rows: Vec::new(),
            row_pos: vec![None; form.n_rows()],
            acols: vec![Vec::new(); n],
            lo: lower.to_vec(),
            hi: upper.to_vec(),
            cost: form.col_cost.clone(),
            x: vec![0.0; n],
            status: vec![Status::Lower; n],
            head: Vec::new(),
            binv: Vec::new(),
            iterations: 0,
            since_refactor: 0,
            refactors: 0,
            flips: 0,
            phase_one_pivots: 0,
            lazy_rounds: 0,
            basis_version: 0,
        };
        work.activate_rows(&rows);

        let ok = warm.is_some_and(|w| {
            w.status.len() == n + rows.len()
                && w.status.iter().filter(|s| **s == Status::Basic).count() == rows.len()
        });
        if let (true, Some(w)) = (ok, warm) {
            work.status.copy_from_slice(&w.status);
            work.head = (0..work.status.len())
                .filter(|&j| work.status[j] == Status::Basic)
                .collect();
        } else {
            for j in 0..n {
                work.status[j] = Status::Lower;
            }
            for j in n..n + work.m {
                work.status[j] = Status::Basic;
            }
            work.head = (n..n + work.m).collect();
        }
        for j in 0..work.status.len() {
            if work.status[j] != Status::Basic {
                work.place_at_bound(j);
            }
        }
        work
    }

    fn place_at_bound(&mut self, j: usize) {
        let (lo, hi) = (self.lo[j], self.hi[j]);
        let status = match self.status[j] {
            Status::Upper if hi.is_finite() => Status::Upper,
            Status::Lower if lo.is_finite() => Status::Lower,
            _ if lo.is_finite() => Status::Lower,
            _ if hi.is_finite() => Status::Upper,
            _ => Status::Zero,
        };
        self.status[j] = status;
        self.x[j] = match status {
            Status::Lower => lo,
            Status::Upper => hi,
            _ => 0.0,
        };
    }

    /// Appends rows to the working problem; their logicals enter the basis.
    fn activate_rows(&mut self, new_rows: &[usize]) {
        for &r in new_rows {
            let pos = self.rows.len();
            self.rows.push(r);
            self.row_pos[r] = Some(pos);
            self.lo.push(self.form.row_lower[r]);
            self.hi.push(self.form.row_upper[r]);
            self.cost.push(0.0);
            self.x.push(0.0);
            self.status.push(Status::Basic);
            self.head.push(self.n + pos);
        }
        self.m = self.rows.len();
        let mut fresh = vec![false; self.form.n_rows()];
        for &r in new_rows {
            fresh[r] = true;
        }
        for (j, col) in self.form.cols.iter().enumerate() {
            for &(r, a) in col {
                if fresh[r] {
                    self.acols[j].push((self.row_pos[r].expect("just activated"), a));
                }
            }
        }
    }

    fn warm_start(&self) -> WarmStart {
        WarmStart {
            n_cols: self.n,
            n_rows: self.form.n_rows(),
            active_rows: self.rows.clone(),
            status: self.status.clone(),
        }
    }

    fn column(&self, j: usize) -> ColIter<'_> {
        if j < self.n {
            ColIter::Structural(self.acols[j].iter())
        } else {
            ColIter::Logical(Some(j - self.n))
        }
    }

    fn name(&self, j: usize) -> String {
        if j < self.n {
            format!("variable '{}'", self.form.col_name(j))
        } else {
            format!("constraint '{}'", self.form.row_name(self.rows[j - self.n]))
        }
    }

    /// Rebuilds the basis inverse, then recomputes the basic values.
    fn refactor(&mut self) {
        if !self.refactor_reduced() {
            self.refactor_full();
        }
        self.since_refactor = 0;
        self.refactors += 1;
        self.basis_version += 1;
        self.recompute_basics();
    }

    /// Inverts only the block of basic structural columns on the rows whose
    /// logicals are non-basic; with `B = [[A_N, 0], [A_L, -I]]` the inverse is
    /// `[[A_N⁻¹, 0], [A_L A_N⁻¹, -I]]`. Returns false when that block is
    /// singular, leaving the repair to the full elimination.
    fn refactor_reduced(&mut self) -> bool {
        let m = self.m;
        let mut covered = vec![usize::MAX; m];
        let mut structural = Vec::new();
        for (c, &j) in self.head.iter().enumerate() {
            if j >= self.n {
                covered[j - self.n] = c;
            } else {
                structural.push(c);
            }
        }
        let free_rows: Vec<usize> = (0..m).filter(|&r| covered[r] == usize::MAX).collect();
        let k = structural.len();
        if free_rows.len() != k {
            return false;
        }
        let mut local = vec![usize::MAX; m];
        for (i, &r) in free_rows.iter().enumerate() {
            local[r] = i;
        }
        let w = 2 * k;
        let mut aug = vec![0.0; k * w];
        for (c, &pos) in structural.iter().enumerate() {
            for (r, a) in self.column(self.head[pos]) {
                if local[r] != usize::MAX {
                    aug[local[r] * w + c] = a;
                }
            }
        }
        for r in 0..k {
            aug[r * w + k + r] = 1.0;
        }
        let mut pivot_row = vec![usize::MAX; k];
        let mut row_used = vec![false; k];
        let mut nz = Vec::with_capacity(w);
        for c in 0..k {
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for r in 0..k {
                if !row_used[r] {
                    let v = aug[r * w + c].abs();
                    if v > best_abs {
                        best_abs = v;
                        best = Some(r);
                    }
                }
            }
            let Some(pr) = best else {
                return false;
            };
            row_used[pr] = true;
            pivot_row[c] = pr;
            eliminate(&mut aug, w, pr, c, &mut nz);
        }

        let mut binv = vec![0.0; m * m];
        for (c, &pos) in structural.iter().enumerate() {
            let src = pivot_row[c] * w + k;
            let inv_row = &aug[src..src + k];
            for (i, &r) in free_rows.iter().enumerate() {
                binv[pos * m + r] = inv_row[i];
            }
            for (r, a) in self.column(self.head[pos]) {
                let target = covered[r];
                if target != usize::MAX {
                    let out = &mut binv[target * m..(target + 1) * m];
                    for (i, &fr) in free_rows.iter().enumerate() {
                        out[fr] += a * inv_row[i];
                    }
                }
            }
        }
        for r in 0..m {
            if covered[r] != usize::MAX {
                binv[covered[r] * m + r] -= 1.0;
            }
        }
        self.binv = binv;
        true
    }

    /// Gauss–Jordan elimination of the whole basis, swapping in logicals for
    /// dependent columns.
    fn refactor_full(&mut self) {
        let m = self.m;
        let w = 2 * m;
        let mut aug = vec![0.0; m * w];
        for (c, &j) in self.head.iter().enumerate() {
            for (r, a) in self.column(j) {
                aug[r * w + c] = a;
            }
        }
        for r in 0..m {
            aug[r * w + m + r] = 1.0;
        }
        let mut pivot_row = vec![usize::MAX; m];
        let mut row_used = vec![false; m];
        let mut nz = Vec::with_capacity(w);
        for c in 0..m {
            let mut best = None;
            let mut best_abs = PIVOT_TOL;
            for r in 0..m {
                if !row_used[r] {
                    let v = aug[r * w + c].abs();
                    if v > best_abs {
                        best_abs = v;
                        best = Some(r);
                    }
                }
            }
            let pr = match best {
                Some(r) => r,
                None => {
                    // dependent column: replace it with the logical of a free row
                    let r0 = (0..m)
                        .find(|&r| !row_used[r] && !self.head[c..].contains(&(self.n + r)))
                        .expect("an unpivoted row without a basic logical remains");
                    let out = self.head[c];
                    self.head[c] = self.n + r0;
                    self.status[self.n + r0] = Status::Basic;
                    self.status[out] = Status::Lower;
                    self.place_at_bound(out);
                    for r in 0..m {
                        aug[r * w + c] = 0.0;
                    }
                    aug[r0 * w + c] = -1.0;
                    r0
                }
            };
            row_used[pr] = true;
            pivot_row[c] = pr;
            eliminate(&mut aug, w, pr, c, &mut nz);
        }
        let mut binv = vec![0.0; m * m];
        for c in 0..m {
            let src = pivot_row[c] * w + m;
            binv[c * m..(c + 1) * m].copy_from_slice(&aug[src..src + m]);
        }
        self.binv = binv;
    }

    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.status.len() {
            if self.status[j] != Status::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for (r, a) in self.column(j) {
                    rhs[r] += a * xj;
                }
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(b, r)| b * r).sum();
            self.x[self.head[i]] = -v;
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        if x < self.lo[j] - self.feas_tol {
            self.lo[j] - x
        } else if x > self.hi[j] + self.feas_tol {
            x - self.hi[j]
        } else {
            0.0
        }
    }

    fn run(&mut self) -> Result<()> {
        self.refactor();
        loop {
            self.simplex_loop()?;
            if !self.add_violated_lazy_rows() {
                return Ok(());
            }
            self.lazy_rounds += 1;
            self.refactor();
        }
    }

    fn add_violated_lazy_rows(&mut self) -> bool {
        let act = self.form.activities(&self.x[..self.n]);
        let mut violated: Vec<(f64, usize)> = (0..self.form.n_rows())
            .filter(|&r| self.row_pos[r].is_none())
            .filter_map(|r| {
                let (lo, hi) = (self.form.row_lower[r], self.form.row_upper[r]);
                let v = (lo - act[r]).max(act[r] - hi);
                let tol = self.feas_tol * (1.0 + lo.abs().min(hi.abs()).min(1e6));
                (v > tol).then_some((v, r))
            })
            .collect();
        if violated.is_empty() {
            return false;
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0));
        violated.truncate(MAX_LAZY_PER_ROUND);
        let rows: Vec<usize> = violated.into_iter().map(|(_, r)| r).collect();
        self.activate_rows(&rows);
        true
    }

    fn simplex_loop(&mut self) -> Result<()> {
        let m = self.m;
        let total = self.n + m;
        let mut y = vec![0.0; m];
        let mut cb = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        let mut dvec = vec![0.0; total];
        let mut prev_cb = vec![f64::NAN; m];
        let mut priced_version = u64::MAX;
        let mut degenerate_run = 0usize;
        let mut bland = false;

        loop {
            if self.iterations >= self.max_iter {
                return Err(Error::IterationLimit(self.iterations));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }

            let mut phase_one = false;
            for i in 0..m {
                let j = self.head[i];
                let x = self.x[j];
                cb[i] = if x < self.lo[j] - self.feas_tol {
                    phase_one = true;
                    -1.0
                } else if x > self.hi[j] + self.feas_tol {
                    phase_one = true;
                    1.0
                } else {
                    0.0
                };
            }
            if !phase_one {
                for i in 0..m {
                    cb[i] = self.cost[self.head[i]];
                }
            }
            // reduced costs survive bound flips when the phase costs are unchanged
            if self.basis_version != priced_version || cb != prev_cb {
                y.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..m {
                    if cb[i] != 0.0 {
                        let row = &self.binv[i * m..(i + 1) * m];
                        for (yk, b) in y.iter_mut().zip(row) {
                            *yk += cb[i] * b;
                        }
                    }
                }
                for j in 0..total {
                    if self.status[j] != Status::Basic {
                        let cj = if phase_one { 0.0 } else { self.cost[j] };
                        dvec[j] = cj - self.dot(&y, j);
                    }
                }
                priced_version = self.basis_version;
                prev_cb.copy_from_slice(&cb);
            }

            // pricing
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..total {
                let st = self.status[j];
                if st == Status::Basic {
                    continue;
                }
                if self.lo[j] == self.hi[j] {
                    continue;
                }
                let cj = if phase_one { 0.0 } else { self.cost[j] };
                let d = dvec[j];
                let tol = self.opt_tol * (1.0 + cj.abs());
                let dir = match st {
                    Status::Lower if d < -tol => 1.0,
                    Status::Upper if d > tol => -1.0,
                    Status::Zero if d.abs() > tol => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir, d));
                    break;
                }
                let score = d.abs();
                let take = if score > best * (1.0 + 1e-9) {
                    true
                } else if phase_one && score >= best * (1.0 - 1e-9) {
                    // ties in phase one: prefer long steps, then cheap directions
                    let (q, qdir, _) = entering.expect("tie implies an incumbent");
                    let (r_new, r_old) = (self.hi[j] - self.lo[j], self.hi[q] - self.lo[q]);
                    r_new > r_old || (r_new == r_old && self.cost[j] * dir < self.cost[q] * qdir)
                } else {
                    false
                };
                if take {
                    best = best.max(score);
                    entering = Some((j, dir, d));
                }
            }

            let Some((q, dir, dq)) = entering else {
                if phase_one {
                    let (worst, amount) = self
                        .head
                        .iter()
                        .map(|&j| (j, self.infeasibility(j)))
                        .max_by(|a, b| a.1.total_cmp(&b.1))
                        .expect("non-empty basis");
                    return Err(Error::Infeasible(format!(
                        "{} cannot be satisfied (residual {amount:.3e})",
                        self.name(worst)
                    )));
                }
                return Ok(());
            };

            // ftran
            alpha.iter_mut().for_each(|v| *v = 0.0);
            for (r, a) in self.column(q) {
                for i in 0..m {
                    alpha[i] += a * self.binv[i * m + r];
                }
            }

            // Harris ratio test; basic i moves at rate -dir * alpha[i]
            let tol = self.feas_tol;
            let mut theta_max = f64::INFINITY;
            for i in 0..m {
                let rate = -dir * alpha[i];
                if rate.abs() <= PIVOT_TOL {
                    continue;
                }
                if let Some(gap) = self.gap_to_target(self.head[i], rate) {
                    theta_max = theta_max.min((gap.max(0.0) + tol) / rate.abs());
                }
            }
            let range = self.hi[q] - self.lo[q];
            let mut leave = None;
            let mut leave_rate = 0.0;
            let mut theta = f64::INFINITY;
            if theta_max.is_finite() {
                for i in 0..m {
                    let rate = -dir * alpha[i];
                    if rate.abs() <= PIVOT_TOL {
                        continue;
                    }
                    if let Some(gap) = self.gap_to_target(self.head[i], rate) {
                        let ratio = gap.max(0.0) / rate.abs();
                        if ratio <= theta_max {
                            let better = if bland {
                                leave.is_none_or(|(l, _): (usize, f64)| self.head[i] < self.head[l])
                            } else {
                                rate.abs() > leave_rate
                            };
                            if better {
                                leave = Some((i, ratio));
                                leave_rate = rate.abs();
                            }
                        }
                    }
                }
                if let Some((_, ratio)) = leave {
                    theta = ratio;
                }
            }

            if range.is_finite() && range <= theta {
                // bound flip
                self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                self.status[q] = if dir > 0.0 { Status::Upper } else { Status::Lower };
                for i in 0..m {
                    if alpha[i] != 0.0 {
                        self.x[self.head[i]] -= dir * range * alpha[i];
                    }
                }
                self.iterations += 1;
                self.flips += 1;
                if phase_one {
                    self.phase_one_pivots += 1;
                }
                degenerate_run = 0;
                bland = false;
                continue;
            }

            let Some((p, _)) = leave else {
                if phase_one {
                    // numerical trouble: refresh and try again
                    self.refactor();
                    self.iterations += 1;
                    continue;
                }
                return Err(Error::Unbounded(format!(
                    "{} improves the objective without limit",
                    self.name(q)
                )));
            };
            if alpha[p].abs() < PIVOT_TOL {
                self.refactor();
                self.iterations += 1;
                continue;
            }

            // primal update
            let out = self.head[p];
            let (value, status) = self.leaving_bound(out, -dir * alpha[p]);
            self.x[q] += dir * theta;
            for i in 0..m {
                if alpha[i] != 0.0 {
                    self.x[self.head[i]] -= dir * theta * alpha[i];
                }
            }
            self.x[out] = value;
            self.status[out] = status;
            self.status[q] = Status::Basic;
            self.head[p] = q;
            self.basis_version += 1;

            // basis inverse update
            let inv = 1.0 / alpha[p];
            let (before, rest) = self.binv.split_at_mut(p * m);
            let (prow, after) = rest.split_at_mut(m);
            prow.iter_mut().for_each(|v| *v *= inv);
            for (i, row) in before.chunks_exact_mut(m).enumerate() {
                let f = alpha[i];
                if f != 0.0 {
                    row.iter_mut().zip(prow.iter()).for_each(|(r, pv)| *r -= f * pv);
                }
            }
            for (k, row) in after.chunks_exact_mut(m).enumerate() {
                let f = alpha[p + 1 + k];
                if f != 0.0 {
                    row.iter_mut().zip(prow.iter()).for_each(|(r, pv)| *r -= f * pv);
                }
            }

            self.iterations += 1;
            self.since_refactor += 1;
            if phase_one {
                self.phase_one_pivots += 1;
            }
            if theta * dq.abs() <= 1e-13 {
                degenerate_run += 1;
                if degenerate_run > 50 {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
                bland = false;
            }
        }
    }

    fn dot(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            self.acols[j].iter().map(|&(r, a)| y[r] * a).sum()
        } else {
            -y[j - self.n]
        }
    }

    /// Distance a basic variable moving at `rate` may travel before it must
    /// stop, or `None` when it is unrestricted in that direction.
    fn gap_to_target(&self, j: usize, rate: f64) -> Option<f64> {
        let (x, lo, hi) = (self.x[j], self.lo[j], self.hi[j]);
        let tol = self.feas_tol;
        if rate > 0.0 {
            if x < lo - tol {
                Some(lo - x)
            } else if x > hi + tol || hi == f64::INFINITY {
                None
            } else {
                Some(hi - x)
            }
        } else if x > hi + tol {
            Some(x - hi)
        } else if x < lo - tol || lo == f64::NEG_INFINITY {
            None
        } else {
            Some(x - lo)
        }
    }

    /// Bound at which a leaving variable stops, evaluated before the step.
    fn leaving_bound(&self, j: usize, rate: f64) -> (f64, Status) {
        let (x, lo, hi) = (self.x[j], self.lo[j], self.hi[j]);
        let to_lower = if rate > 0.0 {
            x < lo - self.feas_tol
        } else {
            x <= hi + self.feas_tol
        };
        if to_lower {
            (lo, Status::Lower)
        } else {
            (hi, Status::Upper)
        }
    }
}

enum ColIter<'a> {
    Structural(std::slice::Iter<'a, (usize, f64)>),
    Logical(Option<usize>),
}

impl Iterator for ColIter<'_> {
    type Item = (usize, f64);
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColIter::Structural(it) => it.next().copied(),
            ColIter::Logical(slot) => slot.take().map(|p| (p, -1.0)),
        }
    }
}
