use proptest::prelude::*;

use super::*;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

#[test]
fn simple_maximisation() {
    // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3
    let mut p = LpProblem::new();
    let x = p.add_var("x", 0.0, 3.0, -3.0);
    let y = p.add_var("y", 0.0, f64::INFINITY, -2.0);
    p.add_constraint("c1", vec![(x, 1.0), (y, 1.0)], Sense::Le, 4.0);
    p.add_constraint("c2", vec![(x, 1.0), (y, 3.0)], Sense::Le, 6.0);
    let s = solve(&p, &opts()).unwrap();
    assert!((s.objective + 11.0).abs() < 1e-9);
    assert!((s.values[x] - 3.0).abs() < 1e-9);
    assert!((s.values[y] - 1.0).abs() < 1e-9);
}

#[test]
fn equality_and_free_variables() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let y = p.add_var("y", -2.0, 5.0, 1.0);
    p.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Sense::Eq, 1.0);
    p.add_constraint("diff", vec![(x, 1.0), (y, -1.0)], Sense::Ge, -3.0);
    let s = solve(&p, &opts()).unwrap();
    assert!((s.objective - 1.0).abs() < 1e-9);
    assert!(p.first_violation(&s.values, 1e-9).is_none());
}

#[test]
fn infeasible_is_reported() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", 0.0, 1.0, 1.0);
    p.add_constraint("too_big", vec![(x, 1.0)], Sense::Ge, 2.0);
    let err = solve(&p, &opts()).unwrap_err();
    assert!(matches!(err, Error::Infeasible(ref m) if m.contains("too_big") || m.contains("'x'")), "{err}");
}

#[test]
fn empty_bounds_are_infeasible() {
    let mut p = LpProblem::new();
    p.add_var("x", 2.0, 1.0, 0.0);
    assert!(matches!(solve(&p, &opts()), Err(Error::Infeasible(m)) if m.contains("'x'")));
}

#[test]
fn unbounded_is_reported() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", 0.0, f64::INFINITY, -1.0);
    let y = p.add_var("y", 0.0, f64::INFINITY, 0.0);
    p.add_constraint("c", vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0);
    assert!(matches!(solve(&p, &opts()), Err(Error::Unbounded(_))));
}

#[test]
fn lazy_rows_are_enforced() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", 0.0, 10.0, -1.0);
    let y = p.add_var("y", 0.0, 10.0, -1.0);
    p.add_lazy_constraint("cap", vec![(x, 1.0), (y, 1.0)], Sense::Le, 5.0);
    p.add_lazy_constraint("slack", vec![(x, 1.0)], Sense::Le, 100.0);
    let s = solve(&p, &opts()).unwrap();
    assert!((s.objective + 5.0).abs() < 1e-9);
}

#[test]
fn knapsack_by_branch_and_bound() {
    // items 0 and 1 fill the capacity for a value of 23
    let vals = [10.0, 13.0, 7.0, 8.0];
    let wts = [3.0, 4.0, 2.0, 3.0];
    let mut p = LpProblem::new();
    let vars: Vec<_> = vals.iter().enumerate().map(|(i, v)| p.add_binary(format!("z{i}"), -v)).collect();
    p.add_constraint("w", vars.iter().zip(wts).map(|(&v, w)| (v, w)).collect(), Sense::Le, 7.0);
    let s = solve(&p, &opts()).unwrap();
    let mut best = 0.0f64;
    for mask in 0..16u32 {
        let (mut v, mut w) = (0.0, 0.0);
        for i in 0..4 {
            if mask >> i & 1 == 1 {
                v += vals[i];
                w += wts[i];
            }
        }
        if w <= 7.0 {
            best = best.max(v);
        }
    }
    assert!((s.objective + best).abs() < 1e-9);
    assert!(s.values.iter().all(|v| *v == 0.0 || *v == 1.0));
    let relaxed = solve(&p, &SolveOptions { relax_integrality: true, ..opts() }).unwrap();
    assert!(relaxed.objective <= s.objective + 1e-9);
}

#[test]
fn piecewise_cost_fills_cheap_segments_first() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", 0.0, 0.0, 0.0);
    p.add_piecewise(x, vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 2.0, 4.0], 0.5);
    p.add_constraint("need", vec![(x, 1.0)], Sense::Ge, 2.5);
    let s = solve(&p, &opts()).unwrap();
    assert!((s.values[x] - 2.5).abs() < 1e-9);
    assert!((s.objective - (0.5 + 1.0 + 2.0 + 2.0)).abs() < 1e-9);
    assert!((p.objective_at(&s.values) - s.objective).abs() < 1e-9);
}

#[test]
fn nonconvex_piecewise_is_rejected() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", 0.0, 0.0, 0.0);
    p.add_piecewise(x, vec![0.0, 1.0, 2.0], vec![2.0, 1.0], 0.0);
    assert!(matches!(solve(&p, &opts()), Err(Error::Model(_))));
}

#[test]
fn warm_start_reproduces_optimum() {
    let mut p = LpProblem::new();
    let x = p.add_var("x", 0.0, 4.0, -1.0);
    let y = p.add_var("y", 0.0, 4.0, -2.0);
    p.add_constraint("a", vec![(x, 1.0), (y, 1.0)], Sense::Le, 5.0);
    p.add_lazy_constraint("b", vec![(x, -1.0), (y, 2.0)], Sense::Le, 4.0);
    let first = solve(&p, &opts()).unwrap();
    p.constraints[0].rhs = 5.5;
    let warm = solve_with(&DenseSimplex, &p, &opts(), first.warm_start.as_ref()).unwrap();
    let cold = solve(&p, &opts()).unwrap();
    assert!((warm.objective - cold.objective).abs() < 1e-9);
}

#[test]
fn lp_text_lists_every_section() {
    let mut p = LpProblem::new();
    let x = p.add_var("x[1,2]", 0.0, 1.0, 1.0);
    let z = p.add_binary("z", 0.0);
    p.add_constraint("r", vec![(x, 1.0), (z, -1.0)], Sense::Le, 0.0);
    p.add_lazy_constraint("l", vec![(x, 1.0)], Sense::Ge, -1.0);
    let text = write_lp(&StandardForm::compile(&p).unwrap());
    for s in ["Minimize", "Subject To", "Lazy Constraints", "Bounds", "Binaries", "End", "x[1_2]"] {
        assert!(text.contains(s), "missing {s}:\n{text}");
    }
}

/// Brute-force optimum of a 2-variable LP by enumerating pairwise
/// intersections of constraint and bound lines.
fn vertex_oracle(c: [f64; 2], rows: &[([f64; 2], f64)], ub: [f64; 2]) -> Option<f64> {
    let mut lines: Vec<([f64; 2], f64)> = rows.to_vec();
    lines.push(([1.0, 0.0], 0.0));
    lines.push(([0.0, 1.0], 0.0));
    lines.push(([1.0, 0.0], ub[0]));
    lines.push(([0.0, 1.0], ub[1]));
    let feasible = |x: [f64; 2]| {
        x[0] >= -1e-9
            && x[1] >= -1e-9
            && x[0] <= ub[0] + 1e-9
            && x[1] <= ub[1] + 1e-9
            && rows.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-9)
    };
    let mut best: Option<f64> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a, b) = (lines[i], lines[j]);
            let det = a.0[0] * b.0[1] - a.0[1] * b.0[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [
                (a.1 * b.0[1] - a.0[1] * b.1) / det,
                (a.0[0] * b.1 - a.1 * b.0[0]) / det,
            ];
            if feasible(x) {
                let v = c[0] * x[0] + c[1] * x[1];
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn matches_vertex_enumeration(
        c in prop::array::uniform2(-5.0f64..5.0),
        ub in prop::array::uniform2(0.5f64..6.0),
        rows in prop::collection::vec((prop::array::uniform2(-3.0f64..3.0), -2.0f64..8.0), 0..5),
    ) {
        let mut p = LpProblem::new();
        let x = p.add_var("x", 0.0, ub[0], c[0]);
        let y = p.add_var("y", 0.0, ub[1], c[1]);
        for (k, (a, b)) in rows.iter().enumerate() {
            p.add_constraint(format!("r{k}"), vec![(x, a[0]), (y, a[1])], Sense::Le, *b);
        }
        match (solve(&p, &opts()), vertex_oracle(c, &rows, ub)) {
            (Ok(s), Some(best)) => prop_assert!((s.objective - best).abs() < 1e-7, "{} vs {}", s.objective, best),
            (Err(Error::Infeasible(_)), None) => {}
            (got, want) => prop_assert!(false, "solver {:?} oracle {:?}", got.map(|s| s.objective), want),
        }
    }
}
