//! CPLEX-style LP text output for inspecting generated models.

use std::fmt::Write;

use super::StandardForm;

fn ident(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']') { c } else { '_' })
        .collect()
}

fn terms(out: &mut String, entries: &[(usize, f64)], form: &StandardForm) {
    if entries.is_empty() {
        out.push_str(" 0");
    }
    for (k, &(c, a)) in entries.iter().enumerate() {
        let sign = if a < 0.0 { "-" } else if k > 0 { "+" } else { "" };
        let _ = write!(out, " {sign} {} {}", a.abs(), ident(form.col_name(c)));
    }
}

/// Renders `form` as LP text. Piecewise costs appear as their segment columns.
pub fn write_lp(form: &StandardForm) -> String {
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); form.n_rows()];
    for (c, col) in form.cols.iter().enumerate() {
        for &(r, a) in col {
            rows[r].push((c, a));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "\\ objective constant: {}", form.offset);
    out.push_str("Minimize\n obj:");
    let obj: Vec<(usize, f64)> = (0..form.n_cols())
        .filter(|&c| form.col_cost[c] != 0.0)
        .map(|c| (c, form.col_cost[c]))
        .collect();
    terms(&mut out, &obj, form);
    out.push('\n');

    for (section, lazy) in [("Subject To", false), ("Lazy Constraints", true)] {
        let members: Vec<usize> = (0..form.n_rows()).filter(|&r| form.row_lazy[r] == lazy).collect();
        if members.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{section}");
        for r in members {
            let (lo, hi) = (form.row_lower[r], form.row_upper[r]);
            let name = ident(form.row_name(r));
            let mut emit = |label: String, op: &str, rhs: f64| {
                let _ = write!(out, " {label}:");
                terms(&mut out, &rows[r], form);
                let _ = writeln!(out, " {op} {rhs}");
            };
            if lo == hi {
                emit(name, "=", lo);
            } else if lo.is_finite() && hi.is_finite() {
                emit(format!("{name}_lo"), ">=", lo);
                emit(format!("{name}_hi"), "<=", hi);
            } else if lo.is_finite() {
                emit(name, ">=", lo);
            } else if hi.is_finite() {
                emit(name, "<=", hi);
            }
        }
    }

    out.push_str("Bounds\n");
    for c in 0..form.n_cols() {
        let (lo, hi) = (form.col_lower[c], form.col_upper[c]);
        let name = ident(form.col_name(c));
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => {
                let _ = writeln!(out, " {name} = {lo}");
            }
            (true, true) => {
                let _ = writeln!(out, " {lo} <= {name} <= {hi}");
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {lo}");
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {hi}");
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    let binaries: Vec<usize> = (0..form.n_cols()).filter(|&c| form.col_integer[c]).collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for c in binaries {
            let _ = writeln!(out, " {}", ident(form.col_name(c)));
        }
    }
    out.push_str("End\n");
    out
}
