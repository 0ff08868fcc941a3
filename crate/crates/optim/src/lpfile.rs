//! Writes programs in the CPLEX LP text format for cross-checking with
//! external solvers. Variables are named `x0, x1, ...` and rows `r0, r1, ...`.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::lp::{LinearProgram, RowKind};

fn term(out: &mut String, first: bool, coef: f64, j: usize) {
    if coef < 0.0 {
        let _ = write!(out, " - {} x{j}", -coef);
    } else if first {
        let _ = write!(out, " {coef} x{j}");
    } else {
        let _ = write!(out, " + {coef} x{j}");
    }
}

pub fn to_lp_string(lp: &LinearProgram, binaries: &[usize]) -> String {
    let mut out = String::from("\\ written by contagion-optim\nMaximize\n obj:");
    let mut first = true;
    for (j, &c) in lp.objective().iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, j);
            first = false;
        }
    }
    if first {
        out.push_str(" 0 x0");
    }
    out.push_str("\nSubject To\n");
    for (r, row) in lp.rows().iter().enumerate() {
        let _ = write!(out, " r{r}:");
        if row.coeffs.is_empty() {
            out.push_str(" 0 x0");
        }
        for (k, &(j, a)) in row.coeffs.iter().enumerate() {
            term(&mut out, k == 0, a, j);
        }
        let op = match row.kind {
            RowKind::Le => "<=",
            RowKind::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        let (lo, hi) = lp.bounds(j);
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " x{j} free");
            }
            (true, false) => {
                if lo != 0.0 {
                    let _ = writeln!(out, " x{j} >= {lo}");
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= x{j} <= {hi}");
            }
            (true, true) => {
                let _ = writeln!(out, " {lo} <= x{j} <= {hi}");
            }
        }
    }
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for &j in binaries {
            let _ = writeln!(out, " x{j}");
        }
    }
    out.push_str("End\n");
    out
}

pub fn write_lp_file(path: &Path, lp: &LinearProgram, binaries: &[usize]) -> io::Result<()> {
    std::fs::write(path, to_lp_string(lp, binaries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_terms() {
        let mut lp = LinearProgram::new(3);
        lp.set_objective(0, 2.0);
        lp.set_objective(2, -1.5);
        lp.set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(2, 0.0, 1.0);
        lp.add_le(vec![(0, 1.0), (1, -2.0)], 4.0);
        lp.add_eq(vec![(2, 1.0)], 1.0);
        let s = to_lp_string(&lp, &[2]);
        assert!(s.contains("obj: 2 x0 - 1.5 x2"));
        assert!(s.contains("r0: 1 x0 - 2 x1 <= 4"));
        assert!(s.contains("r1: 1 x2 = 1"));
        assert!(s.contains("x1 free"));
        assert!(s.contains("0 <= x2 <= 1"));
        assert!(s.contains("Binary\n x2\n"));
        assert!(s.ends_with("End\n"));
    }
}
