//! CPLEX LP-format export of the scheme-design MILP, for external solvers.
//!
//! Variables: sizes `x_i ∈ [0,1]`; `y_<set>` for each set of `L+1` distinct
//! size indices (1 when the set fits into capacity 1); `z_a_b_t` for each
//! candidate identity `x_a + x_b = x_t` with `a <= b`, `t < a`. The objective
//! minimizes `Σy + Σz`.

use std::fmt::Write as _;

use num_traits::One;

use crate::scalar::{ratio, rational_to_decimal};
use crate::Rational;

const DIGITS: usize = 12;

fn num(r: &Rational) -> String {
    rational_to_decimal(r, DIGITS)
}

fn subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for s in start..d {
            cur.push(s);
            rec(d, k, s + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, k, 0, &mut Vec::new(), &mut out);
    out
}

fn y_name(set: &[usize]) -> String {
    let parts: Vec<String> = set.iter().map(|i| i.to_string()).collect();
    format!("y_{}", parts.join("_"))
}

fn z_name(a: usize, b: usize, t: usize) -> String {
    format!("z_{a}_{b}_{t}")
}

fn push_terms(out: &mut String, terms: &[String]) {
    for (k, t) in terms.iter().enumerate() {
        if k > 0 && k % 8 == 0 {
            out.push_str("\n   ");
        }
        if k > 0 && !t.starts_with('-') {
            out.push_str(" + ");
        } else if k > 0 {
            out.push(' ');
        }
        out.push_str(t);
    }
}

/// LP-format text of the MILP for `d` sizes, support bound `l` and precision `eps`.
pub fn emit_milp(d: usize, l: usize, eps: &Rational) -> String {
    let one = Rational::one();
    let grow = &one + eps;
    let top = &one - ratio(2, 1) * eps;
    let big_m = Rational::from_integer((l as i64 + 2).into());
    let sets = subsets(d, l + 1);
    let mut zs = Vec::new();
    for a in 0..d {
        for b in a..d {
            for t in 0..a {
                zs.push((a, b, t));
            }
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "\\ rounding scheme design: d = {d}, L = {l}, eps = {}", num(eps));
    let _ = writeln!(s, "\\ {} y variables, {} z variables", sets.len(), zs.len());
    s.push_str("Minimize\n obj: ");
    let mut obj: Vec<String> = sets.iter().map(|x| y_name(x)).chain(zs.iter().map(|&(a, b, t)| z_name(a, b, t))).collect();
    if obj.is_empty() {
        obj.push("0 x0".into());
    }
    push_terms(&mut s, &obj);
    s.push_str("\nSubject To\n");
    let _ = writeln!(s, " top: {} x0 >= {}", num(&grow), num(&top));
    let _ = writeln!(s, " top_cap: x0 <= {}", num(&top));
    let _ = writeln!(s, " bottom: x{} <= {}", d - 1, num(&(eps * &grow)));
    for i in 0..d.saturating_sub(1) {
        let _ = writeln!(s, " gap_{i}: x{i} - {} x{} <= 0", num(&grow), i + 1);
        let _ = writeln!(s, " order_{i}: x{} - x{i} <= 0", i + 1);
    }
    // y = 0 forces the set to overflow the capacity.
    for x in &sets {
        let _ = write!(s, " fit_{}: ", &y_name(x)[2..]);
        let mut terms: Vec<String> = x.iter().map(|i| format!("x{i}")).collect();
        terms.push(format!("{} {}", num(&big_m), y_name(x)));
        push_terms(&mut s, &terms);
        s.push_str(" >= 1\n");
    }
    // z = 1 forces x_a + x_b = x_t.
    for &(a, b, t) in &zs {
        let lhs = if a == b { format!("2 x{a} - x{t}") } else { format!("x{a} + x{b} - x{t}") };
        let z = z_name(a, b, t);
        let m = num(&big_m);
        let _ = writeln!(s, " eqlo_{}: {lhs} + {m} {z} <= {m}", &z[2..]);
        let _ = writeln!(s, " eqhi_{}: {lhs} - {m} {z} >= -{m}", &z[2..]);
    }
    // A fitting set needs an active identity on one of its pairs.
    for x in &sets {
        let mut terms = vec![y_name(x)];
        for (p, &a) in x.iter().enumerate() {
            for &b in &x[p..] {
                for t in 0..a {
                    terms.push(format!("- {}", z_name(a, b, t)));
                }
            }
        }
        let _ = write!(s, " cover_{}: ", &y_name(x)[2..]);
        push_terms(&mut s, &terms);
        s.push_str(" <= 0\n");
    }
    s.push_str("Bounds\n");
    for i in 0..d {
        let _ = writeln!(s, " 0 <= x{i} <= 1");
    }
    s.push_str("Binary\n");
    for name in sets.iter().map(|x| y_name(x)).chain(zs.iter().map(|&(a, b, t)| z_name(a, b, t))) {
        let _ = writeln!(s, " {name}");
    }
    s.push_str("End\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binaries(text: &str, prefix: &str) -> usize {
        let bin = text.split("Binary\n").nth(1).unwrap();
        bin.lines().filter(|l| l.trim().starts_with(prefix)).count()
    }

    #[test]
    fn y_count_is_binomial() {
        let t = emit_milp(9, 3, &ratio(1, 6));
        assert_eq!(binaries(&t, "y_"), 126);
        assert_eq!(binaries(&emit_milp(3, 3, &ratio(1, 6)), "y_"), 0);
        assert_eq!(binaries(&emit_milp(5, 1, &ratio(1, 5)), "y_"), 10);
    }

    #[test]
    fn range_constraint_verbatim() {
        let t = emit_milp(4, 2, &ratio(1, 6));
        assert!(t.contains("top: 1.166666666667 x0 >= 0.666666666667"), "{t}");
        assert!(t.contains("bottom: x3 <= 0.194444444444"));
        assert!(t.starts_with("\\ "));
        assert!(t.contains("Minimize") && t.contains("Subject To") && t.contains("Bounds") && t.trim_end().ends_with("End"));
    }

    #[test]
    fn z_variables_and_cover_rows() {
        let t = emit_milp(3, 1, &ratio(1, 5));
        // a <= b, t < a: (1,1,0) (1,2,0) (2,2,0) (2,2,1)
        assert_eq!(binaries(&t, "z_"), 4);
        assert!(t.contains("cover_0_1: y_0_1 - z_1_1_0 <= 0"), "{t}");
        assert!(t.contains("cover_1_2: y_1_2 - z_1_1_0 - z_1_2_0 - z_2_2_0 - z_2_2_1 <= 0"), "{t}");
    }
}
