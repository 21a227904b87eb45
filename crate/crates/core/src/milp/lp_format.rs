use std::fmt::Write;

use super::{Integrality, MilpInstance, Relation};

/// `x[1][cc1]` -> `x_1_cc1`; LP readers reject brackets.
fn sanitize(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        match c {
            '[' => out.push('_'),
            ']' => {}
            c if c.is_ascii_alphanumeric() || c == '_' || c == '.' => out.push(c),
            _ => out.push('_'),
        }
    }
    out
}

fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn linear(out: &mut String, names: &[String], terms: impl Iterator<Item = (usize, f64)>) {
    let mut first = true;
    let mut width = 0;
    for (j, a) in terms {
        if a == 0.0 {
            continue;
        }
        let sign = if a < 0.0 { "-" } else { "+" };
        let mag = a.abs();
        let coef = if mag == 1.0 { String::new() } else { format!("{} ", num(mag)) };
        let term = if first && a > 0.0 {
            format!("{coef}{}", names[j])
        } else {
            format!("{sign} {coef}{}", names[j])
        };
        if width > 0 && width + term.len() > 200 {
            out.push_str("\n   ");
            width = 0;
        }
        if !first {
            out.push(' ');
        }
        width += term.len() + 1;
        out.push_str(&term);
        first = false;
    }
    if first {
        out.push('0');
    }
}

/// Renders the instance in CPLEX LP text format.
pub fn to_lp_format(m: &MilpInstance) -> String {
    let names: Vec<String> = m.variables().iter().map(|v| sanitize(&v.name)).collect();
    let mut out = String::new();
    out.push_str("Minimize\n obj: ");
    linear(&mut out, &names, m.objective().iter().copied().enumerate());
    out.push_str("\nSubject To\n");
    for row in m.rows() {
        let _ = write!(out, " {}: ", sanitize(&row.name));
        linear(&mut out, &names, row.coeffs.iter().copied());
        let op = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in m.variables().iter().zip(&names) {
        if v.integrality == Integrality::Binary && v.lower == 0.0 && v.upper == 1.0 {
            continue;
        }
        let lo = if v.lower == f64::NEG_INFINITY { "-inf".to_string() } else { num(v.lower) };
        let hi = if v.upper == f64::INFINITY { "+inf".to_string() } else { num(v.upper) };
        let _ = writeln!(out, " {lo} <= {name} <= {hi}");
    }
    let binaries: Vec<&String> = m
        .variables()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integrality == Integrality::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for n in binaries {
            let _ = writeln!(out, " {n}");
        }
    }
    let generals: Vec<&String> = m
        .variables()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integrality == Integrality::Integer)
        .map(|(_, n)| n)
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for n in generals {
            let _ = writeln!(out, " {n}");
        }
    }
    out.push_str("End\n");
    out
}
