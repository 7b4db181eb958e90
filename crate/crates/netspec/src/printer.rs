//! Canonical text form. Parsing the output yields an equal tree, and
//! printing that tree again reproduces the same bytes.

use std::fmt::Write;

use crate::ast::{Composition, Document, ExoDef, Expr, Item, List, Matrix, Number, SpaceKind, TripleBody};

/// Shortest round-tripping decimal; integral values drop the `.0`.
pub fn format_real(x: f64) -> String {
    let s = format!("{x:?}");
    match s.strip_suffix(".0") {
        Some(t) => t.to_string(),
        None => s,
    }
}

fn number(n: &Number) -> String {
    match *n {
        Number::Real(x) => format_real(x),
        Number::Imag(x) => format!("{}i", format_real(x)),
        Number::Complex(re, im) => {
            let sign = if im.is_sign_negative() { '-' } else { '+' };
            format!("({}{sign}{}i)", format_real(re), format_real(im.abs()))
        }
    }
}

// Binding strength: sums 0, products 1, unary minus 2, powers 3, atoms 4.
fn level(e: &Expr) -> u8 {
    match e {
        Expr::Sum(..) | Expr::Diff(..) => 0,
        Expr::Prod(..) => 1,
        Expr::Neg(..) => 2,
        Expr::Pow(..) => 3,
        Expr::Num(Number::Real(x) | Number::Imag(x), _) if x.is_sign_negative() => 2,
        Expr::Num(..) | Expr::Symbol { .. } | Expr::Adj(..) => 4,
    }
}

fn write_at(out: &mut String, e: &Expr, min: u8) {
    if level(e) < min {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Num(n, _) => out.push_str(&number(n)),
        Expr::Symbol { name, label, .. } => {
            let _ = write!(out, "{name}@{label}");
        }
        Expr::Sum(a, b) | Expr::Diff(a, b) => {
            write_at(out, a, 0);
            out.push_str(if matches!(e, Expr::Sum(..)) { " + " } else { " - " });
            write_at(out, b, 1);
        }
        Expr::Prod(a, b) => {
            write_at(out, a, 1);
            out.push_str(" * ");
            write_at(out, b, 2);
        }
        Expr::Neg(a, _) => {
            out.push('-');
            write_at(out, a, 2);
        }
        Expr::Pow(a, k, _) => {
            write_at(out, a, 4);
            let _ = write!(out, "^{k}");
        }
        Expr::Adj(a, _) => {
            out.push_str("adj(");
            write_expr(out, a);
            out.push(')');
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn list(items: &[Expr]) -> String {
    let parts: Vec<String> = items.iter().map(print_expr).collect();
    format!("[{}]", parts.join(", "))
}

fn matrix(m: &Matrix) -> String {
    let rows: Vec<String> = m.rows.iter().map(|r| list(r)).collect();
    format!("[{}]", rows.join(", "))
}

fn reals(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format_real(*x)).collect();
    format!("[{}]", parts.join(", "))
}

fn body(out: &mut String, b: &TripleBody) {
    let mut fields = Vec::new();
    if let Some(s) = &b.s {
        fields.push(format!("S = {}", matrix(s)));
    }
    if let Some(List { items, .. }) = &b.l {
        fields.push(format!("L = {}", list(items)));
    }
    if let Some(h) = &b.h {
        fields.push(format!("H = {}", print_expr(h)));
    }
    if fields.is_empty() {
        out.push_str("{ }");
        return;
    }
    out.push_str("{\n");
    let n = fields.len();
    for (i, f) in fields.into_iter().enumerate() {
        let _ = writeln!(out, "  {f}{}", if i + 1 < n { ";" } else { "" });
    }
    out.push('}');
}

pub fn print_document(doc: &Document) -> String {
    let mut out = String::new();
    for item in &doc.items {
        match item {
            Item::Space { name, kind, .. } => {
                let _ = match kind {
                    SpaceKind::Fock(d) => write!(out, "space {} fock {d}", name.text),
                    SpaceKind::Qubit => write!(out, "space {} qubit", name.text),
                };
            }
            Item::System { name, body: b } => {
                let _ = write!(out, "system {} ", name.text);
                body(&mut out, b);
            }
            Item::Exosystem { name, def } => {
                let _ = write!(out, "exosystem {} ", name.text);
                match def {
                    ExoDef::Trivial { channels, .. } => {
                        let _ = write!(out, "= trivial({channels})");
                    }
                    ExoDef::Amplitudes {
                        channels,
                        grid,
                        coupling,
                        ..
                    } => {
                        let _ = write!(out, "= amplitudes({channels}");
                        if let Some(g) = grid {
                            let _ = write!(out, ", grid = {}", reals(g));
                        }
                        if let Some(k) = coupling {
                            let _ = write!(out, ", K = {}", list(&k.items));
                        }
                        out.push(')');
                    }
                    ExoDef::Block(b) => body(&mut out, b),
                }
            }
            Item::Observable { name, expr } => {
                let _ = write!(out, "observable {} = {}", name.text, print_expr(expr));
            }
            Item::Compose { name, def } => {
                let _ = write!(out, "compose {} = ", name.text);
                let _ = match def {
                    Composition::Boxplus(a, b) => write!(out, "{} boxplus {}", a.text, b.text),
                    Composition::Series(a, b) => write!(out, "{} series {}", a.text, b.text),
                    Composition::Lft(a, k, _) => write!(out, "lft({}, {k})", a.text),
                    Composition::Wedge { plant, exo, coupling } => match coupling {
                        None => write!(out, "wedge({}, {})", plant.text, exo.text),
                        Some((k, v)) => write!(
                            out,
                            "wedge({}, {}, K = {}, v = {})",
                            plant.text,
                            exo.text,
                            list(&k.items),
                            list(&v.items)
                        ),
                    },
                };
            }
            Item::Top(name) => {
                let _ = write!(out, "top {}", name.text);
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_document, parse_expr};

    #[test]
    fn minimal_parentheses() {
        for (src, canon) in [
            ("(a@c + n@c) * (id@c - a@c)", "(a@c + n@c) * (id@c - a@c)"),
            ("a@c - (n@c - id@c)", "a@c - (n@c - id@c)"),
            ("(a@c - n@c) - id@c", "a@c - n@c - id@c"),
            ("-(a@c * n@c)", "-(a@c * n@c)"),
            ("(-a@c)^2", "(-a@c)^2"),
            ("-a@c^2", "-a@c^2"),
            ("(a@c^2)^3", "(a@c^2)^3"),
            ("0.5*(1+2i)*adj( a@c )", "0.5 * (1+2i) * adj(a@c)"),
            ("2.0 * (3i + 1)", "2 * (3i + 1)"),
        ] {
            let e = parse_expr(src).unwrap();
            let printed = print_expr(&e);
            assert_eq!(printed, canon);
            assert_eq!(parse_expr(&printed).unwrap(), e);
        }
    }

    #[test]
    fn document_fixed_point() {
        let src = "# c\nspace cav fock 4   space q qubit\nsystem P {H=n@cav;L=[a@cav]}\nsystem E { }\nexosystem W = amplitudes(1, grid = [-1.5, 0], K = [a@cav])\nexosystem X = trivial(2)\nobservable V = 0.5*(id@q+sz@q)\ncompose N = P series P\ncompose M = wedge(N, E, K = [a@cav], v = [1])\ntop M\n";
        let doc = parse_document(src).unwrap();
        let once = print_document(&doc);
        let reparsed = parse_document(&once).unwrap();
        assert_eq!(reparsed, doc);
        assert_eq!(print_document(&reparsed), once);
        assert!(once.contains("system P {\n  L = [a@cav];\n  H = n@cav\n}\n"));
    }
}
