//! Canonical source text for a session. Parsing the output gives back a tree
//! that prints identically; comments and layout are not preserved.

use std::fmt::Write;

use super::ast::*;

pub fn print_session(s: &Session) -> String {
    let mut out = String::new();
    for stmt in &s.stmts {
        out.push_str(&print_stmt(stmt));
        out.push('\n');
    }
    out
}

pub fn print_stmt(s: &Stmt) -> String {
    let mut out = match &s.kind {
        StmtKind::Coord { specs, degree } => {
            let specs: Vec<String> = specs
                .iter()
                .map(|c| match c.range {
                    Some(r) => format!("{}[{}]", c.name.name, range(r)),
                    None => c.name.name.clone(),
                })
                .collect();
            format!("coord {} deg {degree}", specs.join(", "))
        }
        StmtKind::Index { names, range: r } => format!("index {} = {}", names_list(names), range(*r)),
        StmtKind::Symbol { name, arity, attrs } => {
            let mut t = format!("symbol {}", name.name);
            if *arity > 0 {
                let _ = write!(t, "[{arity}]");
            }
            for a in attrs {
                match a {
                    SymAttr::Symmetry { antisym, positions, .. } => {
                        t.push_str(if *antisym { " antisym" } else { " sym" });
                        if let Some(p) = positions {
                            let _ = write!(t, "({})", range(*p));
                        }
                    }
                    SymAttr::Const => t.push_str(" const"),
                    SymAttr::Inverse(n) => {
                        let _ = write!(t, " inverse {}", n.name);
                    }
                }
            }
            t
        }
        StmtKind::Degree(n) => format!("degree {n}"),
        StmtKind::Pair { left, right, modifier } => {
            let mut t = format!("pair {}, {}", left.name, right.name);
            match modifier {
                Some(PairMod::Sign(s)) => {
                    let _ = write!(t, " sign {s}");
                }
                Some(PairMod::Weight(w)) => {
                    let _ = write!(t, " weight {}", w.name);
                }
                None => {}
            }
            t
        }
        StmtKind::Lift { n, items } => {
            let items: Vec<String> = items
                .iter()
                .map(|i| match &i.weight {
                    Some(w) => format!("{} -> {} weight {}", i.family.name, i.conjugate.name, w.name),
                    None => format!("{} -> {}", i.family.name, i.conjugate.name),
                })
                .collect();
            format!("lift {n}: {}", items.join(", "))
        }
        StmtKind::Lagrangian(names) => format!("lagrangian {}", names_list(names)),
        StmtKind::Theta(e) => format!("theta = {}", print_expr(e)),
        StmtKind::Alpha(e) => format!("alpha = {}", print_expr(e)),
        StmtKind::Relation { binder, lhs, rhs } => {
            let mut t = String::from("relation");
            if !binder.is_empty() {
                let _ = write!(t, "[{}]", bind_list(binder));
            }
            let _ = write!(t, " {}", print_expr(lhs));
            if let Some(r) = rhs {
                let _ = write!(t, " = {}", print_expr(r));
            }
            t
        }
        StmtKind::Closed(n) => format!("closed {}", n.name),
        StmtKind::Current { name, binder, expr, twisted } => {
            let mut t = format!("{} {}", if *twisted { "basis" } else { "current" }, name.name);
            if !binder.is_empty() {
                let _ = write!(t, "[{}]", bind_list(binder));
            }
            let _ = write!(t, " = {}", print_expr(expr));
            t
        }
        StmtKind::Command(c) => print_command(c),
    };
    out.push(';');
    out
}

pub fn print_command(c: &Command) -> String {
    let k = c.keyword();
    match c {
        Command::Bracket(a, b) | Command::Derived(a, b) | Command::Commutator(a, b) => {
            format!("{k} {}, {}", print_expr(a), print_expr(b))
        }
        Command::Twist(e, by) => match by {
            Some(a) => format!("{k} {} by {}", print_expr(e), print_expr(a)),
            None => format!("{k} {}", print_expr(e)),
        },
        Command::Preserves(by) => match by {
            Some(a) => format!("{k} by {}", print_expr(a)),
            None => k.into(),
        },
        Command::Master | Command::Canonical | Command::Small => k.into(),
        Command::Table(names) => format!("{k} {}", names_list(names)),
        Command::Render(e) | Command::Show(e) => format!("{k} {}", print_expr(e)),
    }
}

/// The arguments of a command without its keyword, used as report subjects.
pub fn command_subject(c: &Command) -> String {
    let full = print_command(c);
    full.strip_prefix(c.keyword()).unwrap_or(&full).trim_start().to_string()
}

fn range(r: Range) -> String {
    format!("{}..{}", r.lo, r.hi)
}

fn names_list(names: &[Ident]) -> String {
    names.iter().map(|n| n.name.as_str()).collect::<Vec<_>>().join(", ")
}

fn bind_list(vars: &[BindVar]) -> String {
    vars.iter()
        .map(|v| match v.range {
            Some(r) => format!("{} = {}", v.name.name, range(r)),
            None => v.name.name.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn index_list(idx: &[Index]) -> String {
    idx.iter()
        .map(|i| match i {
            Index::Lit(n) => n.to_string(),
            Index::Var(v) => v.name.clone(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

// precedence levels
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => SUM,
        ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => PRODUCT,
        ExprKind::Neg(_) | ExprKind::Sum(..) => UNARY,
        ExprKind::Pow(..) => POWER,
        _ => ATOM,
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Name { name, indices, derivs } => {
            let mut t = String::new();
            if let Some(d) = derivs {
                let _ = write!(t, "d[{}]", index_list(d));
            }
            t.push_str(&name.name);
            if let Some(i) = indices {
                let _ = write!(t, "[{}]", index_list(i));
            }
            t
        }
        ExprKind::Theta => "theta".into(),
        ExprKind::Alpha => "alpha".into(),
        ExprKind::Neg(inner) => format!("-{}", wrap(inner, UNARY, false)),
        ExprKind::Binary(op, a, b) => {
            let (sym, lvl) = match op {
                BinOp::Add => ("+", SUM),
                BinOp::Sub => ("-", SUM),
                BinOp::Mul => ("*", PRODUCT),
                BinOp::Div => ("/", PRODUCT),
            };
            // a `sum(...)` body swallows everything to its right inside a
            // product, so a sum on the left of `*` or `/` needs parentheses
            let left = if lvl == PRODUCT && trailing_sum(a) { format!("({})", print_expr(a)) } else { wrap(a, lvl, false) };
            format!("{left} {sym} {}", wrap(b, lvl, true))
        }
        ExprKind::Pow(base, n) => format!("{}^{n}", wrap(base, ATOM, false)),
        ExprKind::Bracket(a, b) => format!("{{{}, {}}}", print_expr(a), print_expr(b)),
        ExprKind::Sum(vars, body) => format!("sum({}) {}", bind_list(vars), wrap(body, PRODUCT, false)),
        ExprKind::Restrict(inner) => format!("restrict({})", print_expr(inner)),
        ExprKind::Twist(inner) => format!("twist({})", print_expr(inner)),
    }
}

/// Whether printing `e` ends in an unparenthesized `sum(...)` body.
fn trailing_sum(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Sum(..) => true,
        ExprKind::Neg(inner) => trailing_sum(inner),
        ExprKind::Binary(BinOp::Mul | BinOp::Div, _, b) => level(b) > PRODUCT && trailing_sum(b),
        _ => false,
    }
}

/// Prints `e` as an operand at precedence `min`; a right operand of a
/// left-associative operator needs strictly higher precedence.
fn wrap(e: &Expr, min: u8, right: bool) -> String {
    let l = level(e);
    let needs = if right { l <= min } else { l < min };
    if needs {
        format!("({})", print_expr(e))
    } else {
        print_expr(e)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse, parse_expr};
    use super::*;

    fn round(src: &str) -> String {
        print_expr(&parse_expr(src).unwrap())
    }

    #[test]
    fn minimal_parentheses() {
        assert_eq!(round("a - (b - c)"), "a - (b - c)");
        assert_eq!(round("(a - b) - c"), "a - b - c");
        assert_eq!(round("a / (2 * 3)"), "a / (2 * 3)");
        assert_eq!(round("(a + b)^2"), "(a + b)^2");
        assert_eq!(round("-(a*b)"), "-(a * b)");
        assert_eq!(round("-a^2"), "-a^2");
        assert_eq!(round("(sum(I=1..2) x[I]) * y"), "(sum(I = 1..2) x[I]) * y");
        assert_eq!(round("y * sum(I=1..2) x[I] * z"), "y * sum(I = 1..2) x[I] * z");
        assert_eq!(round("{ {a, theta}, b }"), "{{a, theta}, b}");
        assert_eq!(round("d[1,K]H[1,2,3]"), "d[1,K]H[1,2,3]");
    }

    #[test]
    fn fixpoint() {
        for src in [
            "(sum(I=1..2) x[I]) * (sum(J=1..2) y[J]) / 2",
            "-(-a) - -b",
            "sum(I=1..2) -sum(J=1..2) a[I,J] * b",
            "a * (b * c)",
            "(a * sum(I = 1..2) x[I]) * y",
        ] {
            let once = round(src);
            assert_eq!(round(&once), once, "{src}");
            let a = parse_expr(src).unwrap();
            let b = parse_expr(&once).unwrap();
            assert_eq!(print_expr(&a), print_expr(&b));
        }
        let s = parse("coord x[1..2] deg 0; symbol pi[2] antisym; relation[I, J = 1..2] pi[I,J] = 0; show x[1];").unwrap();
        let text = print_session(&s);
        assert_eq!(print_session(&parse(&text).unwrap()), text);
    }
}
