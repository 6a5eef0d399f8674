//! Canonical printer; `parse(print(s)) == s` for every tree it accepts.

use crate::ast::{Expr, ExprKind, Script, Stmt, StmtKind};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Add(..) | ExprKind::Sub(..) => ADD,
        ExprKind::Mul(..) | ExprKind::Div(..) => MUL,
        ExprKind::Neg(_) => NEG,
        ExprKind::Pow(..) => POW,
        _ => ATOM,
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, ADD);
    out
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let paren = prec(e) < min;
    if paren {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Num(n) => out.push_str(&n.to_string()),
        ExprKind::Name(s) => out.push_str(s),
        ExprKind::Dx => out.push_str("Dx"),
        ExprKind::Dy => out.push_str("Dy"),
        ExprKind::Neg(a) => {
            out.push('-');
            write_expr(out, a, NEG);
        }
        // right operands bind one level tighter so the tree shape survives
        ExprKind::Add(a, b) => binary(out, a, " + ", b, ADD),
        ExprKind::Sub(a, b) => binary(out, a, " - ", b, ADD),
        ExprKind::Mul(a, b) => binary(out, a, "*", b, MUL),
        ExprKind::Div(a, b) => binary(out, a, "/", b, MUL),
        ExprKind::Pow(a, k) => {
            write_expr(out, a, POW);
            out.push('^');
            out.push_str(&k.to_string());
        }
        ExprKind::Call(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, ADD);
            }
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

fn binary(out: &mut String, a: &Expr, op: &str, b: &Expr, level: u8) {
    write_expr(out, a, level);
    out.push_str(op);
    write_expr(out, b, level + 1);
}

fn quote(w: &str) -> String {
    let plain = !w.is_empty()
        && w.chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '"' | '\\' | ';'));
    if plain {
        return w.to_string();
    }
    let mut s = String::from('"');
    for c in w.chars() {
        if matches!(c, '"' | '\\') {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('"');
    s
}

pub fn print_stmt(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Declare(names) => format!("declare {};", names.join(", ")),
        StmtKind::DeclareWith { name, dx, dy } => format!(
            "declare {name}(dx = {}, dy = {});",
            print_expr(dx),
            print_expr(dy)
        ),
        StmtKind::Let { name, value } => format!("let {name} = {};", print_expr(value)),
        StmtKind::Kernel { op, elems } => format!(
            "kernel {op}: {};",
            elems.iter().map(print_expr).collect::<Vec<_>>().join(", ")
        ),
        StmtKind::Run(words) => format!(
            "run {};",
            words.iter().map(|w| quote(w)).collect::<Vec<_>>().join(" ")
        ),
    }
}

/// One statement per line.
pub fn print_script(s: &Script) -> String {
    let mut out = String::new();
    for st in &s.stmts {
        out.push_str(&print_stmt(st));
        out.push('\n');
    }
    out
}
