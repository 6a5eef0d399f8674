//! Syntax tree of the operator DSL.

use std::fmt;

/// Source position (1-based). Positions are metadata: they never take part
/// in equality, so a reparsed tree compares equal to the original.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    /// Non-negative integer literal; negative numbers are `Neg(Num)`.
    Num(num_bigint::BigInt),
    Name(String),
    Dx,
    Dy,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    /// Noncommutative composition.
    Mul(Box<Expr>, Box<Expr>),
    /// Division of functions.
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(String, Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            pos: Pos::default(),
        }
    }

    pub fn at(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    /// `declare f, g;` — free functions of `x, y`.
    Declare(Vec<String>),
    /// `declare u(dx = .., dy = ..);` — a symbol with given derivatives; the
    /// images may mention `u` itself.
    DeclareWith { name: String, dx: Expr, dy: Expr },
    /// `let NAME = expr;`
    Let { name: String, value: Expr },
    /// `kernel L: psi1, psi2;` — certify kernel elements of `L`.
    Kernel { op: String, elems: Vec<Expr> },
    /// `run <command line>;`
    Run(Vec<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Script {
    pub stmts: Vec<Stmt>,
}

/// Words that cannot be bound by `let` or `declare`.
pub const RESERVED: &[&str] = &["declare", "let", "kernel", "run", "x", "y", "Dx", "Dy"];
