//! Recursive-descent parser for scripts and standalone expressions.
//!
//! ```text
//! script := stmt*
//! stmt   := 'declare' ident (',' ident)* ';'
//!         | 'declare' ident '(' 'dx' '=' expr ',' 'dy' '=' expr ')' ';'
//!         | 'let' ident '=' expr ';'
//!         | 'kernel' ident ':' expr (',' expr)* ';'
//!         | 'run' <words up to ';'> ';'
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? int)*
//! atom   := int | 'Dx' | 'Dy' | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! `#` and `//` start comments running to the end of the line.

use num_bigint::BigInt;

use crate::ast::{Expr, ExprKind, Pos, Script, Stmt, StmtKind, RESERVED};
use crate::error::CliError;

pub fn parse_script(src: &str) -> Result<Script, CliError> {
    let mut p = Parser::new(src);
    let mut stmts = Vec::new();
    loop {
        p.skip_trivia();
        if p.at_end() {
            break;
        }
        stmts.push(p.statement()?);
    }
    Ok(Script { stmts })
}

/// Parses a whole string as one expression.
pub fn parse_expr(src: &str) -> Result<Expr, CliError> {
    let mut p = Parser::new(src);
    let e = p.expr()?;
    p.skip_trivia();
    if !p.at_end() {
        return Err(p.error(format!("unexpected `{}` after expression", p.peek().unwrap())));
    }
    Ok(e)
}

struct Parser {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl Parser {
    fn new(src: &str) -> Self {
        Parser {
            chars: src.chars().collect(),
            i: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn at_end(&self) -> bool {
        self.i >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> CliError {
        self.error_at(self.pos(), message)
    }

    fn error_at(&self, pos: Pos, message: impl Into<String>) -> CliError {
        CliError::Syntax {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => self.skip_line(),
                Some('/') if self.peek_at(1) == Some('/') => self.skip_line(),
                _ => return,
            }
        }
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.bump() {
            if c == '\n' {
                break;
            }
        }
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(c) => format!("`{c}`"),
        }
    }

    fn expect(&mut self, want: char) -> Result<(), CliError> {
        self.skip_trivia();
        if self.peek() == Some(want) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{want}`, found {}", self.describe_next())))
        }
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_trivia();
        if self.peek() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), CliError> {
        self.skip_trivia();
        let pos = self.pos();
        match self.peek() {
            Some(c) if is_ident_start(c) => {}
            _ => return Err(self.error(format!("expected a name, found {}", self.describe_next()))),
        }
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|&c| is_ident_char(c)) {
            s.push(c);
            self.bump();
        }
        Ok((s, pos))
    }

    fn binder(&mut self) -> Result<String, CliError> {
        let (name, pos) = self.ident()?;
        if RESERVED.contains(&name.as_str()) {
            return Err(self.error_at(pos, format!("`{name}` is reserved")));
        }
        Ok(name)
    }

    fn int(&mut self) -> Result<BigInt, CliError> {
        self.skip_trivia();
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
        }
        if s.is_empty() {
            return Err(self.error(format!("expected an integer, found {}", self.describe_next())));
        }
        Ok(s.parse().expect("digits"))
    }

    fn statement(&mut self) -> Result<Stmt, CliError> {
        let (kw, pos) = self.ident()?;
        let kind = match kw.as_str() {
            "declare" => {
                let name = self.binder()?;
                if self.eat('(') {
                    self.keyword("dx")?;
                    self.expect('=')?;
                    let dx = self.expr()?;
                    self.expect(',')?;
                    self.keyword("dy")?;
                    self.expect('=')?;
                    let dy = self.expr()?;
                    self.expect(')')?;
                    StmtKind::DeclareWith { name, dx, dy }
                } else {
                    let mut names = vec![name];
                    while self.eat(',') {
                        names.push(self.binder()?);
                    }
                    StmtKind::Declare(names)
                }
            }
            "let" => {
                let name = self.binder()?;
                self.expect('=')?;
                let value = self.expr()?;
                StmtKind::Let { name, value }
            }
            "kernel" => {
                let (op, _) = self.ident()?;
                self.expect(':')?;
                let mut elems = vec![self.expr()?];
                while self.eat(',') {
                    elems.push(self.expr()?);
                }
                StmtKind::Kernel { op, elems }
            }
            "run" => StmtKind::Run(self.words()?),
            other => {
                return Err(self.error_at(
                    pos,
                    format!("expected `declare`, `let`, `kernel` or `run`, found `{other}`"),
                ))
            }
        };
        self.expect(';')?;
        Ok(Stmt { kind, pos })
    }

    fn keyword(&mut self, want: &str) -> Result<(), CliError> {
        let (got, pos) = self.ident()?;
        if got == want {
            Ok(())
        } else {
            Err(self.error_at(pos, format!("expected `{want}`, found `{got}`")))
        }
    }

    /// Shell-like words up to (not including) the next unquoted `;`.
    fn words(&mut self) -> Result<Vec<String>, CliError> {
        let mut words = Vec::new();
        let mut cur: Option<String> = None;
        loop {
            match self.peek() {
                None => return Err(self.error("unterminated `run` statement: expected `;`")),
                Some(';') => break,
                Some(c) if c.is_whitespace() => {
                    self.bump();
                    words.extend(cur.take());
                }
                Some('"') => {
                    let start = self.pos();
                    self.bump();
                    let w = cur.get_or_insert_with(String::new);
                    loop {
                        match self.bump() {
                            None => return Err(self.error_at(start, "unterminated string")),
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some(c) => w.push(c),
                                None => return Err(self.error_at(start, "unterminated string")),
                            },
                            Some(c) => w.push(c),
                        }
                    }
                }
                Some(c) => {
                    self.bump();
                    cur.get_or_insert_with(String::new).push(c);
                }
            }
        }
        words.extend(cur);
        if words.is_empty() {
            return Err(self.error("`run` needs a command"));
        }
        Ok(words)
    }

    fn expr(&mut self) -> Result<Expr, CliError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_trivia();
            let pos = self.pos();
            let ctor: fn(Box<Expr>, Box<Expr>) -> ExprKind = match self.peek() {
                Some('+') => ExprKind::Add,
                Some('-') => ExprKind::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::at(ctor(Box::new(lhs), Box::new(rhs)), pos);
        }
    }

    fn term(&mut self) -> Result<Expr, CliError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_trivia();
            let pos = self.pos();
            let ctor: fn(Box<Expr>, Box<Expr>) -> ExprKind = match self.peek() {
                Some('*') => ExprKind::Mul,
                Some('/') if self.peek_at(1) != Some('/') => ExprKind::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::at(ctor(Box::new(lhs), Box::new(rhs)), pos);
        }
    }

    fn unary(&mut self) -> Result<Expr, CliError> {
        self.skip_trivia();
        let pos = self.pos();
        if self.peek() == Some('-') {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::at(ExprKind::Neg(Box::new(inner)), pos));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, CliError> {
        let mut base = self.atom()?;
        while self.eat('^') {
            self.skip_trivia();
            let pos = self.pos();
            let neg = self.eat('-');
            let n = self.int()?;
            let n: i64 = i64::try_from(n).map_err(|_| self.error_at(pos, "exponent too large"))?;
            let p = base.pos;
            base = Expr::at(ExprKind::Pow(Box::new(base), if neg { -n } else { n }), p);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, CliError> {
        self.skip_trivia();
        let pos = self.pos();
        match self.peek() {
            Some('(') => {
                self.bump();
                let mut e = self.expr()?;
                self.expect(')')?;
                e.pos = pos;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(Expr::at(ExprKind::Num(self.int()?), pos)),
            Some(c) if is_ident_start(c) => {
                let (name, _) = self.ident()?;
                match name.as_str() {
                    "Dx" => return Ok(Expr::at(ExprKind::Dx, pos)),
                    "Dy" => return Ok(Expr::at(ExprKind::Dy, pos)),
                    _ => {}
                }
                // a call only when `(` follows immediately
                if self.peek() == Some('(') {
                    self.bump();
                    let mut args = Vec::new();
                    if !self.eat(')') {
                        args.push(self.expr()?);
                        while self.eat(',') {
                            args.push(self.expr()?);
                        }
                        self.expect(')')?;
                    }
                    return Ok(Expr::at(ExprKind::Call(name, args), pos));
                }
                Ok(Expr::at(ExprKind::Name(name), pos))
            }
            _ => Err(self.error(format!("expected an expression, found {}", self.describe_next()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name(s: &str) -> Expr {
        Expr::new(ExprKind::Name(s.into()))
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a + b*c^2").unwrap();
        let expect = Expr::new(ExprKind::Add(
            Box::new(name("a")),
            Box::new(Expr::new(ExprKind::Mul(
                Box::new(name("b")),
                Box::new(Expr::new(ExprKind::Pow(Box::new(name("c")), 2))),
            ))),
        ));
        assert_eq!(e, expect);
    }

    #[test]
    fn error_positions() {
        let err = parse_script("let a = x;\nlet b = (x + ;").unwrap_err();
        match err {
            CliError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 14)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn run_words() {
        let s = parse_script("run laplace-chain --op \"schrodinger(y, x, 0)\" --steps 2;").unwrap();
        assert_eq!(
            s.stmts[0].kind,
            StmtKind::Run(vec![
                "laplace-chain".into(),
                "--op".into(),
                "schrodinger(y, x, 0)".into(),
                "--steps".into(),
                "2".into()
            ])
        );
    }

    #[test]
    fn comments_skipped() {
        let s = parse_script("# header\nlet a = x; // trailing\n").unwrap();
        assert_eq!(s.stmts.len(), 1);
    }

    #[test]
    fn reserved_binder() {
        assert!(parse_script("let x = 1;").is_err());
    }
}
