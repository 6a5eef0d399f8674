//! Evaluation of scripts against a tower and a table of bindings.

use std::collections::HashMap;

use darboux_core::darboux::{
    compose_morphisms, make_first_order_wronskian, make_wronskian_dt, target_for,
};
use darboux_core::schrodinger::{Direction, HintRegistry};
use darboux_core::{DarbouxMorphism, DiffOp, FieldElem, SchrodingerOp, Tower, Var};
use num_traits::ToPrimitive;

use crate::ast::{Expr, ExprKind, Pos, Script, Stmt, StmtKind};
use crate::error::CliError;

#[derive(Clone, Debug)]
pub enum Value {
    Op(DiffOp),
    Schrodinger(SchrodingerOp),
    Morphism(DarbouxMorphism),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Op(op) if op.is_scalar() => "function",
            Value::Op(_) => "operator",
            Value::Schrodinger(_) => "Schrödinger operator",
            Value::Morphism(_) => "morphism",
        }
    }
}

fn type_error(pos: Pos, message: impl Into<String>) -> CliError {
    CliError::Type {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

#[derive(Default)]
pub struct Session {
    pub tower: Tower,
    env: HashMap<String, Value>,
    pub hints: HintRegistry,
    /// Certified kernel elements per operator name, in declaration order.
    kernels: HashMap<String, Vec<FieldElem>>,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.env.get(name)
    }

    pub fn bind(&mut self, name: &str, v: Value) {
        self.env.insert(name.to_string(), v);
    }

    pub fn kernel_of(&self, name: &str) -> &[FieldElem] {
        self.kernels.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Executes every statement except `run`, whose words are returned in
    /// order for the caller to dispatch.
    pub fn load(&mut self, script: &Script) -> Result<Vec<(Pos, Vec<String>)>, CliError> {
        let mut runs = Vec::new();
        for st in &script.stmts {
            if let StmtKind::Run(words) = &st.kind {
                runs.push((st.pos, words.clone()));
            } else {
                self.exec(st)?;
            }
        }
        Ok(runs)
    }

    pub fn exec(&mut self, st: &Stmt) -> Result<(), CliError> {
        match &st.kind {
            StmtKind::Declare(names) => {
                for n in names {
                    self.tower.declare_free_function(n)?;
                }
            }
            StmtKind::DeclareWith { name, dx, dy } => {
                let tower = &self.tower;
                let mut failure = None;
                let res = tower.declare_with(name, |_| {
                    let mut eval = |e: &Expr| match self.eval(e).and_then(|v| scalar(v, e.pos)) {
                        Ok(f) => Some(f),
                        Err(err) => {
                            failure.get_or_insert(err);
                            None
                        }
                    };
                    match (eval(dx), eval(dy)) {
                        (Some(a), Some(b)) => Ok((a, b)),
                        _ => Err(darboux_core::Error::InvalidDeclaration(format!(
                            "derivative images of `{name}` did not evaluate"
                        ))),
                    }
                });
                if let Some(err) = failure {
                    return Err(err);
                }
                res?;
            }
            StmtKind::Let { name, value } => {
                let v = self.eval(value)?;
                self.env.insert(name.clone(), v);
            }
            StmtKind::Kernel { op, elems } => {
                let l = self.schrodinger(&Expr::at(ExprKind::Name(op.clone()), st.pos))?;
                for e in elems {
                    let psi = scalar(self.eval(e)?, e.pos)?;
                    self.hints.certify(&l, psi.clone(), &self.tower)?;
                    let list = self.kernels.entry(op.clone()).or_default();
                    if !list.contains(&psi) {
                        list.push(psi);
                    }
                }
            }
            StmtKind::Run(_) => {
                return Err(CliError::Usage("`run` statements are dispatched by the caller".into()))
            }
        }
        Ok(())
    }

    fn lookup(&self, name: &str, pos: Pos) -> Result<Value, CliError> {
        if let Some(v) = self.env.get(name) {
            return Ok(v.clone());
        }
        let f = match name {
            "x" => Some(FieldElem::x()),
            "y" => Some(FieldElem::y()),
            _ => self.tower.lookup(name),
        };
        f.map(|f| Value::Op(DiffOp::scalar(f)))
            .ok_or_else(|| CliError::UnboundName {
                name: name.to_string(),
                line: pos.line,
                col: pos.col,
            })
    }

    pub fn eval(&self, e: &Expr) -> Result<Value, CliError> {
        let pos = e.pos;
        Ok(match &e.kind {
            ExprKind::Num(n) => Value::Op(DiffOp::scalar(FieldElem::from_bigint(n.clone()))),
            ExprKind::Name(n) => self.lookup(n, pos)?,
            ExprKind::Dx => Value::Op(DiffOp::dx()),
            ExprKind::Dy => Value::Op(DiffOp::dy()),
            ExprKind::Neg(a) => Value::Op(self.op(a)?.neg()),
            ExprKind::Add(a, b) => Value::Op(self.op(a)?.add(&self.op(b)?)),
            ExprKind::Sub(a, b) => Value::Op(self.op(a)?.sub(&self.op(b)?)),
            ExprKind::Mul(a, b) => Value::Op(self.op(a)?.compose(&self.op(b)?, &self.tower)),
            ExprKind::Div(a, b) => {
                let num = self.function(a)?;
                let den = self.function(b)?;
                Value::Op(DiffOp::scalar(num.checked_div(&den)?))
            }
            ExprKind::Pow(a, k) => {
                let base = self.op(a)?;
                if base.is_scalar() {
                    let k = i32::try_from(*k).map_err(|_| type_error(pos, "exponent too large"))?;
                    Value::Op(DiffOp::scalar(base.coeff(0, 0).pow(k)?))
                } else if *k >= 0 {
                    let k = u32::try_from(*k).map_err(|_| type_error(pos, "exponent too large"))?;
                    Value::Op(base.pow(k, &self.tower))
                } else {
                    return Err(type_error(pos, "negative powers apply only to functions"));
                }
            }
            ExprKind::Call(f, args) => self.call(f, args, pos)?,
        })
    }

    /// Evaluates to an operator; Schrödinger operators coerce.
    pub fn op(&self, e: &Expr) -> Result<DiffOp, CliError> {
        match self.eval(e)? {
            Value::Op(op) => Ok(op),
            Value::Schrodinger(l) => Ok(l.as_diffop()),
            Value::Morphism(_) => Err(type_error(e.pos, "a morphism cannot be used as an operator")),
        }
    }

    pub fn function(&self, e: &Expr) -> Result<FieldElem, CliError> {
        scalar(self.eval(e)?, e.pos)
    }

    pub fn schrodinger(&self, e: &Expr) -> Result<SchrodingerOp, CliError> {
        match self.eval(e)? {
            Value::Schrodinger(l) => Ok(l),
            Value::Op(op) => SchrodingerOp::from_diffop(&op)
                .map_err(|err| type_error(e.pos, err.to_string())),
            other => Err(type_error(
                e.pos,
                format!("expected a Schrödinger operator, found a {}", other.kind()),
            )),
        }
    }

    pub fn morphism(&self, e: &Expr) -> Result<DarbouxMorphism, CliError> {
        match self.eval(e)? {
            Value::Morphism(m) => Ok(m),
            other => Err(type_error(
                e.pos,
                format!("expected a morphism, found a {}", other.kind()),
            )),
        }
    }

    fn word<'e>(&self, e: &'e Expr) -> Option<&'e str> {
        match &e.kind {
            ExprKind::Name(n) if !self.env.contains_key(n) => Some(n),
            _ => None,
        }
    }

    fn var_arg(&self, e: &Expr) -> Result<Var, CliError> {
        match &e.kind {
            ExprKind::Name(n) if n == "x" => Ok(Var::X),
            ExprKind::Name(n) if n == "y" => Ok(Var::Y),
            _ => Err(type_error(e.pos, "expected `x` or `y`")),
        }
    }

    fn int_arg(&self, e: &Expr) -> Result<u32, CliError> {
        match &e.kind {
            ExprKind::Num(n) => n.to_u32().ok_or_else(|| type_error(e.pos, "integer too large")),
            _ => Err(type_error(e.pos, "expected a non-negative integer literal")),
        }
    }

    fn call(&self, f: &str, args: &[Expr], pos: Pos) -> Result<Value, CliError> {
        let arity = |ok: bool, want: &str| {
            if ok {
                Ok(())
            } else {
                Err(type_error(pos, format!("`{f}` expects {want}")))
            }
        };
        let t = &self.tower;
        Ok(match f {
            "schrodinger" => {
                arity(args.len() == 3, "(a, b, c)")?;
                Value::Schrodinger(SchrodingerOp::new(
                    self.function(&args[0])?,
                    self.function(&args[1])?,
                    self.function(&args[2])?,
                ))
            }
            "morphism" => {
                arity(args.len() == 3 || args.len() == 4, "(L, M, N) or (L, M, N, L1)")?;
                let l = self.schrodinger(&args[0])?;
                let m = self.op(&args[1])?;
                let n = self.op(&args[2])?;
                let l1 = match args.get(3) {
                    Some(e) => self.schrodinger(e)?,
                    None => target_for(&l, &m, &n, t)?,
                };
                Value::Morphism(DarbouxMorphism::new(l, l1, m, n, t)?)
            }
            "identity" => {
                arity(args.len() == 1, "(L)")?;
                Value::Morphism(DarbouxMorphism::identity(&self.schrodinger(&args[0])?))
            }
            "laplace" => {
                arity(args.len() == 2, "(L, right|left)")?;
                let l = self.schrodinger(&args[0])?;
                let dir: Direction = self
                    .word(&args[1])
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| type_error(args[1].pos, "expected `right` or `left`"))?;
                Value::Morphism(l.laplace_transform(dir, t)?.morphism)
            }
            "first_order" => {
                arity(args.len() == 3, "(L, psi, x|y)")?;
                let l = self.schrodinger(&args[0])?;
                let psi = self.function(&args[1])?;
                let v = self.var_arg(&args[2])?;
                Value::Morphism(make_first_order_wronskian(&l, &psi, v, t)?.0)
            }
            "wronskian" => {
                arity(args.len() >= 3, "(L, m, n, psi...)")?;
                let m = self.int_arg(&args[1])?;
                let n = self.int_arg(&args[2])?;
                let kernel = if args.len() > 3 {
                    args[3..]
                        .iter()
                        .map(|e| self.function(e))
                        .collect::<Result<Vec<_>, _>>()?
                } else {
                    match &args[0].kind {
                        ExprKind::Name(name) => self.kernel_of(name).to_vec(),
                        _ => Vec::new(),
                    }
                };
                let l = self.schrodinger(&args[0])?;
                Value::Morphism(make_wronskian_dt(&l, &kernel, m, n, t)?)
            }
            "compose" => {
                arity(args.len() >= 2, "(T1, T2, ...)")?;
                let mut acc = self.morphism(&args[0])?;
                for e in &args[1..] {
                    acc = compose_morphisms(&acc, &self.morphism(e)?, t)?;
                }
                Value::Morphism(acc)
            }
            "source" | "target" => {
                arity(args.len() == 1, "(T)")?;
                let m = self.morphism(&args[0])?;
                Value::Schrodinger(if f == "source" { m.source() } else { m.target() }.clone())
            }
            "diff" => {
                arity(args.len() == 2, "(f, x|y)")?;
                let e = self.function(&args[0])?;
                let v = self.var_arg(&args[1])?;
                Value::Op(DiffOp::scalar(t.derive(&e, v)))
            }
            "integrate" => {
                arity(args.len() == 2, "(f, x|y)")?;
                let e = self.function(&args[0])?;
                let v = self.var_arg(&args[1])?;
                Value::Op(DiffOp::scalar(t.integrate(&e, v)))
            }
            _ => return Err(type_error(pos, format!("unknown function `{f}`"))),
        })
    }
}

fn scalar(v: Value, pos: Pos) -> Result<FieldElem, CliError> {
    match v {
        Value::Op(op) if op.is_scalar() => Ok(op.coeff(0, 0)),
        other => Err(type_error(
            pos,
            format!("expected a function, found a {}", other.kind()),
        )),
    }
}
