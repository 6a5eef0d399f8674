//! Command surface: argument definitions, dispatch and JSON reports.

use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use darboux_core::darboux::{
    compose_morphisms, intertwining_residual, make_wronskian_dt, solve_first_order, target_for,
};
use darboux_core::factorizer::factorize;
use darboux_core::records::{sparse_operator, ChainRecord, ChainReport, MorphismRecord, OperatorRecord};
use darboux_core::schrodinger::Direction;
use darboux_core::DarbouxMorphism;
use serde_json::{json, Value as Json};

use crate::error::CliError;
use crate::parse::parse_expr;
use crate::session::Session;

pub const SCHEMA: &str = "darboux-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Right,
    Left,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Right => Direction::Right,
            DirectionArg::Left => Direction::Left,
        }
    }
}

fn parse_split(s: &str) -> Result<(u32, u32), String> {
    let (m, n) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `m,n`, got `{s}`"))?;
    let m = m.trim().parse().map_err(|_| format!("bad count `{m}`"))?;
    let n = n.trim().parse().map_err(|_| format!("bad count `{n}`"))?;
    Ok((m, n))
}

/// Every flag that takes a value accepts a DSL expression evaluated against
/// the script's bindings; plain names are the common case.
#[derive(Clone, Debug, PartialEq, Subcommand)]
pub enum Command {
    /// Laplace invariants h, k.
    Invariants {
        #[arg(long, default_value = "L")]
        op: String,
    },
    /// Iterated Laplace transformations.
    LaplaceChain {
        #[arg(long, default_value = "L")]
        op: String,
        #[arg(long, default_value_t = 1)]
        steps: u32,
        #[arg(long, value_enum, default_value = "right")]
        direction: DirectionArg,
    },
    /// Checks that a function is annihilated by the operator.
    CertifyKernel {
        #[arg(long, default_value = "L")]
        op: String,
        #[arg(long)]
        psi: String,
    },
    /// Wronskian-type transformation from m + n kernel elements.
    WronskianDt {
        #[arg(long, default_value = "L")]
        op: String,
        #[arg(long, value_parser = parse_split)]
        split: (u32, u32),
        /// Kernel elements; defaults to those certified for `--op`.
        #[arg(long)]
        kernel: Vec<String>,
    },
    /// All first-order transformations generated by a given `M`.
    SolveFirstOrder {
        #[arg(long, default_value = "L")]
        op: String,
        #[arg(long)]
        m: String,
    },
    /// Checks the intertwining relation.
    Verify {
        /// A bound morphism; alternatively give `--op`, `--m`, `--n`.
        #[arg(long)]
        morphism: Option<String>,
        #[arg(long, default_value = "L")]
        op: String,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        n: Option<String>,
        /// Target operator; solved for when omitted.
        #[arg(long)]
        target: Option<String>,
    },
    /// Composition `second ∘ first`.
    Compose {
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Splits a morphism into first-order steps.
    Factorize {
        #[arg(long, default_value = "T")]
        morphism: String,
    },
    /// Whether a morphism is invertible (a piece of the Laplace chain).
    Classify {
        #[arg(long, default_value = "T")]
        morphism: String,
    },
    /// Only executes the script's own `run` statements.
    Run,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Invariants { .. } => "invariants",
            Command::LaplaceChain { .. } => "laplace-chain",
            Command::CertifyKernel { .. } => "certify-kernel",
            Command::WronskianDt { .. } => "wronskian-dt",
            Command::SolveFirstOrder { .. } => "solve-first-order",
            Command::Verify { .. } => "verify",
            Command::Compose { .. } => "compose",
            Command::Factorize { .. } => "factorize",
            Command::Classify { .. } => "classify",
            Command::Run => "run",
        }
    }
}

/// A command line inside a script's `run` statement.
#[derive(Debug, Parser)]
#[command(no_binary_name = true)]
pub struct ScriptCommand {
    #[command(subcommand)]
    pub command: Command,
}

/// Outcome of one command.
#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub args: Vec<String>,
    pub result: Option<Json>,
    pub error: Option<CliError>,
    /// A check inside an otherwise successful run came out false.
    pub failed_check: Option<&'static str>,
    pub millis: f64,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match (&self.error, self.failed_check) {
            (Some(e), _) => e.exit_code(),
            (None, Some(_)) => 2,
            (None, None) => 0,
        }
    }

    pub fn to_json(&self) -> Json {
        let mut out = json!({
            "schema": SCHEMA,
            "command": self.command,
            "args": self.args,
            "ok": self.exit_code() == 0,
            "timingMs": (self.millis * 1000.0).round() / 1000.0,
        });
        if let Some(r) = &self.result {
            out["result"] = r.clone();
        }
        if let Some(e) = &self.error {
            out["error"] = error_json(e);
        } else if let Some(check) = self.failed_check {
            out["error"] = json!({ "code": check, "message": format!("{check} check failed") });
        }
        out
    }
}

pub fn error_json(e: &CliError) -> Json {
    let mut j = json!({ "code": e.code(), "message": e.to_string() });
    if let Some((line, col)) = e.location() {
        j["line"] = json!(line);
        j["col"] = json!(col);
    }
    j
}

struct Outcome {
    result: Json,
    failed_check: Option<&'static str>,
}

impl Outcome {
    fn ok(result: Json) -> Self {
        Outcome {
            result,
            failed_check: None,
        }
    }

    fn checked(result: Json, ok: bool, check: &'static str) -> Self {
        Outcome {
            result,
            failed_check: (!ok).then_some(check),
        }
    }
}

fn expr_flag<T>(
    s: &Session,
    flag: &str,
    src: &str,
    f: impl FnOnce(&Session, &crate::ast::Expr) -> Result<T, CliError>,
) -> Result<T, CliError> {
    let e = parse_expr(src).map_err(|e| e.in_flag(flag))?;
    f(s, &e).map_err(|e| e.in_flag(flag))
}

fn morphism_json(m: &DarbouxMorphism, s: &Session) -> (Json, bool) {
    let rec = MorphismRecord::new(m, &s.tower);
    let ok = rec.verified;
    (serde_json::to_value(rec).expect("records serialize"), ok)
}

pub fn execute(s: &mut Session, cmd: &Command, args: Vec<String>) -> Report {
    let start = Instant::now();
    let outcome = dispatch(s, cmd);
    let millis = start.elapsed().as_secs_f64() * 1000.0;
    let command = cmd.name().to_string();
    match outcome {
        Ok(o) => Report {
            command,
            args,
            result: Some(o.result),
            error: None,
            failed_check: o.failed_check,
            millis,
        },
        Err(e) => Report {
            command,
            args,
            result: None,
            error: Some(e),
            failed_check: None,
            millis,
        },
    }
}

fn dispatch(s: &mut Session, cmd: &Command) -> Result<Outcome, CliError> {
    let t = &s.tower;
    match cmd {
        Command::Invariants { op } => {
            let l = expr_flag(s, "--op", op, Session::schrodinger)?;
            let (h, k) = l.laplace_invariants(t);
            Ok(Outcome::ok(json!({ "h": t.format(&h), "k": t.format(&k) })))
        }
        Command::LaplaceChain {
            op,
            steps,
            direction,
        } => {
            let l = expr_flag(s, "--op", op, Session::schrodinger)?;
            let dir: Direction = (*direction).into();
            let signed = match dir {
                Direction::Right => *steps as i64,
                Direction::Left => -(*steps as i64),
            };
            let chain = l.laplace_chain(signed, t);
            let sign = if dir == Direction::Right { 1 } else { -1 };
            let operators: Vec<ChainRecord> = chain
                .operators
                .iter()
                .enumerate()
                .map(|(i, op)| ChainRecord::new(sign * i as i64, op, t))
                .collect();
            let mut all_verified = chain.relations_hold;
            let morphisms: Vec<Json> = chain
                .steps
                .iter()
                .map(|st| {
                    let (j, ok) = morphism_json(&st.morphism, s);
                    all_verified &= ok;
                    j
                })
                .collect();
            Ok(Outcome::checked(
                json!({
                    "direction": dir.name(),
                    "requested": steps,
                    "operators": operators,
                    "steps": morphisms,
                    "termination": chain.termination,
                    "relationsHold": chain.relations_hold,
                }),
                all_verified,
                "Verification",
            ))
        }
        Command::CertifyKernel { op, psi } => {
            let l = expr_flag(s, "--op", op, Session::schrodinger)?;
            let f = expr_flag(s, "--psi", psi, Session::function)?;
            l.certify_kernel(&f, t)?;
            s.hints.certify(&l, f, &s.tower)?;
            Ok(Outcome::ok(json!({ "certified": true, "residual": "0" })))
        }
        Command::WronskianDt { op, split, kernel } => {
            let l = expr_flag(s, "--op", op, Session::schrodinger)?;
            let elems = if kernel.is_empty() {
                s.kernel_of(op).to_vec()
            } else {
                kernel
                    .iter()
                    .map(|k| expr_flag(s, "--kernel", k, Session::function))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let (m, n) = *split;
            let dt = make_wronskian_dt(&l, &elems, m, n, t)?;
            let (rec, ok) = morphism_json(&dt, s);
            Ok(Outcome::checked(
                json!({
                    "split": [m, n],
                    "kernelElements": elems.len(),
                    "order": dt.order(),
                    "morphism": rec,
                }),
                ok,
                "Verification",
            ))
        }
        Command::SolveFirstOrder { op, m } => {
            let l = expr_flag(s, "--op", op, Session::schrodinger)?;
            let mop = expr_flag(s, "--m", m, Session::op)?;
            let sol = solve_first_order(&l, &mop, t)?;
            let family = sol.family_morphism(&l, t)?;
            let (default_n, default_target) = sol.default_member();
            let verified = family.verify(t).0;
            Ok(Outcome::checked(
                json!({
                    "M": sparse_operator(&sol.m, t),
                    "N": sparse_operator(&sol.n, t),
                    "target": OperatorRecord::new(&sol.target, t),
                    "parameters": sol.parameters.iter().map(|p| t.format(p)).collect::<Vec<_>>(),
                    "default": {
                        "N": sparse_operator(&default_n, t),
                        "target": OperatorRecord::new(&default_target, t),
                    },
                    "verified": verified,
                }),
                verified,
                "Verification",
            ))
        }
        Command::Verify {
            morphism,
            op,
            m,
            n,
            target,
        } => {
            let (l, mop, nop, l1) = match morphism {
                Some(src) => {
                    let mm = expr_flag(s, "--morphism", src, Session::morphism)?;
                    (mm.source().clone(), mm.m().clone(), mm.n().clone(), Some(mm.target().clone()))
                }
                None => {
                    let (Some(m), Some(n)) = (m, n) else {
                        return Err(CliError::Usage(
                            "verify needs --morphism or both --m and --n".into(),
                        ));
                    };
                    let l = expr_flag(s, "--op", op, Session::schrodinger)?;
                    let mop = expr_flag(s, "--m", m, Session::op)?;
                    let nop = expr_flag(s, "--n", n, Session::op)?;
                    let l1 = target
                        .as_ref()
                        .map(|src| expr_flag(s, "--target", src, Session::schrodinger))
                        .transpose()?;
                    (l, mop, nop, l1)
                }
            };
            let l1 = match l1 {
                Some(l1) => Ok(l1),
                None => target_for(&l, &mop, &nop, t),
            };
            let (verified, residual, target_rec) = match l1 {
                Ok(l1) => {
                    let r = intertwining_residual(&l, &mop, &nop, &l1, t);
                    let symbols = mop.principal_symbol() == nop.principal_symbol();
                    (r.is_zero() && symbols, r.format(t), Some(OperatorRecord::new(&l1, t)))
                }
                Err(e) => (false, e.to_string(), None),
            };
            Ok(Outcome::checked(
                json!({ "verified": verified, "residual": residual, "target": target_rec }),
                verified,
                "Verification",
            ))
        }
        Command::Compose { first, second } => {
            let a = expr_flag(s, "--first", first, Session::morphism)?;
            let b = expr_flag(s, "--second", second, Session::morphism)?;
            let c = compose_morphisms(&a, &b, t)?;
            let (rec, ok) = morphism_json(&c, s);
            Ok(Outcome::checked(json!({ "morphism": rec }), ok, "Verification"))
        }
        Command::Factorize { morphism } | Command::Classify { morphism } => {
            let mm = expr_flag(s, "--morphism", morphism, Session::morphism)?;
            let chain = factorize(&mm, &s.hints, t)?;
            let report = ChainReport::new(&chain, t);
            let ok = report.composed_equivalent && report.steps.iter().all(|st| st.morphism.verified);
            if matches!(cmd, Command::Classify { .. }) {
                let kinds: Vec<_> = chain.steps.iter().map(|st| st.kind).collect();
                return Ok(Outcome::checked(
                    json!({
                        "invertible": report.invertible,
                        "length": kinds.len(),
                        "kinds": kinds,
                    }),
                    ok,
                    "ComposedEquivalence",
                ));
            }
            let mut j = serde_json::to_value(&report).expect("records serialize");
            j["prefixLength"] = json!(chain.prefix_len);
            Ok(Outcome::checked(j, ok, "ComposedEquivalence"))
        }
        Command::Run => Ok(Outcome::ok(json!({}))),
    }
}
