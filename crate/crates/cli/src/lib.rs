//! Command-line front end for `darboux-core`: a small operator language,
//! a command surface mirroring the library, and JSON reports.

pub mod ast;
pub mod commands;
pub mod error;
pub mod parse;
pub mod print;
pub mod session;

use std::path::PathBuf;

use clap::Parser;
use serde_json::Value as Json;

use crate::ast::StmtKind;
use crate::commands::{error_json, execute, Command, Report, ScriptCommand, SCHEMA};
use crate::error::CliError;
use crate::session::Session;

#[derive(Debug, Parser)]
#[command(name = "darboux", version, about = "Darboux transformations of Dx*Dy + a*Dx + b*Dy + c")]
pub struct Cli {
    /// Script with declarations and bindings (default: stdin when piped).
    #[arg(long, global = true)]
    pub script: Option<PathBuf>,
    /// Script of `declare` statements loaded before everything else.
    #[arg(long, global = true)]
    pub tower: Option<PathBuf>,
    /// Indented JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Everything a process run produces.
#[derive(Debug)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn failure(command: &str, e: &CliError) -> Json {
    serde_json::json!({
        "schema": SCHEMA,
        "command": command,
        "ok": false,
        "error": error_json(e),
    })
}

fn render(j: &Json, pretty: bool) -> String {
    let mut s = if pretty {
        serde_json::to_string_pretty(j)
    } else {
        serde_json::to_string(j)
    }
    .expect("json renders");
    s.push('\n');
    s
}

fn prepare(cli: &Cli, session: &mut Session, stdin: impl FnOnce() -> Option<String>) -> Result<Vec<Vec<String>>, CliError> {
    if let Some(path) = &cli.tower {
        let decls = parse::parse_script(&read(path)?)?;
        for st in &decls.stmts {
            if !matches!(st.kind, StmtKind::Declare(_) | StmtKind::DeclareWith { .. }) {
                return Err(CliError::Usage(format!(
                    "{}: line {}: tower files may only contain declarations",
                    path.display(),
                    st.pos.line
                )));
            }
            session.exec(st)?;
        }
    }
    let text = match &cli.script {
        Some(path) => read(path)?,
        None => stdin().unwrap_or_default(),
    };
    let script = parse::parse_script(&text)?;
    Ok(session.load(&script)?.into_iter().map(|(_, w)| w).collect())
}

/// Runs one invocation. `stdin` is consulted only when no `--script` is given.
pub fn run(args: &[String], stdin: impl FnOnce() -> Option<String>) -> Output {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Output {
                    stdout: shown,
                    stderr: String::new(),
                    code: 0,
                };
            }
            let err = CliError::Usage(e.kind().to_string());
            return Output {
                stdout: render(&failure("", &err), false),
                stderr: shown,
                code: 1,
            };
        }
    };
    let mut session = Session::new();
    let name = cli.command.name();
    let runs = match prepare(&cli, &mut session, stdin) {
        Ok(r) => r,
        Err(e) => {
            return Output {
                stdout: render(&failure(name, &e), cli.pretty),
                stderr: format!("error: {e}\n"),
                code: e.exit_code(),
            }
        }
    };

    let mut reports: Vec<Report> = Vec::new();
    for words in runs {
        match ScriptCommand::try_parse_from(&words) {
            Ok(sc) => reports.push(execute(&mut session, &sc.command, words)),
            Err(e) => reports.push(Report {
                command: words.first().cloned().unwrap_or_default(),
                args: words,
                result: None,
                error: Some(CliError::Usage(e.render().to_string().trim().to_string())),
                failed_check: None,
                millis: 0.0,
            }),
        }
    }
    if cli.command != Command::Run {
        let echo = args.iter().skip(1).cloned().collect();
        reports.push(execute(&mut session, &cli.command, echo));
    }

    let mut out = Output {
        stdout: String::new(),
        stderr: String::new(),
        code: 0,
    };
    for r in &reports {
        out.stdout.push_str(&render(&r.to_json(), cli.pretty));
        if let Some(e) = &r.error {
            out.stderr.push_str(&format!("error: {}: {e}\n", r.command));
        }
        out.code = match (out.code, r.exit_code()) {
            (1, _) | (_, 1) => 1,
            (2, _) | (_, 2) => 2,
            _ => 0,
        };
    }
    out
}
