use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::Value;

/// Runs the installed binary with `script` on stdin; returns the JSON lines,
/// stderr and the exit code.
fn darboux(args: &[&str], script: &str) -> (Vec<Value>, String, i32) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_darboux"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(script.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    let lines = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    (lines, String::from_utf8(out.stderr).unwrap(), out.status.code().unwrap())
}

const EULER_POISSON: &str = "let L = Dx*Dy - 2/(x+y)^2;\nkernel L: (y-x)/(x+y), x*y/(x+y);\n";

#[test]
fn invariants() {
    let (out, _, code) = darboux(&["invariants"], "let L = Dx*Dy + y*Dx + x*Dy;");
    assert_eq!(code, 0);
    assert_eq!(out[0]["result"], serde_json::json!({"h": "x*y", "k": "x*y"}));
    assert_eq!(out[0]["schema"], "darboux-report/1");
}

#[test]
fn identity_verifies() {
    let (out, _, code) = darboux(&["verify", "--morphism", "identity(L)"], "let L = schrodinger(y, x, 1);");
    assert_eq!(code, 0);
    assert_eq!(out[0]["result"]["verified"], true);
    assert_eq!(out[0]["result"]["residual"], "0");
}

#[test]
fn wronskian_factorizes() {
    let script = format!("{EULER_POISSON}let T = wronskian(L, 1, 1);\n");
    let (out, _, code) = darboux(&["factorize"], &script);
    assert_eq!(code, 0, "{out:?}");
    let r = &out[0]["result"];
    assert_eq!(r["composedEquivalent"], true);
    assert_eq!(r["invertible"], false);
    let steps = r["steps"].as_array().unwrap();
    assert_eq!(steps.len() as u64, 2 + r["prefixLength"].as_u64().unwrap());
    assert!(steps.iter().all(|s| s["morphism"]["verified"] == true));
}

#[test]
fn laplace_is_invertible() {
    let (out, _, code) = darboux(&["classify", "--morphism", "laplace(L, right)"], EULER_POISSON);
    assert_eq!(code, 0);
    assert_eq!(out[0]["result"]["invertible"], true);
}

#[test]
fn kernel_accepts_plain_operators() {
    let (out, _, code) = darboux(&["certify-kernel", "--psi", "x + y"], "let L = Dx*Dy;\nkernel L: x*y^0;");
    assert_eq!(code, 0, "{out:?}");
    assert_eq!(out[0]["ok"], true);
}

#[test]
fn script_runs_are_reported_in_order() {
    let script = "let L = Dx*Dy + y*Dx + x*Dy;\nrun invariants;\nrun laplace-chain --steps 2;\n";
    let (out, _, code) = darboux(&["run"], script);
    assert_eq!(code, 0);
    let names: Vec<_> = out.iter().map(|j| j["command"].as_str().unwrap()).collect();
    assert_eq!(names, ["invariants", "laplace-chain"]);
}

#[test]
fn mathematical_failure_exits_2() {
    let (out, stderr, code) = darboux(&["solve-first-order", "--m", "Dx + x*y"], "let L = Dx*Dy;");
    assert_eq!(code, 2);
    assert_eq!(out[0]["ok"], false);
    assert_eq!(out[0]["error"]["code"], "NoSolution");
    assert!(stderr.contains("no first-order solution"));
}

#[test]
fn unbound_name_has_position() {
    let (out, _, code) = darboux(&["invariants"], "let a = x;\nlet L = Dx*Dy + q;");
    assert_eq!(code, 1);
    let e = &out[0]["error"];
    assert_eq!(e["code"], "UnboundName");
    assert_eq!((e["line"].as_u64(), e["col"].as_u64()), (Some(2), Some(17)));
}

#[test]
fn syntax_error_has_position() {
    let (out, _, code) = darboux(&["invariants"], "let L = Dx*Dy + (x;");
    assert_eq!(code, 1);
    let e = &out[0]["error"];
    assert_eq!(e["code"], "SyntaxError");
    assert_eq!((e["line"].as_u64(), e["col"].as_u64()), (Some(1), Some(19)));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let (out, stderr, code) = darboux(&["bogus"], "");
    assert_eq!(code, 1);
    assert_eq!(out[0]["error"]["code"], "UsageError");
    assert!(stderr.contains("bogus"));
}
