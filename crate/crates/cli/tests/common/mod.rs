//! Golden cases for the `gat` binary. Each case runs in the `theories`
//! directory; its combined report (stdout, then stderr) is stored in
//! `tests/golden/<name>.txt`. Set `UPDATE_GOLDEN=1` to rewrite the files.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub status: i32,
}

const fn case(name: &'static str, args: &'static [&'static str], status: i32) -> Case {
    Case { name, args, status }
}

/// The examples listed for the command line interface.
pub const DOCUMENTED: &[Case] = &[
    case("free-exception", &["free", "exception.gat", "--grade", "{e1,Ok}", "--vars", "2"], 0),
    case("grade-state", &["grade", "state.gat", "-e", "lookup(update_0(x),update_1(x))"], 0),
    case(
        "entail-state",
        &["entail", "state.gat", "-l", "lookup(update_0(x),update_1(x))", "-r", "c[top](x)", "--depth", "3"],
        0,
    ),
];

/// One or more cases for every subcommand and exit status.
pub const OTHERS: &[Case] = &[
    case("check-state", &["check", "state.gat"], 0),
    case("check-model", &["check", "exception.gat", "--model", "exception-free.gam"], 0),
    case("check-state-model", &["check", "state.gat", "--model", "state-free.gam"], 0),
    case("check-broken-model", &["check", "exception.gat", "--model", "exception-broken.gam"], 1),
    case("entail-unknown", &["entail", "state.gat", "-l", "update_0(x)", "-r", "update_1(x)", "--depth", "2"], 1),
    case("free-state-top", &["free", "state.gat", "--grade", "top", "--vars", "1"], 0),
    case("free-lifted", &["free", "lifted-maybe.gat", "--grade", "bot", "--vars", "2"], 0),
    case("free-module", &["free", "graded-module.gat", "--grade", "nat:1", "--vars", "1"], 0),
    case("laws-exception", &["laws", "exception.gat", "--vars", "1"], 0),
    case("laws-state", &["laws", "state.gat", "--mode", "random", "--trials", "300", "--seed", "7"], 0),
    case("lawvere-state", &["lawvere", "state.gat", "--arity-bound", "2"], 0),
    case("sum", &["sum", "lifted-maybe.gat", "state.gat"], 0),
    case("sum-mismatch", &["sum", "exception.gat", "state.gat"], 1),
    case("tensor", &["tensor", "state.gat", "state.gat"], 0),
    case("extend", &["extend", "lifted-maybe.gat", "--map", "left", "--monoid", "exception {e1}"], 0),
    case(
        "coeq",
        &[
            "coeq",
            "exception.gat",
            "--source",
            "either.gat",
            "--alpha",
            "either = c[{e1, e2}](raise_e1)",
            "--beta",
            "either = c[{e1, e2}](raise_e2)",
        ],
        0,
    ),
    case(
        "coeq-mismatch",
        &[
            "coeq",
            "exception.gat",
            "--source",
            "exception.gat",
            "--alpha",
            "raise_e1 = raise_e1; raise_e2 = raise_e2",
            "--beta",
            "raise_e1 = raise_e1; raise_e2 = raise_e1@{e2}()",
        ],
        1,
    ),
    case("oracle-state", &["oracle-state"], 0),
    case("bad-grade", &["free", "exception.gat", "--grade", "{e1,e3}"], 2),
    case("bad-term", &["grade", "state.gat", "-e", "lookup(x)"], 2),
    case("missing-file", &["check", "nonexistent.gat"], 2),
    case("no-subcommand", &[], 2),
];

pub fn theories_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../theories")
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"))
}

pub struct Run {
    pub status: i32,
    pub stdout: String,
    pub report: String,
}

pub fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_gat"))
        .args(args)
        .current_dir(theories_dir())
        .output()
        .expect("gat runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    Run {
        status: out.status.code().unwrap_or(-1),
        report: format!("{stdout}{stderr}"),
        stdout,
    }
}

/// Compares one case against its golden file; `Err` describes the first
/// difference.
pub fn check(c: &Case) -> Result<(), String> {
    let r = run(c.args);
    let path = golden_path(c.name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &r.report).unwrap();
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if r.report != expected {
        return Err(format!("{}: report differs\n--- expected\n{expected}--- got\n{}", c.name, r.report));
    }
    if r.status != c.status {
        return Err(format!("{}: exit status {} instead of {}", c.name, r.status, c.status));
    }
    Ok(())
}
