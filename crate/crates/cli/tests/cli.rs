use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        Files {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn put(&self, name: &str, text: &str) -> String {
        let p: PathBuf = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }
}

fn run(args: &[&str]) -> (i32, String) {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_protori")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = vec!["--format", "structured"];
    full.extend_from_slice(args);
    let (code, out) = run(&full);
    (code, serde_json::from_str(&out).unwrap_or(Value::Null))
}

const Z_HALF: &str = "rank 1\ndir v=(1) s=2^inf\n";

#[test]
fn analyze_dyadic() {
    let f = Files::new();
    let z = f.put("z.txt", Z_HALF);
    let (code, r) = json(&["analyze", &z]);
    assert_eq!(code, 0);
    assert_eq!(r["dim"], 1);
    assert_eq!(r["dim_nA"], 1);
    assert_eq!(r["hull"]["2"], serde_json::json!([1, 0]));
    assert_eq!(r["flags"]["acd"], true);
    let keys: Vec<&String> = r.as_object().unwrap().keys().collect();
    assert_eq!(&keys[..4], ["command", "seed", "group", "dim"]);
}

#[test]
fn analyze_free_skips_hull() {
    let f = Files::new();
    let z = f.put("z.txt", "rank 2\n");
    let (code, r) = json(&["analyze", &z]);
    assert_eq!(code, 0);
    assert_eq!((r["split"]["r"].as_u64(), r["split"]["k"].as_u64()), (Some(2), Some(0)));
    assert!(r["hull"].as_str().unwrap().starts_with("skipped"));
}

#[test]
fn input_errors_exit_2() {
    let f = Files::new();
    let empty = f.put("e.txt", "");
    assert_eq!(run(&["analyze", &empty]).0, 2);
    assert_eq!(run(&["analyze", "/nonexistent/file"]).0, 2);
    let a = f.put("a.txt", Z_HALF);
    let b = f.put("b.txt", "rank 2\n");
    assert_eq!(run(&["isogeny", &a, &b]).0, 2);
    assert_eq!(run(&["lift", &a, &a, "--matrix", "1/3"]).0, 2);
    assert_eq!(run(&["lift", &a, &a, "--matrix", "x"]).0, 2);
}

#[test]
fn isogeny_verdicts() {
    let f = Files::new();
    let a = f.put("a.txt", Z_HALF);
    let b = f.put("b.txt", "rank 1\ndir v=(1/1024) s=1\ndir v=(1) s=2^inf\n");
    let c = f.put("c.txt", "rank 1\ndir v=(1) s=3^inf\n");
    assert_eq!(json(&["isogeny", &a, &b]).1["verdict"], "isogenous");
    assert_eq!(json(&["isogeny", &a, &c]).1["verdict"], "not isogenous");
    let (_, same) = json(&["isogeny", &a, &a]);
    assert_eq!(same["verdict"], "isogenous");
    assert_eq!(same["scaling_a_into_b"], "1");
}

#[test]
fn hull_reports_both_scopes() {
    let f = Files::new();
    let h = f.put("h.txt", "rank 2\ndir v=(1/2,1/2) s=1\n");
    let (code, r) = json(&["hull", &h]);
    assert_eq!(code, 0);
    assert_eq!(r["scope"], "saturated");
    assert_eq!(r["alternate"]["scope"], "directives");
    let (_, r) = json(&["hull", &h, "--mode", "fininf", "--scope", "directives"]);
    assert_eq!(r["mode"], "fininf");
}

#[test]
fn lift_doubling() {
    let f = Files::new();
    let z = f.put("z.txt", Z_HALF);
    let (code, r) = json(&["lift", &z, &z, "--matrix", "2", "--prime", "2", "--depth", "4"]);
    assert_eq!(code, 0);
    assert_eq!(r["kernel_order"], "2");
    assert_eq!(r["cokernel_order"], "2");
    assert_eq!(r["certificate"]["pass"], true);
    let (_, r) = json(&["lift", &z, &z, "--matrix", "0"]);
    assert_eq!(r["cokernel_order"], "16");
}

#[test]
fn verify_examples() {
    let f = Files::new();
    let z = f.put("z.txt", Z_HALF);
    let (code, out) = run(&["verify", &z, "--depth", "4"]);
    assert_eq!(code, 0);
    let checks: Vec<&str> = out.lines().map(str::trim).filter(|l| l.starts_with("CHECK ")).collect();
    assert!(checks.len() >= 8);
    assert!(checks.iter().all(|l| l.split(' ').nth(3) == Some("PASS")), "{out}");

    let t = f.put("t.txt", "rank 2\n");
    let (code, r) = json(&["verify", &t]);
    assert_eq!(code, 0);
    assert_eq!(r["summary"]["failed"], 0);
    assert_eq!(r["summary"]["nontrivial"], 0);

    assert_eq!(run(&["verify", &z, "--depth", "99"]).0, 3);
}

#[test]
fn text_and_structured_agree() {
    let f = Files::new();
    let z = f.put("z.txt", "rank 2\ndir v=(1/3,1) s=3^inf\n");
    let (_, text) = run(&["analyze", &z]);
    let (_, r) = json(&["analyze", &z]);
    for (k, v) in r.as_object().unwrap() {
        assert!(text.contains(&format!("{k}:")), "{k} missing from text");
        if let Some(s) = v.as_str() {
            assert!(text.contains(s));
        }
    }
}
