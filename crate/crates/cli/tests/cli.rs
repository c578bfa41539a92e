//! End-to-end runs of the `lipsat` binary. Golden reports live in
//! `tests/golden`; set `UPDATE_GOLDEN=1` to rewrite them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lipsat"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_problem(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn golden(name: &str, actual: &str) {
    let path = root().join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(actual, expected, "report differs from {}", path.display());
}

#[test]
fn shipped_fixtures_match_generator() {
    let cases: [(&str, &[&str]); 4] = [
        ("example_s3.prob", &["fixture", "paper-example"]),
        ("fr_n1.prob", &["fixture", "fr-family", "--n", "1"]),
        ("fr_n2.prob", &["fixture", "fr-family", "--n", "2"]),
        ("fr_n3.prob", &["fixture", "fr-family", "--n", "3"]),
    ];
    for (file, args) in cases {
        let out = run(args);
        assert_eq!(code(&out), 0);
        let shipped = fs::read_to_string(root().join("fixtures").join(file)).unwrap();
        assert_eq!(String::from_utf8(out.stdout).unwrap(), shipped, "{file}");
    }
}

#[test]
fn paper_example_report() {
    let path = root().join("fixtures/example_s3.prob");
    let out = run(&["run", path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rep: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rep["schema"], "lipsat-report/1");
    let q = rep["queries"].as_array().unwrap();
    assert_eq!(q[0]["mode"], "s3");
    assert_eq!(q[0]["status"], "certified_member");
    assert_eq!(q[1]["mode"], "s1");
    assert_eq!(q[1]["status"], "certified_non_member");
    assert_eq!(q[1]["verdict"]["side_conditions"][0], "a - b");
    assert_eq!(q[2]["s1"]["status"], "certified_non_member");
    assert_eq!(q[2]["s3"]["status"], "certified_member");
    assert_eq!(q[2]["consistent"], true);
    golden("example_s3.json", &text);
}

#[test]
fn fr_family_reports() {
    for (n, gap) in [(2, (14, 15)), (3, (23, 24))] {
        let path = root().join(format!("fixtures/fr_n{n}.prob"));
        let out = run(&["run", path.to_str().unwrap(), "--json"]);
        assert_eq!(code(&out), 0);
        let text = String::from_utf8(out.stdout).unwrap();
        let rep: Value = serde_json::from_str(&text).unwrap();
        let q = &rep["queries"][0];
        assert_eq!(q["mode"], "ile");
        assert_eq!(q["status"], "certified_non_member");
        let w = &q["verdict"]["certificate"]["witness"];
        assert_eq!((w["gap"]["order"].as_u64(), w["gap"]["required"].as_u64()), (Some(gap.0), Some(gap.1)));
        golden(&format!("fr_n{n}.json"), &text);
    }
}

#[test]
fn table_output_and_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("out.json");
    let path = root().join("fixtures/example_s3.prob");
    let out = run(&["run", path.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.lines().nth(1).unwrap().contains("certified_non_member"));
    let rep: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(rep["queries"].as_array().unwrap().len(), 3);
}

#[test]
fn emit_certificates_keeps_bodies() {
    let path = root().join("fixtures/example_s3.prob");
    let out = run(&["run", path.to_str().unwrap(), "--json", "--emit-certificates"]);
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    let cert = &rep["queries"][1]["verdict"]["certificate"];
    assert_eq!(cert["kind"], "curve");
    assert!(cert.as_object().unwrap().len() > 2, "{cert}");
}

#[test]
fn empty_query_list_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(&dir, "empty.prob", "ring x y\nvector h = (x, y)\n");
    let out = run(&["run", &p, "--json"]);
    assert_eq!(code(&out), 0);
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["queries"], serde_json::json!([]));
}

#[test]
fn unknown_verdict_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(
        &dir,
        "u.prob",
        "ring x y\nmodule N 1x2 = [x^2, y^2]\nvector v = (x*y)\nquery closure v in N budget=2\nquery member v in N\n",
    );
    let out = run(&["run", &p, "--json"]);
    assert_eq!(code(&out), 2);
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["queries"][0]["status"], "unknown");
    assert_eq!(rep["queries"][1]["status"], "certified_non_member");
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_var = write_problem(&dir, "a.prob", "ring x y\nvector h = (x, 3*q)\n");
    let out = run(&["run", &bad_var]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("a.prob:2:18:"), "{err}");

    let unknown_name = write_problem(&dir, "b.prob", "ring x y\nvector h = (x, y)\nquery s1 h in M\n");
    let out = run(&["run", &unknown_name]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown name `M`"));

    let out = run(&["run", dir.path().join("missing.prob").to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    let path = root().join("fixtures/example_s3.prob");
    let out = run(&["run", path.to_str().unwrap(), "--transfer-ideal", "nope"]);
    assert_eq!(code(&out), 1);

    // Kind mismatches surface when the query runs.
    let kinds = write_problem(&dir, "c.prob", "ring x y\nideal I = <x>\npoly f = x\nquery s1 I in f\n");
    assert_eq!(code(&run(&["run", &kinds])), 1);

    assert_eq!(code(&run(&["fixture", "nope"])), 2, "clap rejects unknown fixtures");
}

#[test]
fn print_is_canonical() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(&dir, "p.prob", "ring x y | params a b\nvector h = ( y + x ,3*y )\nmodule M 1x2 = [x,y]\nquery s1 h in M budget=2 noparams\n");
    let out = run(&["print", &p]);
    assert_eq!(code(&out), 0);
    let once = String::from_utf8(out.stdout).unwrap();
    let q = write_problem(&dir, "q.prob", &once);
    let twice = String::from_utf8(run(&["print", &q]).stdout).unwrap();
    assert_eq!(once, twice);
    assert!(once.contains("query s1 h in M budget=2 noparams"));
}

#[test]
fn verify_emits_one_report_per_instance() {
    let out = run(&["--jobs", "2", "verify", "--lemma", "cross-minor", "--lemma", "rank-doubling", "--seeds", "3"]);
    assert_eq!(code(&out), 0);
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 6);
    assert!(lines.iter().all(|r| r["passed"] == true));
    assert_eq!(lines[0]["lemma"], "cross-minor");
    assert_eq!(lines[3]["lemma"], "rank-doubling");
    assert_eq!(lines[2]["seed"], 2);
}
