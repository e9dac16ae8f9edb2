use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const E5: &str = r#"version = 1
elements = ["0", "a", "a'", "b", "1"]
zero = "0"
one = "1"
sums = [["a", "a'", "1"], ["b", "b", "1"]]
"#;

const B2: &str = "version = 1\n[construct]\nkind = \"boolean\"\natoms = 2\n";
const C4: &str = "version = 1\n[construct]\nkind = \"chain\"\nlength = 3\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_effectlab"))
        .args(args)
        .env_remove("EFFECTLAB_TIME_LIMIT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn check_accepts_e5() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "e5.toml", E5);
    let o = run(&["check", s(&f)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["check", s(&f), "--json"]);
    assert_eq!(json(&o)["valid"], true);
}

#[test]
fn check_completes_one_sided_entries() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "e5.toml", &E5.replace(r#"["a", "a'", "1"]"#, r#"["a'", "a", "1"]"#));
    assert_eq!(code(&run(&["check", s(&f)])), 0);
}

#[test]
fn check_names_violated_axiom() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "bad.toml", &E5.replace(r#"["b", "b", "1"]"#, r#"["b", "b", "1"], ["1", "a", "a"]"#));
    let o = run(&["check", s(&f), "--json"]);
    assert_eq!(code(&o), 2);
    let v = json(&o);
    assert_eq!(v["valid"], false);
    let axioms: Vec<&str> = v["violations"].as_array().unwrap().iter().map(|x| x["axiom"].as_str().unwrap()).collect();
    assert!(axioms.contains(&"Eiv"), "{axioms:?}");
}

#[test]
fn parse_errors_exit_3() {
    let d = TempDir::new().unwrap();
    let conflict = write(&d, "c.toml", &E5.replace(r#"["b", "b", "1"]"#, r#"["b", "b", "1"], ["a'", "a", "b"]"#));
    let o = run(&["check", s(&conflict)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("conflicting"), "{}", stderr(&o));
    let unknown = write(&d, "u.toml", &format!("{E5}colour = \"red\"\n"));
    assert_eq!(code(&run(&["check", s(&unknown)])), 3);
    let both = write(&d, "b.toml", &format!("{E5}[construct]\nkind = \"chain\"\nlength = 2\n"));
    assert_eq!(code(&run(&["check", s(&both)])), 3);
    let version = write(&d, "v.toml", &E5.replace("version = 1", "version = 2"));
    assert_eq!(code(&run(&["check", s(&version)])), 3);
    assert_eq!(code(&run(&["check", s(&d.path().join("missing.toml"))])), 3);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["enumerate"])), 1);
    assert_eq!(code(&run(&["enumerate", "1"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn analyze_e5() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "e5.toml", E5);
    let v = json(&run(&["analyze", s(&f), "--json"]));
    assert_eq!(v["classification"]["modular"]["holds"], true);
    assert_eq!(v["classification"]["orthomodular_lattice"]["holds"], false);
    assert_eq!(v["blocks"].as_array().unwrap().len(), 2);
    assert_eq!(v["sharp"], serde_json::json!(["0", "a", "a'", "1"]));
    assert_eq!(v["center"], serde_json::json!(["0", "1"]));
}

#[test]
fn analyze_b2() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "b2.toml", B2);
    let v = json(&run(&["analyze", s(&f), "--json"]));
    assert_eq!(v["classification"]["orthomodular_lattice"]["holds"], true);
    assert_eq!(v["classification"]["mv_effect_algebra"]["holds"], true);
    assert_eq!(v["classification"]["distributive"]["holds"], true);
}

#[test]
fn dot_of_c4() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "c4.toml", C4);
    let o = run(&["analyze", s(&f), "--dot"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("digraph"));
    assert_eq!(out.lines().filter(|l| l.contains("[label=")).count(), 4);
    assert_eq!(out.lines().filter(|l| l.contains("->")).count(), 3);
    assert_eq!(out.matches("doublecircle").count(), 2);
}

#[test]
fn subadditive_state_on_e5() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "e5.toml", E5);
    let o = run(&["states", s(&f), "--subadditive", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let values: Vec<&str> = v["values"].as_array().unwrap().iter().map(|x| x["value"].as_str().unwrap()).collect();
    assert_eq!(values, ["0/1", "1/2", "1/2", "1/2", "1/1"]);
}

#[test]
fn exstate_trace_on_e5() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "e5.toml", E5);
    let v = json(&run(&["states", s(&f), "--via-exstate", "--json"]));
    assert_eq!(v["trace"]["atom"], "b");
    assert_eq!(v["trace"]["central"], "1");
    assert_eq!(v["trace"]["branch"], "dichotomy");
}

#[test]
fn exstate_hypothesis_failure_exits_5() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "b2.toml", B2);
    let o = run(&["states", s(&f), "--via-exstate"]);
    assert_eq!(code(&o), 5);
    assert!(stderr(&o).contains("S(E)"), "{}", stderr(&o));
}

#[test]
fn stateless_search_and_certificate() {
    let none = run(&["enumerate", "8", "--find-stateless", "--json"]);
    assert_eq!(code(&none), 0);
    assert_eq!(json(&none)["found"], false);

    let found = run(&["enumerate", "9", "--find-stateless"]);
    assert_eq!(code(&found), 0);
    let d = TempDir::new().unwrap();
    let toml: String = stdout(&found).lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let f = write(&d, "stateless.toml", &toml);
    assert_eq!(code(&run(&["check", s(&f)])), 0);
    let o = run(&["states", s(&f), "--json"]);
    assert_eq!(code(&o), 4);
    let v = json(&o);
    assert_eq!(v["kind"], "infeasible");
    assert_eq!(v["verified"], true);
    assert!(!v["certificate"].as_array().unwrap().is_empty());
}

#[test]
fn enumerate_counts() {
    assert_eq!(stdout(&run(&["enumerate", "3"])).trim(), "1");
    assert_eq!(stdout(&run(&["enumerate", "4"])).trim(), "3");
    assert_eq!(stdout(&run(&["enumerate", "6", "--lattice-only"])).trim(), "9");
    let v = json(&run(&["enumerate", "5", "--json"]));
    assert_eq!(v["count"], 4);
}

#[test]
fn listed_instances_reparse() {
    let d = TempDir::new().unwrap();
    let out = stdout(&run(&["enumerate", "5", "--list"]));
    let (listing, count) = out.trim_end().rsplit_once('\n').unwrap();
    assert_eq!(count, "4");
    let chunks: Vec<&str> = listing.split("# algebra ").skip(1).collect();
    assert_eq!(chunks.len(), 4);
    for (i, chunk) in chunks.iter().enumerate() {
        let body = chunk.split_once('\n').unwrap().1;
        let f = write(&d, &format!("{i}.toml"), body);
        assert_eq!(code(&run(&["check", s(&f)])), 0, "{body}");
    }
}

#[test]
fn theorems_on_e5_pass() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "e5.toml", E5);
    let o = run(&["theorems", s(&f), "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(json(&o).as_array().unwrap().len(), 20);
    let one = json(&run(&["theorems", s(&f), "--claim", "center.identity", "--json"]));
    assert_eq!(one[0]["conclusion_holds"], true);
    assert_eq!(code(&run(&["theorems", s(&f), "--claim", "no.such.claim"])), 1);
}

#[test]
fn theorems_on_invalid_file_exit_2() {
    let d = TempDir::new().unwrap();
    let f = write(&d, "bad.toml", "version = 1\nelements = [\"0\", \"a\", \"1\"]\nzero = \"0\"\none = \"1\"\nsums = [[\"a\", \"a\", \"a\"]]\n");
    assert_eq!(code(&run(&["theorems", s(&f)])), 2);
}

#[test]
fn theorem_sweep_passes() {
    let o = run(&["theorems", "--sweep", "5", "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    for r in json(&o).as_array().unwrap() {
        assert!(r["counterexample"].is_null(), "{r}");
    }
}

#[test]
fn construction_round_trips_through_table() {
    let d = TempDir::new().unwrap();
    let spec = "version = 1\n[construct]\nkind = \"product\"\n[[construct.parts]]\nkind = \"boolean\"\natoms = 1\n[[construct.parts]]\nkind = \"chain\"\nlength = 2\n";
    let built = write(&d, "p.toml", spec);
    let o = run(&["check", s(&built), "--emit"]);
    assert_eq!(code(&o), 0);
    let table = write(&d, "t.toml", &stdout(&o));
    let a = json(&run(&["analyze", s(&built), "--json"]));
    let b = json(&run(&["analyze", s(&table), "--json"]));
    assert_eq!(a["size"], 6);
    assert_eq!(a, b);
    assert_eq!(stdout(&run(&["check", s(&table), "--emit"])), stdout(&o));
}

#[test]
fn budget_exhaustion_checkpoints_and_resumes() {
    let d = TempDir::new().unwrap();
    let ck = d.path().join("ck.json");
    let o = run(&["enumerate", "9", "--max-nodes", "5", "--checkpoint", s(&ck)]);
    assert_eq!(code(&o), 6, "{}", stderr(&o));
    assert!(ck.exists());
    let o = run(&["enumerate", "9", "--resume", s(&ck)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "60");
}

#[test]
fn time_limit_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_effectlab"))
        .args(["enumerate", "3"])
        .env("EFFECTLAB_TIME_LIMIT", "5")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_effectlab"))
        .args(["enumerate", "3"])
        .env("EFFECTLAB_TIME_LIMIT", "soon")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}
