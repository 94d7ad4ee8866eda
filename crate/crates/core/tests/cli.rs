use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use enclosure::cli::InstanceFile;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_enclosure"));
    c.env_remove("ENCLOSE_BUDGET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const K3_1110: &str = r#"{"n":3,"lambda":1,"k":4,"classes":[[[0,1]],[[0,2]],[[1,2]],[]]}"#;
const K3_SINGLES: &str = r#"{"n":3,"lambda":1,"k":3,"classes":[[[0,1]],[[0,2]],[[1,2]]]}"#;
const K3_TRIANGLE: &str = r#"{"n":3,"lambda":1,"k":3,"classes":[[[0,1],[0,2],[1,2]],[],[]]}"#;

#[test]
fn check_b_battery_passes() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.json", K3_1110);
    let o = run(&["check", s(&f), "--m", "5", "--mu", "2", "--r", "2"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("battery B"));

    let o = run(&["--json", "check", s(&f), "--m", "5", "--mu", "2", "--r", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["holds"], true);
    assert_eq!(v["p"], "1");
}

#[test]
fn check_triangle_fails_c2() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.json", K3_TRIANGLE);
    let o = run(&["check", s(&f), "--m", "4", "--mu", "2", "--r", "2"]);
    assert_eq!(code(&o), 1);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().any(|l| l.starts_with("C2") && l.contains("FAIL")), "{out}");
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "loop.json", r#"{"n":3,"lambda":1,"k":1,"classes":[[[0,0]]]}"#);
    assert_eq!(code(&run(&["check", s(&f), "--m", "5", "--mu", "2", "--r", "2"])), 2);
    let f = write(dir.path(), "junk.json", "not json");
    assert_eq!(code(&run(&["check", s(&f), "--m", "5", "--mu", "2", "--r", "2"])), 2);
    assert_eq!(code(&run(&["check", "/nonexistent.json", "--m", "5", "--mu", "2", "--r", "2"])), 2);
}

#[test]
fn out_of_regime_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "k4.json",
        r#"{"n":4,"lambda":1,"k":4,"classes":[[[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]],[],[],[]]}"#,
    );
    assert_eq!(code(&run(&["check", s(&f), "--m", "5", "--mu", "2", "--r", "2"])), 3);
    assert_eq!(code(&run(&["enclose", s(&f), "--m", "5", "--mu", "2", "--r", "2"])), 3);
}

#[test]
fn enclose_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body, m, mu, r) in [("b", K3_1110, "5", "2", "2"), ("c", K3_SINGLES, "4", "3", "3")] {
        let f = write(dir.path(), &format!("{name}.json"), body);
        let out = dir.path().join(format!("{name}_out.json"));
        let trace = dir.path().join(format!("{name}_trace.json"));
        let o = run(&[
            "enclose", s(&f), "--m", m, "--mu", mu, "--r", r, "--out", s(&out), "--trace", s(&trace),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let outer: InstanceFile = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(outer.n.to_string(), m);
        assert_eq!(outer.lambda.to_string(), mu);
        let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
        assert!(t["extension"]["actions"].is_array());
        assert_eq!(code(&run(&["verify", s(&f), s(&out), "--r", r])), 0);
    }
}

#[test]
fn enclose_to_stdout_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.json", K3_1110);
    let a = run(&["enclose", s(&f), "--m", "5", "--mu", "2", "--r", "2", "--seed", "3"]);
    let b = run(&["enclose", s(&f), "--m", "5", "--mu", "2", "--r", "2", "--seed", "3"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let _: InstanceFile = serde_json::from_slice(&a.stdout).unwrap();
}

#[test]
fn enclose_battery_failure_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.json", K3_TRIANGLE);
    let o = run(&["enclose", s(&f), "--m", "4", "--mu", "2", "--r", "2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("C2"));
}

#[test]
fn tiny_budget_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.json", K3_1110);
    let o = run(&["enclose", s(&f), "--m", "5", "--mu", "2", "--r", "2", "--budget", "1"]);
    assert_eq!(code(&o), 4);
    let o = bin()
        .args(["enclose", s(&f), "--m", "5", "--mu", "2", "--r", "2"])
        .env("ENCLOSE_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
}

#[test]
fn verify_rejects_corruption_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.json", K3_1110);
    let out = dir.path().join("out.json");
    assert_eq!(code(&run(&["enclose", s(&f), "--m", "5", "--mu", "2", "--r", "2", "--out", s(&out)])), 0);
    let mut outer: InstanceFile = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();

    // move one edge between classes: still a decomposition, no longer regular
    let e = outer.classes[0].pop().unwrap();
    outer.classes[1].push(e);
    let bad = write(dir.path(), "bad.json", &serde_json::to_string(&outer).unwrap());
    let o = run(&["verify", s(&f), s(&bad), "--r", "2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("invalid"));

    outer.classes.pop();
    outer.k -= 1;
    let fewer = write(dir.path(), "fewer.json", &serde_json::to_string(&outer).unwrap());
    assert_eq!(code(&run(&["verify", s(&f), s(&fewer), "--r", "2"])), 2);
}

#[test]
fn oracle_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "g.json", K3_1110);
    let w = dir.path().join("w.json");
    let o = run(&["oracle", s(&f), "--m", "5", "--mu", "2", "--r", "2", "--out", s(&w)]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(&["verify", s(&f), s(&w), "--r", "2"])), 0);

    // B1 fails: rk = 6 against mu(m-1) = 8
    let f3 = write(dir.path(), "g3.json", K3_SINGLES);
    let o = run(&["oracle", s(&f3), "--m", "5", "--mu", "2", "--r", "2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("NONE"));

    let o = run(&["oracle", s(&f), "--m", "9", "--mu", "2", "--r", "2"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn gen_modes() {
    let a = run(&["gen", "--n", "5", "--lambda", "1", "--k", "4", "--r", "2", "--seed", "7"]);
    let b = run(&["gen", "--n", "5", "--lambda", "1", "--k", "4", "--r", "2", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let g: InstanceFile = serde_json::from_slice(&a.stdout).unwrap();
    assert!(g.to_decomposition().unwrap().is_admissible(2));

    let o = run(&["gen", "--n", "3", "--lambda", "1", "--k", "3", "--exhaustive"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<&[u8]> = o.stdout.split(|&c| c == b'\n').filter(|l| !l.is_empty()).collect();
    assert_eq!(lines.len(), 5);

    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gen", "--n", "3", "--lambda", "1", "--k", "3", "--exhaustive", "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 0);
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 5);
    assert_eq!(names[0], "instance_00000.json");

    assert_eq!(code(&run(&["gen", "--n", "2", "--lambda", "3", "--k", "1", "--r", "2"])), 3);
}
