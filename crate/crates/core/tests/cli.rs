use std::path::Path;
use std::process::{Command, Output};

fn qrom_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrom-lab")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn prove_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("proof.bin");
    let chi = "00112233445566778899aabbccddeeff00112233445566778899aabbccddeeff";
    let out = qrom_lab(&["posw", "prove", "--n", "8", "--t", "4", "--w", "256", "--chi", chi, "--out", path(&proof)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = qrom_lab(&["posw", "verify", "--in", path(&proof), "--chi", chi]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "accept");

    let other = "ff".repeat(32);
    let out = qrom_lab(&["posw", "verify", "--in", path(&proof), "--chi", &other]);
    assert_eq!(out.status.code(), Some(1));

    let mut bytes = std::fs::read(&proof).unwrap();
    bytes.push(0);
    std::fs::write(&proof, bytes).unwrap();
    let out = qrom_lab(&["posw", "verify", "--in", path(&proof), "--chi", chi]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Malformed"));
}

#[test]
fn random_statement_with_table_backend() {
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("p.bin");
    let out = qrom_lab(&["posw", "prove", "--n", "4", "--t", "2", "--w", "32", "--random", "--backend", "table", "--seed", "9", "--out", path(&proof)]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout).to_string();
    let chi = stdout.lines().next().unwrap().strip_prefix("chi = ").unwrap();
    let ok = qrom_lab(&["posw", "verify", "--in", path(&proof), "--chi", chi, "--backend", "table", "--seed", "9"]);
    assert_eq!(ok.status.code(), Some(0));
    let wrong_seed = qrom_lab(&["posw", "verify", "--in", path(&proof), "--chi", chi, "--backend", "table", "--seed", "10"]);
    assert_eq!(wrong_seed.status.code(), Some(1));
}

#[test]
fn reports_are_byte_identical_for_identical_argv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let out = qrom_lab(&["lemmas", "--suite", "forgery", "--trials", "3000", "--seed", "5", "--out", path(p)]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn report_converts_json_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (json, csv) = (dir.path().join("t.json"), dir.path().join("t.csv"));
    let out = qrom_lab(&["bounds", "--problem", "posw", "--w", "128", "--sweep", "q=0,1,10,100", "--sweep", "t=1..3", "--out", path(&json)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(qrom_lab(&["report", "--in", path(&json), "--out", path(&csv)]).status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 12);
    assert!(text.starts_with("problem,q,k,m_bits,T,gamma,w,n,t,raw,value,source\n"));
}

#[test]
fn capacity_report_fields() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("c.json");
    let out = qrom_lab(&["capacity", "--p", "!PRMG", "--pprime", "PRMG", "--k", "1", "--domain", "n=1,m=1", "--bound", "simple", "--out", path(&json)]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let rec = &v["records"][0];
    let keys: Vec<&str> = rec.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["value", "witness", "bound", "bound_raw", "bound_source", "holds", "recognized"]);
    assert_eq!(rec["value"], serde_json::json!(0.866025403784));
    assert_eq!(rec["holds"], serde_json::json!(true));
}

#[test]
fn simulate_from_file() {
    let circuit = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/preimage_circuit.json");
    let out = qrom_lab(&["simulate", circuit]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("holds = true"));
}

#[test]
fn budget_override_is_enforced() {
    let out = Command::new(env!("CARGO_BIN_EXE_qrom-lab"))
        .args(["capacity", "--p", "!CL", "--pprime", "CL", "--k", "2", "--domain", "n=2,m=1"])
        .env("QROM_LAB_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn usage_errors() {
    assert_eq!(qrom_lab(&["bounds", "--problem", "preimage", "--bogus"]).status.code(), Some(2));
    assert_eq!(qrom_lab(&[]).status.code(), Some(2));
    assert_eq!(qrom_lab(&["capacity", "--p", "PRMG(", "--pprime", "CL", "--k", "1", "--domain", "n=1,m=1"]).status.code(), Some(2));
    assert_eq!(qrom_lab(&["--help"]).status.code(), Some(0));
}
