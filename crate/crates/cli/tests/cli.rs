use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mpsprep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpsprep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ghz4() -> String {
    let h = 0.5f64.sqrt();
    let mut v = vec![0.0; 16];
    v[0] = h;
    v[15] = h;
    serde_json::to_string(&v).unwrap()
}

#[test]
fn decompose_bell_prints_bond_two() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bell.json", "[0.7071, 0, 0, 0.7071]");
    let out = dir.path().join("mps.json");
    let o = mpsprep(&["decompose", "--input", s(&input), "--output", s(&out)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("bond_dims [2]"));
    assert!(stdout(&o).contains("entropy 1\n"));
    // Not normalized to 1e-10, so a warning is logged.
    assert!(String::from_utf8_lossy(&o.stderr).contains("normalizing"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(doc["bond_dims"], serde_json::json!([2]));
}

#[test]
fn decompose_single_qubit_has_no_bonds() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "one.json", "[1, 0]");
    let o = mpsprep(&["decompose", "--input", s(&input)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("bond_dims []"));
}

#[test]
fn decompose_rejects_length_six() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "six.json", "[1, 0, 0, 0, 0, 0]");
    let o = mpsprep(&["decompose", "--input", s(&input)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("length 6"));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.json");
    let o = mpsprep(&["decompose", "--input", s(&missing)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn malformed_json_is_bad_input() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bad.json", "{\"not\": \"an array\"}");
    let o = mpsprep(&["entropy", "--input", s(&input)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_round_trips_through_files() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "ghz.json", &ghz4());
    let mps = dir.path().join("mps.json");
    let circuit = dir.path().join("circuit.json");
    let probs = dir.path().join("probs.csv");
    assert!(mpsprep(&["decompose", "--input", s(&input), "--output", s(&mps)]).status.success());
    let o = mpsprep(&["synthesize", "--input", s(&mps), "--output", s(&circuit)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("widths [2, 2, 2, 1]"));
    let o = mpsprep(&[
        "simulate", "--input", s(&circuit), "--target", s(&input), "--output", s(&probs),
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("fidelity 1\n"));
    let csv = std::fs::read_to_string(probs).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,bitstring,probability,target_probability");
    assert_eq!(lines[1], "0,0000,0.5,0.5");
    assert_eq!(lines[16], "15,1111,0.5,0.5");
}

fn sweep_record(input: &Path, fidelity: &str, circuit: &Path) -> serde_json::Value {
    let o = mpsprep(&[
        "sweep", "--input", s(input), "--fidelity", fidelity, "--output", s(circuit),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap()[0].clone()
}

fn circuit_widths(path: &Path) -> Vec<u64> {
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    doc["gates"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["width"].as_u64().unwrap())
        .collect()
}

#[test]
fn sweep_bell_keeps_the_entangling_gate() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "bell.json", "[0.7071067811865476, 0, 0, 0.7071067811865476]");
    let circuit = dir.path().join("c.json");
    let record = sweep_record(&input, "0.9", &circuit);
    assert_eq!(circuit_widths(&circuit), vec![2, 1]);
    assert_eq!(record["fidelity"], 1.0);
    assert_eq!(record["truncations"], 0);
}

#[test]
fn sweep_product_state_is_free() {
    let dir = TempDir::new().unwrap();
    // (|0> + |1>)/sqrt2 on qubit 1, |1> on qubit 2, |0> on qubit 3.
    let h = 0.5f64.sqrt();
    let v = [0.0, 0.0, h, 0.0, 0.0, 0.0, h, 0.0];
    let input = write(&dir, "prod.json", &serde_json::to_string(&v).unwrap());
    let circuit = dir.path().join("c.json");
    let record = sweep_record(&input, "0.99", &circuit);
    assert_eq!(circuit_widths(&circuit), vec![1, 1, 1]);
    assert_eq!(record["cost"], 0);
}

#[test]
fn sweep_ghz4_low_threshold() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "ghz.json", &ghz4());
    let circuit = dir.path().join("c.json");
    let record = sweep_record(&input, "0.4", &circuit);
    assert_eq!(circuit_widths(&circuit), vec![1, 1, 1, 1]);
    assert!((record["fidelity"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn sweep_rejects_threshold_above_one() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "ghz.json", &ghz4());
    let o = mpsprep(&["sweep", "--input", s(&input), "--fidelity", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

fn bench(extra: &[&str]) -> Output {
    let mut args = vec!["bench"];
    args.extend_from_slice(extra);
    let o = mpsprep(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

#[test]
fn bench_is_byte_identical_across_runs_and_jobs() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["--qubits", "8", "--corpus", "sparse", "--count", "10", "--seed", "7"];
    let mut first = base.to_vec();
    first.extend(["--output", s(&a), "--jobs", "1"]);
    let mut second = base.to_vec();
    second.extend(["--output", s(&b), "--jobs", "4"]);
    bench(&first);
    bench(&second);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",7")), "seed echoed");
}

#[test]
fn bench_has_three_records_per_state_and_method() {
    let o = bench(&[
        "--qubits", "6", "--corpus", "dense", "--count", "4", "--seed", "1",
        "--thresholds", "0.9,0.95,0.99",
    ]);
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (params, method) = (col("params"), col("method"));
    let mut counts = std::collections::BTreeMap::new();
    for row in rdr.records() {
        let row = row.unwrap();
        *counts
            .entry((row[params].to_string(), row[method].to_string()))
            .or_insert(0) += 1;
    }
    assert_eq!(counts.len(), 4 * 3);
    assert!(counts.values().all(|&c| c == 3));
}

#[test]
fn bench_low_entropy_corpus_beats_isometry_reference() {
    let o = bench(&[
        "--qubits", "8", "--corpus", "smooth", "--count", "6", "--seed", "3", "--format", "json",
    ]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    let mut adaptive = 0;
    for r in rows.iter().filter(|r| r["method"] == "adaptive") {
        assert!(r["entropy"].as_f64().unwrap() < 0.5, "{r}");
        assert!(r["cost"].as_u64().unwrap() < 256, "{r}");
        assert_eq!(r["seed"], 3);
        adaptive += 1;
    }
    assert_eq!(adaptive, 6 * 3);
}

#[test]
fn bench_rejects_bad_qubit_count() {
    let o = mpsprep(&["bench", "--qubits", "1", "--corpus", "dense"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mpsprep(&["bench", "--qubits", "4", "--corpus", "dense", "--thresholds", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn entropy_command() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "ghz.json", &ghz4());
    let o = mpsprep(&["entropy", "--input", s(&input)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("entropy 0.833333333\n"));
}
