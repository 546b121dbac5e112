//! End-to-end runs of the installed binary: every subcommand, the frozen
//! exit-code contract, and byte-level determinism of reports. Fixtures are
//! written to a per-test directory under the system temp dir.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use atn_core::TensorNetwork;

/// One-qubit circuit: variable input x, an X gate, measurement of |1><1|.
/// Its acceptance probability is exactly 1 - x.
const X_CIRCUIT: &str = r#"{
  "variables": ["x"],
  "vertices": [
    { "id": 0, "kind": "input", "label": "x", "in_ports": [], "out_ports": [1] },
    { "id": 1, "kind": "gate", "label": [[[0.0,0.0],[1.0,0.0]],[[1.0,0.0],[0.0,0.0]]], "in_ports": [1], "out_ports": [2] },
    { "id": 2, "kind": "output", "label": [[[0.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]], "in_ports": [2], "out_ports": [] }
  ],
  "edges": [
    { "id": 1, "src": 0, "dst": 1 },
    { "id": 2, "src": 1, "dst": 2 }
  ]
}"#;

fn workdir(test: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("atn-cli-tests")
        .join(format!("{}-{test}", std::process::id()));
    fs::create_dir_all(&dir).expect("temp dir is writable");
    dir
}

fn atn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal termination")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn simulate_agrees_with_itself_on_the_frozen_circuit() {
    let dir = workdir("simulate");
    let circuit = dir.join("circuit.json");
    fs::write(&circuit, X_CIRCUIT).unwrap();
    let out = atn(&["simulate", circuit.to_str().unwrap(), "--assignment", "x=0"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("JSON report");
    assert_eq!(report["simulator_probability"], 1.0);
    assert_eq!(report["network_value"], 1.0);
    assert_eq!(report["deviation"], 0.0);

    let out = atn(&["simulate", circuit.to_str().unwrap(), "--assignment", "x=1"]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("JSON report");
    assert_eq!(report["simulator_probability"], 0.0);
    assert_eq!(report["network_value"], 0.0);
}

#[test]
fn malformed_json_exits_2() {
    let dir = workdir("parse");
    let path = dir.join("bad.json");
    fs::write(&path, "definitely not json").unwrap();
    let out = atn(&["simulate", path.to_str().unwrap(), "--assignment", "x=0"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn invalid_circuit_exits_3() {
    let dir = workdir("validate");
    // Well-formed JSON, but both edges claim label 1.
    let broken = X_CIRCUIT.replace(r#""id": 2, "src": 1, "dst": 2"#, r#""id": 1, "src": 1, "dst": 2"#);
    let path = dir.join("broken.json");
    fs::write(&path, broken).unwrap();
    let out = atn(&["simulate", path.to_str().unwrap(), "--assignment", "x=0"]);
    assert_eq!(exit_code(&out), 3);

    // A valid circuit with an incomplete assignment is also a validation
    // failure, not a parse failure.
    let circuit = dir.join("circuit.json");
    fs::write(&circuit, X_CIRCUIT).unwrap();
    let out = atn(&["simulate", circuit.to_str().unwrap(), "--assignment", ""]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn exceeded_tolerance_exits_4() {
    let dir = workdir("tolerance");
    let circuit = dir.join("circuit.json");
    fs::write(&circuit, X_CIRCUIT).unwrap();
    // Any nonnegative deviation exceeds a negative tolerance, making the
    // failure deterministic; the report is still printed first.
    let out = atn(&[
        "simulate",
        circuit.to_str().unwrap(),
        "--assignment",
        "x=0",
        "--tolerance=-1.0",
    ]);
    assert_eq!(exit_code(&out), 4);
    assert!(stdout(&out).contains("\"deviation\""));
}

#[test]
fn convert_then_reduce_roundtrips() {
    let dir = workdir("pipeline");
    let circuit = dir.join("circuit.json");
    let network = dir.join("network.json");
    let reduced = dir.join("reduced.json");
    fs::write(&circuit, X_CIRCUIT).unwrap();

    let out = atn(&[
        "convert",
        circuit.to_str().unwrap(),
        "--out",
        network.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let parsed = TensorNetwork::from_json(&fs::read_to_string(&network).unwrap())
        .expect("emitted network JSON re-parses");
    assert!(parsed.validate().is_empty());
    assert_eq!(parsed.size(), 3);

    let out = atn(&[
        "reduce",
        network.to_str().unwrap(),
        "--out",
        reduced.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let values: Vec<&str> = lines.next().unwrap().split(',').collect();
    let field = |name: &str| values[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(field("original_size"), "3");
    assert_eq!(field("reduced_size"), "2");
    assert_eq!(field("variable_tensors"), "1");
    assert_eq!(field("decomposition"), "heuristic");

    let reduced_network = TensorNetwork::from_json(&fs::read_to_string(&reduced).unwrap())
        .expect("reduced network JSON re-parses");
    assert!(reduced_network.validate().is_empty());
    assert_eq!(reduced_network.size(), 2);
}

#[test]
fn reduce_keeps_an_all_variable_network_unchanged() {
    let dir = workdir("identity");
    let network = r#"{
      "variables": ["x"],
      "tensors": [
        { "indices": [1], "entries": [ { "key": "K00", "poly": "1 0 x^1" } ] },
        { "indices": [1], "entries": [ { "key": "K00", "poly": "2 0 x^1" } ] }
      ]
    }"#;
    let path = dir.join("network.json");
    fs::write(&path, network).unwrap();
    let out = atn(&["reduce", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let values: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let field = |name: &str| values[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(field("original_size"), field("reduced_size"));
    assert_eq!(field("merged_blocks"), "0");
}

#[test]
fn decomp_reports_widths_for_graphs_and_networks() {
    let dir = workdir("decomp");
    let graph = dir.join("square.json");
    fs::write(&graph, r#"{"num_vertices": 4, "edges": [[0,1],[1,2],[2,3],[3,0]]}"#).unwrap();
    let out = atn(&["decomp", graph.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let values: Vec<usize> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let (vertices, carving_width, width_bound, exact) =
        (values[0], values[4], values[5], values[6]);
    assert_eq!(vertices, 4);
    assert!(carving_width <= width_bound);
    assert!(exact <= carving_width);
    assert_eq!(exact, 2); // the 4-cycle needs exactly two crossing edges
}

#[test]
fn distinct_counts_match_the_frozen_values() {
    let out = atn(&["distinct", "--k", "4", "--format", "csv"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("k,n,block,count,oracle"));
    assert!(text.contains("\n2,4,0,4,4"));
    for block in 0..4 {
        assert!(text.contains(&format!("\n4,16,{block},561,561")));
    }
}

#[test]
fn verify_reports_are_byte_identical_for_identical_configs() {
    let args = ["verify", "--seed", "9", "--count", "6"];
    let first = atn(&args);
    let second = atn(&args);
    assert_eq!(exit_code(&first), 0, "stderr: {}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert_eq!(text.matches("\nok   ").count() + text.starts_with("ok   ") as usize, 7);
    assert!(text.contains("verify: 7 properties, 0 failed (seed 9, count 6)"));

    let other = atn(&["verify", "--seed", "10", "--count", "6"]);
    assert_ne!(first.stdout, other.stdout, "different seeds change the instances");
}

#[test]
fn verify_with_count_zero_prints_nothing_and_exits_0() {
    let out = atn(&["verify", "--count", "0"]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty());
}
