use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn write(&self, name: &str, body: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        path
    }

    fn diag(&self, name: &str, entries: &[&str]) -> PathBuf {
        let n = entries.len();
        let rows: Vec<String> = (0..n)
            .map(|i| {
                let row: Vec<String> =
                    (0..n).map(|j| if i == j { format!("\"{}\"", entries[i]) } else { "0".into() }).collect();
                format!("[{}]", row.join(","))
            })
            .collect();
        self.write(name, &format!(r#"{{"rows":{n},"cols":{n},"re":[{}]}}"#, rows.join(",")))
    }
}

fn plyap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plyap")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad report ({e}): {}", String::from_utf8_lossy(&out.stderr)))
}

fn error_record(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "stderr: {text}");
    serde_json::from_str(text.trim_end()).unwrap()
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

fn all_pass(r: &Value) -> bool {
    r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true)
}

fn diag_instance(files: &Files) -> (PathBuf, PathBuf) {
    (files.diag("a.json", &["4/5", "0.4"]), files.diag("b.json", &["1/2", "1/2"]))
}

#[test]
fn solve_discrete_diagonal() {
    let files = Files::new();
    let (a, b) = diag_instance(&files);
    let out = plyap(&["solve", "--kind", "discrete", "--matrix-a", p(&a), "--matrix-b", p(&b)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["instance"]["horizon"], 11);
    assert!(f(&r["exact"]["trace_distance"]) <= 0.01);
    let oracle = &r["exact"]["oracle_state"]["re"];
    assert!((f(&oracle[0][0]) - 0.7).abs() < 1e-12 && (f(&oracle[1][1]) - 0.3).abs() < 1e-12);
    assert!((f(&r["exact"]["solution_trace"]) - 1.98413).abs() < 1e-5);
    for c in r["checks"].as_array().unwrap() {
        assert!(c.get("bound").is_some() && c.get("observed").is_some() && c["pass"] == true);
    }
}

#[test]
fn solve_inversion_by_square_root() {
    let files = Files::new();
    let a = files.diag("a.json", &["1", "2"]);
    let r = report(&plyap(&["solve", "--kind", "inversion-i", "--matrix-a", p(&a)]));
    assert_eq!(r["instance"]["horizon"], 10);
    assert_eq!(r["instance"]["condition_number"], 2.0);
    assert!(f(&r["exact"]["trace_distance"]) <= 0.01);
    let oracle = &r["exact"]["oracle_state"]["re"];
    assert!((f(&oracle[0][0]) - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn zero_matrix_needs_no_steps() {
    let files = Files::new();
    let a = files.diag("a.json", &["0", "0"]);
    let b = files.diag("b.json", &["0.5", "0.5"]);
    let r = report(&plyap(&[
        "sample",
        "--kind",
        "discrete",
        "--matrix-a",
        p(&a),
        "--matrix-b",
        p(&b),
        "--trajectories",
        "1000",
    ]));
    assert_eq!(r["instance"]["horizon"], 0);
    assert_eq!(f(&r["exact"]["trace_distance"]), 0.0);
    assert_eq!(f(&r["exact"]["expected_stopping_time"]), 1.0);
    assert_eq!(r["monte_carlo"]["restarts"], 0);
    assert!(all_pass(&r));
}

#[test]
fn continuous_instance_echoes_step_size() {
    let files = Files::new();
    let a = files.diag("a.json", &["-1", "-2"]);
    let b = files.diag("b.json", &["0.5", "0.5"]);
    let out = plyap(&["solve", "--kind", "continuous", "--matrix-a", p(&a), "--matrix-b", p(&b)]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let delta = f(&r["instance"]["delta"]);
    // Δ* = (ε₁/‖A‖)(max Re/min Re) = (0.05/2)(1/2)
    assert!((delta - 0.0125).abs() < 1e-12);
    assert!(f(&r["exact"]["trace_distance"]) <= 0.1);
}

#[test]
fn sample_is_byte_identical_for_a_seed() {
    let files = Files::new();
    let (a, b) = diag_instance(&files);
    let args = [
        "sample",
        "--kind",
        "discrete",
        "--matrix-a",
        p(&a),
        "--matrix-b",
        p(&b),
        "--horizon",
        "22",
        "--trajectories",
        "20000",
    ];
    let first = plyap(&args);
    let second = plyap(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let r = report(&first);
    assert_eq!(r["seed"], 20250806);
    assert!(f(&check(&r, "empirical-trace-distance")["observed"]) <= 0.02);
    assert!(f(&r["monte_carlo"]["mean_stopping_time"]) <= 23.0);

    let mut other = args.to_vec();
    other.extend(["--seed", "5"]);
    assert_ne!(plyap(&other).stdout, first.stdout);
}

#[test]
fn failed_checks_exit_with_one() {
    let files = Files::new();
    let (a, b) = diag_instance(&files);
    // ten trajectories cannot pin the output state to 0.02
    let out =
        plyap(&["sample", "--kind", "discrete", "--matrix-a", p(&a), "--matrix-b", p(&b), "--trajectories", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(check(&report(&out), "empirical-trace-distance")["pass"], false);
}

#[test]
fn runaway_trajectories_become_failed_checks() {
    let files = Files::new();
    let (a, b) = diag_instance(&files);
    let out = plyap(&[
        "sample",
        "--kind",
        "discrete",
        "--matrix-a",
        p(&a),
        "--matrix-b",
        p(&b),
        "--trajectories",
        "1000",
        "--max-steps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(check(&r, "trajectory-step-budget")["pass"], false);
    assert!(r["diagnostics"]["runaway-trajectory"].as_str().unwrap().contains("budget of 2"));
}

#[test]
fn robustness_within_discrete_budget() {
    let files = Files::new();
    let (a, b) = diag_instance(&files);
    let out = plyap(&[
        "robustness",
        "--kind",
        "discrete",
        "--matrix-a",
        p(&a),
        "--matrix-b",
        p(&b),
        "--epsilon",
        "0.05",
        "--epsilon-be",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let t = r["instance"]["horizon"].as_f64().unwrap();
    let budget = f(&r["robustness"]["delta_budget"]);
    assert!((budget - 0.1 / (t * (t + 1.0))).abs() < 1e-15);
    assert!(f(&r["robustness"]["diamond_bound"]) <= budget);
    assert!(f(&r["robustness"]["total_trace_distance"]) <= 0.1);
}

#[test]
fn robustness_edge_cases() {
    let files = Files::new();
    let (a, b) = diag_instance(&files);
    let r = report(&plyap(&[
        "robustness",
        "--kind",
        "discrete",
        "--matrix-a",
        p(&a),
        "--matrix-b",
        p(&b),
        "--epsilon-be",
        "0",
    ]));
    assert_eq!(f(&r["robustness"]["diamond_bound"]), 0.0);
    assert!(f(&r["robustness"]["total_trace_distance"]) <= 0.01);

    let zero = files.diag("zero.json", &["0", "0"]);
    let r = report(&plyap(&["robustness", "--kind", "discrete", "--matrix-a", p(&zero), "--matrix-b", p(&b)]));
    assert!(r["robustness"]["delta_budget"].is_null());
    assert!(r["robustness"]["note"].as_str().unwrap().contains("δ irrelevant"));
    assert!(all_pass(&r));
}

#[test]
fn hardness_table() {
    let out = plyap(&["hardness", "--lambda", "0.8", "--t-max", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let rows = r["hardness"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    assert!((f(&rows[2]["exact"]) - 0.04921).abs() < 5e-6);
    assert!((f(&rows[2]["bound"]) - 0.01678).abs() < 5e-6);
    assert!(all_pass(&r));

    let r = report(&plyap(&["hardness", "--lambda", "0.9", "--t-max", "0"]));
    assert!((f(&r["hardness"]["rows"][0]["bound"]) - 0.1).abs() < 1e-15);

    let out = plyap(&["hardness", "--lambda", "0.6"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_record(&out)["error"], "invalid-input");
}

#[test]
fn estimate_read_outs() {
    let files = Files::new();
    let (a, b) = diag_instance(&files);
    let z = files.diag("z.json", &["1", "-1"]);
    let psi = files.write("psi.json", r#"{"rows":2,"cols":1,"re":[[1],[0]]}"#);
    let phi = files.write("phi.json", r#"{"rows":1,"cols":2,"re":[["3/5",0]],"im":[[0,"4/5"]]}"#);
    let out = plyap(&[
        "estimate",
        "--kind",
        "discrete",
        "--matrix-a",
        p(&a),
        "--matrix-b",
        p(&b),
        "--observable",
        p(&z),
        "--psi",
        p(&psi),
        "--phi",
        p(&phi),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let readout = &r["readout"];
    assert!((f(&readout["observable_on_oracle"]) - 0.4).abs() < 1e-12);
    assert!((f(&readout["overlap_on_oracle"]) - 0.7).abs() < 1e-12);
    assert!((f(&readout["swap_test_circuit"]) - f(&readout["overlap"])).abs() <= 1e-10);
    assert!((f(&readout["hadamard_test_re"]) - f(&readout["matrix_element_re"])).abs() <= 1e-10);
    assert!(all_pass(&r));
}

#[test]
fn report_can_go_to_a_file() {
    let files = Files::new();
    let (a, b) = diag_instance(&files);
    let target = files.dir.path().join("report.json");
    let out = plyap(&["solve", "--kind", "discrete", "--matrix-a", p(&a), "--matrix-b", p(&b), "--output", p(&target)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(r["command"], "solve");
}

#[test]
fn exit_codes_separate_failure_classes() {
    let files = Files::new();
    let (a, b) = diag_instance(&files);

    let out = plyap(&["solve", "--kind", "discrete", "--matrix-a", p(&a)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "usage");
    assert_eq!(plyap(&["solve", "--kind", "sylvester", "--matrix-a", p(&a)]).status.code(), Some(2));
    assert_eq!(plyap(&["frobnicate"]).status.code(), Some(2));

    let bad = files.write("bad.json", r#"{"rows":2,"cols":2,"re":[[1,0]]}"#);
    let out = plyap(&["solve", "--kind", "discrete", "--matrix-a", p(&bad), "--matrix-b", p(&b)]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"], "parse");
    let missing = files.dir.path().join("missing.json");
    assert_eq!(
        plyap(&["solve", "--kind", "discrete", "--matrix-a", p(&missing), "--matrix-b", p(&b)]).status.code(),
        Some(3)
    );

    let unstable = files.diag("unstable.json", &["1", "0.4"]);
    let out = plyap(&["solve", "--kind", "discrete", "--matrix-a", p(&unstable), "--matrix-b", p(&b)]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_record(&out)["error"], "unstable-matrix");

    let out = plyap(&["solve", "--kind", "discrete", "--matrix-a", p(&a), "--matrix-b", p(&b), "--horizon", "3"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_record(&out)["error"], "insufficient-horizon");

    let not_hurwitz = files.diag("nh.json", &["1", "-1"]);
    let out = plyap(&["solve", "--kind", "continuous", "--matrix-a", p(&not_hurwitz), "--matrix-b", p(&b)]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_record(&out)["error"], "not-hurwitz");
}
