//! End-to-end tests of the installed binary: spawn it, feed it the
//! bundled fixture files, and assert on exit codes and reports.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

use timed_align::causal::{is_valid_timing, unroll_prefix, TimingFunction, ValidityVerdict};
use timed_align::fixtures::{branch_choice_net, chain_six, untimed_run};
use timed_align::io::serialize_net;
use timed_align::time::{parse_time, time};

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_with_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_timed-align"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf8 stderr"),
    }
}

fn run(args: &[&str]) -> Output {
    run_with_env(args, &[])
}

fn write(dir: &tempfile::TempDir, name: &str, content: &str) -> String {
    let path: PathBuf = dir.path().join(name);
    std::fs::write(&path, content).expect("write fixture");
    path.to_str().expect("utf8 path").to_string()
}

#[test]
fn validate_accepts_the_reference_run() {
    let out = run(&[
        "validate",
        "--net",
        &fixture("example1.net"),
        "--trace",
        &fixture("example1-run.csv"),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(out.stdout, "valid\n");
}

#[test]
fn validate_rejects_an_early_firing_with_exit_one() {
    let out = run(&[
        "validate",
        "--net",
        &fixture("example1.net"),
        "--trace",
        &fixture("example1-early-e.csv"),
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.starts_with("invalid:"), "got: {}", out.stdout);
    assert!(out.stdout.contains("`e`"), "got: {}", out.stdout);

    let out = run(&[
        "validate",
        "--net",
        &fixture("example1.net"),
        "--trace",
        &fixture("example1-early-e.csv"),
        "--format",
        "json",
    ]);
    assert_eq!(out.code, 1);
    let v: Value = serde_json::from_str(out.stdout.trim()).unwrap();
    assert_eq!(v["verdict"], "invalid");
    assert_eq!(v["transition"], "e");
}

#[test]
fn validate_treats_an_unfireable_sequence_as_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(&dir, "wrong-order.csv", "b,2\na,3\n");
    let out = run(&[
        "validate",
        "--net",
        &fixture("example1.net"),
        "--trace",
        &trace,
    ]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.starts_with("invalid:"), "got: {}", out.stdout);
}

#[test]
fn validate_accepts_an_empty_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(&dir, "empty.csv", "");
    let out = run(&[
        "validate",
        "--net",
        &fixture("example1.net"),
        "--trace",
        &trace,
    ]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout, "valid\n");
}

#[test]
fn align_stamp_reports_the_walkthrough_cost_and_a_valid_repair() {
    let out = run(&[
        "align",
        "--metric",
        "stamp",
        "--net",
        &fixture("chain-six.net"),
        "--trace",
        &fixture("chain-six-observed.csv"),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "cost 2");
    let gamma: Vec<_> = lines[1]
        .strip_prefix("gamma ")
        .unwrap()
        .split(',')
        .map(|s| parse_time(s).unwrap())
        .collect();
    assert_eq!(gamma.len(), 6);

    // The reported repair is itself a valid timing of the run.
    let net = chain_six();
    let run_ids = untimed_run(&net, &["t1", "t2", "t3", "t4", "t5", "t6"]);
    let cp = unroll_prefix(&net, &run_ids).unwrap();
    let verdict = is_valid_timing(&net, &cp, &TimingFunction::from_times(gamma)).unwrap();
    assert_eq!(verdict, ValidityVerdict::Valid);
}

#[test]
fn align_stamp_emits_json_on_request() {
    let out = run(&[
        "align",
        "--metric",
        "stamp",
        "--format",
        "json",
        "--net",
        &fixture("chain-six.net"),
        "--trace",
        &fixture("chain-six-observed.csv"),
    ]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(out.stdout.trim()).unwrap();
    assert_eq!(v["cost"], "2");
    assert_eq!(v["gamma"].as_array().unwrap().len(), 6);
}

#[test]
fn align_delay_reports_cost_repair_and_flows() {
    let out = run(&[
        "align",
        "--metric",
        "delay",
        "--net",
        &fixture("chain-three.net"),
        "--trace",
        &fixture("chain-three-observed.csv"),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert_eq!(out.stdout, "cost 3\ngamma 1,3,4\nflow 1,2,1\n");
}

#[test]
fn align_delay_needs_an_extended_free_choice_net() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(
        &dir,
        "confused.net",
        "tpn 1\n\nplace p1\nplace p2\nplace p3\n\n\
         transition t1 t1 0 1\ntransition t2 t2 0 1\n\n\
         arc p1 t1\narc t1 p3\narc p1 t2\narc p2 t2\narc t2 p3\n\n\
         initial p1 1\ninitial p2 1\nfinal p3 1\n",
    );
    let trace = write(&dir, "one.csv", "t1,0\n");
    let out = run(&["align", "--metric", "delay", "--net", &net, "--trace", &trace]);
    assert_eq!(out.code, 3, "stdout: {} stderr: {}", out.stdout, out.stderr);
    assert!(out.stderr.contains("extended free choice"), "got: {}", out.stderr);
}

#[test]
fn align_delay_reports_an_unrepairable_trace_with_exit_four() {
    // ta and tb share their preset, so ta's deadline 0 caps the window of
    // any firing from that place; tb's earliest time 3 can never fit.
    let dir = tempfile::tempdir().unwrap();
    let net = write(
        &dir,
        "capped.net",
        "tpn 1\n\nplace p1\nplace p2\n\n\
         transition ta ta 0 0\ntransition tb tb 3 3\n\n\
         arc p1 ta\narc ta p2\narc p1 tb\narc tb p2\n\n\
         initial p1 1\nfinal p2 1\n",
    );
    let trace = write(&dir, "b.csv", "tb,3\n");
    let out = run(&["align", "--metric", "delay", "--net", &net, "--trace", &trace]);
    assert_eq!(out.code, 4, "stdout: {} stderr: {}", out.stdout, out.stderr);
    assert!(out.stderr.contains("no valid timing"), "got: {}", out.stderr);
}

#[test]
fn align_stamp_on_an_empty_trace_costs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(&dir, "empty.csv", "");
    let out = run(&[
        "align",
        "--metric",
        "stamp",
        "--net",
        &fixture("example1.net"),
        "--trace",
        &trace,
    ]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.starts_with("cost 0\n"));
}

#[test]
fn distance_of_a_trace_to_itself_is_zero() {
    for metric in ["stamp", "delay", "mixed"] {
        let out = run(&[
            "distance",
            "--metric",
            metric,
            "--net",
            &fixture("chain-three.net"),
            "--t1",
            &fixture("chain-three-observed.csv"),
            "--t2",
            &fixture("chain-three-observed.csv"),
        ]);
        assert_eq!(out.code, 0, "{metric} stderr: {}", out.stderr);
        assert_eq!(out.stdout, "0\n", "{metric}");
    }
}

#[test]
fn distance_metrics_disagree_on_the_three_step_example() {
    let dir = tempfile::tempdir().unwrap();
    let aligned = write(&dir, "aligned.csv", "t1,1\nt2,3\nt3,4\n");
    let expect = [("stamp", "4\n"), ("delay", "3\n"), ("mixed", "2\n")];
    for (metric, want) in expect {
        let out = run(&[
            "distance",
            "--metric",
            metric,
            "--net",
            &fixture("chain-three.net"),
            "--t1",
            &fixture("chain-three-observed.csv"),
            "--t2",
            &aligned,
        ]);
        assert_eq!(out.code, 0, "{metric} stderr: {}", out.stderr);
        assert_eq!(out.stdout, want, "{metric}");
    }
}

#[test]
fn distance_requires_both_traces_to_describe_one_run() {
    let dir = tempfile::tempdir().unwrap();
    let upper = write(&dir, "upper.csv", "a,1\nb,2\n");
    let lower = write(&dir, "lower.csv", "a,1\nc,2\n");
    let out = run(&[
        "distance",
        "--net",
        &fixture("example1.net"),
        "--t1",
        &upper,
        "--t2",
        &lower,
    ]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("different runs"), "got: {}", out.stderr);
}

#[test]
fn mixed_distance_size_guard_trips_with_exit_five() {
    let args = [
        "distance",
        "--metric",
        "mixed",
        "--net",
        &fixture("chain-six.net"),
        "--t1",
        &fixture("chain-six-observed.csv"),
        "--t2",
        &fixture("chain-six-observed.csv"),
    ];
    // Six events pass the default limit of eight…
    let out = run(&args);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    // …but not an explicitly lowered one.
    let out = run_with_env(&args, &[("TIMED_ALIGN_GUARD", "4")]);
    assert_eq!(out.code, 5, "stdout: {} stderr: {}", out.stdout, out.stderr);
    assert!(out.stderr.contains("limit"), "got: {}", out.stderr);
}

#[test]
fn generated_traces_validate_on_their_own_net() {
    let out = run(&[
        "generate",
        "--net",
        &fixture("example1.net"),
        "--seed",
        "3",
        "--max-events",
        "64",
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(!out.stdout.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let trace = write(&dir, "generated.csv", &out.stdout);
    let check = run(&[
        "validate",
        "--net",
        &fixture("example1.net"),
        "--trace",
        &trace,
    ]);
    assert_eq!(check.code, 0, "stderr: {}", check.stderr);
    assert_eq!(check.stdout, "valid\n");
}

#[test]
fn export_lp_prints_the_objective_first() {
    let out = run(&[
        "export-lp",
        "--net",
        &fixture("chain-six.net"),
        "--trace",
        &fixture("chain-six-observed.csv"),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.starts_with("min:"), "got: {}", out.stdout);
    assert!(out.stdout.contains("g6"));
}

#[test]
fn dump_graphs_prints_one_line_per_prefix() {
    let out = run(&[
        "dump-graphs",
        "--net",
        &fixture("chain-six.net"),
        "--trace",
        &fixture("chain-six-observed.csv"),
    ]);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("1; "));
    assert!(lines[5].starts_with("6; "));
}

#[test]
fn general_alignment_swaps_branches_when_candidates_allow_it() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(&dir, "branch-choice.net", &serialize_net(&branch_choice_net()));
    let trace = write(&dir, "aaa.csv", "a,100\na,100\na,100\n");

    let base = [
        "align",
        "--general",
        "--metric",
        "stamp",
        "--ca",
        "1",
        "--ct",
        "1/10",
        "--net",
        &net,
        "--trace",
        &trace,
    ];
    let mut with_k2: Vec<&str> = base.to_vec();
    with_k2.extend(["--k", "2"]);
    let out = run(&with_k2);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "total 2");
    assert_eq!(lines[3], "aligned b@100,a@100,a@100");

    let mut with_k1: Vec<&str> = base.to_vec();
    with_k1.extend(["--k", "1"]);
    let out = run(&with_k1);
    assert_eq!(out.code, 0, "stderr: {}", out.stderr);
    assert!(out.stdout.starts_with("total 30\n"), "got: {}", out.stdout);
}

#[test]
fn net_parse_errors_carry_the_line_and_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(
        &dir,
        "bad.net",
        "tpn 1\n\nplace p1\n\ntransition t t 3 2\n",
    );
    let trace = write(&dir, "t.csv", "t,0\n");
    let out = run(&["validate", "--net", &net, "--trace", &trace]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("line 5"), "got: {}", out.stderr);
    assert!(out.stderr.contains("earliest firing time"), "got: {}", out.stderr);
}

#[test]
fn trace_resolution_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let trace = write(&dir, "unknown.csv", "zz,1\n");
    let out = run(&[
        "validate",
        "--net",
        &fixture("example1.net"),
        "--trace",
        &trace,
    ]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("zz"), "got: {}", out.stderr);
}

#[test]
fn round_trip_through_generate_uses_exact_rationals() {
    let out = run(&[
        "generate",
        "--net",
        &fixture("example1.net"),
        "--seed",
        "3",
        "--max-events",
        "64",
        "--format",
        "json",
    ]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(out.stdout.trim()).unwrap();
    let steps = v["steps"].as_array().unwrap();
    assert!(!steps.is_empty());
    for s in steps {
        // Every stamp is a normalized exact rational the parser accepts.
        let text = s["stamp"].as_str().unwrap();
        let parsed = parse_time(text).unwrap();
        assert!(parsed >= time(0));
    }
}
