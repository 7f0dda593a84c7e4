//! End-to-end tests of the command-line binary: output contracts, exit
//! codes, reproducibility, and file round-trips.

use std::process::{Command, Output};

use psl2z::stallings::{StallingsGraph, ValidationMode};
use psl2z::subgroup_props::{index, Index};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_psl2z"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exits normally")
}

#[test]
fn count_csv_matches_reference_rows() {
    let out = run(&[
        "count",
        "--family",
        "all",
        "--max-size",
        "10",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("size,all,finite_index,cr_free,free,free_finite_index")
    );
    let expected = [
        "1,4,1,0,0,0",
        "2,8,1,2,2,0",
        "3,16,4,0,1,0",
        "4,34,8,4,5,0",
        "5,76,5,0,4,0",
        "6,167,22,13,17,5",
        "7,366,42,0,12,0",
        "8,846,40,56,68,0",
        "9,1870,120,0,37,0",
        "10,4353,265,232,269,0",
    ];
    for row in expected {
        assert_eq!(lines.next(), Some(row));
    }
    assert_eq!(lines.next(), None);
}

#[test]
fn count_is_bit_identical_across_runs() {
    let first = run(&["count", "--max-size", "16"]);
    let second = run(&["count", "--max-size", "16"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn count_single_family_emits_one_column() {
    let out = run(&[
        "count",
        "--family",
        "frfi",
        "--max-size",
        "12",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "size,free_finite_index");
    assert_eq!(lines[6], "6,5");
    assert_eq!(lines[12], "12,60");
}

#[test]
fn count_json_parses_and_matches() {
    let out = run(&["count", "--max-size", "6", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["max_size"], 6);
    let rows = v["rows"].as_array().expect("rows array");
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[5]["size"], 6);
    assert_eq!(rows[5]["all"], "167");
    assert_eq!(rows[5]["finite_index"], "22");
    assert_eq!(rows[5]["free_finite_index"], "5");
}

#[test]
fn analyze_reports_the_worked_example() {
    let out = run(&["analyze", "--generators", "abaB,babab"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("combinatorial type: (6,3,0,0,0,2)"), "{text}");
    assert!(text.contains("index: 6"), "{text}");
    assert!(text.contains("isomorphism type: (0,0,2)"), "{text}");
    assert!(text.contains("free: yes (rank 2)"), "{text}");
}

#[test]
fn analyze_json_round_trip_preserves_canonical_form() {
    let dir = tempfile::tempdir().expect("tempdir");
    let sample_path = dir.path().join("sample.json");
    let out = run(&[
        "sample",
        "--family",
        "all",
        "--size",
        "8",
        "--count",
        "1",
        "--seed",
        "11",
        "--output",
        sample_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));

    let first = run(&[
        "analyze",
        "--graph-file",
        sample_path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(first.status.success(), "stderr: {}", stderr(&first));
    let v: serde_json::Value = serde_json::from_str(&stdout(&first)).expect("valid JSON");
    let canonical = v["canonical_form"].as_str().expect("hex string").to_owned();
    assert!(!canonical.is_empty());

    let again_path = dir.path().join("again.json");
    std::fs::write(&again_path, v["graph"].to_string()).expect("write graph");
    let second = run(&[
        "analyze",
        "--graph-file",
        again_path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(second.status.success());
    let w: serde_json::Value = serde_json::from_str(&stdout(&second)).expect("valid JSON");
    assert_eq!(w["canonical_form"].as_str(), Some(canonical.as_str()));
}

#[test]
fn sample_is_reproducible_and_valid() {
    let args = [
        "sample", "--family", "fi", "--size", "6", "--count", "3", "--seed", "7",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success(), "stderr: {}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    assert!(stderr(&first).contains("seed: 7"));

    let text = stdout(&first);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    for line in lines {
        let graph = StallingsGraph::from_json_str(line).expect("valid graph JSON");
        assert!(graph.validate(ValidationMode::Rooted).is_empty());
        assert_eq!(index(&graph), Index::Finite(6));
    }
}

#[test]
fn sampled_families_have_their_defining_properties() {
    for (family, size) in [("crfree", "10"), ("frfi", "12"), ("free", "9")] {
        let out = run(&[
            "sample", "--family", family, "--size", size, "--count", "4", "--seed", "13",
        ]);
        assert!(out.status.success(), "family {family}");
        for line in stdout(&out).lines() {
            let graph = StallingsGraph::from_json_str(line).expect("valid graph JSON");
            assert!(graph.validate(ValidationMode::Rooted).is_empty());
            let t = graph.combinatorial_type();
            assert_eq!(t.l2 + t.l3, 0, "family {family} graphs are loop-free");
            if family == "frfi" {
                assert_eq!(index(&graph), Index::Finite(12));
            }
        }
    }
}

#[test]
fn omitted_seed_is_drawn_and_printed() {
    let out = run(&["sample", "--family", "all", "--size", "4", "--count", "1"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("seed: "), "{}", stderr(&out));
}

#[test]
fn parallel_jobs_are_reproducible() {
    let args = [
        "sample", "--family", "all", "--size", "6", "--count", "7", "--seed", "3", "--jobs", "3",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(stdout(&first).lines().count(), 7);
}

#[test]
fn dot_output_renders_digraphs() {
    let out = run(&[
        "sample", "--family", "all", "--size", "5", "--count", "2", "--seed", "1", "--format",
        "dot",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).matches("digraph stallings {").count(), 2);
}

#[test]
fn member_answers_both_ways() {
    let yes = run(&["member", "--generators", "abaB,babab", "--word", "abaBabaB"]);
    assert!(yes.status.success());
    assert_eq!(stdout(&yes), "yes\n");

    let no = run(&[
        "member",
        "--generators",
        "abaB,babab",
        "--word",
        "ab",
        "--format",
        "json",
    ]);
    assert!(no.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&no)).expect("valid JSON");
    assert_eq!(v["member"], false);
}

#[test]
fn asymptotics_emits_exact_and_estimate_columns() {
    let out = run(&[
        "asymptotics",
        "--family",
        "fi",
        "--max-size",
        "40",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "size,exact,asymptotic,ratio");
    assert_eq!(lines.len(), 41);
    let last: Vec<&str> = lines[40].split(',').collect();
    assert_eq!(last[0], "40");
    let ratio: f64 = last[3].parse().expect("ratio parses");
    assert!(ratio > 0.05 && ratio < 2.0, "ratio {ratio}");

    let frfi = run(&[
        "asymptotics",
        "--family",
        "frfi",
        "--max-size",
        "24",
        "--format",
        "csv",
    ]);
    let text = stdout(&frfi);
    let sizes: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(sizes, ["6", "12", "18", "24"]);
}

#[test]
fn stats_emits_all_four_statistics() {
    let out = run(&[
        "stats",
        "--family",
        "free",
        "--size",
        "12",
        "--samples",
        "50",
        "--seed",
        "2",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "statistic,sampled_mean,sampled_std,predicted");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("a_loops,0.000000,0.000000"));
    assert!(lines[2].starts_with("b_loops,0.000000,0.000000"));
}

#[test]
fn verify_reports_a_passing_matrix() {
    let out = run(&["verify", "--oracle", "--max-size", "5", "--format", "json"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["pass"], true);
    let checks = v["checks"].as_array().expect("checks array");
    assert!(checks.len() >= 7);
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert!(checks.iter().any(|c| c["name"] == "oracle-subgroup-counts"));
}

#[test]
fn export_writes_counts_and_graphs() {
    let dir = tempfile::tempdir().expect("tempdir");
    let counts_path = dir.path().join("counts.csv");
    let out = run(&[
        "export",
        "counts",
        "--max-size",
        "6",
        "--output",
        counts_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&counts_path).expect("file written");
    assert!(text.starts_with("size,all,finite_index,cr_free,free,free_finite_index"));

    let dot_path = dir.path().join("graph.dot");
    let out = run(&[
        "export",
        "graph",
        "--generators",
        "ab",
        "--format",
        "dot",
        "--output",
        dot_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&dot_path).expect("file written");
    assert!(text.contains("digraph stallings {"));
}

#[test]
fn cache_directory_is_populated_and_reused() {
    let dir = tempfile::tempdir().expect("tempdir");
    let args = [
        "count",
        "--max-size",
        "14",
        "--cache-dir",
        dir.path().to_str().unwrap(),
    ];
    let first = run(&args);
    assert!(first.status.success());
    let entries = std::fs::read_dir(dir.path()).expect("cache dir").count();
    assert!(entries > 0, "cache files should be written");
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn exit_codes_follow_the_contract() {
    // Invalid family or size: 3.
    assert_eq!(
        code(&run(&["count", "--family", "bogus", "--max-size", "5"])),
        3
    );
    assert_eq!(code(&run(&["count", "--max-size", "0"])), 3);
    assert_eq!(
        code(&run(&[
            "sample", "--family", "frfi", "--size", "8", "--seed", "1"
        ])),
        3
    );
    assert_eq!(
        code(&run(&[
            "stats",
            "--family",
            "crfree",
            "--size",
            "6",
            "--samples",
            "5",
            "--seed",
            "1"
        ])),
        3
    );
    assert_eq!(code(&run(&["verify", "--oracle", "--max-size", "9"])), 3);

    // Usage errors: 2.
    assert_eq!(code(&run(&["bogus-command"])), 2);
    assert_eq!(code(&run(&["count"])), 2);
    assert_eq!(code(&run(&["analyze"])), 2);
    assert_eq!(
        code(&run(&[
            "analyze",
            "--generators",
            "ab",
            "--graph-file",
            "/nonexistent.json"
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "sample", "--size", "4", "--count", "0", "--seed", "1"
        ])),
        2
    );

    // Success: 0.
    assert_eq!(code(&run(&["count", "--max-size", "3"])), 0);
}
