use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use exteq::io::{self, CorpusFile, EquationsFile, ExtensionFile};
use exteq::reduction::exhaustive_solve;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/q8")
}

fn exteq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exteq")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("exteq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn corpus_verdicts_match_expected() {
    let dir = corpus();
    let expected: CorpusFile = io::read(&dir.join("expected.json")).unwrap();
    let ext = dir.join(&expected.extension);
    for entry in &expected.entries {
        let eqs = dir.join(&entry.equations);
        let out = exteq(&["--json", "solve", path(&ext), path(&eqs), "--mode", "finite-complete"]);
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        let verdict = report["verdict"].as_object().map_or_else(
            || report["verdict"].as_str().unwrap().to_string(),
            |o| o.keys().next().unwrap().clone(),
        );
        let want_code = if entry.expected == "solved" { 0 } else { 2 };
        assert_eq!(out.status.code(), Some(want_code), "{}: {}", entry.equations, stderr(&out));
        assert_eq!(verdict, entry.expected, "{}", entry.equations);
    }
}

#[test]
fn expected_verdicts_are_rederived_by_exhaustive_search() {
    let dir = corpus();
    let expected: CorpusFile = io::read(&dir.join("expected.json")).unwrap();
    let ext_file: ExtensionFile = io::read(&dir.join(&expected.extension)).unwrap();
    let ext = ext_file.build("extension").unwrap();
    let mut solvable = 0;
    for entry in &expected.entries {
        let f: EquationsFile = io::read(&dir.join(&entry.equations)).unwrap();
        let sys = f.build(&ext, &entry.equations).unwrap();
        let found = exhaustive_solve(&ext, &sys).unwrap().is_some();
        solvable += found as usize;
        assert_eq!(found, entry.expected == "solved", "{}", entry.equations);
    }
    assert!(solvable > 0 && solvable < expected.entries.len());
}

#[test]
fn certificate_written_by_solve_verifies_and_is_bound_to_its_input() {
    let dir = corpus();
    let ext = dir.join("extension.json");
    let eqs = dir.join("commutator_is_z.json");
    let cert = scratch("commutator.cert.json");
    let out = exteq(&["solve", path(&ext), path(&eqs), "--certificate", path(&cert)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = exteq(&["lift", "--verify", path(&cert), path(&ext), path(&eqs)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("certificate verified"));

    let other = dir.join("square_root_of_z.json");
    let out = exteq(&["lift", "--verify", path(&cert), path(&ext), path(&other)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("input digest"));
}

#[test]
fn schema_errors_name_the_field() {
    let bad = scratch("bad-extension.json");
    let text = std::fs::read_to_string(corpus().join("extension.json")).unwrap();
    std::fs::write(&bad, text.replace("\"rank\": 0", "\"rank\": \"zero\"")).unwrap();
    let out = exteq(&["check-presentation", path(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("kernel.rank"), "{}", stderr(&out));
}

#[test]
fn usage_errors_and_help_have_distinct_exit_codes() {
    assert_eq!(exteq(&["solve"]).status.code(), Some(64));
    assert_eq!(exteq(&["no-such-command"]).status.code(), Some(64));
    let help = exteq(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    for sub in ["solve", "reduce", "verify-invariants", "demo-t1s", "build-automata"] {
        assert!(stdout(&help).contains(sub), "{sub} missing from help");
    }
}

#[test]
fn invariants_pass_and_radius_zero_is_vacuous() {
    let ext = corpus().join("extension.json");
    for radius in ["0", "2"] {
        let out = exteq(&["--json", "verify-invariants", path(&ext), "--radius", radius, "--samples", "50"]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["pass"], true);
    }
}

#[test]
fn ball_and_reduce_report_the_expected_shape() {
    let dir = corpus();
    let ext = dir.join("extension.json");
    let out = exteq(&["--json", "ball", path(&ext), "--radius", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["spheres"], serde_json::json!([1, 2, 1, 0]));
    assert_eq!(v["closed"], true);

    let out = exteq(&["--json", "reduce", path(&ext), path(&dir.join("commutator_is_z.json"))]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row.as_str().unwrap().split(' ').count(), 3, "{row}");
    }
}

#[test]
fn automata_round_trip_through_files() {
    let ext = corpus().join("extension.json");
    let l = scratch("l.json");
    let out = exteq(&["build-automata", path(&ext), "-o", path(&l)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let fpa = scratch("fpa.json");
    let out = exteq(&["build-fpa", path(&ext), "--l", path(&l), "-o", path(&fpa)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let ppa = scratch("ppa.json");
    let out = exteq(&["build-ppa", path(&ext), "--l", path(&l), "-o", path(&ppa)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let eqs = corpus().join("square_root_of_z.json");
    let out = exteq(&["solve", path(&ext), path(&eqs), "--l", path(&l)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn t1s_demo_shows_the_obstruction_and_the_solved_sibling() {
    let out = exteq(&["demo-t1s"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.matches(": 0 = -2 ").count(), 9, "{text}");
    assert!(text.contains("x = (c, (2)), certificate verified"), "{text}");
}
