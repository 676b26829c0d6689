use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn arcmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arcmat"))
        .args(args)
        .env_remove("ARCMAT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn arcmat_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_arcmat"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn glynn_file_and_round_trip() {
    let out = arcmat(&["arc", "gen", "--type", "glynn"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("3 2 1"));
    assert_eq!(lines.next(), Some("5 10"));
    assert_eq!(
        arcmat_stdin(&["arc", "check", "-"], &text).status.code(),
        Some(0)
    );
}

#[test]
fn builtin_constructions_check() {
    for args in [
        vec!["arc", "gen", "--type", "nrc", "--p", "7", "--k", "3"],
        vec![
            "arc", "gen", "--type", "nrc", "--p", "2", "--e", "3", "--k", "4", "--size", "6",
        ],
        vec![
            "arc", "gen", "--type", "bush", "--p", "2", "--e", "2", "--k", "3",
        ],
        vec![
            "arc", "gen", "--type", "sample", "--p", "11", "--k", "4", "--size", "7", "--seed", "3",
        ],
    ] {
        let out = arcmat(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let check = arcmat_stdin(&["arc", "check", "-"], &stdout(&out));
        assert_eq!(check.status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn non_arc_exits_one() {
    let text = "3 1 0\n3 4\n1 0 0\n0 1 0\n0 0 1\n1 1 0\n";
    let out = arcmat_stdin(&["arc", "check", "-"], text);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[0, 1, 3]"));
}

#[test]
fn dual_and_normalize() {
    let dir = tempfile::tempdir().unwrap();
    let nrc = dir.path().join("nrc.arc");
    let gen = arcmat(&[
        "arc",
        "gen",
        "--type",
        "nrc",
        "--p",
        "7",
        "--k",
        "3",
        "-o",
        nrc.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let dual = arcmat(&["arc", "dual", nrc.to_str().unwrap()]);
    assert_eq!(dual.status.code(), Some(0));
    assert!(stdout(&dual).lines().nth(1) == Some("5 8"));
    let norm = arcmat(&["arc", "normalize", nrc.to_str().unwrap()]);
    let text = stdout(&norm);
    let rows: Vec<&str> = text.lines().skip(2).take(4).collect();
    assert_eq!(rows, ["1 0 0", "0 1 0", "0 0 1", "1 1 1"]);
}

#[test]
fn rank_formula_and_matrix_rank_agree() {
    let out = arcmat(&[
        "rank-formula",
        "--r",
        "3",
        "--a",
        "2",
        "--b",
        "1",
        "--p",
        "2",
    ]);
    assert_eq!(stdout(&out).trim(), "2");
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("inc.mat");
    let build = arcmat(&[
        "matrix",
        "build",
        "--kind",
        "inclusion",
        "--r",
        "3",
        "--a",
        "2",
        "--b",
        "1",
        "--p",
        "2",
        "-o",
        m.to_str().unwrap(),
    ]);
    assert_eq!(build.status.code(), Some(0));
    assert_eq!(stdout(&arcmat(&["rank", m.to_str().unwrap()])).trim(), "2");
}

#[test]
fn matrix_kinds_build() {
    let dir = tempfile::tempdir().unwrap();
    let arc = dir.path().join("s.arc");
    arcmat(&[
        "arc",
        "gen",
        "--type",
        "nrc",
        "--p",
        "3",
        "--e",
        "2",
        "--k",
        "5",
        "--size",
        "8",
        "-o",
        arc.to_str().unwrap(),
    ]);
    let m = arcmat(&[
        "matrix",
        "build",
        "--kind",
        "M",
        "--n",
        "1",
        "--arc",
        arc.to_str().unwrap(),
    ]);
    assert_eq!(m.status.code(), Some(0));
    assert_eq!(stdout(&m).lines().nth(1), Some("70 280"));
    let full = dir.path().join("c.arc");
    arcmat(&[
        "arc",
        "gen",
        "--type",
        "nrc",
        "--p",
        "7",
        "--k",
        "3",
        "-o",
        full.to_str().unwrap(),
    ]);
    for kind in ["H", "P", "Q", "R", "L"] {
        let out = arcmat(&[
            "matrix",
            "build",
            "--kind",
            kind,
            "--arc",
            full.to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{kind}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn deficient_campaign_exits_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_arcmat"))
        .args([
            "campaign",
            "perrank",
            "--p",
            "3",
            "--e",
            "2",
            "--k",
            "5",
            "--n",
            "1",
            "--from-nrc-subarc",
        ])
        .env("ARCMAT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["failures"].as_array().unwrap().len(), 1);
    assert_eq!(report["exploratory"], true);
    let witness = dir.path().join("perrank-q9-k5-n1-seed0-witness0.arc");
    assert!(witness.exists());
    assert_eq!(
        arcmat(&["arc", "check", witness.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn passing_campaigns_exit_zero() {
    let out = arcmat(&[
        "campaign",
        "perrank",
        "--p",
        "3",
        "--e",
        "2",
        "--k",
        "4",
        "--n",
        "1",
        "--exhaustive",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("perrank,9,4,1,6,"));
    let out = arcmat(&[
        "campaign", "classify", "--p", "7", "--k", "3", "--sample", "20", "--seed", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = arcmat(&[
        "campaign",
        "extension",
        "--p",
        "7",
        "--k",
        "3",
        "--size",
        "4",
        "--sample",
        "3",
        "--weight-one",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = arcmat(&[
        "campaign",
        "run",
        "segre",
        "--p",
        "11",
        "--k",
        "4",
        "--size",
        "9",
        "--sample",
        "5",
        "--instances",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn campaign_output_is_deterministic() {
    let args = [
        "campaign", "perrank", "--p", "11", "--k", "4", "--n", "2", "--sample", "10", "--seed", "5",
    ];
    let strip = |o: Output| {
        let mut v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        v.as_object_mut().unwrap().remove("timing");
        v
    };
    assert_eq!(strip(arcmat(&args)), strip(arcmat(&args)));
    let mut par = args.to_vec();
    par.extend(["--jobs", "2"]);
    assert_eq!(strip(arcmat(&args)), strip(arcmat(&par)));
}

#[test]
fn verify_and_goal_table() {
    for (name, p, e, k) in [
        ("segre", "3", "2", "5"),
        ("colperp", "3", "2", "4"),
        ("beta", "5", "1", "3"),
    ] {
        let out = arcmat(&[
            "verify", name, "--p", p, "--e", e, "--k", k, "--count", "20",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = arcmat(&["campaign", "goal-table", "--p", "3", "--e", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["mds_bound"], "16/3");
    assert_eq!(v["n_max"], 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        arcmat(&["campaign", "perrank", "--p", "4", "--k", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        arcmat(&["verify", "nothing", "--p", "3", "--k", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(arcmat(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        arcmat(&["arc", "check", "/nonexistent/file"]).status.code(),
        Some(2)
    );
    assert_eq!(
        arcmat(&["arc", "gen", "--type", "nrc", "--k", "3"])
            .status
            .code(),
        Some(2)
    );
    assert!(!Path::new("/nonexistent/file").exists());
}
