use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pchaos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pchaos")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn periodicity_suite_on_three_blocks() {
    let o = pchaos(&[
        "verify",
        "--claim",
        "periodicity",
        "--preset",
        "small-2",
        "--prefix",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("k < b_3 = 352"), "{out}");
    assert!(out.contains("352 cases, 0 failed"), "{out}");
}

#[test]
fn power_example() {
    let o = pchaos(&["power", "--basis", "1454", "--exp", "4018", "--preset", "small-2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "4*e_0 - 2^-78*e_1376");
    // the exponent is not limited to 64 bits
    let big = format!("4018{}", "0".repeat(30));
    assert_eq!(pchaos(&["power", "--basis", "3", "--exp", &big]).status.code(), Some(0));
}

#[test]
fn canonical_schedule_example() {
    let o = pchaos(&["schedule", "--preset", "canonical", "--prefix", "2", "--check-lp-bound"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "b = [0, 64, 1088]"), "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"entries\": [[3, 1]]}").unwrap();
    for args in [
        vec!["power", "--basis", "3", "--exp", "-1"],
        vec!["hyp0", "--eps", "1/3", "--k", "0", "--N", "1", "--M", "0", "--xk", "1"],
        vec!["hyp0", "--eps", "1/2", "--k", "0", "--N", "2", "--M", "5", "--xk", "1"],
        vec!["period", "--basis", "5000", "--prefix", "3"],
        vec!["orbit", "--vec", path(&junk), "--steps", "3"],
        vec!["schedule", "--preset", "small-2", "--prefix", "0"],
        vec!["frobnicate"],
    ] {
        assert_eq!(pchaos(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn invalid_schedule_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("s.json");
    assert!(pchaos(&["schedule", "--prefix", "4", "--out", path(&good)])
        .status
        .success());
    let mut s: Value = serde_json::from_str(&std::fs::read_to_string(&good).unwrap()).unwrap();
    s["tau"][0] = 1.into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, s.to_string()).unwrap();
    // reporting on it is a failed check, using it is bad input
    let o = pchaos(&["--schedule", path(&bad), "schedule"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    assert_eq!(
        pchaos(&["--schedule", path(&bad), "period", "--basis", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn emitted_json_is_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("s.json");
    assert!(pchaos(&["schedule", "--prefix", "20", "--out", path(&sched)])
        .status
        .success());
    let o = pchaos(&[
        "--schedule",
        path(&sched),
        "power",
        "--basis",
        "40",
        "--exp",
        "70",
        "--json",
    ]);
    assert!(o.status.success());
    let image = dir.path().join("image.json");
    std::fs::write(&image, &o.stdout).unwrap();

    let zero = dir.path().join("zero.json");
    std::fs::write(&zero, "{\"entries\": []}").unwrap();
    let o = pchaos(&[
        "--schedule",
        path(&sched),
        "--json",
        "transit",
        "--from",
        path(&zero),
        "--to",
        path(&image),
        "--eps",
        "1/2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rep["checks"].as_array().unwrap().iter().all(|c| c["holds"] == true));
    let z = dir.path().join("z.json");
    std::fs::write(&z, rep["witness"]["z"].to_string()).unwrap();
    assert!(
        pchaos(&["--schedule", path(&sched), "orbit", "--vec", path(&z), "--steps", "2"])
            .status
            .success()
    );
}

#[test]
fn orbit_csv_has_exact_and_approximate_columns() {
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("v.json");
    std::fs::write(&v, "{\"entries\": [[32, {\"m\": \"1\", \"e\": 0, \"s\": 1}]]}").unwrap();
    let csv = dir.path().join("out.csv");
    let o = pchaos(&["orbit", "--vec", path(&v), "--steps", "20", "--csv", path(&csv)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "j,norm,exact,approx,support");
    assert_eq!(lines.len(), 22);
    // e_32 doubles through the doubling region of block 1
    assert!(lines[10].starts_with("9,l1,512,"), "{}", lines[10]);
}

#[test]
fn suites_are_deterministic() {
    let args = [
        "--json", "verify", "--claim", "all", "--prefix", "3", "--trials", "5", "--seed", "11",
    ];
    let a = pchaos(&args);
    let b = pchaos(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let results: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(results.as_array().unwrap().len(), 5);
}

#[test]
fn reiterate_and_density() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    std::fs::write(&c, "{\"entries\": [[0, {\"m\": \"1\", \"e\": 0, \"s\": 1}]]}").unwrap();
    let o = pchaos(&[
        "--json",
        "reiterate",
        "--center",
        path(&c),
        "--radius",
        "1/2",
        "--depth",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&o.stdout).unwrap();
    let hits = dir.path().join("hits.json");
    std::fs::write(&hits, rep["witness"]["hits"].to_string()).unwrap();
    let o = pchaos(&["density", "--set", path(&hits), "--window", "193"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("window 193: 4 hits"), "{}", stdout(&o));

    let ap = dir.path().join("ap.json");
    std::fs::write(
        &ap,
        "{\"elements\": [0, 4, 6, 8, 12], \"horizon\": 12, \"structure\": [{\"start\": 0, \"step\": 4}, {\"start\": 0, \"step\": 6}]}",
    )
    .unwrap();
    let o = pchaos(&["density", "--set", path(&ap)]);
    assert!(stdout(&o).contains("exact density = 1/3"), "{}", stdout(&o));
}
