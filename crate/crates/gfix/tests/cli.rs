use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gfix(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfix"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(dir: &Path, file: &str) -> Value {
    let text = std::fs::read_to_string(dir.join("out").join(file)).expect("report written");
    serde_json::from_str(&text).expect("report is JSON")
}

fn run(args: &[&str]) -> (tempfile::TempDir, Output) {
    let dir = tempfile::tempdir().unwrap();
    let o = gfix(dir.path(), args);
    (dir, o)
}

#[test]
fn axioms_exit_codes() {
    let (dir, o) = run(&["axioms", "--space", "absmax"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(dir.path(), "axioms.json");
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["command"], "axioms");

    let (dir, o) = run(&["axioms", "--space", "drop-z"]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    let g2 = out
        .lines()
        .find(|l| l.trim_start().starts_with("G2"))
        .unwrap();
    assert!(g2.contains("FAIL  witness"), "{out}");
    let r = report(dir.path(), "axioms.json");
    assert_eq!(r["result"]["report"]["g2"]["verdict"], "FAIL");

    let (_, o) = run(&["axioms"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn every_catalog_space_passes_its_standard_sample() {
    for s in ["absmax", "perimeter-r", "finite-uniform-3"] {
        let (_, o) = run(&["axioms", "--space", s]);
        assert_eq!(code(&o), 0, "{s}: {}", stdout(&o));
    }
    let (_, o) = run(&["axioms", "--space", "skew"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn condition_examples() {
    let (_, o) = run(&[
        "condition",
        "--space",
        "absmax",
        "--map",
        "moebius",
        "--condition",
        "C-GAUGE",
        "--h",
        "ratio1",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let (dir, o) = run(&[
        "condition",
        "--space",
        "absmax",
        "--map",
        "moebius",
        "--condition",
        "C-Q",
        "--q",
        "0.9",
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let r = report(dir.path(), "certificate.json");
    let worst = &r["result"]["certificate"]["worst"][0];
    assert_eq!(worst["status"], "FAILS");
    // a failing triple has 1/(1 + G(x,y,z)) >= q, so its spread stays below 1/q - 1
    let t: Vec<f64> = worst["triple"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v[0].as_f64().unwrap())
        .collect();
    let spread = (t[0] - t[1])
        .abs()
        .max((t[1] - t[2]).abs())
        .max((t[0] - t[2]).abs());
    assert!(spread <= 1.0 / 0.9 - 1.0, "{t:?}");
    assert!(r["result"]["reverified"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v == true));

    let (_, o) = run(&[
        "condition",
        "--space",
        "absmax",
        "--map",
        "scale-0.5",
        "--condition",
        "C-Q",
        "--q",
        "0.6",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn condition_on_a_finite_space_is_exhaustive() {
    let (dir, o) = run(&[
        "condition",
        "--space",
        "finite-uniform-3",
        "--map",
        "constant-1",
        "--condition",
        "C-Q",
        "--q",
        "1/2",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(dir.path(), "certificate.json");
    assert_eq!(r["result"]["triples"]["kind"], "exhaustive");
    assert_eq!(r["result"]["certificate"]["checked"], 18);
    assert_eq!(r["result"]["certificate"]["vacuous"], 18);
}

#[test]
fn solve_examples() {
    let (dir, o) = run(&[
        "solve",
        "--space",
        "absmax",
        "--map",
        "moebius",
        "--x0",
        "1",
        "--eps-stop",
        "1e-4",
    ]);
    assert_eq!(code(&o), 0);
    let r = report(dir.path(), "solve.json");
    let c = &r["result"]["certificate"];
    assert_eq!(c["convergence_class"]["class"], "sublinear");
    assert!(c["candidate"][0].as_f64().unwrap().abs() < 0.011);

    let (dir, o) = run(&[
        "solve",
        "--space",
        "absmax",
        "--map",
        "scale-0.5",
        "--x0",
        "1",
        "--eps-stop",
        "1e-6",
        "--certified-q",
        "0.5",
    ]);
    assert_eq!(code(&o), 0);
    let c = &report(dir.path(), "solve.json")["result"]["certificate"];
    assert_eq!(c["bound_respected"], true);
    assert_eq!(c["iterations"], 19);
    let csv = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,x,gap,bound"));
    assert_eq!(lines.next(), Some("0,1,0.5,1"));

    let (dir, o) = run(&[
        "solve",
        "--space",
        "absmax",
        "--map",
        "constant-3",
        "--x0",
        "-7.5",
    ]);
    assert_eq!(code(&o), 0);
    let c = &report(dir.path(), "solve.json")["result"]["certificate"];
    assert_eq!(c["candidate"][0], 3.0);
    assert!(c["iterations"].as_u64().unwrap() <= 1);
    let csv = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert!(
        csv.lines().nth(1).unwrap().ends_with(','),
        "bound column empty: {csv}"
    );

    let (_, o) = run(&[
        "solve",
        "--space",
        "absmax",
        "--map",
        "moebius",
        "--x0",
        "1",
        "--max-iter",
        "10",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn solve_on_a_finite_space() {
    let (dir, o) = run(&[
        "solve",
        "--space",
        "finite-uniform-4",
        "--map",
        "table:1,2,2,0",
        "--x0",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let c = &report(dir.path(), "solve.json")["result"]["certificate"];
    assert_eq!(c["candidate"], 2);
    assert_eq!(c["residual"], "0");
}

#[test]
fn gauge_examples() {
    for (g, want) in [
        ("ratio1", 0),
        ("identity-diag", 1),
        ("half", 0),
        ("scaled-0.9", 0),
    ] {
        let (_, o) = run(&["gauge", "--gauge", g]);
        assert_eq!(code(&o), want, "{g}: {}", stdout(&o));
    }
    let (_, o) = run(&["gauge", "--gauge", "nope"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn oracle_examples() {
    let (dir, o) = run(&[
        "oracle",
        "--space",
        "finite-uniform-4",
        "--theorem",
        "THM-2.12",
        "--delta",
        "0.9",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(dir.path(), "oracle.json");
    assert_eq!(r["result"]["report"]["maps_total"], 256);
    assert_eq!(r["result"]["hypothesis_failures_reverified"], true);

    let (dir, o) = run(&[
        "oracle",
        "--space",
        "finite-uniform-3",
        "--theorem",
        "THM-2.2",
        "--q",
        "0.5",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        report(dir.path(), "oracle.json")["result"]["report"]["maps_total"],
        27
    );

    let (_, o) = run(&[
        "oracle",
        "--space",
        "finite-uniform-6",
        "--theorem",
        "THM-2.2",
        "--q",
        "0.5",
    ]);
    assert_eq!(code(&o), 2);
    let (_, o) = run(&[
        "oracle",
        "--space",
        "absmax",
        "--theorem",
        "THM-2.2",
        "--q",
        "0.5",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn oracle_reads_metric_tables() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("zero.txt"), "3\n0 0 0\n0 0 0\n0 0 0\n").unwrap();
    let o = gfix(
        dir.path(),
        &[
            "oracle",
            "--metric-table",
            "zero.txt",
            "--theorem",
            "THM-2.2",
            "--q",
            "1/2",
        ],
    );
    // a zero table is not a metric, so loading it is a usage error
    assert_eq!(code(&o), 2);

    std::fs::write(
        dir.path().join("m.txt"),
        "# path 0 - 1 - 2\n3\n0 1 2\n1 0 1\n2 1 0\n",
    )
    .unwrap();
    let o = gfix(
        dir.path(),
        &[
            "oracle",
            "--metric-table",
            "m.txt",
            "--theorem",
            "THM-2.12",
            "--delta",
            "9/10",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(dir.path(), "oracle.json");
    assert_eq!(r["result"]["report"]["maps_total"], 27);
    assert_eq!(r["result"]["report"]["space"], "table:m.txt");
}

#[test]
fn violate_examples() {
    let (dir, o) = run(&[
        "violate",
        "--space",
        "absmax",
        "--map",
        "moebius",
        "--condition",
        "C-Q",
        "--q-grid",
        "0.5,0.9,0.99",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(dir.path(), "witness.json");
    for s in r["result"]["searches"].as_array().unwrap() {
        let q = s["q"].as_f64().unwrap();
        let w = &s["witness"];
        assert!(w["witness_x"].as_f64().unwrap() <= 1.0 / q - 1.0);
        assert_eq!(w["reverified"], true);
        let b = w["boundary_x"].as_f64().unwrap();
        assert!((b - (1.0 / q - 1.0)).abs() < 1e-6, "boundary {b} for q={q}");
    }

    let (_, o) = run(&[
        "violate",
        "--space",
        "absmax",
        "--map",
        "scale-0.5",
        "--condition",
        "C-Q",
        "--q",
        "0.6",
    ]);
    assert_eq!(code(&o), 1);

    let (dir, o) = run(&[
        "violate",
        "--space",
        "absmax",
        "--map",
        "identity",
        "--condition",
        "C-Q",
        "--q",
        "0.9",
    ]);
    assert_eq!(code(&o), 0);
    let w = &report(dir.path(), "witness.json")["result"]["searches"][0]["witness"];
    assert_eq!(w["status"], "FAILS");
}

#[test]
fn usage_errors_exit_2_and_help_exits_0() {
    let (_, o) = run(&["--help"]);
    assert_eq!(code(&o), 0);
    let (_, o) = run(&["solve", "--bogus"]);
    assert_eq!(code(&o), 2);
    let (_, o) = run(&["frobnicate"]);
    assert_eq!(code(&o), 2);
    let (_, o) = run(&[
        "condition",
        "--space",
        "absmax",
        "--map",
        "moebius",
        "--condition",
        "C-Z",
    ]);
    assert_eq!(code(&o), 2);
    let (_, o) = run(&[
        "condition",
        "--space",
        "absmax",
        "--map",
        "moebius",
        "--condition",
        "C-Q",
        "--q",
        "1.5",
    ]);
    assert_eq!(code(&o), 2);
    let (_, o) = run(&["solve", "--space", "absmax", "--map", "moebius"]);
    assert_eq!(code(&o), 2);
    let (_, o) = run(&["axioms", "--config", "does-not-exist.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_drives_the_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "space": "absmax",
        "map": "moebius",
        "condition": {"id": "C-Q", "q": 0.9},
        "sampling": {"count": 2000, "seed": 5}
    }"#;
    std::fs::write(dir.path().join("run.json"), cfg).unwrap();
    let o = gfix(dir.path(), &["condition", "--config", "run.json"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    let r = report(dir.path(), "certificate.json");
    assert_eq!(r["result"]["certificate"]["checked"], 2000);
    assert_eq!(r["config"]["sampling"]["seed"], 5);

    let o = gfix(
        dir.path(),
        &[
            "condition",
            "--config",
            "run.json",
            "--map",
            "scale-0.5",
            "--seed",
            "9",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(dir.path(), "certificate.json");
    assert_eq!(r["config"]["map"], "scale-0.5");
    assert_eq!(r["config"]["sampling"]["seed"], 9);

    std::fs::write(
        dir.path().join("typo.json"),
        r#"{"space": "absmax", "sampling": {"cuont": 3}}"#,
    )
    .unwrap();
    let o = gfix(dir.path(), &["axioms", "--config", "typo.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn identical_runs_write_identical_files() {
    let args = [
        "solve",
        "--space",
        "absmax",
        "--map",
        "scale-0.5",
        "--x0",
        "3",
        "--certified-q",
        "0.5",
    ];
    let (a, _) = run(&args);
    let (b, _) = run(&args);
    for f in ["solve.json", "trace.csv"] {
        assert_eq!(
            std::fs::read(a.path().join("out").join(f)).unwrap(),
            std::fs::read(b.path().join("out").join(f)).unwrap(),
            "{f}"
        );
    }
    let args = [
        "condition",
        "--space",
        "perimeter-r",
        "--map",
        "moebius",
        "--condition",
        "C-Q",
        "--q",
        "0.7",
        "--seed",
        "3",
    ];
    let (a, _) = run(&args);
    let (b, _) = run(&args);
    assert_eq!(
        std::fs::read(a.path().join("out/certificate.json")).unwrap(),
        std::fs::read(b.path().join("out/certificate.json")).unwrap()
    );
}
