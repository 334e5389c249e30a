use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use thermal_designs_cli::csvio::{parse_table, DOS_HEADER, SWEEP_HEADER, THRESHOLD_HEADER};

const BIN: &str = env!("CARGO_BIN_EXE_thermal-designs");

fn cli(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("THERMAL_DESIGNS_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn global_config(dir: &Path, extra: &str) -> PathBuf {
    write(
        dir,
        "run.json",
        &format!(
            r#"{{"ensemble": {{"kind": "global", "n": 2, "d": 2, "seed": 7, "samples": 200}},
                "t": 2, "beta_grid": {{"start": 0.0, "stop": 1.0, "step": 0.25}}{extra}}}"#
        ),
    )
}

fn table(path: &Path, header: &[&str]) -> thermal_designs_cli::csvio::Table {
    let text = std::fs::read_to_string(path).unwrap();
    parse_table(path, &text, header).expect("emitted file parses strictly")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sweep_writes_header_and_exact_infinite_temperature_row() {
    let dir = TempDir::new().unwrap();
    let cfg = global_config(dir.path(), "");
    let out = cli(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            "s.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(text.starts_with("beta,trace_norm,sym_overlap,cycle,bound,stderr\n"));
    let t = table(&dir.path().join("s.csv"), &SWEEP_HEADER);
    assert_eq!(t.rows.len(), 5);
    let first = &t.rows[0];
    assert_eq!(first[0], Some(0.0));
    for v in &first[1..4] {
        assert!((v.unwrap() - 0.375).abs() < 1e-12);
    }
    assert!((first[4].unwrap() - 0.9375).abs() < 1e-12);
    assert!(t.metadata.iter().any(|m| m.starts_with("seed: 7")));
}

#[test]
fn output_path_from_config_is_used() {
    let dir = TempDir::new().unwrap();
    let cfg = global_config(dir.path(), r#", "output_path": "from_config.csv""#);
    let out = cli(&["sweep", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("from_config.csv").exists());
}

#[test]
fn empty_grid_is_a_config_error_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"ensemble": {"kind": "global", "n": 2, "d": 2, "seed": 1, "samples": 10},
            "t": 2, "beta_grid": {"start": 1.0, "stop": 0.0, "step": 0.1}}"#,
    );
    let out = cli(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            "s.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("s.csv").exists());
}

#[test]
fn infeasible_estimator_exits_with_capacity_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"ensemble": {"kind": "global", "n": 6, "d": 2, "seed": 1, "samples": 10},
            "t": 4, "beta_grid": {"start": 0.0, "stop": 1.0, "step": 0.5},
            "estimators": ["trace_norm"]}"#,
    );
    let out = cli(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            "s.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(!dir.path().join("s.csv").exists());
}

#[test]
fn default_estimators_skip_infeasible_ones() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"ensemble": {"kind": "global", "n": 6, "d": 2, "seed": 1, "samples": 10},
            "t": 4, "beta_grid": {"start": 0.0, "stop": 1.0, "step": 0.5}}"#,
    );
    let out = cli(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            "s.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let t = table(&dir.path().join("s.csv"), &SWEEP_HEADER);
    assert!(t
        .rows
        .iter()
        .all(|r| r[1].is_none() && r[3].is_some() && r[4].is_some()));
}

#[test]
fn sweep_is_deterministic_across_threads_and_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = global_config(dir.path(), "");
    let c = cfg.to_str().unwrap();
    assert!(cli(
        &[
            "sweep",
            "--config",
            c,
            "--output",
            "a.csv",
            "--threads",
            "1"
        ],
        dir.path()
    )
    .status
    .success());
    assert!(cli(
        &[
            "sweep",
            "--config",
            c,
            "--output",
            "b.csv",
            "--threads",
            "4"
        ],
        dir.path()
    )
    .status
    .success());
    let env_run = Command::new(BIN)
        .args(["sweep", "--config", c, "--output", "c.csv"])
        .current_dir(dir.path())
        .env("THERMAL_DESIGNS_THREADS", "2")
        .output()
        .unwrap();
    assert!(env_run.status.success());
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.csv"), read("c.csv"));
}

#[test]
fn seed_override_changes_values() {
    let dir = TempDir::new().unwrap();
    let cfg = global_config(dir.path(), "");
    let c = cfg.to_str().unwrap();
    assert!(
        cli(&["sweep", "--config", c, "--output", "a.csv"], dir.path())
            .status
            .success()
    );
    assert!(cli(
        &["sweep", "--config", c, "--output", "b.csv", "--seed", "8"],
        dir.path()
    )
    .status
    .success());
    let a = table(&dir.path().join("a.csv"), &SWEEP_HEADER);
    let b = table(&dir.path().join("b.csv"), &SWEEP_HEADER);
    assert_eq!(a.rows[0][..5], b.rows[0][..5]);
    assert_ne!(a.rows[4], b.rows[4]);
}

#[test]
fn invalid_thread_environment_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = global_config(dir.path(), "");
    let out = Command::new(BIN)
        .args([
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            "s.csv",
        ])
        .current_dir(dir.path())
        .env("THERMAL_DESIGNS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("THERMAL_DESIGNS_THREADS"));
}

#[test]
fn malformed_json_and_unknown_fields_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(
        cli(&["sweep", "--config", bad.to_str().unwrap()], dir.path())
            .status
            .code(),
        Some(2)
    );
    let extra = global_config(dir.path(), r#", "colour": "blue""#);
    let out = cli(
        &[
            "sweep",
            "--config",
            extra.to_str().unwrap(),
            "--output",
            "s.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"));
}

#[test]
fn derivative_round_trip_and_constant_column() {
    let dir = TempDir::new().unwrap();
    let cfg = global_config(dir.path(), "");
    assert!(cli(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            "s.csv"
        ],
        dir.path()
    )
    .status
    .success());
    let out = cli(
        &["derivative", "--input", "s.csv", "--output", "d.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let d = table(&dir.path().join("d.csv"), &SWEEP_HEADER);
    assert_eq!(d.rows.len(), 5);
    assert!(d.metadata.iter().any(|m| m.starts_with("derivative:")));
    assert!(d.metadata.iter().any(|m| m.starts_with("config:")));

    let constant = "beta,trace_norm,sym_overlap,cycle,bound,stderr\n\
                    0.0,0.5,,,,0.01\n0.5,0.5,,,,0.01\n1.0,0.5,,,,0.01\n1.5,0.5,,,,0.01\n";
    write(dir.path(), "c.csv", constant);
    assert!(cli(
        &["derivative", "--input", "c.csv", "--output", "dc.csv"],
        dir.path()
    )
    .status
    .success());
    let dc = table(&dir.path().join("dc.csv"), &SWEEP_HEADER);
    for r in &dc.rows {
        assert!(r[1].unwrap().abs() < 1e-12);
        assert!(r[2].is_none());
    }
}

#[test]
fn derivative_of_linear_column_is_its_slope() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("beta,trace_norm,sym_overlap,cycle,bound,stderr\n");
    for i in 0..6 {
        let b = 0.2 * i as f64;
        text.push_str(&format!("{b},{},,,,0.0\n", 1.0 - 0.3 * b));
    }
    write(dir.path(), "lin.csv", &text);
    assert!(cli(
        &["derivative", "--input", "lin.csv", "--output", "d.csv"],
        dir.path()
    )
    .status
    .success());
    let d = table(&dir.path().join("d.csv"), &SWEEP_HEADER);
    for r in &d.rows {
        assert!((r[1].unwrap() + 0.3).abs() < 1e-9);
    }
}

#[test]
fn derivative_rejects_short_and_malformed_input() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "two.csv",
        "beta,trace_norm,sym_overlap,cycle,bound,stderr\n0.0,0.5,,,,\n0.5,0.4,,,,\n",
    );
    let out = cli(
        &["derivative", "--input", "two.csv", "--output", "d.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("d.csv").exists());

    write(
        dir.path(),
        "bad.csv",
        "beta,trace_norm,sym_overlap,cycle,bound,stderr\n0.0,0.5,,,,\n0.5,oops,,,,\n1.0,0.3,,,,\n",
    );
    let out = cli(
        &["derivative", "--input", "bad.csv", "--output", "d.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    write(dir.path(), "hdr.csv", "beta,value\n0.0,1.0\n");
    assert_eq!(
        cli(
            &["derivative", "--input", "hdr.csv", "--output", "d.csv"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn threshold_outputs_and_rejections() {
    let dir = TempDir::new().unwrap();
    let cfg = global_config(dir.path(), "");
    let c = cfg.to_str().unwrap();
    let out = cli(
        &[
            "threshold",
            "--config",
            c,
            "--output",
            "th.csv",
            "--t",
            "2,4,8,8",
            "--epsilon",
            "0.1,0.9999999",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let t = table(&dir.path().join("th.csv"), &THRESHOLD_HEADER);
    assert_eq!(t.rows.len(), 8);
    let temp = |i: usize| t.rows[i][3].unwrap();
    // bound(0) = 1 - 4^-t stays below 1 - 1e-7 for t <= 8, so beta* = 0
    for i in [1, 3, 5, 7] {
        assert_eq!(t.rows[i][2], Some(0.0));
        assert!(temp(i).is_infinite());
    }
    assert!(temp(0) >= temp(2) && temp(2) >= temp(4));
    assert_eq!(t.rows[4], t.rows[6]);

    let local = write(
        dir.path(),
        "local.json",
        r#"{"ensemble": {"kind": "local", "n": 3, "d": 2, "k": 2, "seed": 1, "samples": 10}}"#,
    );
    let out = cli(
        &[
            "threshold",
            "--config",
            local.to_str().unwrap(),
            "--output",
            "l.csv",
            "--t",
            "2",
            "--epsilon",
            "0.1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let out = cli(
        &[
            "threshold",
            "--config",
            c,
            "--output",
            "e.csv",
            "--t",
            "2",
            "--epsilon",
            "1.5",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dos_writes_normalized_histogram() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{"ensemble": {"kind": "local", "n": 4, "d": 2, "k": 2, "seed": 3, "samples": 50}}"#,
    );
    let out = cli(
        &[
            "dos",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            "dos.csv",
            "--bins",
            "25",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let t = table(&dir.path().join("dos.csv"), &DOS_HEADER);
    assert_eq!(t.rows.len(), 25);
    let width = t.rows[1][0].unwrap() - t.rows[0][0].unwrap();
    let mass: f64 = t.rows.iter().map(|r| r[1].unwrap() * width).sum();
    assert!((mass - 1.0).abs() < 1e-9);
    assert!(t.metadata.iter().any(|m| m == "reference: gaussian"));
    assert!(t
        .metadata
        .iter()
        .any(|m| m.starts_with("excess_kurtosis: ")));
}

#[test]
fn check_subcommand_passes() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["check", "--samples", "60"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn missing_config_file_is_reported() {
    let dir = TempDir::new().unwrap();
    let out = cli(&["sweep", "--config", "absent.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("absent.json"));
}
