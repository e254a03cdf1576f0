use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BASE: &str = "\
theta_alpha_s = 0.02
theta_beta_s = 0.02
n_pu = 2
t_s_s = 1e-4
t_f_s = 0.03
gamma_p_db = -5.0
gamma_s_db = 10.0
target_pd = 0.9
";

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sensing-tradeoff"))
        .args(args)
        .output()
        .unwrap()
}

fn run_in(dir: &Path, text: &str, extra: &[&str]) -> Output {
    let cfg = write_config(dir, text);
    let out = dir.join("out");
    let mut args = vec![
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn default_sweep_writes_29_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        BASE,
        &["--sweep-ls", "10:290:10", "--mc", "off"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/tradeoff.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("L,t_s_ms,eta,pd,pf,r_case1,r_case2,pd_mc,pf_mc,r1_mc,r2_mc,"));
    assert_eq!(lines.count(), 29);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["seed"], 1);
    assert_eq!(summary["parameters"]["n_pu"], 2);
    assert_eq!(summary["optima"]["case1"]["L"], 50);
    assert!(summary["tool"]["version"].is_string());
    assert!(summary["sweep"]["mc"].is_null());
}

#[test]
fn missing_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.replace("gamma_s_db = 10.0\n", "");
    let o = run_in(dir.path(), &text, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma_s_db"));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let text = BASE.replace("t_s_s = 1e-4", "t_s_s = 1e-4 oops");
    let o = run_in(dir.path(), &text, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("scenario.toml:4:"), "{err}");

    let text = BASE.replace("n_pu = 2", "n_pu = 0");
    let o = run_in(dir.path(), &text, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scenario.toml:3: invalid `n_pu`"));
}

#[test]
fn bad_flags_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for extra in [
        ["--case", "3"],
        ["--sweep-ls", "10:5:1"],
        ["--sweep-ls", "10:300:10"],
    ] {
        let o = run_in(dir.path(), BASE, &extra);
        assert_eq!(o.status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn unattainable_point_is_recorded_and_sweep_continues() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), BASE, &["--sweep-ls", "1:21:10"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("out/tradeoff.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(
        rows[0].starts_with("1,,") && rows[0].contains("bracket"),
        "{}",
        rows[0]
    );
    assert!(rows[1].ends_with(','));
    let summary = fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    assert!(summary.contains("\"errors\""));
    assert!(String::from_utf8_lossy(&o.stderr).contains("L = 1"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--sweep-ls",
        "20:100:40",
        "--mc",
        "on",
        "--frames",
        "5000",
        "--seed",
        "7",
    ];
    let read = |o: &Output| {
        assert!(o.status.success());
        fs::read(dir.path().join("out/tradeoff.csv")).unwrap()
    };
    let a = read(&run_in(dir.path(), BASE, &args));
    let b = read(&run_in(dir.path(), BASE, &args));
    assert_eq!(a, b);
    let mut other = args;
    other[7] = "8";
    assert_ne!(a, read(&run_in(dir.path(), BASE, &other)));
}

#[test]
fn trace_dump_and_case_selection() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        BASE,
        &[
            "--sweep-ls",
            "40:40:1",
            "--case",
            "2",
            "--mc",
            "on",
            "--frames",
            "200",
            "--fidelity",
            "sample",
            "--trace",
            "40",
            "--trace-frames",
            "10",
        ],
    );
    assert!(o.status.success());
    let trace = fs::read_to_string(dir.path().join("out/trace_L40.tsv")).unwrap();
    assert_eq!(trace.lines().count(), 11);
    let csv = fs::read_to_string(dir.path().join("out/tradeoff.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!(row[5].is_empty() && !row[6].is_empty());
    assert!(row[9].is_empty() && !row[10].is_empty());
}
