use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semiclassical"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_bad_flags() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["simulate", "quantify", "sweep", "poincare"] {
        assert!(text.contains(cmd));
    }
    let out = run(&["quantify", "--help"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("[default: 5]"));
    assert_eq!(run(&["sweep", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
}

#[test]
fn simulate_then_quantify() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let out = run(&[
        "simulate",
        "--er",
        "10",
        "--n-samples",
        "3000",
        "--out",
        path_arg(&traj),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&traj).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x2,p2,l,a,pa,energy,invariant_i"));
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(first[0], 0.0);
    assert!((first[6] - 0.6).abs() < 1e-11);
    assert!((first[7] - 0.0036).abs() < 1e-11);
    assert_eq!(text.lines().count(), 3001);

    let out = run(&["quantify", "--in", path_arg(&traj), "--column", "a"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let h = v["entropy_h"].as_f64().unwrap();
    assert!(h > 0.0 && h < 1.0);

    let out = run(&["quantify", "--in", path_arg(&traj), "--column", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(
        msg.contains("nope") && msg.contains("x2") && msg.contains("pa"),
        "{msg}"
    );

    let out = run(&["quantify", "--in", path_arg(&traj), "--d", "11"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quantify_short_series_and_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.csv");
    std::fs::write(&short, "x2\n1\n2\n3\n").unwrap();
    let out = run(&["quantify", "--in", path_arg(&short)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains('5'), "{}", stderr(&out));

    let out = run(&[
        "quantify",
        "--in",
        path_arg(&dir.path().join("missing.csv")),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn relative_energy_below_one_names_bound() {
    let out = run(&["simulate", "--er", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("E_r >= 1"), "{}", stderr(&out));
}

#[test]
fn config_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[sweep]\nn_pionts = 3\n").unwrap();
    let out = run(&["--config", path_arg(&cfg), "sweep"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n_pionts"), "{}", stderr(&out));
}

#[test]
fn sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    let out_path = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        "[integrator]\nn_samples = 2000\n[sweep]\nn_points = 3\ner_max = 100\n",
    )
    .unwrap();
    let out = run(&[
        "--config",
        path_arg(&cfg),
        "sweep",
        "--regime",
        "conservative",
        "--format",
        "json",
        "--out",
        path_arg(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("onset"), "{stdout}");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn poincare_section() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("section.csv");
    let out = run(&[
        "poincare",
        "--regime",
        "classical",
        "--n-samples",
        "50000",
        "--direction",
        "both",
        "--out",
        path_arg(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().next(), Some("t,plot_x,plot_y"));
    assert!(text.lines().count() > 20);

    let out = run(&["poincare", "--er", "2", "--section-var", "energy"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["poincare", "--regime", "classical", "--er", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
