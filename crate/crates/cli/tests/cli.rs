use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const UNIFORM: &str = r#"
dim = 2
horizon = 300
seed = 7
[learner]
kind = "john_linear"
[adversary]
kind = "uniform"
[oracle]
kind = "linear"
"#;

fn smoothcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smoothcut"))
        .args(args)
        .env_remove("SMOOTHCUT_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", UNIFORM);
    let out = dir.path().join("out");
    let o = smoothcut(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["trace.csv", "summary.json", "learner.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rounds"], 300);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 301);
}

#[test]
fn run_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", UNIFORM);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = smoothcut(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(
        fs::read(a.join("trace.csv")).unwrap(),
        fs::read(b.join("trace.csv")).unwrap()
    );
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = smoothcut(&[
        "run",
        "--config",
        missing.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("config error"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{UNIFORM}\nhorizn = 3\n"));
    let o = smoothcut(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn contradictory_labels_exit_with_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{UNIFORM}\n[corruption]\nrandom = 60\n"));
    let o = smoothcut(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let e = stderr(&o);
    assert!(e.contains("NonRealizable") && e.contains("at round"), "{e}");
}

#[test]
fn plot_from_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", UNIFORM);
    let run = dir.path().join("run");
    assert_eq!(
        smoothcut(&["run", "--config", &cfg, "--out", run.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let figs = dir.path().join("figs");
    let o = smoothcut(&[
        "plot",
        "--trace",
        run.join("trace.csv").to_str().unwrap(),
        "--out",
        figs.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut svgs: Vec<String> = fs::read_dir(&figs)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".svg"))
        .collect();
    svgs.sort();
    assert_eq!(svgs, ["cumulative_mistakes.svg", "log_volume.svg"]);
    let s = fs::read_to_string(figs.join("cumulative_mistakes.svg")).unwrap();
    assert!(s.starts_with("<svg") && s.contains("polyline"));
}

#[test]
fn plot_of_empty_trace_has_empty_axes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &UNIFORM.replace("horizon = 300", "horizon = 0"));
    let run = dir.path().join("run");
    assert_eq!(
        smoothcut(&["run", "--config", &cfg, "--out", run.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let figs = dir.path().join("figs");
    let o = smoothcut(&[
        "plot",
        "--trace",
        run.join("trace.csv").to_str().unwrap(),
        "--out",
        figs.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = fs::read_to_string(figs.join("cumulative_mistakes.svg")).unwrap();
    assert!(s.starts_with("<svg") && !s.contains("<polyline"));
}

#[test]
fn plot_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "t,mistake\n1,zebra\n");
    let figs = dir.path().join("figs");
    let o = smoothcut(&["plot", "--trace", &bad, "--out", figs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(!figs.join("cumulative_mistakes.svg").exists());
}

#[test]
fn quick_verify_passes_and_loose_solver_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = smoothcut(&["verify", "--quick", "--out", out]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}{}",
        String::from_utf8_lossy(&ok.stdout),
        stderr(&ok)
    );
    let loose = smoothcut(&["verify", "--quick", "--solver-gap", "0.1", "--out", out]);
    assert_eq!(
        loose.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&loose.stdout)
    );
}

#[test]
fn bad_flag_exits_one() {
    assert_eq!(smoothcut(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(smoothcut(&["--help"]).status.code(), Some(0));
}
