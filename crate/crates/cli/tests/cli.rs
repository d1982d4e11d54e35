use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tflocal_core::harness::{SuiteConfig, SuiteKind};

fn tflocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tflocal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn list_shows_seven_suites() {
    let o = tflocal(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    for s in SuiteKind::ALL {
        assert!(text.contains(s.name()), "{s}");
    }
    assert_eq!(text, stdout(&tflocal(&["list"])));
}

#[test]
fn describe_echoes_ladder_grid_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.toml",
        "suite = \"boundedness\"\n[[grid]]\nn = 64\nt = 8.0\n[[grid]]\nn = 96\nt = 8.0\n",
    );
    let o = tflocal(&["describe", "boundedness/ladder/n64-n96", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["params"]["n"], serde_json::json!([64, 96]));
    assert_eq!(v["tol"], serde_json::json!(0.1));
}

#[test]
fn describe_unknown_case_exits_2() {
    assert_eq!(tflocal(&["describe", "boundedness/nope"]).status.code(), Some(2));
    assert_eq!(tflocal(&["describe", "nosuch"]).status.code(), Some(2));
}

#[test]
fn run_writes_report_and_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "inv.toml", "suite = \"inversion\"\n[grid]\nn = 64\nt = 8.0\n");
    let out = dir.path().join("out");
    let o = tflocal(&["run", "--suite", "inversion", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("suite,case,param_json,lhs,rhs,ratio,tol,pass,seconds\n"));
    assert_eq!(csv.lines().count(), 8);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failed"], 0);
    assert_eq!(summary["config"]["grid"][0]["n"], 64);
}

#[test]
fn case_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "inv.toml",
        "suite = \"inversion\"\nwindows = [\"g0\", \"hermite1\"]\n[grid]\nn = 64\nt = 8.0\n",
    );
    let out = dir.path().join("out");
    let o = tflocal(&["run", "--suite", "inversion", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    assert!(out.join("report.csv").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", "suite = \"boundedness\"\nsymbols = [\"nope\"]\n");
    let inv = write_config(dir.path(), "inv.toml", "suite = \"inversion\"\n");
    let missing = dir.path().join("missing.toml");
    for args in [
        vec!["run", "--suite", "boundedness", "--config", bad.to_str().unwrap()],
        vec!["run", "--suite", "boundedness", "--config", inv.to_str().unwrap()],
        vec!["run", "--suite", "boundedness", "--config", missing.to_str().unwrap()],
        vec!["run", "--suite", "nosuch"],
    ] {
        assert_eq!(tflocal(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn shipped_configs_match_suite_defaults() {
    for s in SuiteKind::ALL {
        let path = configs_dir().join(format!("{}.toml", s.name()));
        let cfg = SuiteConfig::load(&path).unwrap();
        assert_eq!(cfg, SuiteConfig::default_for(s), "{}", path.display());
    }
}
