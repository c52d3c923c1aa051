use std::path::Path;
use std::process::{Command, Output};

use kgreedy::domains::Strategy;
use kgreedy::experiment::{presets, ExperimentConfig};

fn kgreedy(args: &[&str], env_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgreedy"))
        .args(args)
        .env("KGREEDY_OUTPUT_ROOT", env_root)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> String {
    let path = dir.join("config.in.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

fn small(out: &Path) -> ExperimentConfig {
    let mut cfg = presets::preset("fig2_linear_matern").unwrap();
    cfg.name = "cli_small".into();
    cfg.discretization.strategy = Strategy::Grid;
    cfg.discretization.target = 900;
    cfg.stop.max_points = 30;
    cfg.stop.min_points = 30;
    cfg.outputs = Some(out.to_path_buf());
    cfg
}

#[test]
fn preset_prints_parseable_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kgreedy(&["preset", "fig3_gaussian"], tmp.path());
    assert!(o.status.success());
    let cfg = ExperimentConfig::from_json(&stdout(&o)).unwrap();
    assert_eq!(cfg, presets::preset("fig3_gaussian").unwrap());
}

#[test]
fn run_fit_and_plot_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("art");
    let cfg_path = write_config(tmp.path(), &small(&out));

    let o = kgreedy(&["run", "--config", &cfg_path], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("30 selected"));
    for f in ["manifest.json", "trace_super.csv", "trace_sub.csv", "fits_sub.json", "verdict.json", "plot.svg"] {
        assert!(out.join(f).is_file(), "{f}");
    }

    let trace = out.join("trace_sub.csv");
    let o = kgreedy(
        &["fit", "--trace", trace.to_str().unwrap(), "--model", "algebraic", "--window", "5:"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(fit["alpha"].as_f64().unwrap() > 0.0);
    assert_eq!(fit["window"], serde_json::json!([5, 30]));

    std::fs::remove_file(out.join("plot.svg")).unwrap();
    let o = kgreedy(&["plot", "--artifacts", out.to_str().unwrap()], tmp.path());
    assert!(o.status.success());
    assert!(std::fs::read_to_string(out.join("plot.svg")).unwrap().contains("curve-sub"));
}

#[test]
fn fit_rejects_missing_alpha_for_fixed_models() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = tmp.path().join("t.csv");
    let mut text = String::from("step,selected_id,x0,sigma,stop_reason\n");
    for n in 0..20 {
        text.push_str(&format!("{n},{n},0.0,{:e},\n", (-(n as f64)).exp()));
    }
    std::fs::write(&trace, text).unwrap();
    let o = kgreedy(&["fit", "--trace", trace.to_str().unwrap(), "--model", "exponential"], tmp.path());
    assert!(!o.status.success());
    let o = kgreedy(
        &["fit", "--trace", trace.to_str().unwrap(), "--model", "exponential", "--alpha", "1"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_writes_under_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kgreedy(&["verify", "--seeds", "5"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("verify/verification.csv").is_file());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();

    let o = kgreedy(&["run", "--preset", "no_such_preset"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = kgreedy(&["preset", "no_such_preset"], tmp.path());
    assert_eq!(o.status.code(), Some(2));

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"schema_version": 1, "name": "x"}"#).unwrap();
    let o = kgreedy(&["run", "--config", bad.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));

    let mut cfg = small(&tmp.path().join("invalid"));
    cfg.rule.gamma = 2.0;
    let o = kgreedy(&["run", "--config", &write_config(tmp.path(), &cfg)], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rule.gamma"));

    // the Gaussian kernel loses numerical rank long before 500 points
    let mut cfg = presets::preset("fig3_gaussian").unwrap();
    cfg.stop.min_points = 500;
    cfg.outputs = Some(tmp.path().join("gauss"));
    let o = kgreedy(&["run", "--config", &write_config(tmp.path(), &cfg)], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
