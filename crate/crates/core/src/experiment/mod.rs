//! Config-driven experiments: discretize a domain pair, run P-greedy on both
//! candidate sets, fit decay models and write the artifacts.

pub mod artifacts;
pub mod config;
pub mod plot;
pub mod presets;
pub mod verify;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use thiserror::Error;

use crate::domains::{discretize, restrict, CandidateSet, DomainError};
use crate::greedy::{run, GreedyError, GreedyTrace, StopCriteria, StopReason};
use crate::rates::{default_window, fit, stability_verdict, DecayFit, FitWindow, RateError, StabilityReport};

pub use config::{ExperimentConfig, FieldError};

/// Environment variable naming the directory under which experiments write.
pub const OUTPUT_ROOT_ENV: &str = "KGREEDY_OUTPUT_ROOT";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<FieldError>),
    #[error("unknown preset {0:?} (available: {list})", list = presets::NAMES.join(", "))]
    UnknownPreset(String),
    #[error("{domain} run reached the numerical rank after {selected} points (min_points {min_points}); artifacts in {}", dir.display())]
    NumericalTermination {
        domain: &'static str,
        selected: usize,
        min_points: usize,
        dir: PathBuf,
    },
    #[error("theory verification failed: {0}")]
    VerificationFailed(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Greedy(#[from] GreedyError),
    #[error("fit failed: {0}")]
    Fit(#[from] RateError),
    #[error("trace: {0}")]
    Trace(String),
}

impl ExperimentError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        ExperimentError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// Process exit code for the command line.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Validation(_) | ExperimentError::UnknownPreset(_) => 2,
            ExperimentError::NumericalTermination { .. } => 3,
            ExperimentError::VerificationFailed(_) => 4,
            _ => 1,
        }
    }
}

/// Paths of everything an experiment writes.
#[derive(Clone, Debug, PartialEq)]
pub struct ArtifactFiles {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub config: PathBuf,
    pub trace_super: PathBuf,
    pub trace_sub: PathBuf,
    pub selected_super: PathBuf,
    pub selected_sub: PathBuf,
    pub fits_super: PathBuf,
    pub fits_sub: PathBuf,
    pub verdict: PathBuf,
    pub plot: PathBuf,
    pub power_super: Option<PathBuf>,
    pub power_sub: Option<PathBuf>,
}

impl ArtifactFiles {
    pub fn in_dir(dir: &Path, power_snapshot: bool) -> Self {
        let p = |name: &str| dir.join(name);
        ArtifactFiles {
            dir: dir.to_path_buf(),
            manifest: p("manifest.json"),
            config: p("config.json"),
            trace_super: p("trace_super.csv"),
            trace_sub: p("trace_sub.csv"),
            selected_super: p("selected_super.csv"),
            selected_sub: p("selected_sub.csv"),
            fits_super: p("fits_super.json"),
            fits_sub: p("fits_sub.json"),
            verdict: p("verdict.json"),
            plot: p("plot.svg"),
            power_super: power_snapshot.then(|| p("power_super.csv")),
            power_sub: power_snapshot.then(|| p("power_sub.csv")),
        }
    }

    fn data_files(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = vec![
            &self.config,
            &self.trace_super,
            &self.trace_sub,
            &self.selected_super,
            &self.selected_sub,
            &self.fits_super,
            &self.fits_sub,
            &self.verdict,
            &self.plot,
        ];
        v.extend(self.power_super.as_deref());
        v.extend(self.power_sub.as_deref());
        v
    }
}

/// Result of [`run_experiment`].
#[derive(Debug)]
pub struct ExperimentArtifacts {
    pub files: ArtifactFiles,
    pub config_hash: String,
    pub run_super: GreedyTrace,
    pub run_sub: GreedyTrace,
    pub fits_super: Vec<DecayFit>,
    pub fits_sub: Vec<DecayFit>,
    pub verdicts: Vec<StabilityReport>,
}

/// `outputs` from the config, else `$KGREEDY_OUTPUT_ROOT/<name>`, else `results/<name>`.
pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = &cfg.outputs {
        return dir.clone();
    }
    output_root().join(&cfg.name)
}

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn create(path: &Path) -> Result<BufWriter<File>, ExperimentError> {
    File::create(path).map(BufWriter::new).map_err(|e| ExperimentError::io(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| ExperimentError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| ExperimentError::io(path, e))
}

fn write_selected_csv(path: &Path, t: &GreedyTrace) -> Result<(), ExperimentError> {
    let cands = t.state.candidates();
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| ExperimentError::io(path, e);
    let mut header = vec!["order".to_string(), "id".into()];
    header.extend((0..cands.dim()).map(|j| format!("x{j}")));
    if cands.parent_ids().is_some() {
        header.push("parent_id".into());
    }
    w.write_record(&header).map_err(io)?;
    for (order, &id) in t.selected_ids().iter().enumerate() {
        let mut row = vec![order.to_string(), id.to_string()];
        row.extend(cands.point(id).iter().map(|v| crate::csvfmt::fmt_f64(*v)));
        if let Some(ids) = cands.parent_ids() {
            row.push(ids[id].to_string());
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

fn last_positive(ns: &[usize], sigmas: &[f64]) -> Option<usize> {
    ns.iter().zip(sigmas).take_while(|(_, s)| **s > 0.0).map(|(n, _)| *n).last()
}

/// Fits every configured model to one trace.
pub fn fit_trace(cfg: &ExperimentConfig, trace: &GreedyTrace) -> Result<Vec<DecayFit>, RateError> {
    let (ns, sigmas): (Vec<usize>, Vec<f64>) = trace.sigmas().into_iter().unzip();
    cfg.fits
        .iter()
        .map(|fc| {
            let window = match fc.window {
                None => default_window(&ns, &sigmas)?,
                Some(w) => FitWindow::new(
                    w.lo,
                    w.hi.or_else(|| last_positive(&ns, &sigmas)).ok_or(RateError::TooFewPoints(0))?,
                ),
            };
            fit(fc.model, &ns, &sigmas, fc.alpha_fixed, window)
        })
        .collect()
}

struct Manifest<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
    path: PathBuf,
    started: Instant,
}

impl Manifest<'_> {
    fn write(&self, status: &str, extra: serde_json::Value) -> Result<(), ExperimentError> {
        let mut doc = json!({
            "name": self.cfg.name,
            "status": status,
            "config_hash": self.hash,
            "schema_version": self.cfg.schema_version,
            "kgreedy_version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": self.started.elapsed().as_secs_f64(),
        });
        if let (Some(doc), Some(extra)) = (doc.as_object_mut(), extra.as_object()) {
            doc.extend(extra.clone());
        }
        write_json(&self.path, &doc)
    }
}

fn run_summary(cands: &CandidateSet, t: &GreedyTrace) -> serde_json::Value {
    json!({
        "candidates": cands.len(),
        "selected": t.selected_ids().len(),
        "stop_reason": t.stop_reason.as_str(),
    })
}

/// Runs one experiment and writes its artifacts. The manifest is written
/// first with status `running` and rewritten at the end.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentArtifacts, ExperimentError> {
    cfg.validate().map_err(ExperimentError::Validation)?;
    let dir = output_dir(cfg);
    fs::create_dir_all(&dir).map_err(|e| ExperimentError::io(&dir, e))?;
    let files = ArtifactFiles::in_dir(&dir, cfg.power_snapshot);
    let manifest = Manifest {
        cfg,
        hash: cfg.hash(),
        path: files.manifest.clone(),
        started: Instant::now(),
    };
    manifest.write("running", json!({}))?;

    match produce(cfg, &files, &manifest.hash) {
        Ok(art) => {
            let mut hashes = serde_json::Map::new();
            for f in files.data_files() {
                let name = f.file_name().unwrap().to_string_lossy().into_owned();
                hashes.insert(name, artifacts::sha256_file(f)?.into());
            }
            let runs = json!({
                "super": run_summary(art.run_super.state.candidates(), &art.run_super),
                "sub": run_summary(art.run_sub.state.candidates(), &art.run_sub),
            });
            let short = [("super", &art.run_super), ("sub", &art.run_sub)]
                .into_iter()
                .find(|(_, t)| {
                    matches!(t.stop_reason, StopReason::NumericalRank | StopReason::Exhausted)
                        && t.selected_ids().len() < cfg.stop.min_points
                });
            let status = if short.is_some() { "numerical_termination" } else { "complete" };
            manifest.write(status, json!({ "files": hashes, "runs": runs }))?;
            if let Some((domain, t)) = short {
                return Err(ExperimentError::NumericalTermination {
                    domain,
                    selected: t.selected_ids().len(),
                    min_points: cfg.stop.min_points,
                    dir,
                });
            }
            Ok(art)
        }
        Err(e) => {
            // best effort: the original error matters more than a failed rewrite
            let _ = manifest.write("failed", json!({ "error": e.to_string() }));
            Err(e)
        }
    }
}

fn produce(cfg: &ExperimentConfig, files: &ArtifactFiles, hash: &str) -> Result<ExperimentArtifacts, ExperimentError> {
    write_json(&files.config, cfg)?;
    let d = cfg.discretization;
    let cands_super = discretize(&cfg.domain_super, d.strategy, d.target, d.seed)?;
    let cands_sub = restrict(&cands_super, &cfg.domain_sub)?;
    if let Some(i) = (0..cands_sub.len()).find(|&i| !cfg.domain_super.contains(cands_sub.point(i))) {
        return Err(DomainError::Invalid(format!("sub candidate {i} lies outside domain_super")).into());
    }

    let rule = cfg.rule.to_rule();
    let stop = StopCriteria {
        max_points: cfg.stop.max_points,
        power_tol: cfg.stop.power_tol,
    };
    let run_super = run(&cfg.kernel, &cands_super, &rule, stop)?;
    run_super.write_trace_csv(create(&files.trace_super)?)?;
    write_selected_csv(&files.selected_super, &run_super)?;
    let run_sub = run(&cfg.kernel, &cands_sub, &rule, stop)?;
    run_sub.write_trace_csv(create(&files.trace_sub)?)?;
    write_selected_csv(&files.selected_sub, &run_sub)?;
    if let (Some(ps), Some(pb)) = (&files.power_super, &files.power_sub) {
        run_super.write_power_csv(create(ps)?)?;
        run_sub.write_power_csv(create(pb)?)?;
    }

    let fits_super = fit_trace(cfg, &run_super)?;
    let fits_sub = fit_trace(cfg, &run_sub)?;
    write_json(&files.fits_super, &fits_super)?;
    write_json(&files.fits_sub, &fits_sub)?;
    let verdicts = fits_super
        .iter()
        .zip(&fits_sub)
        .map(|(a, b)| stability_verdict(a, b, cfg.slack()))
        .collect::<Result<Vec<_>, _>>()?;
    write_json(
        &files.verdict,
        &json!({
            "stable": verdicts.iter().all(|v| v.stable),
            "slack": cfg.slack(),
            "reports": verdicts,
        }),
    )?;
    plot::emit_plot(&files.dir)?;

    Ok(ExperimentArtifacts {
        files: files.clone(),
        config_hash: hash.to_string(),
        run_super,
        run_sub,
        fits_super,
        fits_sub,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{DomainSpec, Strategy};
    use crate::kernels::KernelSpec;

    pub(crate) fn small_config(dir: &Path) -> ExperimentConfig {
        let mut cfg = presets::preset("fig2_linear_matern").unwrap();
        cfg.name = "small".into();
        cfg.discretization.target = 900;
        cfg.discretization.strategy = Strategy::Grid;
        cfg.stop.max_points = 40;
        cfg.stop.min_points = 40;
        cfg.outputs = Some(dir.to_path_buf());
        cfg
    }

    #[test]
    fn writes_all_artifacts() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = small_config(tmp.path());
        cfg.power_snapshot = true;
        let art = run_experiment(&cfg).unwrap();
        for f in art.files.data_files() {
            assert!(f.is_file(), "{} missing", f.display());
        }
        let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(&art.files.manifest).unwrap()).unwrap();
        assert_eq!(manifest["status"], "complete");
        assert_eq!(manifest["config_hash"], cfg.hash());
        for (name, h) in manifest["files"].as_object().unwrap() {
            assert_eq!(h.as_str().unwrap(), artifacts::sha256_file(&tmp.path().join(name)).unwrap());
        }
        let stored = ExperimentConfig::from_json(&fs::read_to_string(&art.files.config).unwrap()).unwrap();
        assert_eq!(stored.hash(), cfg.hash());
        assert_eq!(art.fits_super.len(), 1);
        let verdict: serde_json::Value = serde_json::from_str(&fs::read_to_string(&art.files.verdict).unwrap()).unwrap();
        assert!(verdict["reports"][0]["fit_super"]["alpha"].is_number());
        let sel = fs::read_to_string(&art.files.selected_sub).unwrap();
        assert!(sel.starts_with("order,id,x0,x1,parent_id\n"));
        assert_eq!(sel.lines().count(), 41);
    }

    #[test]
    fn invalid_config_maps_to_exit_code_two() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = small_config(tmp.path());
        cfg.stop.max_points = 0;
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(!tmp.path().join("manifest.json").exists());
    }

    #[test]
    fn early_rank_termination_maps_to_exit_code_three() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = small_config(tmp.path());
        cfg.kernel = KernelSpec::gaussian(1.0);
        cfg.fits.clear();
        cfg.stop.max_points = 200;
        cfg.stop.min_points = 150;
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
        let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["status"], "numerical_termination");
        assert!(tmp.path().join("trace_sub.csv").is_file());
    }

    #[test]
    fn empty_restriction_is_a_domain_error() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = small_config(tmp.path());
        // a 2x2 grid misses the small ball entirely
        cfg.discretization.target = 4;
        cfg.domain_sub = DomainSpec::ball(vec![0.5, 0.5], 0.01);
        let err = run_experiment(&cfg).unwrap_err();
        assert!(matches!(err, ExperimentError::Domain(DomainError::EmptyRestriction)), "{err}");
        let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["status"], "failed");
    }

    #[test]
    fn output_dir_resolution() {
        let mut cfg = presets::preset("fig3_gaussian").unwrap();
        cfg.outputs = Some(PathBuf::from("/tmp/x"));
        assert_eq!(output_dir(&cfg), PathBuf::from("/tmp/x"));
        cfg.outputs = None;
        assert!(output_dir(&cfg).ends_with("fig3_gaussian"));
    }
}
