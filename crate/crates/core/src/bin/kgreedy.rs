use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use kgreedy::experiment::artifacts::read_trace_csv;
use kgreedy::experiment::verify::verify_theory;
use kgreedy::experiment::{output_root, plot, presets, run_experiment, ExperimentConfig, ExperimentError};
use kgreedy::rates::{default_window, fit, DecayModel, FitWindow};

#[derive(Parser)]
#[command(name = "kgreedy", version, about = "P-greedy kernel interpolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a JSON config or a built-in preset.
    #[command(group(ArgGroup::new("source").required(true).args(["config", "preset"])))]
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
    },
    /// Fit a decay model to a trace CSV and print the fit as JSON.
    Fit {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_parser = parse_model)]
        model: DecayModel,
        #[arg(long)]
        alpha: Option<f64>,
        /// Inclusive step range `lo:hi`; `lo:` runs to the last positive sigma.
        #[arg(long)]
        window: Option<String>,
    },
    /// Check the greedy product inequality and rate constants on random instances.
    Verify {
        #[arg(long, default_value_t = 200)]
        seeds: u64,
    },
    /// Redraw plot.svg from the traces in an artifact directory.
    Plot {
        #[arg(long)]
        artifacts: PathBuf,
    },
    /// Print the JSON config of a preset.
    Preset { name: String },
}

fn parse_model(s: &str) -> Result<DecayModel, String> {
    match s {
        "algebraic" => Ok(DecayModel::Algebraic),
        "exponential" => Ok(DecayModel::Exponential),
        "log_exponential" | "logexponential" => Ok(DecayModel::LogExponential),
        _ => Err(format!("unknown model {s:?}; use algebraic, exponential or log_exponential")),
    }
}

fn invalid(msg: String) -> ExperimentError {
    ExperimentError::Validation(vec![kgreedy::experiment::FieldError {
        field: "arguments".into(),
        message: msg,
    }])
}

fn parse_window(spec: &str, ns: &[usize], sigmas: &[f64]) -> Result<FitWindow, ExperimentError> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| invalid(format!("window {spec:?} is not lo:hi")))?;
    let lo: usize = lo.parse().map_err(|_| invalid(format!("bad window start {lo:?}")))?;
    let hi = if hi.is_empty() {
        ns.iter()
            .zip(sigmas)
            .take_while(|(_, s)| **s > 0.0)
            .map(|(n, _)| *n)
            .last()
            .unwrap_or(0)
    } else {
        hi.parse().map_err(|_| invalid(format!("bad window end {hi:?}")))?
    };
    Ok(FitWindow::new(lo, hi))
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    ExperimentConfig::from_json(&text).map_err(ExperimentError::Validation)
}

fn execute(cmd: Command) -> Result<(), ExperimentError> {
    match cmd {
        Command::Run { config, preset } => {
            let cfg = match (config, preset) {
                (Some(path), _) => load_config(&path)?,
                (None, Some(name)) => presets::preset(&name).ok_or(ExperimentError::UnknownPreset(name))?,
                (None, None) => unreachable!("clap requires one source"),
            };
            let art = run_experiment(&cfg)?;
            for (label, t) in [("super", &art.run_super), ("sub", &art.run_sub)] {
                println!(
                    "{label}: {} candidates, {} selected, stop {}",
                    t.state.candidates().len(),
                    t.selected_ids().len(),
                    t.stop_reason.as_str()
                );
            }
            for (fs, v) in art.fits_sub.iter().zip(&art.verdicts) {
                println!("{:?} fit: {}", fs.model, v.detail);
            }
            println!("artifacts: {}", art.files.dir.display());
        }
        Command::Fit {
            trace,
            model,
            alpha,
            window,
        } => {
            let t = read_trace_csv(&trace)?;
            let window = match window {
                Some(w) => parse_window(&w, &t.steps, &t.sigma)?,
                None => default_window(&t.steps, &t.sigma)?,
            };
            let f = fit(model, &t.steps, &t.sigma, alpha, window)?;
            println!("{}", serde_json::to_string_pretty(&f).expect("fit serializes"));
        }
        Command::Verify { seeds } => {
            let report = verify_theory(seeds, Some(&output_root().join("verify")))?;
            println!("{}", report.summary());
            if let Some(csv) = &report.csv {
                println!("rows: {}", csv.display());
            }
            if !report.passed() {
                return Err(ExperimentError::VerificationFailed(report.summary()));
            }
        }
        Command::Plot { artifacts } => {
            let path = plot::emit_plot(&artifacts)?;
            println!("{}", path.display());
        }
        Command::Preset { name } => {
            let cfg = presets::preset(&name).ok_or(ExperimentError::UnknownPreset(name))?;
            println!("{}", cfg.to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
