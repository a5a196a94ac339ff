//! `lez`: rate-function traces, critical ramp durations, scaling fits,
//! DTOP traces and oracle checks from the command line.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use lez_core::LezError;

use crate::commands::Output;
use crate::config::{ModelKind, RunConfig, Settings};

#[derive(Debug, Parser)]
#[command(name = "lez", version, about = "Loschmidt echo zeros in finite quenched lattice models")]
#[command(allow_negative_numbers = true)]
struct Cli {
    /// JSON file with run parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    flags: RunConfig,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample |G|² and the rate function on a t_f grid (CSV).
    #[command(allow_negative_numbers = true)]
    RateScan,
    /// Critical ramp duration of one chain mode.
    #[command(allow_negative_numbers = true)]
    FindTau,
    /// Sudden-quench momentum of the Ising chain.
    #[command(allow_negative_numbers = true)]
    Ks {
        #[arg(value_name = "HI")]
        hi_pos: Option<f64>,
        #[arg(value_name = "HF")]
        hf_pos: Option<f64>,
    },
    /// Fit τ_max(N) = a N^b over chain sizes.
    #[command(allow_negative_numbers = true)]
    Scaling {
        #[arg(value_name = "MODEL")]
        model_pos: Option<ModelKind>,
        #[arg(value_name = "HI")]
        hi_pos: Option<f64>,
        #[arg(value_name = "HF")]
        hf_pos: Option<f64>,
    },
    /// Geometric-phase winding on a t_f grid (CSV).
    #[command(allow_negative_numbers = true)]
    Dtop,
    /// Compare the mode product against exact diagonalization.
    #[command(allow_negative_numbers = true)]
    OracleCheck,
    /// XY-chain modes that can be tuned to exact zeros.
    #[command(allow_negative_numbers = true)]
    XyModes,
    /// Critical ramp duration of one Haldane momentum.
    #[command(allow_negative_numbers = true)]
    Haldane,
    /// NNN phases where the Haldane gap closes.
    #[command(allow_negative_numbers = true)]
    PhaseBoundary,
}

fn fill<T: PartialEq + Copy>(flag: &mut Option<T>, positional: Option<T>, name: &str) -> Result<(), LezError> {
    match (*flag, positional) {
        (Some(a), Some(b)) if a != b => Err(LezError::invalid(format!("{name} given twice with different values"))),
        (_, Some(b)) => {
            *flag = Some(b);
            Ok(())
        }
        _ => Ok(()),
    }
}

fn configure_threads() -> Result<(), LezError> {
    let Ok(raw) = std::env::var("LEZ_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| LezError::invalid(format!("LEZ_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| LezError::invalid(format!("cannot size thread pool: {e}")))
}

fn settings(cli: &Cli) -> Result<Settings, LezError> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut flags = cli.flags.clone();
    match &cli.command {
        Command::Ks { hi_pos, hf_pos } => {
            fill(&mut flags.hi, *hi_pos, "hi")?;
            fill(&mut flags.hf, *hf_pos, "hf")?;
        }
        Command::Scaling { model_pos, hi_pos, hf_pos } => {
            fill(&mut flags.model, *model_pos, "model")?;
            fill(&mut flags.hi, *hi_pos, "hi")?;
            fill(&mut flags.hf, *hf_pos, "hf")?;
        }
        _ => {}
    }
    base.overlay(flags).resolve()
}

fn emit(out: Output, s: &Settings) -> Result<(), CliError> {
    match out {
        Output::Json(value) => {
            let text = output::to_json(&value);
            match &s.out {
                Some(path) => output::write_file(path, &format!("{text}\n"))?,
                None => stdout(&format!("{text}\n")),
            }
        }
        Output::Trace { table, metadata, title, ylabel, column } => {
            let csv = table.render();
            match &s.out {
                Some(path) => {
                    output::write_file(path, &csv)?;
                    let meta = output::envelope(serde_json::json!({ "data": path }), metadata);
                    output::write_file(&output::sidecar_path(path), &format!("{}\n", output::to_json(&meta)))?;
                    if s.emit_gnuplot {
                        let script = output::gnuplot_script(path, &title, ylabel, column);
                        output::write_file(&output::gnuplot_path(path), &script)?;
                    }
                }
                None => stdout(&csv),
            }
        }
    }
    Ok(())
}

/// Write to stdout, tolerating a closed pipe.
fn stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

enum CliError {
    Lez(LezError),
    Io(std::io::Error),
}

impl From<LezError> for CliError {
    fn from(e: LezError) -> Self {
        CliError::Lez(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn kind_and_code(&self) -> (&'static str, u8) {
        let CliError::Lez(e) = self else {
            return ("io", 2);
        };
        match e.root_cause() {
            LezError::InvalidParameter(_) => ("invalid_parameter", 2),
            LezError::DegenerateKernel { .. } => ("degenerate_kernel", 2),
            LezError::NoRootInRange { .. } => ("no_root_in_range", 3),
            LezError::NoRealSolution { .. } => ("no_real_solution", 3),
            LezError::StepUnderflow { .. } => ("step_underflow", 4),
            LezError::PhaseUndefined { .. } => ("phase_undefined", 4),
            LezError::NotAtCriticalRate { .. } => ("not_at_critical_rate", 4),
            LezError::UndefinedAtZero { .. } => ("undefined_at_zero", 4),
            LezError::StepNotConverged { .. } => ("step_not_converged", 4),
            LezError::Mode { .. } => ("solver_failure", 4),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lez(e) => e.to_string(),
            CliError::Io(e) => e.to_string(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let s = settings(&cli)?;
    let out = match cli.command {
        Command::RateScan => commands::rate_scan(&s),
        Command::FindTau => commands::find_tau(&s),
        Command::Ks { .. } => commands::ks(&s),
        Command::Scaling { .. } => commands::scaling(&s),
        Command::Dtop => commands::dtop(&s),
        Command::OracleCheck => commands::oracle_check(&s),
        Command::XyModes => commands::xy_modes(&s),
        Command::Haldane => commands::haldane(&s),
        Command::PhaseBoundary => commands::phase_boundary(&s),
    }?;
    emit(out, &s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            stdout(&format!("{}\n", output::error_json("usage", e.to_string().trim(), 2)));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = e.kind_and_code();
            stdout(&format!("{}\n", output::error_json(kind, &e.message(), code as i32)));
            ExitCode::from(code)
        }
    }
}
