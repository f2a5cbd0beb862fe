//! Command-line front end for the adaptive boundary element solver.
//!
//! `run` executes a configuration (a file path or a built-in preset name)
//! and writes the convergence history as CSV; `compare` fits decay rates to
//! two histories and can enforce a minimum rate advantage.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! failure during a run, 3 comparison margin not met.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bem2d::adaptive::{axiom_diagnostics, empirical_rate, linear_convergence_fit, Marking};
use bem2d::config::{preset_config, preset_text, Config, PRESET_NAMES};
use bem2d::study::{compare_histories, history_csv, parse_history_csv, render_comparison};
use bem2d::Error;

#[derive(Parser)]
#[command(
    name = "bem2d-cli",
    about = "Adaptive boundary element convergence studies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write its convergence history as CSV.
    Run(RunArgs),
    /// Compare the decay rates fitted to two history CSV files.
    Compare(CompareArgs),
    /// List the built-in presets with their configuration text.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file path, or the name of a built-in preset.
    config: String,
    /// Override the wave number.
    #[arg(long)]
    k: Option<f64>,
    /// Override the marking parameter.
    #[arg(long)]
    theta: Option<f64>,
    /// Override the marking strategy: uniform, doerfler or doerfler-expanded.
    #[arg(long)]
    marking: Option<String>,
    /// Override the dof count at which the loop stops.
    #[arg(long)]
    max_dofs: Option<usize>,
    /// Write the history CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the pairwise stability/reduction/reliability diagnostics in the
    /// summary (they re-assemble energy Gram matrices on small levels).
    #[arg(long)]
    no_diagnostics: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// History CSV of the first run.
    csv_a: PathBuf,
    /// History CSV of the second run.
    csv_b: PathBuf,
    /// Required rate advantage of the first run over the second.
    #[arg(long)]
    margin: Option<f64>,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_MARGIN: u8 = 3;

fn load_config(source: &str) -> Result<Config, Error> {
    if Path::new(source).is_file() {
        let text = std::fs::read_to_string(source)?;
        Config::parse(&text)
    } else if preset_text(source).is_some() {
        preset_config(source)
    } else {
        Err(Error::Config(format!(
            "'{source}' is neither a config file nor a preset (presets: {})",
            PRESET_NAMES.join(", ")
        )))
    }
}

fn apply_overrides(cfg: &mut Config, args: &RunArgs) -> Result<(), Error> {
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(theta) = args.theta {
        cfg.theta = theta;
    }
    if let Some(marking) = &args.marking {
        cfg.marking = match marking.as_str() {
            "uniform" => Marking::Uniform,
            "doerfler" => Marking::Doerfler,
            "doerfler-expanded" => Marking::DoerflerExpanded,
            other => {
                return Err(Error::Config(format!(
                    "unknown marking '{other}' (expected uniform, doerfler or doerfler-expanded)"
                )))
            }
        };
    }
    if let Some(max_dofs) = args.max_dofs {
        cfg.max_dofs = max_dofs;
    }
    cfg.validate()
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode, ExitCode> {
    let mut cfg = load_config(&args.config).map_err(config_failure)?;
    apply_overrides(&mut cfg, args).map_err(config_failure)?;
    let run = bem2d::study::run_experiment(&cfg).map_err(numerical_failure)?;
    let csv = history_csv(&run);
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| numerical_failure(Error::Io(e)))?;
            eprintln!("wrote {} rows to {}", run.records.len(), path.display());
        }
        None => print!("{csv}"),
    }
    if let Some(rate) = empirical_rate(&run.records) {
        eprintln!("fitted rate: {rate:.4}");
    }
    if let Some(fit) = linear_convergence_fit(&run.records) {
        eprintln!("geometric fit: C = {:.4}, q = {:.4}", fit.c_lin, fit.q_lin);
    }
    if let Some(last) = run.records.last() {
        eprintln!(
            "final level: ell = {}, N = {}, eta = {:.4e}",
            last.ell, last.n_dofs, last.eta
        );
    }
    if !args.no_diagnostics {
        // pair diagnostics need one Gram assembly per level pair, so they
        // are evaluated on the leading levels only
        const DIAG_DOF_CAP: usize = 384;
        let head = run.truncated(DIAG_DOF_CAP);
        let problem = cfg.build_problem().map_err(config_failure)?;
        if let Ok(diag) = axiom_diagnostics(&head, &problem, cfg.quad) {
            let span = |v: &[f64]| -> Option<(f64, f64)> {
                let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (!v.is_empty()).then_some((lo, hi))
            };
            if let Some((lo, hi)) = span(&diag.stability) {
                eprintln!("stability constant (levels <= {DIAG_DOF_CAP} dofs): min = {lo:.4}, max = {hi:.4}");
            }
            if let Some((lo, hi)) = span(&diag.discrete_reliability) {
                eprintln!("discrete reliability constant: min = {lo:.4}, max = {hi:.4}");
            }
            if !diag.reduction_triples.is_empty() {
                eprintln!(
                    "reduction fit: q = {:.4}, C = {:.4}",
                    diag.reduction_q, diag.reduction_c
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: &CompareArgs) -> Result<ExitCode, ExitCode> {
    let read = |path: &PathBuf| -> Result<_, ExitCode> {
        let text = std::fs::read_to_string(path).map_err(|e| config_failure(Error::Io(e)))?;
        parse_history_csv(&text).map_err(config_failure)
    };
    let a = read(&args.csv_a)?;
    let b = read(&args.csv_b)?;
    let cmp = compare_histories(&a, &b);
    print!("{}", render_comparison(&cmp, &a, &b));
    if let Some(margin) = args.margin {
        match cmp.advantage() {
            Some(adv) if adv >= margin => {}
            _ => {
                eprintln!("margin {margin} not met");
                return Ok(ExitCode::from(EXIT_MARGIN));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_presets() -> ExitCode {
    for name in PRESET_NAMES {
        println!("== {name} ==");
        print!("{}", preset_text(name).unwrap());
        println!();
    }
    ExitCode::SUCCESS
}

fn config_failure(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn numerical_failure(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_NUMERICAL)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep help/version on stdout with success, remap usage errors
            // to the documented configuration exit code
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(EXIT_CONFIG);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Presets => Ok(cmd_presets()),
    };
    match outcome {
        Ok(code) => code,
        Err(code) => code,
    }
}
