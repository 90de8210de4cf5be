use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use otslab::commands::{self, PATH_LIMIT};
use otslab::config::Experiment;
use otslab::error::CliError;
use serde::Serialize;

#[derive(Parser)]
#[command(version, about = "Opinion transition system experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write its trace.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        /// Trace CSV; defaults to `outputs.trace` in the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Run every seed in `a..b` concurrently and print per-seed summaries
        /// instead of writing a trace.
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Fairness diagnostics of a trace or of a configured scheduler.
    Fairness {
        #[arg(long, required_unless_present = "config")]
        trace: Option<PathBuf>,
        /// With --trace, supplies the edge alphabet.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "trace", conflicts_with = "trace")]
        horizon: Option<usize>,
        #[arg(short)]
        m: Option<usize>,
        #[arg(short)]
        k: Option<usize>,
        #[arg(short = 'G')]
        g: Option<usize>,
    },
    /// Run the bound auditors; exits 3 on any violation.
    Verify {
        #[arg(short, long)]
        config: PathBuf,
        /// Audit this trace instead of a fresh run.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = PATH_LIMIT)]
        path_limit: usize,
    },
    /// Regenerate a preset experiment: config, trace and plot.
    Reproduce {
        figure: String,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    // a closed pipe (`otslab … | head`) is not an error
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Runtime(e.to_string())),
        _ => Ok(()),
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, output, svg, seeds } => {
            let exp = Experiment::load(&config)?;
            if let Some(range) = seeds {
                return print_json(&commands::batch(&exp, commands::parse_seed_range(&range)?)?);
            }
            let csv = output.or_else(|| exp.config.outputs.trace.clone());
            let svg = svg.or_else(|| exp.config.outputs.svg.clone());
            if csv.is_none() && svg.is_none() {
                return Err(CliError::Validation("no output: pass -o or set outputs.trace".into()));
            }
            print_json(&commands::simulate(&exp, csv.as_deref(), svg.as_deref())?)
        }
        Command::Fairness { trace, config, horizon, m, k, g } => {
            let windows = commands::window_args(m, k, g)?;
            let exp = config.as_deref().map(Experiment::load).transpose()?;
            let report = match (trace, exp, horizon) {
                (Some(path), exp, _) => commands::fairness_of_trace(&path, exp.as_ref(), windows)?,
                (None, Some(exp), Some(h)) => commands::fairness_of_run(&exp, h, windows)?,
                _ => return Err(CliError::Validation("need --trace, or -c with --horizon".into())),
            };
            print_json(&report)
        }
        Command::Verify { config, trace, path_limit } => {
            let exp = Experiment::load(&config)?;
            let summary = match trace {
                Some(path) => commands::verify_trace_file(&exp, &path, path_limit)?,
                None => commands::verify(&exp, None, path_limit)?,
            };
            print_json(&summary)?;
            if summary.total_violations > 0 {
                return Err(CliError::Violations(format!(
                    "{} bound violations\n{}",
                    summary.total_violations,
                    summary.violation_counts()
                )));
            }
            Ok(())
        }
        Command::Reproduce { figure, output } => print_json(&commands::reproduce(&figure, &output)?),
    }
}

fn main() -> ExitCode {
    // clap exits 2 on usage errors; here 2 means a runtime failure
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
