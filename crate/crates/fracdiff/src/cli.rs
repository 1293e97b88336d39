//! Argument parsing and the top-level driver.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::{run_coeffs, run_convergence, run_ml, run_scan, run_solve, RunOutput};
use crate::config::{CoeffsArgs, ConvergenceArgs, MlArgs, OutputArgs, ScanArgs, SolveArgs};
use crate::error::{CliError, Result, EXIT_USAGE};

/// Explicit fractional FTCS solver for the subdiffusion equation.
#[derive(Debug, Parser)]
#[command(name = "fracdiff", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one problem and write snapshots as CSV (step, t, x, u).
    Solve(SolveArgs),
    /// Find the empirical stability onset for each gamma.
    ScanStability(ScanArgs),
    /// Tabulate Grünwald-Letnikov weights.
    Coeffs(CoeffsArgs),
    /// Evaluate the Mittag-Leffler function E_gamma(-x).
    Ml(MlArgs),
    /// Measure the observed order of accuracy under dx refinement at fixed S.
    Convergence(ConvergenceArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::ScanStability(_) => "scan-stability",
            Command::Coeffs(_) => "coeffs",
            Command::Ml(_) => "ml",
            Command::Convergence(_) => "convergence",
        }
    }

    fn execute(self) -> (OutputArgs, Result<RunOutput>) {
        match self {
            Command::Solve(a) => (a.out.clone(), a.resolve().and_then(|c| run_solve(&c))),
            Command::ScanStability(a) => (a.out.clone(), a.resolve().and_then(|c| run_scan(&c))),
            Command::Coeffs(a) => (a.out.clone(), a.resolve().and_then(|c| run_coeffs(&c))),
            Command::Ml(a) => (a.out.clone(), a.resolve().and_then(|c| run_ml(&c))),
            Command::Convergence(a) => {
                (a.out.clone(), a.resolve().and_then(|c| run_convergence(&c)))
            }
        }
    }
}

fn emit(out: &OutputArgs, command: &str, run: &RunOutput) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, &run.csv)
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&run.csv)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("writing stdout", e))?;
        }
    }
    if let Some(path) = out.manifest_path() {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp_unix": timestamp,
            "output": out.output,
            "status": run.abort.as_ref().map_or("ok", |_| "aborted"),
            "parameters": run.manifest,
        });
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest is plain JSON");
        text.push('\n');
        fs::write(&path, text)
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    }
    Ok(())
}

fn fail(err: &CliError) -> u8 {
    eprintln!("{}", err.record());
    err.exit_code()
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            eprint!("{}", e.render());
            return EXIT_USAGE;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            let message = line.trim().trim_start_matches("error: ").to_string();
            return fail(&CliError::Parse { key: None, message });
        }
    };
    let name = cli.command.name();
    let (out, result) = cli.command.execute();
    let run = match result {
        Ok(run) => run,
        Err(e) => return fail(&e),
    };
    if let Err(e) = emit(&out, name, &run) {
        return fail(&e);
    }
    match &run.abort {
        Some(e) => fail(e),
        None => 0,
    }
}
