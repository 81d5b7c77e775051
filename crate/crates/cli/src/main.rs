mod args;
mod commands;
mod config;
mod output;
mod validate;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, OutputArgs};
use config::{check_rho, RunConfig};
use output::Table;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, unreadable or malformed input: exit 2.
    Config(String),
    /// No closed form to compare against: exit 3.
    Unsupported(String),
    /// A numerical routine failed: exit 2.
    Compute(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Unsupported(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Compute(_) => 2,
            CliError::Unsupported(_) => 3,
        }
    }
}

fn emit(table: &Table, cfg: &RunConfig, out: &OutputArgs) -> Result<(), CliError> {
    let text = output::render(table, cfg, out.format);
    output::write_to(&out.out, &text).map_err(|e| CliError::Config(format!("cannot write `{}`: {e}", out.out)))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let (result, out) = match &cli.command {
        Command::Bands(a) => (commands::bands(a), &a.output),
        Command::Spectrum(a) => (commands::spectrum(a), &a.output),
        Command::Scan(a) => (commands::scan(a), &a.output),
        Command::Evolve(a) => (commands::evolve(a), &a.output),
        Command::Validate(a) => {
            if let Some(r) = a.rho {
                check_rho(r)?;
            }
            let checks = validate::run_checks(a.lattice.as_deref(), a.rho);
            let mut cfg = RunConfig::new("validate");
            if let Some(l) = &a.lattice {
                cfg = cfg.set("lattice", l.as_str());
            }
            if let Some(r) = a.rho {
                cfg = cfg.set_f64("rho", r);
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            emit(&validate::report(&checks), &cfg, &a.output)?;
            eprintln!("validate: {} passed, {} failed", checks.len() - failed.len(), failed.len());
            for name in &failed {
                eprintln!("failed: {name}");
            }
            return Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    };
    let (table, cfg) = result?;
    emit(&table, &cfg, out)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
