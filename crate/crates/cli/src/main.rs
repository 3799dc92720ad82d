//! `pnedelec` command-line entry point.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use config::{Cli, Command, Common};

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Verify(a) => &a.common,
        Command::Interp(a) => &a.common,
        Command::Eig(a) => &a.common,
        Command::Mesh(a) => &a.common,
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let config = serde_json::to_value(&cli.command)?;
    let outcome = match &cli.command {
        Command::Verify(a) => commands::verify(a, &config)?,
        Command::Interp(a) => commands::interp(a, &config)?,
        Command::Eig(a) => commands::eig(a, &config)?,
        Command::Mesh(a) => commands::mesh(a, &config)?,
    };
    let c = common(&cli.command);
    match &c.out {
        Some(path) => std::fs::write(path, &outcome.artifact).with_context(|| format!("writing `{}`", path.display()))?,
        None => std::io::stdout().write_all(outcome.artifact.as_bytes())?,
    }
    if !c.quiet || outcome.code != 0 {
        for line in &outcome.summary {
            eprintln!("{line}");
        }
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
