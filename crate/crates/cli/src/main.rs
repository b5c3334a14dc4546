mod args;
mod commands;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::{Ctx, Outcome, Status};
use firefight::Exec;

const EXIT_USAGE: u8 = 1;
const EXIT_INDETERMINATE: u8 = 2;
const EXIT_FAULT: u8 = 3;

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let ctx = Ctx { cap: cli.vertex_cap, exec: if cli.sequential { Exec::Sequential } else { Exec::default() } };
    match &cli.command {
        Command::Br(a) => commands::br(a, &ctx),
        Command::Contain(a) => commands::contain(a, &ctx),
        Command::Simulate(a) => commands::simulate_cmd(a, &ctx),
        Command::Oracle(a) => commands::oracle(a, &ctx),
        Command::Cayley(a) => commands::cayley(a, &ctx),
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> anyhow::Result<()> {
    let status = match outcome.status {
        Status::Determinate => "determinate",
        Status::Indeterminate => "indeterminate",
        Status::Fault => "fault",
    };
    let envelope = json!({
        "version": firefight::VERSION,
        "config": cli,
        "status": status,
        "report": outcome.report,
    });
    let mut text = serde_json::to_string_pretty(&envelope)?;
    text.push('\n');
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let (Some(path), Some((header, rows))) = (&cli.csv, &outcome.table) {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = emit(&cli, &outcome) {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    match outcome.status {
        Status::Determinate => ExitCode::SUCCESS,
        Status::Indeterminate => ExitCode::from(EXIT_INDETERMINATE),
        Status::Fault => ExitCode::from(EXIT_FAULT),
    }
}
