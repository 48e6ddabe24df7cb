mod args;
mod commands;
mod config;
mod error;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::Outcome;
use config::RunConfig;
use error::{CliError, EXIT_FINDING, EXIT_VALIDATION};

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Gen(_) => "gen",
        Command::Bound(_) => "bound",
        Command::Compare(_) => "compare",
        Command::Verify(_) => "verify",
        Command::Simulate(_) => "simulate",
        Command::Sweep(_) => "sweep",
    }
}

fn run(cli: &Cli) -> Result<(RunConfig, Outcome), CliError> {
    let cfg = RunConfig::from_args(&cli.global)?;
    let outcome = match &cli.command {
        Command::Gen(a) => commands::gen(a, &cfg),
        Command::Bound(a) => commands::bound(a, &cfg),
        Command::Compare(a) => commands::compare(a, &cfg),
        Command::Verify(a) => commands::verify(&a.target, &cfg),
        Command::Simulate(a) => commands::simulate(a, &cfg),
        Command::Sweep(a) => commands::sweep(a, &cfg),
    }?;
    Ok((cfg, outcome))
}

fn fail(value: serde_json::Value, code: u8) -> ExitCode {
    eprintln!("{value}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = json!({
                "error": {
                    "kind": "Usage",
                    "message": e.to_string().trim_end(),
                    "exit_code": EXIT_VALIDATION,
                    "details": {},
                }
            });
            return fail(err, EXIT_VALIDATION);
        }
    };

    let (cfg, outcome) = match run(&cli) {
        Ok(ok) => ok,
        Err(e) => return fail(e.to_json(), e.exit_code()),
    };

    let envelope = json!({
        "command": command_name(&cli.command),
        "config": cfg,
        "report": outcome.report,
    });
    let mut out = std::io::stdout().lock();
    if out
        .write_all(render::render(&envelope, cfg.format).as_bytes())
        .and_then(|_| out.flush())
        .is_err()
    {
        return ExitCode::from(error::EXIT_INTERNAL);
    }

    match outcome.finding {
        Some(message) => fail(
            json!({
                "finding": {
                    "command": command_name(&cli.command),
                    "message": message,
                    "exit_code": EXIT_FINDING,
                }
            }),
            EXIT_FINDING,
        ),
        None => ExitCode::SUCCESS,
    }
}
