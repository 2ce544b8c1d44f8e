use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use qudit_cli::{run, Cli, RunConfig, EXIT_INPUT};

fn main() -> ExitCode {
    let cfg = match RunConfig::from_cli(Cli::parse()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let outcome = run(&cfg, &mut io::stdin().lock());
    io::stdout().write_all(outcome.stdout.as_bytes()).ok();
    io::stderr().write_all(outcome.stderr.as_bytes()).ok();
    ExitCode::from(outcome.code as u8)
}
