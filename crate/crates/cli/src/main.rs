mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<commands::Outcome> {
    let precision = args::precision(&cli.precision)?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    match &cli.command {
        Command::Solve(a) => commands::solve(a, precision, &cli.out),
        Command::Sweep(a) => commands::sweep(a, precision, &cli.out),
        Command::Phase(a) => commands::phase(a, &cli.out),
        Command::Crossings(a) => commands::crossings(a, precision, &cli.out),
        Command::Validate(a) => commands::validate(a, precision, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(o) if o.flagged => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
