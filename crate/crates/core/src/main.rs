use std::io::IsTerminal;
use std::process::ExitCode;

use clap::Parser;
use homfinsler::cli::{self, Cli};

fn main() -> ExitCode {
    let args = Cli::parse();
    let record = cli::run(&args);
    let color = std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal();
    println!("{}", cli::render(&record, args.json, color));
    ExitCode::from(record.exit_code() as u8)
}
