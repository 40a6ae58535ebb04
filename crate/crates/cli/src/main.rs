use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

mod commands;
mod config;
mod report;
mod suite;

use config::{CliError, CliResult};
use report::Report;

#[derive(Parser)]
#[command(name = "polyball-lab", version, about = "Checks for twisted multi-shift tuples, driven by JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report.json and the other outputs.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Print the config schema for this command and exit.
    #[arg(long)]
    emit_schema: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Polyball membership, purity and doubly commuting tests for a tuple.
    Check(Common),
    /// Normal forms of words, with confluence and faithfulness checks.
    Rewrite(Common),
    /// ‖p(T)‖ against ‖p(S)‖ on the truncated model.
    Vn(Common),
    /// Berezin kernel identities and transforms.
    Berezin(Common),
    /// Minimal dilation and moment identities.
    Dilate(Common),
    /// Wold decomposition of an assembled doubly commuting tuple.
    Wold(Common),
    /// Co-invariant and invariant subspaces of the vector-valued model.
    Beurling(Common),
    /// Seeded sweep over the reference models; the config is optional.
    Suite(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Check(c) => ("check", c),
            Command::Rewrite(c) => ("rewrite", c),
            Command::Vn(c) => ("vn", c),
            Command::Berezin(c) => ("berezin", c),
            Command::Dilate(c) => ("dilate", c),
            Command::Wold(c) => ("wold", c),
            Command::Beurling(c) => ("beurling", c),
            Command::Suite(c) => ("suite", c),
        }
    }
}

fn load(name: &str, common: &Common) -> CliResult<Value> {
    let value = match &common.config {
        Some(path) => config::read(path)?,
        None if name == "suite" => suite::default_config(),
        None => return Err(config::at("", format!("{name} needs --config"))),
    };
    config::validate(name, &value)?;
    Ok(value)
}

fn run(name: &str, common: &Common) -> CliResult<bool> {
    let started = Instant::now();
    let value = load(name, common)?;
    let mut report = Report::new(name, value.clone());
    match name {
        "check" => commands::check(&value, &mut report),
        "rewrite" => commands::rewrite(&value, &mut report),
        "vn" => commands::vn(&value, &mut report),
        "berezin" => commands::berezin(&value, &mut report),
        "dilate" => commands::dilate(&value, &mut report),
        "wold" => commands::wold(&value, &mut report),
        "beurling" => commands::beurling(&value, &mut report),
        "suite" => suite::run(&value, &mut report),
        other => unreachable!("unknown command {other}"),
    }?;
    report.write(&common.out, started.elapsed().as_secs_f64())?;
    print!("{}", report.summary());
    Ok(!report.failed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (name, common) = cli.command.parts();
    if common.emit_schema {
        print!("{}", config::schema(name));
        return ExitCode::SUCCESS;
    }
    match run(name, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e @ CliError::Config { .. }) | Err(e @ CliError::Io(_)) => {
            eprintln!("polyball-lab: {e}");
            ExitCode::from(1)
        }
    }
}
