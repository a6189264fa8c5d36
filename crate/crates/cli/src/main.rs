// Negated float comparisons are deliberate: they send NaN down the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ptchain_cli::{parse_config, run, CliError, Command, Format, RunConfig, RunOutcome};

/// Spectra, Bethe roots, scattering and wave-packet runs for PT-symmetric
/// tight-binding chains.
///
/// Exit status: 0 when every invariant check passed, 1 on invalid input or a
/// failed check, 2 on a numerical or runtime failure. Errors are printed to
/// stderr as one JSON record per line. Set THREADS to cap the worker count.
#[derive(Debug, Parser)]
#[command(name = "ptchain", version)]
struct Cli {
    /// spectrum | roots | scatter | correspond | evolve
    #[arg(value_parser = parse_command)]
    command: Command,
    /// Flat `key = value` run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; overrides `output.path`. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json; overrides `output.format`.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
}

fn parse_command(s: &str) -> Result<Command, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size worker pool: {e}")))
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut cfg = parse_config(&text)?;
    match cfg.command {
        Some(c) if c != cli.command => {
            return Err(CliError::Usage(format!("config is for `{c}` but `{}` was requested", cli.command)));
        }
        _ => cfg.command = Some(cli.command),
    }
    if let Some(out) = &cli.out {
        cfg.output_path = Some(out.clone());
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    Ok(cfg)
}

fn emit(cfg: &RunConfig, outcome: &RunOutcome) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match &cfg.output_path {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match cfg.format {
        Format::Csv => outcome.table.write_csv(&mut sink)?,
        Format::Json => outcome.table.write_json(&mut sink)?,
    }
    sink.flush()?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<RunOutcome, CliError> {
    configure_threads()?;
    let cfg = load(cli)?;
    let outcome = run(&cfg)?;
    emit(&cfg, &outcome)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) if outcome.passed() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for failure in &outcome.failures {
                eprintln!("{}", failure.record());
            }
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("{}", err.record());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
