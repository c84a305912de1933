//! `effham`: build, diagonalize and analyze effective Hamiltonians from the shell.

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{Command, ConfigError, Flags, Format, RunConfig};
use output::Table;

#[derive(Parser)]
#[command(name = "effham", version, about = "Effective Hamiltonians for slow-fast coupled quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Diagonalize a model and write its eigenvalues or density of states.
    Spectrum(Flags),
    /// Stationary points of the classical energy surface.
    Classical(Flags),
    /// Sweep A or g, one row per point, and bracket the transition.
    Scan(Flags),
    /// Cross-checks: error scaling, closed forms, finite-size convergence.
    Verify(Flags),
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match e.downcast_ref::<effham::Error>() {
        Some(effham::Error::NotBracketed(_) | effham::Error::NoConvergence(_)) => EXIT_NOT_CONVERGED,
        Some(
            effham::Error::InvalidParameter(_)
            | effham::Error::RegimeInvalid(_)
            | effham::Error::SizeLimit(_)
            | effham::Error::DivisionByZero(_),
        ) => EXIT_CONFIG,
        _ => EXIT_IO,
    }
}

fn write_table(cfg: &RunConfig, table: &Table) -> Result<()> {
    let sink: Box<dyn Write> = match &cfg.output {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    match cfg.format {
        Format::Csv => {
            table.write_csv(&mut out)?;
            for (k, v) in &table.summary {
                log::info!("{k} = {}", v.to_csv());
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &table.to_json(&cfg.raw, cfg.command.name()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run(command: Command, flags: &Flags) -> Result<()> {
    let cfg = config::resolve(command, config::merge(flags)?)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("cannot start worker threads")?;
    pool.install(|| {
        let (table, deferred) = match cfg.command {
            Command::Spectrum => (commands::spectrum(&cfg)?, None),
            Command::Classical => (commands::classical(&cfg)?, None),
            Command::Scan => commands::scan(&cfg)?,
            Command::Verify => (commands::verify(&cfg)?, None),
        };
        write_table(&cfg, &table)?;
        deferred.map_or(Ok(()), Err)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Sub::Spectrum(f) => (Command::Spectrum, f),
        Sub::Classical(f) => (Command::Classical, f),
        Sub::Scan(f) => (Command::Scan, f),
        Sub::Verify(f) => (Command::Verify, f),
    };
    match run(command, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
