#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::commands::*;
use crate::config::Settings;

/// Bumped whenever a CSV header or JSON key changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "painleve", version, about = "Sigma-Painlevé III′ solutions, CUE joint moments and finite-N Hankel determinants")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// key = value file overriding numerical settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// v(z; s) and its first two derivatives on a grid.
    V(VArgs),
    /// The joint-moment coefficient F(s, h).
    Moment(MomentArgs),
    /// The Hua-Pickrell density ρ^{(s)} on a grid.
    Density(DensityArgs),
    /// Finite-N moments, v_N on a grid, or ln W_N and u_N.
    FiniteN(FiniteNArgs),
    /// |v_N(z; s) − v(z; s)| for a list of N.
    Convergence(ConvergenceArgs),
    /// F(m, h) as h approaches m + 1/2.
    ProbeRule(ProbeArgs),
    /// Runs the acceptance suite; exit status 0 only if every criterion passes.
    Accept(AcceptArgs),
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("PAINLEVE_THREADS") {
        let n: usize = v.parse().with_context(|| format!("PAINLEVE_THREADS = {v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}

fn echo(args: &impl Serialize, settings: &Settings, format: Format) -> Map<String, Value> {
    let mut m = match serde_json::to_value(args) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    m.insert("format".into(), serde_json::to_value(format).unwrap_or(Value::Null));
    m.insert("charfn_t_max".into(), settings.charfn_t_max.into());
    m.insert("charfn_order".into(), settings.charfn_order.into());
    m.insert("prime_cutoff".into(), settings.prime_cutoff.into());
    m.insert("arith_tol".into(), settings.arith_tol.into());
    m
}

fn run(cli: Cli) -> Result<ExitCode> {
    init_threads()?;
    let settings = match &cli.config {
        Some(p) => Settings::load(p).map_err(|e| Usage(format!("{e:#}")))?,
        None => Settings::default(),
    };
    let mut sink: Box<dyn Write> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let (table, config) = match &cli.command {
        Command::V(a) => (cmd_v(a)?, echo(a, &settings, cli.format)),
        Command::Moment(a) => (cmd_moment(a, &settings)?, echo(a, &settings, cli.format)),
        Command::Density(a) => (cmd_density(a, &settings)?, echo(a, &settings, cli.format)),
        Command::FiniteN(a) => (cmd_finite_n(a)?, echo(a, &settings, cli.format)),
        Command::Convergence(a) => (cmd_convergence(a)?, echo(a, &settings, cli.format)),
        Command::ProbeRule(a) => (cmd_probe_rule(a, &settings)?, echo(a, &settings, cli.format)),
        Command::Accept(a) => {
            let (table, all_passed) = cmd_accept(a, &mut sink, cli.format == Format::Csv)?;
            if cli.format == Format::Json {
                serde_json::to_writer_pretty(&mut sink, &table.to_json(echo(a, &settings, cli.format)))?;
                writeln!(sink)?;
            }
            sink.flush()?;
            return Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
    };
    match cli.format {
        Format::Csv => table.write_csv(&mut sink)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &table.to_json(config))?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Exit status for a failed run: 2 for invalid input, 3 for a numerical
/// failure, 1 otherwise.
fn exit_status(err: &anyhow::Error) -> u8 {
    use painleve_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<Usage>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidS(_) | E::Domain { .. } | E::MomentRange(_) | E::Order { .. } | E::GammaPole(_) => 2,
                _ => 3,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_status(&err))
        }
    }
}
