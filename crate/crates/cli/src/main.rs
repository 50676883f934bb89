mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::CliError;

/// Trotter circuits, LDOA compression and exact-oracle checks for the
/// lattice Gross–Neveu model.
#[derive(Parser)]
#[command(name = "gnq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CZ counts and depths for r = 1..r_max, per LDOA mode.
    Stats(Common),
    /// Solve the LDOA least-squares problem; optional residual sweep.
    Ldoa(Common),
    /// Density-density correlator, Trotter vs exact.
    Correlator(Common),
    /// Rényi-2 entropy: exact and randomized-measurement estimate.
    Entropy(Common),
    /// Qubit Hamiltonian as `coefficient,pauli_string` CSV.
    DumpHamiltonian(Common),
    /// Trotter circuit in the line-oriented text format.
    DumpCircuit(Common),
}

#[derive(Args)]
struct Common {
    /// Config file, `key = value` lines or a JSON object.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable. Bare `key=value` arguments work too.
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Output directory; falls back to GNQ_OUT_DIR, then the working directory.
    #[arg(short, long, env = "GNQ_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

fn resolve(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let mut map = match &common.config {
        Some(p) => config::load_file(p)?,
        None => serde_json::Map::new(),
    };
    for o in common.set.iter().chain(&common.overrides) {
        let (k, v) = config::parse_override(o)?;
        map.insert(k, v);
    }
    if let Some(seed) = common.seed {
        map.insert("seed".into(), seed.into());
    }
    if let Some(f) = &common.format {
        map.insert("format".into(), f.clone().into());
    }
    let mut cfg = config::from_map(map)?.resolved()?;
    // flag > env > config file > working directory
    let dir = common
        .out_dir
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    cfg.out_dir = Some(dir.display().to_string());
    Ok((cfg, dir))
}

type Handler = fn(&RunConfig, &mut commands::Outputs) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let (name, common, f): (&'static str, &Common, Handler) = match &cli.command {
        Command::Stats(c) => ("stats", c, commands::stats),
        Command::Ldoa(c) => ("ldoa", c, commands::ldoa),
        Command::Correlator(c) => ("correlator", c, commands::correlator),
        Command::Entropy(c) => ("entropy", c, commands::entropy),
        Command::DumpHamiltonian(c) => ("dump-hamiltonian", c, commands::dump_hamiltonian),
        Command::DumpCircuit(c) => ("dump-circuit", c, commands::dump_circuit),
    };
    let (cfg, dir) = resolve(common)?;
    let mut out = commands::Outputs::new(&dir, name, cfg.clone())?;
    f(&cfg, &mut out)?;
    Ok(out.written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gnq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
