//! `fockedge` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 numerical
//! failure.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fockedge::export::{json_bytes, write_atomic};
use serde_json::json;
use sha2::{Digest, Sha256};

use commands::Artifact;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "fockedge", version, about = "Edge states and pointer states of the driven Jaynes-Cummings lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the `seed` key of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a configuration key, e.g. `--set spectrum.n_cells=40`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Also write a gnuplot script next to the data.
    #[arg(long, global = true)]
    gnuplot: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Eigenvalues of the open SSH chain versus J₁.
    Spectrum,
    /// Left edge state and its geometric fit at each (J₁, J₂) point.
    Edgefit,
    /// Coherent dark state of the driven JC model, three ways.
    Darkstate,
    /// Damped, optionally driven, cavity mode on the ladder basis.
    Evolve,
    /// Winding number of the two-band Bloch Hamiltonian.
    Winding,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Edgefit => "edgefit",
            Command::Darkstate => "darkstate",
            Command::Evolve => "evolve",
            Command::Winding => "winding",
        }
    }
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<fockedge::Error> for Failure {
    fn from(e: fockedge::Error) -> Self {
        match e {
            fockedge::Error::Io(_) => Failure::Io(e.to_string()),
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn manifest(cmd: Command, cfg: &RunConfig, files: &[Artifact]) -> serde_json::Value {
    let files: Vec<_> = files
        .iter()
        .map(|a| json!({ "name": a.name, "bytes": a.bytes.len(), "sha256": sha256_hex(&a.bytes) }))
        .collect();
    json!({
        "schema": "fockedge.manifest/v1",
        "command": cmd.name(),
        "fockedge_version": env!("CARGO_PKG_VERSION"),
        "parallel_feature": fockedge::par::PARALLEL_ENABLED,
        "seed": cfg.seed,
        "config": cfg,
        "rerun": format!("fockedge {} --config config.toml", cmd.name()),
        "files": files,
    })
}

fn write_all(dir: &Path, files: &[Artifact]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    for a in files {
        write_atomic(&dir.join(&a.name), &a.bytes)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Vec<String>, Failure> {
    let mut cfg = config::load(cli.config.as_deref(), &cli.overrides).map_err(|e| Failure::Config(e.0))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let mut files = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg, cli.gnuplot)?,
        Command::Edgefit => commands::edgefit(&cfg, cli.gnuplot)?,
        Command::Darkstate => commands::darkstate(&cfg, cli.gnuplot)?,
        Command::Evolve => commands::evolve(&cfg, cli.gnuplot)?,
        Command::Winding => commands::winding(&cfg)?,
    };
    files.push(Artifact { name: "config.toml".into(), bytes: config::to_toml(&cfg).into_bytes() });
    files.sort_by(|a, b| a.name.cmp(&b.name));
    let m = Artifact { name: "manifest.json".into(), bytes: json_bytes(&manifest(cli.command, &cfg, &files))? };
    files.push(m);
    write_all(&cli.out, &files)?;
    Ok(files.into_iter().map(|a| a.name).collect())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(names) => {
            for n in names {
                println!("{}", cli.out.join(n).display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
