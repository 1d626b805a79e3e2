//! Experiment runner: `povm-spt <table1|fig3|fig4|compare|norm|simulate|optimize>`.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use povm_spt::experiments::{
    run_compare, run_fig3, run_fig4, run_norm, run_optimize, run_simulate, run_table1, CompareConfig, Fig3Config,
    Fig4Config, NormConfig, OptimizeConfig, SimulateConfig, Table1Config,
};
use output::{config_hash, to_csv, to_json, CsvRow, Provenance};

/// Worker thread override.
const THREADS_ENV: &str = "POVM_SPT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "povm-spt", version, about = "Shadow process tomography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML or JSON, by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Output directory; results go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Squared shadow norms for the two single-qubit benchmark observables.
    Table1,
    /// Optimized kappa^2 against Haar family size.
    Fig3,
    /// log2(kappa^2)/n against qubit count for product states.
    Fig4,
    /// Pauli bound, projective ensembles and optimized POVMs side by side.
    Compare,
    /// kappa^2 of given POVMs on a state/observable family.
    Norm,
    /// End-to-end estimation on a simulated channel.
    Simulate,
    /// Anneal a single-side POVM for an observable family.
    Optimize,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Table1 => "table1",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Compare => "compare",
            Command::Norm => "norm",
            Command::Simulate => "simulate",
            Command::Optimize => "optimize",
        }
    }

    fn tabular(self) -> bool {
        matches!(self, Command::Table1 | Command::Fig3 | Command::Fig4)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<povm_spt::Error> for CliError {
    fn from(e: povm_spt::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        Some(p) => parse_config(p),
        None => Ok(T::default()),
    }
}

fn require_config<T: DeserializeOwned>(path: Option<&Path>, command: Command) -> Result<T, CliError> {
    let p = path.ok_or_else(|| CliError::Validation(format!("{} needs --config", command.name())))?;
    parse_config(p)
}

fn parse_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        context: format!("reading {}", path.display()),
        source,
    })?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let parsed = if is_toml {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Validation(format!("invalid config {}: {e}", path.display())))
}

fn tabular<C: Serialize, R: CsvRow + Serialize>(
    command: Command,
    config: &C,
    rows: &[R],
    seed: u64,
    format: Format,
) -> Result<String, CliError> {
    let prov = Provenance {
        seed,
        config_hash: config_hash(config),
    };
    match format {
        Format::Csv => to_csv(rows, &prov).map_err(|e| CliError::Io {
            context: "formatting csv".into(),
            source: std::io::Error::other(e),
        }),
        Format::Json => Ok(to_json(command.name(), config, &rows, &prov)),
    }
}

fn document<C: Serialize, R: Serialize>(command: Command, config: &C, result: &R, seed: u64) -> String {
    let prov = Provenance {
        seed,
        config_hash: config_hash(config),
    };
    to_json(command.name(), config, result, &prov)
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let cmd = cli.command;
    let format = cli.format.unwrap_or(if cmd.tabular() { Format::Csv } else { Format::Json });
    if format == Format::Csv && !cmd.tabular() {
        return Err(CliError::Validation(format!("{} only supports --format json", cmd.name())));
    }
    let cfg = cli.config.as_deref();
    let seed = cli.seed;
    match cmd {
        Command::Table1 => {
            let c: Table1Config = load_config(cfg)?;
            tabular(cmd, &c, &run_table1(&c, seed)?, seed, format)
        }
        Command::Fig3 => {
            let c: Fig3Config = load_config(cfg)?;
            tabular(cmd, &c, &run_fig3(&c, seed)?, seed, format)
        }
        Command::Fig4 => {
            let c: Fig4Config = load_config(cfg)?;
            tabular(cmd, &c, &run_fig4(&c, seed)?, seed, format)
        }
        Command::Compare => {
            let c: CompareConfig = load_config(cfg)?;
            Ok(document(cmd, &c, &run_compare(&c, seed)?, seed))
        }
        Command::Norm => {
            let c: NormConfig = require_config(cfg, cmd)?;
            Ok(document(cmd, &c, &run_norm(&c, seed)?, seed))
        }
        Command::Simulate => {
            let c: SimulateConfig = require_config(cfg, cmd)?;
            Ok(document(cmd, &c, &run_simulate(&c, seed)?, seed))
        }
        Command::Optimize => {
            let c: OptimizeConfig = require_config(cfg, cmd)?;
            Ok(document(cmd, &c, &run_optimize(&c, seed)?, seed))
        }
    }
}

fn write_output(cli: &Cli, body: &str) -> Result<(), CliError> {
    let Some(dir) = &cli.out else {
        print!("{body}");
        return Ok(());
    };
    let io = |context: String| move |source| CliError::Io { context, source };
    fs::create_dir_all(dir).map_err(io(format!("creating {}", dir.display())))?;
    let format = cli
        .format
        .unwrap_or(if cli.command.tabular() { Format::Csv } else { Format::Json });
    let path = dir.join(format!("{}.{}", cli.command.name(), format.extension()));
    fs::write(&path, body).map_err(io(format!("writing {}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| CliError::Validation(format!("{THREADS_ENV}={v} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|_| execute(&cli))
        .and_then(|body| write_output(&cli, &body));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
