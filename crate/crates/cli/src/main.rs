//! `qhsing`: completion, Milnor numbers and orbifold resolutions from the
//! command line. Reports go to stdout as JSON; failures are JSON too, with
//! exit code 1 for mathematical obstructions and 2 for bad input.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::JobConfig;
use qhsing::Error;

#[derive(Parser)]
#[command(name = "qhsing", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the epsilon seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the (final) choice graph as Graphviz DOT.
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Weights, graph structure, failing sets and the loop collection.
    Analyze { config: PathBuf },
    /// Certified completion of f_kappa.
    Complete { config: PathBuf },
    /// Milnor number of a polynomial, or of f_kappa for a graph config.
    Milnor {
        file: PathBuf,
        /// Also list the standard monomials of the Jacobian algebra.
        #[arg(long)]
        basis: bool,
    },
    /// Resolve along one or more leaves.
    Resolve {
        config: PathBuf,
        /// 1-based leaf at each stage; replaces `flips` from the config.
        #[arg(long = "flip")]
        flips: Vec<usize>,
    },
    /// Check the orbifold Jacobian algebra isomorphism on the last stage.
    OrbifoldIso {
        config: PathBuf,
        #[arg(long = "flip")]
        flips: Vec<usize>,
    },
}

enum Failure {
    Io(PathBuf, std::io::Error),
    Math(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Math(e)
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::ArityMismatch { .. } => "arity_mismatch",
        Error::IndexOutOfRange { .. } => "index_out_of_range",
        Error::OddExponent { .. } => "odd_exponent",
        Error::Parse { .. } => "parse",
        Error::InvalidGraph(_) => "invalid_graph",
        Error::NotSolvable(_) => "not_solvable",
        Error::NotQuasihomogeneous { .. } => "not_quasihomogeneous",
        Error::EmptyIndexSet => "empty_index_set",
        Error::PrimedBound { .. } => "primed_bound",
        Error::NoMultipower(_) => "no_multipower",
        Error::RetriesExhausted { .. } => "retries_exhausted",
        Error::ResourceLimit(_) => "resource_limit",
        Error::InvalidOrbifold(_) => "invalid_orbifold",
        Error::OutOfScope(_) => "out_of_scope",
        Error::Invariant(_) => "invariant",
        Error::Config(_) => "config",
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

/// Bare polynomial text is accepted where a config has no `=` sign.
fn load(path: &Path, polynomial_ok: bool) -> Result<JobConfig, Failure> {
    let text = read(path)?;
    let looks_like_config = text.contains('=') || text.trim_start().starts_with('{');
    if polynomial_ok && !looks_like_config {
        let cfg = JobConfig::from_polynomial(&text);
        cfg.input()?;
        return Ok(cfg);
    }
    Ok(JobConfig::parse(&text)?)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let (name, path, flips) = match &cli.command {
        Command::Analyze { config } => ("analyze", config, None),
        Command::Complete { config } => ("complete", config, None),
        Command::Milnor { file, .. } => ("milnor", file, None),
        Command::Resolve { config, flips } => ("resolve", config, Some(flips)),
        Command::OrbifoldIso { config, flips } => ("orbifold-iso", config, Some(flips)),
    };
    let mut cfg = load(path, name == "milnor")?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(f) = flips.filter(|f| !f.is_empty()) {
        cfg.flips = f.clone();
    }
    let rep = match &cli.command {
        Command::Analyze { .. } => report::analyze(&cfg)?,
        Command::Complete { .. } => report::complete(&cfg)?,
        Command::Milnor { basis, .. } => report::milnor(&cfg, *basis)?,
        Command::Resolve { .. } => report::resolve(&cfg)?,
        Command::OrbifoldIso { .. } => report::orbifold_iso(&cfg)?,
    };
    let mut body = rep.body;
    body.insert("schema".into(), json!(1));
    body.insert("command".into(), json!(name));
    body.insert(
        "config".into(),
        serde_json::to_value(&cfg).expect("config serializes"),
    );
    let text =
        serde_json::to_string_pretty(&Value::Object(body)).expect("report serializes") + "\n";
    if let Some(p) = &cli.dot {
        match &rep.dot {
            Some(d) => write(p, d)?,
            None => {
                return Err(Failure::Math(Error::Config(
                    "--dot needs a graph config".into(),
                )))
            }
        }
    }
    match &cli.json {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (diag, code) = match f {
                Failure::Io(p, e) => (
                    json!({"kind": "io", "message": format!("{}: {e}", p.display()), "input_error": true}),
                    2,
                ),
                Failure::Math(e) => {
                    let input = e.is_input_error();
                    (
                        json!({"kind": kind(&e), "message": e.to_string(), "input_error": input}),
                        if input { 2 } else { 1 },
                    )
                }
            };
            let out = json!({"schema": 1, "error": diag});
            println!(
                "{}",
                serde_json::to_string_pretty(&out).expect("diagnostic serializes")
            );
            ExitCode::from(code)
        }
    }
}
