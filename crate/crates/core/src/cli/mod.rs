//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when output cannot be written, 2 for
//! configuration or parse errors, 3 for numerical failures.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "susylab", version, about = "Spectra, charges and superselection for 1D supersymmetric quantum mechanics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve both partners; write spectrum.csv and spectrum.json
    Spectrum(Common),
    /// Match the partner spectra; write pairing.json
    Pair(Common),
    /// Decide whether supersymmetry is broken; write classification.json
    Classify(Common),
    /// Schmidt analysis of a spin-position state; write entangle.json
    Entangle(EntangleArgs),
    /// Audit observables against the parity operator; write superselect.json
    Superselect(SuperselectArgs),
    /// Jaynes-Cummings superselection counterexample; write jc_demo.json
    JcDemo(JcArgs),
    /// Nilpotency and closure of the charge algebra; write algebra.json
    CheckAlgebra(Common),
}

#[derive(Debug, Args)]
struct Base {
    /// Flat key = value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Common {
    #[command(flatten)]
    base: Base,
    /// Superpotential W(q)
    #[arg(long = "W", value_name = "EXPR", allow_hyphen_values = true)]
    w: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    qmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    qmax: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    n: Option<usize>,
    /// naive or susy-exact
    #[arg(long)]
    mode: Option<String>,
    /// Eigenpairs per partner
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "tol-pair")]
    tol_pair: Option<f64>,
    #[arg(long = "tol-zero")]
    tol_zero: Option<f64>,
}

#[derive(Debug, Args)]
struct EntangleArgs {
    #[command(flatten)]
    common: Common,
    /// doublet:N, sector:+1|-1:N or weights:WU:WD[:N]; N is a spectrum.csv row
    #[arg(long)]
    state: Option<String>,
    #[arg(long = "tol-product")]
    tol_product: Option<f64>,
}

#[derive(Debug, Args)]
struct SuperselectArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated catalog entries: hamiltonian, position, momentum,
    /// sigma3, yukawa:G, jc:G, poly:EXPR
    #[arg(long, allow_hyphen_values = true)]
    observables: Option<String>,
    /// Permit observables that are odd in the spin variables
    #[arg(long = "allow-odd")]
    allow_odd: bool,
    /// Oscillator frequency of the ladder used by yukawa and jc
    #[arg(long)]
    omega: Option<f64>,
}

#[derive(Debug, Args)]
struct JcArgs {
    #[command(flatten)]
    base: Base,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<f64>,
    /// Fock truncation
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
}

fn load(base: &Base) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &base.config {
        cfg.apply_file(path).map_err(|e| CliError::Config(e.0))?;
    }
    if let Some(out) = &base.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn set(cfg: &mut RunConfig, key: &str, value: Option<String>) -> Result<(), CliError> {
    match value {
        Some(v) => cfg.set(key, &v).map_err(|e| CliError::Config(e.0)),
        None => Ok(()),
    }
}

fn apply_common(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = load(&c.base)?;
    set(&mut cfg, "W", c.w.clone())?;
    set(&mut cfg, "mode", c.mode.clone())?;
    if let Some(v) = c.qmin {
        cfg.q_min = v;
    }
    if let Some(v) = c.qmax {
        cfg.q_max = v;
    }
    if let Some(v) = c.n {
        cfg.n = v;
    }
    if let Some(v) = c.k {
        cfg.k = v;
    }
    if let Some(v) = c.tol_pair {
        cfg.tol_pair = v;
    }
    if let Some(v) = c.tol_zero {
        cfg.tol_zero = v;
    }
    Ok(cfg)
}

fn resolve(command: &Command) -> Result<RunConfig, CliError> {
    let cfg = match command {
        Command::Spectrum(c) | Command::Pair(c) | Command::Classify(c) | Command::CheckAlgebra(c) => {
            apply_common(c)?
        }
        Command::Entangle(e) => {
            let mut cfg = apply_common(&e.common)?;
            set(&mut cfg, "state", e.state.clone())?;
            if let Some(v) = e.tol_product {
                cfg.tol_product = v;
            }
            cfg
        }
        Command::Superselect(s) => {
            let mut cfg = apply_common(&s.common)?;
            set(&mut cfg, "observables", s.observables.clone())?;
            if s.allow_odd {
                cfg.allow_odd = true;
            }
            if let Some(v) = s.omega {
                cfg.omega = v;
            }
            cfg
        }
        Command::JcDemo(j) => {
            let mut cfg = load(&j.base)?;
            if let Some(v) = j.g {
                cfg.g = v;
            }
            if let Some(v) = j.m {
                cfg.truncation = v;
            }
            if let Some(v) = j.omega {
                cfg.omega = v;
            }
            cfg
        }
    };
    cfg.validate().map_err(|e| CliError::Config(e.0))?;
    Ok(cfg)
}

fn execute(command: &Command) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve(command)?;
    match command {
        Command::Spectrum(_) => commands::cmd_spectrum(&cfg),
        Command::Pair(_) => commands::cmd_pair(&cfg),
        Command::Classify(_) => commands::cmd_classify(&cfg),
        Command::Entangle(_) => commands::cmd_entangle(&cfg),
        Command::Superselect(_) => commands::cmd_superselect(&cfg),
        Command::JcDemo(_) => commands::cmd_jc_demo(&cfg),
        Command::CheckAlgebra(_) => commands::cmd_check_algebra(&cfg),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
