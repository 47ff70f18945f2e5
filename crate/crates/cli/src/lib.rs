//! `quasiprob` command line: build states, compute Wigner functions and
//! quadrature densities, cross-check them, and run testing protocols.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 for bad
//! configuration or input.

// `!(x > 0.0)` rejects NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Verification(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) => write!(f, "error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<quasiprob::Error> for CliError {
    fn from(e: quasiprob::Error) -> Self {
        use quasiprob::Error as E;
        match e {
            E::Io(m) => CliError::Io(m),
            E::Invariant(_) | E::Negativity { .. } | E::NumericalIntegrity { .. } => {
                CliError::Verification(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "quasiprob", version, about = "Wigner functions, quadratures and testing protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the wavefunction of the configured state.
    State {
        #[command(flatten)]
        common: Common,
    },
    /// Compute the Wigner function and its summary.
    Wigner {
        #[command(flatten)]
        common: Common,
    },
    /// Density of z = a x + b p by both routes.
    Quadrature {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        b: Option<f64>,
    },
    /// Compare Wigner images with spectral quadrature densities over a sweep.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Check every catalog state.
        #[arg(long)]
        catalog: bool,
        #[arg(long)]
        directions: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Flip the sign of W on a box, given as x0,x1,p0,p1.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_region)]
        corrupt_region: Option<[f64; 4]>,
    },
    /// Run a testing protocol, possibly many times.
    Protocol {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        protocol: Option<u8>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        runs: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fixture such as gauss:0,0,1, fock:2, fock-cat:0,1 or gauss-cat:2,0.7.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Any configuration key, as section.key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

fn parse_region(s: &str) -> Result<[f64; 4], String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 4 values, got {}", v.len()))
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut o = self.set.clone();
        if let Some(v) = self.seed {
            o.push(format!("seed={v}"));
        }
        if let Some(v) = &self.out {
            o.push(format!("out={}", quoted(&v.to_string_lossy())));
        }
        if let Some(v) = &self.state {
            o.push(format!("state.fixture={}", quoted(v)));
        }
        if let Some(v) = self.x_min {
            o.push(format!("grid.x_min={v:?}"));
        }
        if let Some(v) = self.x_max {
            o.push(format!("grid.x_max={v:?}"));
        }
        if let Some(v) = self.points {
            o.push(format!("grid.n_points={v}"));
        }
        if let Some(v) = self.hbar {
            o.push(format!("grid.hbar={v:?}"));
        }
        o
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::State { common } => commands::cmd_state(&load(&common, vec![])?),
        Command::Wigner { common } => commands::cmd_wigner(&load(&common, vec![])?),
        Command::Quadrature { common, a, b } => {
            let mut o = vec![];
            if let Some(a) = a {
                o.push(format!("quadrature.a={a:?}"));
            }
            if let Some(b) = b {
                o.push(format!("quadrature.b={b:?}"));
            }
            commands::cmd_quadrature(&load(&common, o)?)
        }
        Command::Verify {
            common,
            catalog,
            directions,
            tolerance,
            corrupt_region,
        } => {
            let mut o = vec![];
            if catalog {
                let names: Vec<String> = quasiprob::Fixture::catalog()
                    .iter()
                    .map(|f| quoted(&f.to_string()))
                    .collect();
                o.push(format!("verify.states=[{}]", names.join(", ")));
            }
            if let Some(d) = directions {
                o.push(format!("verify.directions={d}"));
                o.push("verify.quads=[]".into());
            }
            if let Some(t) = tolerance {
                o.push(format!("verify.tolerance={t:?}"));
            }
            if let Some(r) = corrupt_region {
                let r: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
                o.push(format!("verify.corrupt_region=[{}]", r.join(", ")));
            }
            commands::cmd_verify(&load(&common, o)?)
        }
        Command::Protocol {
            common,
            protocol,
            rounds,
            runs,
        } => {
            let mut o = vec![];
            if let Some(p) = protocol {
                o.push(format!("protocol.id={p}"));
            }
            if let Some(n) = rounds {
                o.push(format!("protocol.rounds={n}"));
            }
            if let Some(n) = runs {
                o.push(format!("protocol.runs={n}"));
            }
            commands::cmd_protocol(&load(&common, o)?)
        }
    }
}

fn load(common: &Common, specific: Vec<String>) -> Result<ExperimentConfig, CliError> {
    let mut o = common.overrides();
    o.extend(specific);
    ExperimentConfig::load(common.config.as_deref(), &o)
}
