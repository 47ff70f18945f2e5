//! Experiment configuration: a TOML file with sections, every key optional.
//!
//! ```toml
//! seed = 7
//! out = "out"
//!
//! [grid]
//! x_min = -12.0
//! x_max = 12.0
//! n_points = 1024
//! hbar = 1.0
//!
//! [state]
//! fixture = "fock:1"
//!
//! [quadrature]
//! a = 0.6
//! b = 0.8
//!
//! [verify]
//! states = ["fock:0", "fock:1"]
//! directions = 12
//!
//! [protocol]
//! id = 2
//! rounds = 2000
//! experimenter = { states = ["fock:1"], quads = [{ a = 1.0, b = 0.0 }] }
//! forecaster = { kind = "claim", state = "fock:0" }
//! skeptic = { kind = "lln", statistic = "square", bound = "auto", depth = 8 }
//! reality = { kind = "faithful" }
//! ```

use std::path::{Path, PathBuf};

use quasiprob::protocol::{
    Bound, ForecasterSpec, ProtocolSetup, RealitySpec, Schedule, SkepticSpec, Statistic,
};
use quasiprob::{Fixture, Grid1D, QuadratureSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub grid: GridConfig,
    pub state: StateConfig,
    pub quadrature: QuadratureConfig,
    pub verify: VerifyConfig,
    pub protocol: ProtocolConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub hbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateConfig {
    pub fixture: Fixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// States to check; empty means the `[state]` fixture.
    pub states: Vec<Fixture>,
    /// Number of evenly spaced directions, used when `quads` is empty.
    pub directions: usize,
    pub quads: Vec<QuadratureSpec>,
    pub tolerance: f64,
    /// Flip the sign of the Wigner function on `[x0, x1] x [p0, p1]` before
    /// checking.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrupt_region: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// 1: forecasts per observable; 2: phase-space forecasts.
    pub id: u8,
    pub rounds: usize,
    pub runs: usize,
    pub experimenter: Schedule,
    pub forecaster: ForecasterSpec,
    pub skeptic: SkepticSpec,
    pub reality: RealitySpec,
    /// Statistic for the discrepancy series.
    pub discrepancy: Statistic,
    /// Write one transcript per run instead of only the first.
    pub all_transcripts: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            grid: GridConfig::default(),
            state: StateConfig::default(),
            quadrature: QuadratureConfig::default(),
            verify: VerifyConfig::default(),
            protocol: ProtocolConfig::default(),
        }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -12.0,
            x_max: 12.0,
            n_points: 1024,
            hbar: 1.0,
        }
    }
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            fixture: Fixture::Fock { n: 0 },
        }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { a: 1.0, b: 0.0 }
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            states: Vec::new(),
            directions: 12,
            quads: Vec::new(),
            tolerance: 1e-3,
            corrupt_region: None,
        }
    }
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            id: 1,
            rounds: 100,
            runs: 1,
            experimenter: Schedule {
                states: vec![Fixture::Fock { n: 0 }],
                quads: vec![QuadratureSpec { a: 1.0, b: 0.0 }],
            },
            forecaster: ForecasterSpec::Honest,
            skeptic: SkepticSpec::Lln {
                statistic: Statistic::Identity,
                bound: Bound::Auto,
                depth: 8,
            },
            reality: RealitySpec::Faithful,
            discrepancy: Statistic::Identity,
            all_transcripts: false,
        }
    }
}

fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(config_error)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(config_error)
    }

    /// Reads `path`, or the defaults when `path` is `None`, then applies
    /// `key=value` overrides (dotted keys, TOML values).
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut doc: toml::Table = text.parse().map_err(config_error)?;
        for item in overrides {
            apply_override(&mut doc, item)?;
        }
        let cfg: Self = toml::Value::Table(doc).try_into().map_err(config_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seed > i64::MAX as u64 {
            return Err(CliError::Config(format!("seed {} exceeds 2^63 - 1", self.seed)));
        }
        self.grid()?;
        if !(self.grid.hbar > 0.0 && self.grid.hbar.is_finite()) {
            return Err(CliError::Config(format!("hbar must be positive, got {}", self.grid.hbar)));
        }
        QuadratureSpec::new(self.quadrature.a, self.quadrature.b).map_err(config_error)?;
        for q in &self.verify.quads {
            q.validate().map_err(config_error)?;
        }
        if self.verify.quads.is_empty() && self.verify.directions == 0 {
            return Err(CliError::Config("verify needs at least one direction".into()));
        }
        if !(self.verify.tolerance > 0.0) {
            return Err(CliError::Config("verify tolerance must be positive".into()));
        }
        if self.protocol.runs == 0 {
            return Err(CliError::Config("protocol runs must be at least 1".into()));
        }
        self.setup().validate().map_err(config_error)
    }

    pub fn grid(&self) -> Result<Grid1D, CliError> {
        Grid1D::new(self.grid.x_min, self.grid.x_max, self.grid.n_points).map_err(config_error)
    }

    pub fn setup(&self) -> ProtocolSetup {
        let p = &self.protocol;
        ProtocolSetup {
            protocol: p.id,
            rounds: p.rounds,
            experimenter: p.experimenter.clone(),
            forecaster: p.forecaster.clone(),
            skeptic: p.skeptic.clone(),
            reality: p.reality.clone(),
        }
    }

    /// The sweep for `verify`.
    pub fn verify_quads(&self) -> Vec<QuadratureSpec> {
        if self.verify.quads.is_empty() {
            QuadratureSpec::sweep(self.verify.directions)
        } else {
            self.verify.quads.clone()
        }
    }

    pub fn verify_states(&self) -> Vec<Fixture> {
        if self.verify.states.is_empty() {
            vec![self.state.fixture]
        } else {
            self.verify.states.clone()
        }
    }
}

/// `a.b.c=value`; the value is parsed as TOML, falling back to a string.
fn apply_override(doc: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {item:?} is not key=value")))?;
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields one part");
    let mut table = doc;
    for part in path {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("{key}: {part} is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
