use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("density is negative beyond tolerance (negative mass {mass:.3e}, minimum {min:.3e})")]
    Negativity { mass: f64, min: f64 },

    #[error("imaginary residue {residue:.3e} exceeds {limit:.1e} (relative to peak)")]
    NumericalIntegrity { residue: f64, limit: f64 },

    #[error("|F - forecast mean| reaches {excess:.4} on the forecast range, above the bound {bound:.4}")]
    BoundViolation { excess: f64, bound: f64 },

    #[error("protocol violation by {player} in round {round}: {reason}")]
    ProtocolViolation {
        player: &'static str,
        round: usize,
        reason: String,
    },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
