use thiserror::Error;

use crate::channel::ConfigViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Fewer independent rows than required for the requested null space.
    #[error("rank deficient: detected rank {rank}, required {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("singular matrix (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("invalid configuration: {}", join_violations(.0))]
    Config(Vec<ConfigViolation>),

    /// A closed form evaluated outside the region where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ensemble failed: {0}")]
    Ensemble(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[ConfigViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Process exit code used by the `secmimo` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::Domain(_)
            | Error::InvalidArgument(_) => 2,
            Error::Io(_) => 2,
            Error::RankDeficient { .. } | Error::Singular { .. } | Error::Ensemble(_) => 4,
        }
    }
}
