//! Error classification and process exit codes.

use std::fmt;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Other,
    Ingest,
    Config,
    Degenerate,
    Numerical,
}

impl Kind {
    /// 0 success, 2 usage (from clap), 3 ingest, 4 config, 5 degenerate
    /// estimate, 6 numerical failure, 1 anything else.
    pub fn code(self) -> u8 {
        match self {
            Kind::Other => 1,
            Kind::Ingest => 3,
            Kind::Config => 4,
            Kind::Degenerate => 5,
            Kind::Numerical => 6,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(kind: Kind, error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind,
            error: error.into(),
        }
    }

    pub fn ingest(msg: impl fmt::Display) -> Self {
        Self::new(Kind::Ingest, anyhow::anyhow!("{msg}"))
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        Self::new(Kind::Config, anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind.code())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<maxspec::Error> for Failure {
    fn from(e: maxspec::Error) -> Self {
        use maxspec::Error as E;
        let kind = match &e {
            E::NonPositive { .. } | E::InsufficientData(_) => Kind::Ingest,
            E::Domain(_) | E::Range(_) | E::Config(_) | E::TableFormat { .. } => Kind::Config,
            E::Degenerate { .. } => Kind::Degenerate,
            E::Covariance(_) | E::Integration { .. } => Kind::Numerical,
        };
        Self::new(kind, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(Kind::Other, e)
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;
