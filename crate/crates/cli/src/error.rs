use std::fmt;

use shapekin::dump::DumpError;
use shapekin::KinError;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid configuration, missing input files: exit 2.
    Config(String),
    /// Numerical failure during a run: exit 3.
    Numeric(String),
    /// Incompatible input strain field: exit 4.
    Incompatible(String),
    /// Output could not be written: exit 1.
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Incompatible(_) => 4,
        }
    }

    /// Errors raised while turning the config into library inputs.
    pub fn setup(at: &str) -> impl Fn(KinError) -> CliError + '_ {
        move |e| CliError::Config(format!("{at}: {e}"))
    }
}

impl From<KinError> for CliError {
    fn from(e: KinError) -> Self {
        match e {
            KinError::IncompatibleField(_) => CliError::Incompatible(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Incompatible(m) => write!(f, "incompatible input: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

/// Dump errors while reading inputs are configuration problems.
pub fn input(at: &str) -> impl Fn(DumpError) -> CliError + '_ {
    move |e| match e {
        DumpError::Kin(k) => CliError::Config(format!("{at}: {k}")),
        other => CliError::Config(format!("{at}: {other}")),
    }
}

pub fn output(e: DumpError) -> CliError {
    match e {
        DumpError::Kin(k) => k.into(),
        other => CliError::Output(other.to_string()),
    }
}
