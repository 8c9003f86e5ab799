use std::process::ExitCode;

use quasilocal::Error;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Validation,
    CapExceeded,
    Disagreement,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Validation => 1,
            Kind::CapExceeded => 2,
            Kind::Disagreement => 3,
        }
    }
}

/// Printed to stderr as a single JSON object.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub error: Kind,
    pub exit_code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self {
            error: kind,
            exit_code: kind.code(),
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(Kind::Validation, message)
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", serde_json::to_string(self).expect("error serialization"));
        ExitCode::from(self.exit_code)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::CapExceeded { .. } => Kind::CapExceeded,
            _ => Kind::Validation,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::validation(format!("i/o: {e}"))
    }
}
