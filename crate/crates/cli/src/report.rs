use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value as Json;
use sha2::{Digest, Sha256};

use flagval::{Error, ParseError};

pub const EXIT_CERTIFIED: u8 = 0;
pub const EXIT_REFUTED: u8 = 10;
pub const EXIT_EXCEPTIONAL: u8 = 11;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

/// Why a command produced no report.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Engine(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
            _ => EXIT_INPUT,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// A file read once, with its digest.
pub struct Input {
    pub text: String,
    pub digest: InputDigest,
}

impl Input {
    pub fn read(path: &Path) -> Result<Input, Failure> {
        let bytes = std::fs::read(path).map_err(|source| Failure::Read { path: path.into(), source })?;
        let sha256 = hex::encode(Sha256::digest(&bytes));
        let text = String::from_utf8(bytes)
            .map_err(|e| Failure::Parse { path: path.into(), source: ParseError::invalid(format!("not UTF-8: {e}")) })?;
        Ok(Input { text, digest: InputDigest { path: path.display().to_string(), sha256 } })
    }

    pub fn parse<T>(&self, parse: impl Fn(&str) -> Result<T, ParseError>) -> Result<T, Failure> {
        parse(&self.text).map_err(|source| Failure::Parse { path: self.digest.path.clone().into(), source })
    }
}

/// Everything a command writes to stdout. Field order is fixed.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub command: String,
    pub options: Json,
    pub inputs: Vec<InputDigest>,
    pub kind: String,
    pub exit_code: u8,
    pub result: Json,
    pub tool_version: &'static str,
    pub wall_time_ms: u64,
}

/// What a command hands back before the envelope is added.
pub struct Outcome {
    pub kind: String,
    pub exit_code: u8,
    pub result: Json,
    pub summary: String,
}

impl Outcome {
    pub fn new(kind: impl Into<String>, exit_code: u8, result: impl Serialize, summary: impl Into<String>) -> Outcome {
        Outcome { kind: kind.into(), exit_code, result: serde_json::to_value(result).expect("results serialize"), summary: summary.into() }
    }
}
