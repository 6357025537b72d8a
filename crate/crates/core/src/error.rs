use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A configuration problem, optionally tied to a key path and source line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { key: None, line: None, message: message.into() }
    }

    /// Prefixes the key path. Nested callers build `model.arrival` and so on.
    pub fn at(mut self, key: &str) -> Self {
        self.key = Some(match self.key.take() {
            Some(inner) => format!("{key}.{inner}"),
            None => key.to_owned(),
        });
        self
    }

    pub fn on_line(mut self, line: usize) -> Self {
        self.line = Some(line);
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Internal kernel diagnostics. Any of these halts the replication.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("event scheduled into the past: t={time} < clock={clock}")]
    ScheduleInPast { time: f64, clock: f64 },
    #[error("event time is not a number")]
    NanTime,
    #[error("order {order} released resource {resource} it does not hold")]
    NotHeld { resource: String, order: u64 },
    #[error("order {order} already holds resource {resource}")]
    AlreadyHolding { resource: String, order: u64 },
    #[error("resource {resource} has no free unit")]
    NoFreeUnit { resource: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("paired series differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("denominator series has zero variance")]
    ZeroVariance,
    #[error("{0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: line {line}: {message}")]
    Format { path: PathBuf, line: usize, message: String },
    #[error("{path}: footer does not match rows ({field})")]
    FooterMismatch { path: PathBuf, field: String },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("configuration error: {path}: {source}")]
    ConfigFile { path: PathBuf, source: ConfigError },
    #[error("simulation error: {0}")]
    Sim(#[from] SimError),
    #[error("statistics error: {0}")]
    Stats(#[from] StatsError),
    #[error("archive error: {0}")]
    Archive(#[from] ArchiveError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("runtime error: {0}")]
    Runtime(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
