//! Error type shared by every module of the toolkit.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The three encoding channels of a material pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Electrical,
    Magnetic,
    Surface,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Electrical => "electrical",
            Channel::Magnetic => "magnetic",
            Channel::Surface => "surface",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where a model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{channel} capacity {available} < {needed} required states")]
    Capacity {
        channel: Channel,
        needed: usize,
        available: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("value {target} outside calibrated range: extrapolation refused")]
    Extrapolation { target: f64 },

    #[error("unreachable state: target {target:e} not covered by table, nearest achievable {nearest:e}")]
    Unreachable { target: f64, nearest: f64 },

    #[error("training error: {0}")]
    Training(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{channel} channel: {source}")]
    Channel {
        channel: Channel,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// CSV failures become line-numbered parse errors when the reader knows the line.
    pub(crate) fn csv_at(err: csv::Error) -> Self {
        match err.position() {
            Some(pos) => Error::Parse {
                line: pos.line(),
                message: err.to_string(),
            },
            None => Error::Csv(err),
        }
    }

    /// Tags an error with the channel it came from.
    pub fn on(self, channel: Channel) -> Self {
        match self {
            e @ Error::Channel { .. } => e,
            e => Error::Channel {
                channel,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, looking through channel tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Channel { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
