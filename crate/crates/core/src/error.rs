use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by parsing, validation and the numeric routines.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    /// A column required by the active [`crate::ColumnMapping`] is absent from the header.
    #[error("schema error: missing column '{column}'")]
    MissingColumn { column: String },

    /// A data row could not be interpreted; `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("line {line}: duplicate timestamp {timestamp}")]
    DuplicateTimestamp { line: u64, timestamp: String },

    #[error("table for station '{station_id}' is empty")]
    EmptyTable { station_id: String },

    #[error("station '{station_id}' has no valid observation to impute from")]
    AllMissing { station_id: String },

    #[error("invalid {what}: {message}")]
    Invalid { what: &'static str, message: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, message: impl fmt::Display) -> Self {
        Error::Invalid {
            what,
            message: message.to_string(),
        }
    }

    pub(crate) fn row(line: u64, message: impl fmt::Display) -> Self {
        Error::Row {
            line,
            message: message.to_string(),
        }
    }
}
