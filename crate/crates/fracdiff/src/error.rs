use std::fmt::Display;

use serde_json::json;

/// Exit status `1`: the command line or configuration is unusable.
pub const EXIT_USAGE: u8 = 1;
/// Exit status `2`: a numerical routine rejected its input or failed.
pub const EXIT_NUMERIC: u8 = 2;
/// Exit status `3`: `solve` stopped on a non-finite field.
pub const EXIT_INSTABILITY: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Parse {
        key: Option<String>,
        message: String,
    },
    #[error(transparent)]
    Numeric(#[from] fracdiff_core::Error),
    #[error("non-finite field at step {step} (t = {time})")]
    Instability { step: usize, time: f64 },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn parse(key: &str, message: impl Display) -> Self {
        CliError::Parse {
            key: Some(key.to_string()),
            message: format!("{key}: {message}"),
        }
    }

    pub fn io(context: impl Display, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } | CliError::Io { .. } => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Instability { .. } => EXIT_INSTABILITY,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Numeric(_) => "numeric",
            CliError::Instability { .. } => "instability",
            CliError::Io { .. } => "io",
        }
    }

    /// Single-line JSON error record for stderr.
    pub fn record(&self) -> String {
        let mut rec = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string().replace('\n', " "),
        });
        match self {
            CliError::Parse { key: Some(key), .. } => rec["key"] = json!(key),
            CliError::Instability { step, time } => {
                rec["step"] = json!(step);
                rec["t"] = json!(time);
            }
            _ => {}
        }
        rec.to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
