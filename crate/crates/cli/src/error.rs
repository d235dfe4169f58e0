use floquet_sense::SenseError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{message}")]
    Config { message: String, keys: Vec<String> },

    #[error("numerical failure: {0}")]
    Numerical(SenseError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed table: {0}")]
    Table(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Library parameter names mapped to configuration keys.
fn config_key(key: &str) -> String {
    match key {
        "J" => "model.j",
        "h0" => "model.h0",
        "h1" => "model.h1",
        "tau" => "model.tau",
        "N" => "model.n",
        "w" => "model.w",
        "alpha" => "model.alpha",
        "L" => "block.l",
        other => other,
    }
    .to_string()
}

impl From<SenseError> for CliError {
    fn from(e: SenseError) -> Self {
        match e {
            SenseError::InvalidParams(v) => {
                let mut keys: Vec<String> = v.iter().map(|x| config_key(x.key)).collect();
                keys.dedup();
                CliError::Config {
                    message: SenseError::InvalidParams(v).to_string(),
                    keys,
                }
            }
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn config(message: impl Into<String>, keys: &[&str]) -> Self {
        CliError::Config {
            message: message.into(),
            keys: keys.iter().map(|k| k.to_string()).collect(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "invalid_config",
            CliError::Numerical(_) => "numerical_failure",
            CliError::Io { .. } => "io",
            CliError::Table(_) => "malformed_table",
            CliError::SchemaMismatch(_) => "schema_mismatch",
        }
    }

    pub fn exit_status(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            code: self.code(),
            message: self.to_string(),
            offending_keys: match self {
                CliError::Config { keys, .. } => keys.clone(),
                _ => vec![],
            },
        }
    }
}

/// Machine-readable error written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub code: &'static str,
    pub message: String,
    pub offending_keys: Vec<String>,
}
