use std::fmt;
use std::path::Path;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitKind {
    /// Schema violation or invalid physical input.
    Config,
    /// A numerical routine failed.
    Numerical,
    /// Output could not be written.
    Io,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Config => 2,
            ExitKind::Numerical => 3,
            ExitKind::Io => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ExitKind,
    /// Config key or file the error refers to.
    pub path: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn config(path: &str, message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Config,
            path: (!path.is_empty()).then(|| path.to_string()),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            kind: ExitKind::Io,
            path: Some(path.display().to_string()),
            message: err.to_string(),
        }
    }

    /// Library errors, tagged with the config section they came from.
    pub fn model(section: &str, err: fluxsense::Error) -> Self {
        let kind = if err.is_numerical() {
            ExitKind::Numerical
        } else {
            ExitKind::Config
        };
        let path = match &err {
            fluxsense::Error::Parameter { name, .. } => format!("{section}.{name}"),
            _ => section.to_string(),
        };
        Self {
            kind,
            path: (!path.is_empty()).then_some(path),
            message: err.to_string(),
        }
    }

    /// The machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a CliError,
            exit_code: i32,
        }
        serde_json::to_string(&Report {
            error: self,
            exit_code: self.kind.code(),
        })
        .expect("error report serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Attach a config section to library results.
pub trait Context<T> {
    fn section(self, section: &str) -> CliResult<T>;
}

impl<T> Context<T> for fluxsense::Result<T> {
    fn section(self, section: &str) -> CliResult<T> {
        self.map_err(|e| CliError::model(section, e))
    }
}
