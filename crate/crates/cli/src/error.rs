use std::fmt;

#[derive(Debug)]
pub enum LabError {
    Core(feller_core::CoreError),
    Mc(feller_mc::McError),
    Config(crate::config::ConfigError),
    UnknownExperiment(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Core(e) => write!(f, "{e}"),
            LabError::Mc(e) => write!(f, "{e}"),
            LabError::Config(e) => write!(f, "{e}"),
            LabError::UnknownExperiment(name) => {
                write!(f, "unknown experiment `{name}` (see the `list` subcommand)")
            }
            LabError::Io(e) => write!(f, "io error: {e}"),
            LabError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<feller_core::CoreError> for LabError {
    fn from(e: feller_core::CoreError) -> Self {
        LabError::Core(e)
    }
}

impl From<feller_mc::McError> for LabError {
    fn from(e: feller_mc::McError) -> Self {
        LabError::Mc(e)
    }
}

impl From<crate::config::ConfigError> for LabError {
    fn from(e: crate::config::ConfigError) -> Self {
        LabError::Config(e)
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e)
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Json(e)
    }
}
