use std::path::PathBuf;

use hoiem::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: hoiem::Error,
    },
    #[error("writing {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;
pub const EXIT_NUMERIC: u8 = 5;
pub const EXIT_OUTPUT: u8 = 6;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Stage { source, .. } => match source.kind() {
                ErrorKind::Input | ErrorKind::Validation => EXIT_VALIDATION,
                ErrorKind::Numeric => EXIT_NUMERIC,
            },
            CliError::Output { .. } => EXIT_OUTPUT,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attach the pipeline stage to a core error.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> StageExt<T> for hoiem::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}
