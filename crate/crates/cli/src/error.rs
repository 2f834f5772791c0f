use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        source: spinfluid_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("blow-up guard tripped at t = {t}")]
    BlowUp { t: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 1,
            CliError::BlowUp { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Attaches context to core errors. Errors that can only stem from the
/// scenario's values are configuration errors.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, spinfluid_core::Error> {
    fn context(self, what: &str) -> Result<T, CliError> {
        use spinfluid_core::Error as E;
        self.map_err(|source| match source {
            E::InvalidParameter(_) | E::InconsistentInertia { .. } | E::DimensionMismatch { .. } => {
                CliError::Config(format!("{what}: {source}"))
            }
            source => CliError::Numerical {
                context: what.to_string(),
                source,
            },
        })
    }
}
