use koopman_core::{KoopmanError, Stage};

/// Failure classes, one exit code each.
#[derive(Debug)]
pub enum CliError {
    /// Bad config, unknown method or system.
    Config(String),
    /// Unreadable or malformed data, dimension mismatch, corrupt model.
    Data(String),
    /// Regression could not produce a model.
    Regression(String),
    /// Output could not be written.
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Regression(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Regression(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<KoopmanError> for CliError {
    fn from(e: KoopmanError) -> Self {
        let msg = e.to_string();
        match e.root() {
            KoopmanError::NoTrajectories
            | KoopmanError::TrajectoryTooShort { .. }
            | KoopmanError::InvalidDataset(_)
            | KoopmanError::DimensionMismatch { .. }
            | KoopmanError::NonFiniteObservable { .. }
            | KoopmanError::NonFiniteState { .. } => CliError::Data(msg),
            KoopmanError::AllBelowCutoff | KoopmanError::SingularGram | KoopmanError::Numerical(_) => {
                CliError::Regression(msg)
            }
            KoopmanError::InvalidParameter(_) if e.stage() == Some(Stage::Regression) => CliError::Regression(msg),
            KoopmanError::InvalidParameter(_) | KoopmanError::UnknownSystem(_) => CliError::Config(msg),
            KoopmanError::Serialization(_) => CliError::Data(msg),
            KoopmanError::Stage { .. } => CliError::Data(msg),
        }
    }
}
