use thiserror::Error;

/// Errors raised by the identification pipeline.
#[derive(Debug, Error)]
pub enum KoopmanError {
    #[error("no trajectories")]
    NoTrajectories,
    #[error("trajectory too short: trajectory {index} has {len} samples, need at least {min}")]
    TrajectoryTooShort { index: usize, len: usize, min: usize },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("custom observable {index} returned a non-finite value")]
    NonFiniteObservable { index: usize },
    #[error("all singular values below cutoff")]
    AllBelowCutoff,
    #[error("singular Gram matrix: increase reg_eps or lower the rank")]
    SingularGram,
    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unknown system: {0}")]
    UnknownSystem(String),
    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<KoopmanError>,
    },
    #[error("serialization: {0}")]
    Serialization(String),
}

/// Pipeline stage a nested error originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Lifting,
    Regression,
    Reconstruction,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Lifting => "lifting",
            Stage::Regression => "regression",
            Stage::Reconstruction => "reconstruction",
        })
    }
}

impl KoopmanError {
    pub(crate) fn at(self, stage: Stage) -> Self {
        KoopmanError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage labels stripped.
    pub fn root(&self) -> &KoopmanError {
        match self {
            KoopmanError::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            KoopmanError::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, KoopmanError>;
