pub mod benchmarks;
pub mod differentiation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod observables;
pub mod pipeline;
pub mod regression;
pub mod types;

pub use error::{KoopmanError, Result, Stage};
pub use types::{build_snapshot_pairs, validate_dataset, Finding, FindingKind, SnapshotPairs, TrajectoryDataset};

pub use nalgebra;
pub use num_complex;
