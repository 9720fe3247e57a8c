//! Trajectory containers and snapshot-pair assembly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{KoopmanError, Result};

/// Category of a diagnostic finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    NonFinite,
    ZeroVariance,
    InputMisaligned,
    RankDeficient,
    Defective,
    BranchCut,
    ZeroEigenvalue,
    ZeroNorm,
}

/// A non-fatal diagnostic attached to a dataset or a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub message: String,
}

impl Finding {
    pub fn new(kind: FindingKind, message: impl Into<String>) -> Self {
        Finding {
            kind,
            trajectory: None,
            row: None,
            column: None,
            message: message.into(),
        }
    }

    pub fn with_trajectory(mut self, t: usize) -> Self {
        self.trajectory = Some(t);
        self
    }

    pub fn with_row(mut self, r: usize) -> Self {
        self.row = Some(r);
        self
    }

    pub fn with_column(mut self, c: usize) -> Self {
        self.column = Some(c);
        self
    }
}

/// Uniformly sampled trajectories, one row per sample.
#[derive(Debug, Clone)]
pub struct TrajectoryDataset {
    trajectories: Vec<DMatrix<f64>>,
    inputs: Option<Vec<DMatrix<f64>>>,
    dt: f64,
}

impl TrajectoryDataset {
    /// Unforced dataset. Every trajectory must share the same state dimension.
    pub fn new(trajectories: Vec<DMatrix<f64>>, dt: f64) -> Result<Self> {
        Self::build(trajectories, None, dt)
    }

    /// Dataset with one input matrix per trajectory.
    pub fn with_inputs(trajectories: Vec<DMatrix<f64>>, inputs: Vec<DMatrix<f64>>, dt: f64) -> Result<Self> {
        Self::build(trajectories, Some(inputs), dt)
    }

    fn build(trajectories: Vec<DMatrix<f64>>, inputs: Option<Vec<DMatrix<f64>>>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(KoopmanError::InvalidDataset(format!("dt must be positive, got {dt}")));
        }
        if let Some(first) = trajectories.first() {
            let n = first.ncols();
            if n == 0 {
                return Err(KoopmanError::InvalidDataset("state dimension must be at least 1".into()));
            }
            for (i, t) in trajectories.iter().enumerate() {
                if t.ncols() != n {
                    return Err(KoopmanError::InvalidDataset(format!(
                        "trajectory {i} has {} state columns, expected {n}",
                        t.ncols()
                    )));
                }
            }
        }
        if let Some(inp) = &inputs {
            if inp.len() != trajectories.len() {
                return Err(KoopmanError::InvalidDataset(format!(
                    "{} input matrices for {} trajectories",
                    inp.len(),
                    trajectories.len()
                )));
            }
            if let Some(q) = inp.first().map(|u| u.ncols()) {
                if inp.iter().any(|u| u.ncols() != q) {
                    return Err(KoopmanError::InvalidDataset("input matrices differ in channel count".into()));
                }
            }
        }
        Ok(TrajectoryDataset {
            trajectories,
            inputs,
            dt,
        })
    }

    pub fn trajectories(&self) -> &[DMatrix<f64>] {
        &self.trajectories
    }

    pub fn inputs(&self) -> Option<&[DMatrix<f64>]> {
        self.inputs.as_deref()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// State dimension, 0 for an empty dataset.
    pub fn n_states(&self) -> usize {
        self.trajectories.first().map_or(0, |t| t.ncols())
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs
            .as_ref()
            .and_then(|i| i.first())
            .map_or(0, |u| u.ncols())
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Checks shared by every consumer: non-empty, at least `min_len` samples
    /// per trajectory, inputs row-aligned.
    pub(crate) fn check_lengths(&self, min_len: usize) -> Result<()> {
        if self.trajectories.is_empty() {
            return Err(KoopmanError::NoTrajectories);
        }
        for (index, t) in self.trajectories.iter().enumerate() {
            if t.nrows() < min_len {
                return Err(KoopmanError::TrajectoryTooShort {
                    index,
                    len: t.nrows(),
                    min: min_len,
                });
            }
        }
        if let Some(inputs) = &self.inputs {
            for (i, (t, u)) in self.trajectories.iter().zip(inputs).enumerate() {
                if t.nrows() != u.nrows() {
                    return Err(KoopmanError::InvalidDataset(format!(
                        "input matrix {i} has {} rows, trajectory has {}",
                        u.nrows(),
                        t.nrows()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Column-per-snapshot data matrices `X`, `X'` and optional inputs `U`.
#[derive(Debug, Clone)]
pub struct SnapshotPairs {
    pub x: DMatrix<f64>,
    pub xprime: DMatrix<f64>,
    pub u: Option<DMatrix<f64>>,
    pub dt: f64,
    /// Number of pairs contributed by each source trajectory, in order.
    pub pairs_per_trajectory: Vec<usize>,
}

impl SnapshotPairs {
    pub fn n_pairs(&self) -> usize {
        self.x.ncols()
    }

    /// Reassemble the source trajectories (rows = samples).
    pub fn split_trajectories(&self) -> Vec<DMatrix<f64>> {
        let n = self.x.nrows();
        let mut out = Vec::with_capacity(self.pairs_per_trajectory.len());
        let mut start = 0;
        for &count in &self.pairs_per_trajectory {
            let mut t = DMatrix::zeros(count + 1, n);
            for k in 0..count {
                t.set_row(k, &self.x.column(start + k).transpose());
            }
            t.set_row(count, &self.xprime.column(start + count - 1).transpose());
            out.push(t);
            start += count;
        }
        out
    }
}

/// Stack every trajectory's consecutive samples into snapshot pairs.
pub fn build_snapshot_pairs(data: &TrajectoryDataset) -> Result<SnapshotPairs> {
    data.check_lengths(2)?;
    let n = data.n_states();
    let counts: Vec<usize> = data.trajectories.iter().map(|t| t.nrows() - 1).collect();
    let m: usize = counts.iter().sum();

    let mut x = DMatrix::zeros(n, m);
    let mut xprime = DMatrix::zeros(n, m);
    let mut u = data.inputs.as_ref().map(|_| DMatrix::zeros(data.n_inputs(), m));
    let mut col = 0;
    for (i, t) in data.trajectories.iter().enumerate() {
        for k in 0..t.nrows() - 1 {
            x.set_column(col, &t.row(k).transpose());
            xprime.set_column(col, &t.row(k + 1).transpose());
            if let (Some(u), Some(inputs)) = (u.as_mut(), data.inputs.as_ref()) {
                u.set_column(col, &inputs[i].row(k).transpose());
            }
            col += 1;
        }
    }
    Ok(SnapshotPairs {
        x,
        xprime,
        u,
        dt: data.dt,
        pairs_per_trajectory: counts,
    })
}

/// Diagnostic scan: non-finite entries, constant coordinates, and input
/// matrices whose row count differs from their trajectory.
pub fn validate_dataset(data: &TrajectoryDataset) -> Vec<Finding> {
    let mut findings = Vec::new();
    for (ti, t) in data.trajectories.iter().enumerate() {
        for r in 0..t.nrows() {
            if let Some(c) = (0..t.ncols()).find(|&c| !t[(r, c)].is_finite()) {
                findings.push(
                    Finding::new(FindingKind::NonFinite, format!("non-finite state at trajectory {ti}, row {r}"))
                        .with_trajectory(ti)
                        .with_row(r)
                        .with_column(c),
                );
            }
        }
    }
    if let Some(inputs) = &data.inputs {
        for (ti, (t, u)) in data.trajectories.iter().zip(inputs).enumerate() {
            if t.nrows() != u.nrows() {
                findings.push(
                    Finding::new(
                        FindingKind::InputMisaligned,
                        format!("trajectory {ti} has {} samples but {} input rows", t.nrows(), u.nrows()),
                    )
                    .with_trajectory(ti),
                );
            }
            for r in 0..u.nrows() {
                if u.row(r).iter().any(|v| !v.is_finite()) {
                    findings.push(
                        Finding::new(FindingKind::NonFinite, format!("non-finite input at trajectory {ti}, row {r}"))
                            .with_trajectory(ti)
                            .with_row(r),
                    );
                }
            }
        }
    }

    let n = data.n_states();
    for c in 0..n {
        let values: Vec<f64> = data
            .trajectories
            .iter()
            .flat_map(|t| t.column(c).iter().copied().collect::<Vec<_>>())
            .filter(|v| v.is_finite())
            .collect();
        if values.is_empty() {
            continue;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if var <= (1e-14 * scale).powi(2) {
            findings.push(
                Finding::new(FindingKind::ZeroVariance, format!("state coordinate {c} is constant"))
                    .with_column(c),
            );
        }
    }
    findings
}
