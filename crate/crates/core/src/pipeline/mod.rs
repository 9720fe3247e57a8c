//! Fitted Koopman models: lifting, regression and reconstruction composed
//! into prediction, simulation and spectral analytics.

mod json;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KoopmanError, Result, Stage};
use crate::linalg::{self, CMatrix, DEFAULT_CUTOFF};
use crate::observables::{fit_reconstruction_lifted, ObservableConfig, ObservableLibrary, ReconstructionMap};
use crate::regression::{
    self, fit_edmd, fit_edmdc, fit_kdmd, ControlOptions, EigenSystem, FitOptions, KernelConfig, KernelKind,
    KernelLift, ModeKind,
};
use crate::types::{build_snapshot_pairs, Finding, FindingKind, TrajectoryDataset};

pub use json::SCHEMA_VERSION;

/// Regressor block of a fit configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegressorConfig {
    Dmd {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
        #[serde(default)]
        modes: ModeKind,
    },
    Edmd {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
        #[serde(default)]
        modes: ModeKind,
    },
    Dmdc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank_in: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank_out: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
        #[serde(default)]
        modes: ModeKind,
    },
    Edmdc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank_in: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank_out: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
        #[serde(default)]
        modes: ModeKind,
    },
    Kdmd {
        kernel: KernelKind,
        #[serde(default)]
        reg_eps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
    },
    Hdmd {
        delays: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
        #[serde(default)]
        modes: ModeKind,
    },
    Hdmdc {
        delays: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank_in: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rank_out: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
        #[serde(default)]
        modes: ModeKind,
    },
}

impl RegressorConfig {
    pub fn edmd() -> Self {
        RegressorConfig::Edmd { rank: None, cutoff: None, modes: ModeKind::Exact }
    }

    pub fn dmd() -> Self {
        RegressorConfig::Dmd { rank: None, cutoff: None, modes: ModeKind::Exact }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegressorConfig::Dmd { .. } => "dmd",
            RegressorConfig::Edmd { .. } => "edmd",
            RegressorConfig::Dmdc { .. } => "dmdc",
            RegressorConfig::Edmdc { .. } => "edmdc",
            RegressorConfig::Kdmd { .. } => "kdmd",
            RegressorConfig::Hdmd { .. } => "hdmd",
            RegressorConfig::Hdmdc { .. } => "hdmdc",
        }
    }

    pub fn is_controlled(&self) -> bool {
        matches!(
            self,
            RegressorConfig::Dmdc { .. } | RegressorConfig::Edmdc { .. } | RegressorConfig::Hdmdc { .. }
        )
    }

    fn delays(&self) -> Option<usize> {
        match self {
            RegressorConfig::Hdmd { delays, .. } | RegressorConfig::Hdmdc { delays, .. } => Some(*delays),
            _ => None,
        }
    }

    fn fit_options(&self) -> FitOptions {
        let (rank, cutoff, modes) = match *self {
            RegressorConfig::Dmd { rank, cutoff, modes }
            | RegressorConfig::Edmd { rank, cutoff, modes }
            | RegressorConfig::Hdmd { rank, cutoff, modes, .. } => (rank, cutoff, modes),
            RegressorConfig::Dmdc { cutoff, modes, .. }
            | RegressorConfig::Edmdc { cutoff, modes, .. }
            | RegressorConfig::Hdmdc { cutoff, modes, .. } => (None, cutoff, modes),
            RegressorConfig::Kdmd { rank, cutoff, .. } => (rank, cutoff, ModeKind::Projected),
        };
        FitOptions { rank, cutoff: cutoff.unwrap_or(DEFAULT_CUTOFF), modes }
    }

    fn control_options(&self) -> ControlOptions {
        let (rank_in, rank_out) = match *self {
            RegressorConfig::Dmdc { rank_in, rank_out, .. }
            | RegressorConfig::Edmdc { rank_in, rank_out, .. }
            | RegressorConfig::Hdmdc { rank_in, rank_out, .. } => (rank_in, rank_out),
            _ => (None, None),
        };
        ControlOptions { rank_in, rank_out, fit: self.fit_options() }
    }
}

/// How states are mapped into the space the operator acts on.
#[derive(Debug, Clone)]
pub enum Lifting {
    Library(ObservableLibrary),
    Kernel(KernelLift),
}

impl Lifting {
    pub fn n_output(&self) -> usize {
        match self {
            Lifting::Library(l) => l.n_output(),
            Lifting::Kernel(k) => k.n_output(),
        }
    }

    pub fn delays(&self) -> usize {
        match self {
            Lifting::Library(l) => l.delays(),
            Lifting::Kernel(_) => 0,
        }
    }

    /// Lift an embedded state: `d + 1` stacked states, most recent first.
    fn lift_embedded(&self, n: usize, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Lifting::Kernel(k) => k.lift(x),
            Lifting::Library(l) if l.delays() == 0 => l.lift(x),
            Lifting::Library(l) => {
                let window: Vec<&[f64]> = x.chunks(n).collect();
                l.lift_window(&window)
            }
        }
    }
}

/// Fit statistics and provenance carried with a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMetadata {
    pub regressor: RegressorConfig,
    /// Number of snapshot pairs used in the fit.
    pub m: usize,
    pub rank: usize,
    #[serde(with = "json::real")]
    pub residual: f64,
    #[serde(with = "json::real")]
    pub sigma_min: f64,
    /// `residual / sigma_min`, the scale against which linearity scores are read.
    #[serde(with = "json::real")]
    pub linearity_bound: f64,
    /// Largest imaginary part left after summing the modal expansion of one
    /// step from the first training snapshot.
    #[serde(with = "json::real")]
    pub max_imag_leakage: f64,
    /// Lifted first training snapshot, the reference for mode amplitudes.
    pub lifted_x0: Vec<f64>,
    #[serde(default)]
    pub findings: Vec<Finding>,
}

/// An immutable fitted model.
#[derive(Debug, Clone)]
pub struct KoopmanModel {
    lifting: Lifting,
    a: DMatrix<f64>,
    b: Option<DMatrix<f64>>,
    reconstruction: ReconstructionMap,
    eigen: EigenSystem,
    /// State-space Koopman modes, `n × r`.
    modes: CMatrix,
    mode_kind: ModeKind,
    dt: f64,
    n: usize,
    q: usize,
    metadata: ModelMetadata,
}

/// One row of a [`ModeTable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRecord {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub mode: Vec<Complex64>,
    /// `φ_j` at the first training snapshot.
    pub amplitude: Complex64,
    pub linearity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTable {
    pub mode_kind: ModeKind,
    pub rows: Vec<ModeRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearityReport {
    /// One score per mode; NaN where the eigenfunction vanishes on the data.
    pub scores: Vec<f64>,
    pub findings: Vec<Finding>,
}

/// Fit a model from an observables configuration.
///
/// `hdmd`/`hdmdc` supply their own time-delay lifting and `kdmd` its kernel
/// lifting; both require identity observables.
pub fn fit(observables: &ObservableConfig, regressor: &RegressorConfig, data: &TrajectoryDataset) -> Result<KoopmanModel> {
    if data.is_empty() {
        return Err(KoopmanError::NoTrajectories);
    }
    let n = data.n_states();
    let is_identity = matches!(observables, ObservableConfig::Identity { .. });
    if let Some(delays) = regressor.delays() {
        if !is_identity {
            return Err(KoopmanError::InvalidParameter(format!(
                "{} builds its own time-delay observables; use identity observables",
                regressor.name()
            )));
        }
        let library = ObservableLibrary::time_delay(n, delays).map_err(|e| e.at(Stage::Lifting))?;
        return fit_library(library, regressor, data);
    }
    if let RegressorConfig::Kdmd { kernel, reg_eps, rank, cutoff } = regressor {
        if !is_identity {
            return Err(KoopmanError::InvalidParameter(
                "kdmd lifts through its kernel; use identity observables".into(),
            ));
        }
        return fit_kernel(&KernelConfig { kernel: *kernel, reg_eps: *reg_eps }, *rank, *cutoff, regressor, data);
    }
    let training = stacked_states(data);
    let library = observables.build(n, Some(&training)).map_err(|e| e.at(Stage::Lifting))?;
    fit_library(library, regressor, data)
}

/// Fit with an already built library (e.g. one with custom functions).
pub fn fit_library(
    library: ObservableLibrary,
    regressor: &RegressorConfig,
    data: &TrajectoryDataset,
) -> Result<KoopmanModel> {
    if matches!(regressor, RegressorConfig::Kdmd { .. }) {
        return Err(KoopmanError::InvalidParameter("kdmd does not take an observable library".into()));
    }
    check_inputs(regressor, data)?;
    let pairs = regression::lift_pairs(&library, data).map_err(|e| match e {
        KoopmanError::NoTrajectories | KoopmanError::TrajectoryTooShort { .. } => e,
        other => other.at(Stage::Lifting),
    })?;
    let fitted = match &pairs.u {
        Some(u) => fit_edmdc(&pairs.z, &pairs.zprime, u, &regressor.control_options()),
        None => fit_edmd(&pairs.z, &pairs.zprime, &regressor.fit_options()),
    }
    .map_err(|e| e.at(Stage::Regression))?
    .with_dt(data.dt());
    let (reconstruction, mut findings) =
        fit_reconstruction_lifted(&library, &pairs.x, &pairs.z).map_err(|e| e.at(Stage::Reconstruction))?;
    let modes = linalg::to_complex(reconstruction.matrix()) * &fitted.modes;
    findings.extend(fitted.findings.iter().cloned());
    findings.extend(fitted.eigen.findings.iter().cloned());
    let lifted_x0: Vec<f64> = pairs.z.column(0).iter().copied().collect();
    let sigma_min = fitted.sigma_min();
    let metadata = ModelMetadata {
        regressor: regressor.clone(),
        m: pairs.z.ncols(),
        rank: fitted.rank,
        residual: fitted.residual,
        sigma_min,
        linearity_bound: fitted.residual / sigma_min,
        max_imag_leakage: 0.0,
        lifted_x0,
        findings,
    };
    Ok(KoopmanModel {
        lifting: Lifting::Library(library),
        a: fitted.a,
        b: fitted.b,
        reconstruction,
        eigen: fitted.eigen,
        modes,
        mode_kind: fitted.mode_kind,
        dt: data.dt(),
        n: data.n_states(),
        q: if regressor.is_controlled() { data.n_inputs() } else { 0 },
        metadata,
    }
    .with_leakage())
}

fn fit_kernel(
    config: &KernelConfig,
    rank: Option<usize>,
    cutoff: Option<f64>,
    regressor: &RegressorConfig,
    data: &TrajectoryDataset,
) -> Result<KoopmanModel> {
    check_inputs(regressor, data)?;
    let pairs = build_snapshot_pairs(data)?;
    let kreg = fit_kdmd(&pairs.x, &pairs.xprime, config, rank, cutoff).map_err(|e| e.at(Stage::Regression))?;
    let fitted = kreg.result.with_dt(data.dt());
    let lift = kreg.lift;
    let mut zeta = DMatrix::zeros(lift.n_output(), pairs.x.ncols());
    for (j, col) in pairs.x.column_iter().enumerate() {
        let z = lift.lift(col.as_slice()).map_err(|e| e.at(Stage::Lifting))?;
        zeta.set_column(j, &DVector::from_vec(z));
    }
    let (c, c_rank) = linalg::lstsq_right(&pairs.x, &zeta, DEFAULT_CUTOFF).map_err(|e| e.at(Stage::Reconstruction))?;
    let reconstruction = ReconstructionMap::from_matrix(c);
    let mut findings = fitted.eigen.findings.clone();
    if c_rank < zeta.nrows() {
        findings.push(Finding::new(
            FindingKind::RankDeficient,
            format!("kernel coordinates have rank {c_rank} < {}; minimum-norm reconstruction used", zeta.nrows()),
        ));
    }
    let modes = linalg::to_complex(reconstruction.matrix()) * &fitted.eigen.right;
    let sigma_min = fitted.sigma_min();
    let metadata = ModelMetadata {
        regressor: regressor.clone(),
        m: pairs.x.ncols(),
        rank: fitted.rank,
        residual: fitted.residual,
        sigma_min,
        linearity_bound: fitted.residual / sigma_min,
        max_imag_leakage: 0.0,
        lifted_x0: zeta.column(0).iter().copied().collect(),
        findings,
    };
    Ok(KoopmanModel {
        lifting: Lifting::Kernel(lift),
        a: fitted.a,
        b: None,
        reconstruction,
        eigen: fitted.eigen,
        modes,
        mode_kind: ModeKind::Projected,
        dt: data.dt(),
        n: data.n_states(),
        q: 0,
        metadata,
    }
    .with_leakage())
}

fn check_inputs(regressor: &RegressorConfig, data: &TrajectoryDataset) -> Result<()> {
    match (regressor.is_controlled(), data.inputs().is_some()) {
        (true, false) => Err(KoopmanError::InvalidParameter(format!(
            "{} needs a dataset with inputs",
            regressor.name()
        ))),
        (false, true) => Err(KoopmanError::InvalidParameter(format!(
            "dataset has inputs; {} is unforced (use a controlled regressor)",
            regressor.name()
        ))),
        _ => Ok(()),
    }
}

/// All states of all trajectories as columns.
fn stacked_states(data: &TrajectoryDataset) -> DMatrix<f64> {
    let total: usize = data.trajectories().iter().map(|t| t.nrows()).sum();
    let mut out = DMatrix::zeros(data.n_states(), total);
    let mut col = 0;
    for t in data.trajectories() {
        for row in t.row_iter() {
            out.set_column(col, &row.transpose());
            col += 1;
        }
    }
    out
}

impl KoopmanModel {
    fn with_leakage(mut self) -> Self {
        let z0 = DVector::from_column_slice(&self.metadata.lifted_x0).map(|v| Complex64::new(v, 0.0));
        let phi = self.eigen.left.adjoint() * z0;
        let mut sum = DVector::<Complex64>::zeros(self.n);
        for (j, l) in self.eigen.lambdas.iter().enumerate() {
            sum += self.modes.column(j) * (l * phi[j]);
        }
        self.metadata.max_imag_leakage = sum.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        self
    }

    pub fn lifting(&self) -> &Lifting {
        &self.lifting
    }

    /// The state-transition block acting on lifted coordinates.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> Option<&DMatrix<f64>> {
        self.b.as_ref()
    }

    pub fn reconstruction(&self) -> &ReconstructionMap {
        &self.reconstruction
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn n_inputs(&self) -> usize {
        self.q
    }

    pub fn delays(&self) -> usize {
        self.lifting.delays()
    }

    /// Length of the vector `predict`/`simulate` take: `n·(d + 1)`.
    pub fn embedded_dim(&self) -> usize {
        self.n * (self.delays() + 1)
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn lift(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.embedded_dim() {
            return Err(KoopmanError::DimensionMismatch {
                expected: self.embedded_dim(),
                got: x.len(),
                context: "state (delay-embedded, most recent first)".into(),
            });
        }
        self.lifting.lift_embedded(self.n, x)
    }

    fn check_input(&self, u: Option<&[f64]>) -> Result<()> {
        match (self.q, u) {
            (0, None) => Ok(()),
            (0, Some(_)) => Err(KoopmanError::InvalidParameter("model is unforced; no input expected".into())),
            (_, None) => Err(KoopmanError::InvalidParameter("controlled model needs an input".into())),
            (q, Some(u)) if u.len() != q => Err(KoopmanError::DimensionMismatch {
                expected: q,
                got: u.len(),
                context: "input".into(),
            }),
            _ => Ok(()),
        }
    }

    fn advance(&self, z: &DVector<f64>, u: Option<&[f64]>) -> DVector<f64> {
        let mut next = &self.a * z;
        if let (Some(b), Some(u)) = (&self.b, u) {
            next += b * DVector::from_column_slice(u);
        }
        next
    }

    /// One step: `C (A Φ(x) + B u)`.
    pub fn predict(&self, x: &[f64], u: Option<&[f64]>) -> Result<Vec<f64>> {
        self.check_input(u)?;
        let z = DVector::from_vec(self.lift(x)?);
        Ok(self.reconstruction.reconstruct(self.advance(&z, u).as_slice()))
    }

    /// Iterate the lifted state `n_steps` times. `inputs` is `q × n_steps`.
    /// Row 0 of the result is the current state of `x0`.
    pub fn simulate(&self, x0: &[f64], n_steps: usize, inputs: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
        match (self.q, inputs) {
            (0, Some(_)) => {
                return Err(KoopmanError::InvalidParameter("model is unforced; no inputs expected".into()));
            }
            (q, None) if q > 0 && n_steps > 0 => {
                return Err(KoopmanError::InvalidParameter("controlled model needs inputs".into()));
            }
            (q, Some(u)) if u.ncols() != n_steps || u.nrows() != q => {
                return Err(KoopmanError::DimensionMismatch {
                    expected: n_steps,
                    got: u.ncols(),
                    context: format!("input columns (expected {q} × {n_steps}, got {:?})", u.shape()),
                });
            }
            _ => {}
        }
        let mut z = DVector::from_vec(self.lift(x0)?);
        let mut out = DMatrix::zeros(n_steps + 1, self.n);
        out.row_mut(0).copy_from_slice(&x0[..self.n]);
        let mut u_buf = vec![0.0; self.q];
        for k in 0..n_steps {
            let u = inputs.map(|m| {
                u_buf.copy_from_slice(m.column(k).as_slice());
                u_buf.as_slice()
            });
            z = self.advance(&z, u);
            let x = self.reconstruction.reconstruct(z.as_slice());
            out.row_mut(k + 1).copy_from_slice(&x);
        }
        Ok(out)
    }

    /// Simulate a delay model from `d + 1` raw states (rows, oldest first).
    pub fn simulate_from_history(
        &self,
        history: &DMatrix<f64>,
        n_steps: usize,
        inputs: Option<&DMatrix<f64>>,
    ) -> Result<DMatrix<f64>> {
        let d = self.delays();
        if history.nrows() != d + 1 || history.ncols() != self.n {
            return Err(KoopmanError::DimensionMismatch {
                expected: d + 1,
                got: history.nrows(),
                context: format!("warm-up rows of {} states", self.n),
            });
        }
        let embedded: Vec<f64> = (0..=d).rev().flat_map(|k| history.row(k).iter().copied().collect::<Vec<_>>()).collect();
        self.simulate(&embedded, n_steps, inputs)
    }

    /// `φ_j(x) = l_jᴴ Φ(x)` for every mode.
    pub fn eigenfunctions(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        let z = self.lift(x)?;
        Ok(self.phi_of_lifted(&z))
    }

    fn phi_of_lifted(&self, z: &[f64]) -> Vec<Complex64> {
        self.eigen
            .left
            .column_iter()
            .map(|l| l.iter().zip(z).map(|(c, v)| c.conj() * v).sum())
            .collect()
    }

    /// `μ_j = ln λ_j / Δt`.
    pub fn continuous_eigenvalues(&self) -> &[Complex64] {
        &self.eigen.mus
    }

    pub fn koopman_modes(&self) -> ModeTable {
        let amplitudes = self.phi_of_lifted(&self.metadata.lifted_x0);
        let rows = (0..self.eigen.len())
            .map(|j| ModeRecord {
                lambda: self.eigen.lambdas[j],
                mu: self.eigen.mus[j],
                mode: self.modes.column(j).iter().copied().collect(),
                amplitude: amplitudes[j],
                linearity: None,
            })
            .collect();
        ModeTable { mode_kind: self.mode_kind, rows }
    }

    /// Mode table with per-mode linearity scores on `data`.
    pub fn koopman_modes_scored(&self, data: &TrajectoryDataset) -> Result<ModeTable> {
        let report = self.linearity_consistency(data)?;
        let mut table = self.koopman_modes();
        for (row, s) in table.rows.iter_mut().zip(report.scores) {
            row.linearity = Some(s);
        }
        Ok(table)
    }

    /// Raw state modes, `n × r`.
    pub fn mode_matrix(&self) -> &CMatrix {
        &self.modes
    }

    fn lifted_pairs(&self, data: &TrajectoryDataset) -> Result<(DMatrix<f64>, DMatrix<f64>, Option<DMatrix<f64>>)> {
        if data.n_states() != self.n && !data.is_empty() {
            return Err(KoopmanError::DimensionMismatch {
                expected: self.n,
                got: data.n_states(),
                context: "dataset state dimension".into(),
            });
        }
        match &self.lifting {
            Lifting::Library(lib) => {
                let p = regression::lift_pairs(lib, data)?;
                Ok((p.z, p.zprime, p.u))
            }
            Lifting::Kernel(k) => {
                let p = build_snapshot_pairs(data)?;
                let lift_all = |x: &DMatrix<f64>| -> Result<DMatrix<f64>> {
                    let mut z = DMatrix::zeros(k.n_output(), x.ncols());
                    for (j, col) in x.column_iter().enumerate() {
                        z.set_column(j, &DVector::from_vec(k.lift(col.as_slice())?));
                    }
                    Ok(z)
                };
                Ok((lift_all(&p.x)?, lift_all(&p.xprime)?, p.u))
            }
        }
    }

    /// `‖φ_j(X′) − λ_j φ_j(X) − l_jᴴ B U‖ / ‖φ_j(X)‖` per mode.
    pub fn linearity_consistency(&self, data: &TrajectoryDataset) -> Result<LinearityReport> {
        let (z, zp, u) = self.lifted_pairs(data)?;
        if self.q > 0 && u.is_none() {
            return Err(KoopmanError::InvalidParameter("controlled model needs a dataset with inputs".into()));
        }
        let lh = self.eigen.left.adjoint();
        let phi = &lh * linalg::to_complex(&z);
        let mut phi_next = &lh * linalg::to_complex(&zp);
        if let (Some(b), Some(u)) = (&self.b, &u) {
            phi_next -= &lh * linalg::to_complex(&(b * u));
        }
        let mut scores = Vec::with_capacity(self.eigen.len());
        let mut findings = Vec::new();
        for (j, lambda) in self.eigen.lambdas.iter().enumerate() {
            let row = phi.row(j);
            let denom = row.norm();
            if denom == 0.0 {
                scores.push(f64::NAN);
                findings.push(
                    Finding::new(FindingKind::ZeroNorm, format!("eigenfunction {j} vanishes on the data")).with_row(j),
                );
                continue;
            }
            let diff = phi_next.row(j) - row * *lambda;
            scores.push(diff.norm() / denom);
        }
        Ok(LinearityReport { scores, findings })
    }

    pub fn to_json(&self) -> Result<String> {
        json::to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        json::from_json(text)
    }
}
