//! Lifting maps from state space into observable space, together with the
//! linear maps that recover the state from a lifted vector.
//!
//! Every library lifts a *window* of states ordered most recent first. Only
//! time-delay libraries (and concatenations containing one) look past the
//! first entry; for all others the window has length one.

mod fourier;
mod polynomial;
mod rbf;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{KoopmanError, Result};
use crate::linalg::{self, DEFAULT_CUTOFF};
use crate::types::{Finding, FindingKind};

pub use polynomial::{binomial, monomial_exponents};
pub use rbf::RbfKind;

type CustomFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A user-supplied observable with a fixed output length.
#[derive(Clone)]
pub struct CustomFunction {
    name: String,
    n_out: usize,
    f: Arc<CustomFn>,
}

impl CustomFunction {
    pub fn scalar(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        CustomFunction {
            name: name.into(),
            n_out: 1,
            f: Arc::new(move |x| vec![f(x)]),
        }
    }

    pub fn vector(
        name: impl Into<String>,
        n_out: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        CustomFunction {
            name: name.into(),
            n_out,
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunction")
            .field("name", &self.name)
            .field("n_out", &self.n_out)
            .finish()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    Polynomial {
        degree: usize,
        exponents: Vec<Vec<u32>>,
    },
    TimeDelay {
        delays: usize,
    },
    Rbf {
        rbf: RbfKind,
        /// One center per row.
        centers: DMatrix<f64>,
        shape_eps: f64,
        order: u32,
        seed: u64,
    },
    RandomFourier {
        features: fourier::FourierFeatures,
        include_state: bool,
    },
    Custom {
        functions: Vec<CustomFunction>,
    },
    Concat {
        parts: Vec<ObservableLibrary>,
        /// Output indices kept from each part.
        keep: Vec<Vec<usize>>,
    },
}

/// A lifting map Φ: Rⁿ → Rᴺ. Immutable once built.
#[derive(Debug, Clone)]
pub struct ObservableLibrary {
    n_input: usize,
    n_output: usize,
    delays: usize,
    /// Positions of the current state inside the lifted vector, when embedded.
    state_index: Option<Vec<usize>>,
    kind: Kind,
}

impl ObservableLibrary {
    pub fn identity(n_input: usize) -> Result<Self> {
        check_n(n_input)?;
        Ok(ObservableLibrary {
            n_input,
            n_output: n_input,
            delays: 0,
            state_index: Some((0..n_input).collect()),
            kind: Kind::Identity,
        })
    }

    /// All monomials up to `degree`, constant term included.
    pub fn polynomial(n_input: usize, degree: usize) -> Result<Self> {
        check_n(n_input)?;
        if degree < 1 {
            return Err(KoopmanError::InvalidParameter("polynomial degree must be at least 1".into()));
        }
        let exponents = monomial_exponents(n_input, degree);
        Ok(ObservableLibrary {
            n_input,
            n_output: exponents.len(),
            delays: 0,
            // linear terms directly follow the constant
            state_index: Some((1..=n_input).collect()),
            kind: Kind::Polynomial { degree, exponents },
        })
    }

    /// `[x_k; x_{k-1}; …; x_{k-d}]`.
    pub fn time_delay(n_input: usize, delays: usize) -> Result<Self> {
        check_n(n_input)?;
        Ok(ObservableLibrary {
            n_input,
            n_output: n_input * (delays + 1),
            delays,
            state_index: Some((0..n_input).collect()),
            kind: Kind::TimeDelay { delays },
        })
    }

    /// State followed by one radial feature per center (rows of `centers`).
    pub fn rbf(n_input: usize, rbf: RbfKind, centers: DMatrix<f64>, shape_eps: f64, order: u32) -> Result<Self> {
        Self::rbf_seeded(n_input, rbf, centers, shape_eps, order, 0)
    }

    fn rbf_seeded(
        n_input: usize,
        rbf: RbfKind,
        centers: DMatrix<f64>,
        shape_eps: f64,
        order: u32,
        seed: u64,
    ) -> Result<Self> {
        check_n(n_input)?;
        if centers.nrows() == 0 {
            return Err(KoopmanError::InvalidParameter("at least one RBF center is required".into()));
        }
        if centers.ncols() != n_input {
            return Err(KoopmanError::DimensionMismatch {
                expected: n_input,
                got: centers.ncols(),
                context: "RBF center dimension".into(),
            });
        }
        if !(shape_eps > 0.0 && shape_eps.is_finite()) {
            return Err(KoopmanError::InvalidParameter(format!(
                "shape_eps must be positive, got {shape_eps}"
            )));
        }
        Ok(ObservableLibrary {
            n_input,
            n_output: n_input + centers.nrows(),
            delays: 0,
            state_index: Some((0..n_input).collect()),
            kind: Kind::Rbf {
                rbf,
                centers,
                shape_eps,
                order,
                seed,
            },
        })
    }

    /// Random Fourier features for the Gaussian kernel of width `sigma`.
    pub fn random_fourier(
        n_input: usize,
        n_features: usize,
        sigma: f64,
        seed: u64,
        include_state: bool,
    ) -> Result<Self> {
        check_n(n_input)?;
        let features = fourier::FourierFeatures::sample(n_input, n_features, sigma, seed)?;
        let offset = if include_state { n_input } else { 0 };
        Ok(ObservableLibrary {
            n_input,
            n_output: offset + n_features,
            delays: 0,
            state_index: include_state.then(|| (0..n_input).collect()),
            kind: Kind::RandomFourier {
                features,
                include_state,
            },
        })
    }

    /// State followed by the outputs of each function in order.
    pub fn custom(n_input: usize, functions: Vec<CustomFunction>) -> Result<Self> {
        check_n(n_input)?;
        let extra: usize = functions.iter().map(|f| f.n_out).sum();
        Ok(ObservableLibrary {
            n_input,
            n_output: n_input + extra,
            delays: 0,
            state_index: Some((0..n_input).collect()),
            kind: Kind::Custom { functions },
        })
    }

    /// Concatenate libraries; the state block of any library after the first
    /// one that embeds the state is dropped.
    pub fn concat(parts: Vec<ObservableLibrary>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| KoopmanError::InvalidParameter("concat needs at least one library".into()))?;
        let n_input = first.n_input;
        let mut keep = Vec::with_capacity(parts.len());
        let mut state_index: Option<Vec<usize>> = None;
        let mut offset = 0;
        for p in &parts {
            if p.n_input != n_input {
                return Err(KoopmanError::DimensionMismatch {
                    expected: n_input,
                    got: p.n_input,
                    context: "concat library input dimension".into(),
                });
            }
            let kept: Vec<usize> = match (&state_index, &p.state_index) {
                (Some(_), Some(idx)) => (0..p.n_output).filter(|i| !idx.contains(i)).collect(),
                _ => (0..p.n_output).collect(),
            };
            if state_index.is_none() {
                if let Some(idx) = &p.state_index {
                    state_index = Some(idx.iter().map(|i| i + offset).collect());
                }
            }
            offset += kept.len();
            keep.push(kept);
        }
        let delays = parts.iter().map(|p| p.delays).max().unwrap_or(0);
        Ok(ObservableLibrary {
            n_input,
            n_output: offset,
            delays,
            state_index,
            kind: Kind::Concat { parts, keep },
        })
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    pub fn n_output(&self) -> usize {
        self.n_output
    }

    /// Number of past samples consumed besides the current one.
    pub fn delays(&self) -> usize {
        self.delays
    }

    pub fn window_len(&self) -> usize {
        self.delays + 1
    }

    /// Indices of the lifted coordinates equal to the current state.
    pub fn state_index(&self) -> Option<&[usize]> {
        self.state_index.as_deref()
    }

    pub fn embeds_state(&self) -> bool {
        self.state_index.is_some()
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Identity => "identity",
            Kind::Polynomial { .. } => "polynomial",
            Kind::TimeDelay { .. } => "time_delay",
            Kind::Rbf { .. } => "rbf",
            Kind::RandomFourier { .. } => "random_fourier",
            Kind::Custom { .. } => "custom",
            Kind::Concat { .. } => "concat",
        }
    }

    /// Lift a single state. Fails for libraries that need a delay window.
    pub fn lift(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.lift_window(&[x])
    }

    /// Lift a window of exactly `delays + 1` states, most recent first.
    pub fn lift_window(&self, window: &[&[f64]]) -> Result<Vec<f64>> {
        if window.len() != self.window_len() {
            return Err(KoopmanError::DimensionMismatch {
                expected: self.window_len(),
                got: window.len(),
                context: "lift window length (delays + 1)".into(),
            });
        }
        for w in window {
            if w.len() != self.n_input {
                return Err(KoopmanError::DimensionMismatch {
                    expected: self.n_input,
                    got: w.len(),
                    context: "state dimension".into(),
                });
            }
        }
        let mut out = Vec::with_capacity(self.n_output);
        self.lift_into(window, &mut out)?;
        Ok(out)
    }

    /// `window` is at least `window_len()` long and dimensions are checked.
    fn lift_into(&self, window: &[&[f64]], out: &mut Vec<f64>) -> Result<()> {
        let x = window[0];
        match &self.kind {
            Kind::Identity => out.extend_from_slice(x),
            Kind::Polynomial { exponents, .. } => {
                out.extend(exponents.iter().map(|e| polynomial::eval_monomial(x, e)));
            }
            Kind::TimeDelay { delays } => {
                for w in &window[..=*delays] {
                    out.extend_from_slice(w);
                }
            }
            Kind::Rbf {
                rbf,
                centers,
                shape_eps,
                order,
                ..
            } => {
                out.extend_from_slice(x);
                for c in centers.row_iter() {
                    let r = x
                        .iter()
                        .zip(c.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    out.push(rbf.eval(shape_eps * r, *order));
                }
            }
            Kind::RandomFourier {
                features,
                include_state,
            } => {
                if *include_state {
                    out.extend_from_slice(x);
                }
                features.eval_into(x, out);
            }
            Kind::Custom { functions } => {
                out.extend_from_slice(x);
                for (index, f) in functions.iter().enumerate() {
                    let values = (f.f)(x);
                    if values.len() != f.n_out {
                        return Err(KoopmanError::DimensionMismatch {
                            expected: f.n_out,
                            got: values.len(),
                            context: format!("custom observable {index} ({}) output", f.name),
                        });
                    }
                    if values.iter().any(|v| !v.is_finite()) {
                        return Err(KoopmanError::NonFiniteObservable { index });
                    }
                    out.extend(values);
                }
            }
            Kind::Concat { parts, keep } => {
                let mut scratch = Vec::new();
                for (p, kept) in parts.iter().zip(keep) {
                    scratch.clear();
                    p.lift_into(window, &mut scratch)?;
                    out.extend(kept.iter().map(|&i| scratch[i]));
                }
            }
        }
        Ok(())
    }

    /// Lift each column of an `n × m` matrix (delay-free libraries only).
    pub fn lift_columns(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if self.delays > 0 {
            return Err(KoopmanError::InvalidParameter(
                "time-delay observables need trajectories, not isolated snapshots".into(),
            ));
        }
        if x.nrows() != self.n_input {
            return Err(KoopmanError::DimensionMismatch {
                expected: self.n_input,
                got: x.nrows(),
                context: "state dimension".into(),
            });
        }
        let mut z = DMatrix::zeros(self.n_output, x.ncols());
        let mut buf = Vec::with_capacity(self.n_output);
        for (j, col) in x.column_iter().enumerate() {
            let state: Vec<f64> = col.iter().copied().collect();
            buf.clear();
            self.lift_into(&[&state], &mut buf)?;
            z.set_column(j, &nalgebra::DVector::from_column_slice(&buf));
        }
        Ok(z)
    }

    /// Lift a trajectory (one row per sample). Column `j` of the result is
    /// the lifted window ending at sample `j + delays`, so a trajectory of
    /// `T` samples yields `T - delays` lifted snapshots.
    pub fn lift_trajectory(&self, traj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if traj.ncols() != self.n_input {
            return Err(KoopmanError::DimensionMismatch {
                expected: self.n_input,
                got: traj.ncols(),
                context: "state dimension".into(),
            });
        }
        let t = traj.nrows();
        if t < self.window_len() {
            return Err(KoopmanError::InvalidParameter(format!(
                "trajectory of {t} samples is shorter than the delay window {}",
                self.window_len()
            )));
        }
        let rows: Vec<Vec<f64>> = traj.row_iter().map(|r| r.iter().copied().collect()).collect();
        let cols = t - self.delays;
        let mut z = DMatrix::zeros(self.n_output, cols);
        let mut buf = Vec::with_capacity(self.n_output);
        for j in 0..cols {
            let end = j + self.delays;
            let window: Vec<&[f64]> = (0..=self.delays).map(|k| rows[end - k].as_slice()).collect();
            buf.clear();
            self.lift_into(&window, &mut buf)?;
            z.set_column(j, &nalgebra::DVector::from_column_slice(&buf));
        }
        Ok(z)
    }

    /// Serializable configuration that rebuilds this exact library.
    pub fn to_config(&self) -> Result<ObservableConfig> {
        let n_input = Some(self.n_input);
        Ok(match &self.kind {
            Kind::Identity => ObservableConfig::Identity { n_input },
            Kind::Polynomial { degree, .. } => ObservableConfig::Polynomial {
                n_input,
                degree: *degree,
            },
            Kind::TimeDelay { delays } => ObservableConfig::TimeDelay {
                n_input,
                delays: *delays,
            },
            Kind::Rbf {
                rbf,
                centers,
                shape_eps,
                order,
                seed,
            } => ObservableConfig::Rbf {
                n_input,
                rbf_type: *rbf,
                centers: Some(centers.row_iter().map(|r| r.iter().copied().collect()).collect()),
                n_centers: Some(centers.nrows()),
                shape_eps: *shape_eps,
                order: *order,
                seed: *seed,
            },
            Kind::RandomFourier {
                features,
                include_state,
            } => ObservableConfig::RandomFourier {
                n_input,
                n_features: features.n_features(),
                sigma: features.sigma(),
                seed: features.seed(),
                include_state: *include_state,
            },
            Kind::Custom { .. } => {
                return Err(KoopmanError::Serialization(
                    "custom observables hold user code and cannot be serialized".into(),
                ))
            }
            Kind::Concat { parts, .. } => ObservableConfig::Concat {
                n_input,
                parts: parts.iter().map(|p| p.to_config()).collect::<Result<_>>()?,
            },
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(KoopmanError::InvalidParameter("state dimension must be at least 1".into()));
    }
    Ok(())
}

fn default_shape_eps() -> f64 {
    1.0
}

fn default_order() -> u32 {
    3
}

fn default_sigma() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

/// JSON form of a library: `{"kind": ..., "n_input": ..., <kind parameters>}`.
///
/// `n_input` may be omitted in user configs; it is then taken from the data.
/// RBF centers may be omitted in favour of `n_centers`, in which case they
/// are drawn from the training states with `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    Identity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_input: Option<usize>,
    },
    Polynomial {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_input: Option<usize>,
        degree: usize,
    },
    TimeDelay {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_input: Option<usize>,
        delays: usize,
    },
    Rbf {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_input: Option<usize>,
        #[serde(default)]
        rbf_type: RbfKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        centers: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_centers: Option<usize>,
        #[serde(default = "default_shape_eps")]
        shape_eps: f64,
        #[serde(default = "default_order")]
        order: u32,
        #[serde(default)]
        seed: u64,
    },
    RandomFourier {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_input: Option<usize>,
        n_features: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_true")]
        include_state: bool,
    },
    Concat {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_input: Option<usize>,
        parts: Vec<ObservableConfig>,
    },
}

impl ObservableConfig {
    fn declared_n_input(&self) -> Option<usize> {
        match self {
            ObservableConfig::Identity { n_input }
            | ObservableConfig::Polynomial { n_input, .. }
            | ObservableConfig::TimeDelay { n_input, .. }
            | ObservableConfig::Rbf { n_input, .. }
            | ObservableConfig::RandomFourier { n_input, .. }
            | ObservableConfig::Concat { n_input, .. } => *n_input,
        }
    }

    /// Build the library for `n_input`-dimensional states. `training` holds
    /// states column-wise and is only consulted for RBF center sampling.
    pub fn build(&self, n_input: usize, training: Option<&DMatrix<f64>>) -> Result<ObservableLibrary> {
        if let Some(declared) = self.declared_n_input() {
            if declared != n_input {
                return Err(KoopmanError::DimensionMismatch {
                    expected: declared,
                    got: n_input,
                    context: "observable config n_input".into(),
                });
            }
        }
        match self {
            ObservableConfig::Identity { .. } => ObservableLibrary::identity(n_input),
            ObservableConfig::Polynomial { degree, .. } => ObservableLibrary::polynomial(n_input, *degree),
            ObservableConfig::TimeDelay { delays, .. } => ObservableLibrary::time_delay(n_input, *delays),
            ObservableConfig::Rbf {
                rbf_type,
                centers,
                n_centers,
                shape_eps,
                order,
                seed,
                ..
            } => {
                let centers = match centers {
                    Some(rows) => {
                        if rows.iter().any(|r| r.len() != n_input) {
                            return Err(KoopmanError::DimensionMismatch {
                                expected: n_input,
                                got: rows.iter().map(|r| r.len()).find(|&l| l != n_input).unwrap_or(0),
                                context: "RBF center dimension".into(),
                            });
                        }
                        linalg::from_rows(rows)
                    }
                    None => {
                        let k = n_centers.ok_or_else(|| {
                            KoopmanError::InvalidParameter("rbf config needs either centers or n_centers".into())
                        })?;
                        let data = training.ok_or_else(|| {
                            KoopmanError::InvalidParameter("sampling RBF centers requires training data".into())
                        })?;
                        sample_centers(data, k, *seed)?
                    }
                };
                ObservableLibrary::rbf_seeded(n_input, *rbf_type, centers, *shape_eps, *order, *seed)
            }
            ObservableConfig::RandomFourier {
                n_features,
                sigma,
                seed,
                include_state,
                ..
            } => ObservableLibrary::random_fourier(n_input, *n_features, *sigma, *seed, *include_state),
            ObservableConfig::Concat { parts, .. } => {
                let built = parts
                    .iter()
                    .map(|p| p.build(n_input, training))
                    .collect::<Result<Vec<_>>>()?;
                ObservableLibrary::concat(built)
            }
        }
    }
}

/// Draw `k` distinct training states (columns of `data`) as centers.
fn sample_centers(data: &DMatrix<f64>, k: usize, seed: u64) -> Result<DMatrix<f64>> {
    use rand::SeedableRng;
    let m = data.ncols();
    if k == 0 || k > m {
        return Err(KoopmanError::InvalidParameter(format!(
            "cannot draw {k} RBF centers from {m} training states"
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut picks = rand::seq::index::sample(&mut rng, m, k).into_vec();
    picks.sort_unstable();
    Ok(DMatrix::from_fn(k, data.nrows(), |i, j| data[(j, picks[i])]))
}

/// Linear map `x = C z` from lifted coordinates back to the state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionMap {
    c: DMatrix<f64>,
    exact_index: Option<Vec<usize>>,
}

impl ReconstructionMap {
    /// Selection matrix picking `index[i]` into output `i`.
    pub fn from_index(index: &[usize], n_lifted: usize) -> Self {
        let mut c = DMatrix::zeros(index.len(), n_lifted);
        for (i, &j) in index.iter().enumerate() {
            c[(i, j)] = 1.0;
        }
        ReconstructionMap {
            c,
            exact_index: Some(index.to_vec()),
        }
    }

    /// Dense map. A 0/1 selection matrix is recognised as an exact embedding.
    pub fn from_matrix(c: DMatrix<f64>) -> Self {
        let mut index = Vec::with_capacity(c.nrows());
        for row in c.row_iter() {
            let ones: Vec<usize> = (0..row.len()).filter(|&j| row[j] == 1.0).collect();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones.len() == 1 && zeros + 1 == row.len() {
                index.push(ones[0]);
            } else {
                return ReconstructionMap { c, exact_index: None };
            }
        }
        ReconstructionMap {
            c,
            exact_index: Some(index),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn is_exact(&self) -> bool {
        self.exact_index.is_some()
    }

    pub fn n_state(&self) -> usize {
        self.c.nrows()
    }

    pub fn reconstruct(&self, z: &[f64]) -> Vec<f64> {
        match &self.exact_index {
            Some(idx) => idx.iter().map(|&i| z[i]).collect(),
            None => (0..self.c.nrows())
                .map(|i| self.c.row(i).iter().zip(z).map(|(a, b)| a * b).sum())
                .collect(),
        }
    }
}

/// Reconstruction for a delay-free library trained on states `x` (`n × m`).
pub fn fit_reconstruction(library: &ObservableLibrary, x: &DMatrix<f64>) -> Result<(ReconstructionMap, Vec<Finding>)> {
    if let Some(idx) = library.state_index() {
        return Ok((ReconstructionMap::from_index(idx, library.n_output()), Vec::new()));
    }
    let z = library.lift_columns(x)?;
    fit_reconstruction_lifted(library, x, &z)
}

/// As [`fit_reconstruction`], with lifted snapshots `z` already computed
/// (column `j` of `z` lifts the window ending at column `j` of `x`).
pub fn fit_reconstruction_lifted(
    library: &ObservableLibrary,
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
) -> Result<(ReconstructionMap, Vec<Finding>)> {
    if let Some(idx) = library.state_index() {
        return Ok((ReconstructionMap::from_index(idx, library.n_output()), Vec::new()));
    }
    let n_lifted = library.n_output();
    if x.ncols() < n_lifted {
        return Err(KoopmanError::InvalidParameter(format!(
            "fitted reconstruction needs at least {n_lifted} snapshots, got {}",
            x.ncols()
        )));
    }
    let (c, rank) = linalg::lstsq_right(x, z, DEFAULT_CUTOFF)?;
    let mut findings = Vec::new();
    if rank < n_lifted {
        findings.push(Finding::new(
            FindingKind::RankDeficient,
            format!("lifted training data has rank {rank} < {n_lifted}; minimum-norm reconstruction used"),
        ));
    }
    Ok((ReconstructionMap::from_matrix(c), findings))
}
