//! Kernel DMD: the EDMD regression carried out on Gram matrices, so the
//! feature space is only ever touched through kernel evaluations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{eig_biorthogonal, ModeKind, RegressionResult, SvdFactors};
use crate::error::{KoopmanError, Result};
use crate::linalg::{self, CMatrix, DEFAULT_CUTOFF};

/// Kernel function `k(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelKind {
    /// `exp(−‖x − y‖² / (2σ²))`
    Gaussian { sigma: f64 },
    /// `(c + xᵀy)^degree`
    Polynomial {
        degree: u32,
        #[serde(default = "default_offset")]
        offset: f64,
    },
}

fn default_offset() -> f64 {
    1.0
}

impl KernelKind {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelKind::Gaussian { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            KernelKind::Polynomial { degree, offset } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (offset + dot).powi(degree as i32)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            KernelKind::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                KoopmanError::InvalidParameter(format!("kernel sigma must be positive, got {sigma}")),
            ),
            KernelKind::Polynomial { degree, .. } if degree < 1 => Err(KoopmanError::InvalidParameter(
                "polynomial kernel degree must be at least 1".into(),
            )),
            KernelKind::Polynomial { offset, .. } if offset < 0.0 => Err(KoopmanError::InvalidParameter(
                "polynomial kernel offset must be non-negative".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kernel: KernelKind,
    /// Tikhonov weight; the Gram matrix is regularized by `reg_eps·m·I`.
    #[serde(default)]
    pub reg_eps: f64,
}

/// Real coordinates `ζ(x) = Qᵣᵀ k(X, x)` on the leading Gram eigenspace.
/// The fitted operator advances these coordinates.
#[derive(Debug, Clone)]
pub struct KernelLift {
    pub kernel: KernelKind,
    /// Training states, one per column.
    pub centers: DMatrix<f64>,
    /// Leading Gram eigenvectors, `m × r`.
    pub projection: DMatrix<f64>,
}

impl KernelLift {
    pub fn n_input(&self) -> usize {
        self.centers.nrows()
    }

    pub fn n_output(&self) -> usize {
        self.projection.ncols()
    }

    /// `k(x, xᵢ)` for every training state.
    pub fn kernel_row(&self, x: &[f64]) -> Vec<f64> {
        self.centers
            .column_iter()
            .map(|c| self.kernel.eval(x, c.as_slice()))
            .collect()
    }

    pub fn lift(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_input() {
            return Err(KoopmanError::DimensionMismatch {
                expected: self.n_input(),
                got: x.len(),
                context: "state dimension".into(),
            });
        }
        let k = self.kernel_row(x);
        Ok(self
            .projection
            .column_iter()
            .map(|q| q.iter().zip(&k).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Kernel DMD output: the operator on [`KernelLift`] coordinates plus the
/// eigenfunction coefficients and least-squares Koopman modes.
#[derive(Debug, Clone)]
pub struct KernelRegression {
    pub result: RegressionResult,
    pub lift: KernelLift,
    /// Column j holds `α_j` with `φ_j(x) = Σᵢ α_{ij} k(x, xᵢ)`.
    pub alpha: CMatrix,
    /// State modes `v_j` (`n × r`) from projecting X onto the eigenfunctions.
    pub modes: CMatrix,
}

impl KernelRegression {
    /// `φ_j(x) = Σᵢ α_{ij} k(x, xᵢ)`.
    pub fn eigenfunctions(&self, x: &[f64]) -> Vec<Complex64> {
        let k = self.lift.kernel_row(x);
        self.alpha
            .column_iter()
            .map(|a| a.iter().zip(&k).map(|(c, v)| c * v).sum())
            .collect()
    }
}

fn gram(kernel: &KernelKind, rows: &DMatrix<f64>, cols: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(rows.ncols(), cols.ncols(), |i, j| {
        kernel.eval(rows.column(i).as_slice(), cols.column(j).as_slice())
    })
}

/// Kernel DMD on `n × m` snapshot matrices.
///
/// `G = k(X, X)` and `T_ij = k(x′ᵢ, xⱼ)`; with `G = Q Λ Qᵀ` truncated to the
/// rank-r leading eigenspace the operator is
/// `K = (Λᵣ + reg_eps·m·I)⁻¹ Qᵣᵀ T Qᵣ` and the returned `a` is `Kᵀ`.
/// `cutoff` (default 1e-10) applies to the Gram eigenvalue ratio Λᵢ/Λ₁.
pub fn fit_kdmd(
    x: &DMatrix<f64>,
    xprime: &DMatrix<f64>,
    config: &KernelConfig,
    rank: Option<usize>,
    cutoff: Option<f64>,
) -> Result<KernelRegression> {
    config.kernel.validate()?;
    if !(config.reg_eps >= 0.0 && config.reg_eps.is_finite()) {
        return Err(KoopmanError::InvalidParameter("reg_eps must be non-negative".into()));
    }
    super::check_pairs(x, xprime)?;
    let m = x.ncols();
    let cutoff = cutoff.unwrap_or(DEFAULT_CUTOFF);

    let g = gram(&config.kernel, x, x);
    let t = gram(&config.kernel, xprime, x);

    let eig = g.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    if !(top > 0.0) {
        return Err(KoopmanError::AllBelowCutoff);
    }
    let numeric = order
        .iter()
        .take_while(|&&i| eig.eigenvalues[i] > cutoff * top)
        .count();
    let r = match rank {
        Some(k) if k > numeric && config.reg_eps == 0.0 => return Err(KoopmanError::SingularGram),
        Some(k) => k.min(m),
        None => numeric,
    };
    if r == 0 {
        return Err(KoopmanError::AllBelowCutoff);
    }

    let mut q = DMatrix::zeros(m, r);
    let mut lam = Vec::with_capacity(r);
    for (k, &i) in order.iter().take(r).enumerate() {
        q.set_column(k, &eig.eigenvectors.column(i));
        lam.push(eig.eigenvalues[i]);
    }
    let shift = config.reg_eps * m as f64;
    let mut k_op = q.transpose() * &t * &q;
    for (i, l) in lam.iter().enumerate() {
        let d = l + shift;
        if d <= 0.0 {
            return Err(KoopmanError::SingularGram);
        }
        k_op.row_mut(i).scale_mut(1.0 / d);
    }
    let a = k_op.transpose();

    let eigen = eig_biorthogonal(&a)?;
    // φ_j(x) = l_jᴴ ζ(x) = k(x, X) · Qᵣ conj(l_j)
    let alpha = linalg::to_complex(&q) * eigen.left.map(|v| v.conj());

    let phi_x = linalg::to_complex(&g) * &alpha;
    let pinv = linalg::pinv_complex(&phi_x, 1e-12)?;
    let modes = (pinv * linalg::to_complex(&x.transpose())).transpose();

    let zeta_x = q.transpose() * &g;
    let zeta_xp = q.transpose() * t.transpose();
    let denom = zeta_xp.norm();
    let diff = (&zeta_xp - &a * &zeta_x).norm();
    let residual = if denom > 0.0 { diff / denom } else { diff };

    let result = RegressionResult {
        a: a.clone(),
        a_reduced: a,
        b: None,
        basis: DMatrix::identity(r, r),
        rank: r,
        svd: SvdFactors {
            u: q.clone(),
            s: nalgebra::DVector::from_iterator(r, lam.iter().map(|l| l.max(0.0).sqrt())),
            v: DMatrix::zeros(0, r),
        },
        modes: eigen.right.clone(),
        mode_kind: ModeKind::Projected,
        eigen,
        residual,
        findings: Vec::new(),
    };
    Ok(KernelRegression {
        result,
        lift: KernelLift {
            kernel: config.kernel,
            centers: x.clone(),
            projection: q,
        },
        alpha,
        modes,
    })
}
