//! Dense linear-algebra helpers shared by the regressors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{KoopmanError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative singular-value cutoff used when the caller does not supply one.
pub const DEFAULT_CUTOFF: f64 = 1e-10;

/// Rank-r factors of a thin SVD, `M ≈ U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
    /// Every singular value before truncation, descending.
    pub full_spectrum: Vec<f64>,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }
}

/// Thin SVD truncated to `r = min(rank, #{σᵢ > cutoff·σ₁})`.
pub fn truncated_svd(m: &DMatrix<f64>, rank: Option<usize>, cutoff: f64) -> Result<TruncatedSvd> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(KoopmanError::InvalidParameter("empty matrix".into()));
    }
    let (u, full_spectrum, v) = svd(m)?;
    let top = full_spectrum[0];
    if !top.is_finite() || top <= 0.0 {
        return Err(KoopmanError::AllBelowCutoff);
    }
    let mut r = full_spectrum
        .iter()
        .take_while(|&&sv| sv > cutoff * top)
        .count();
    if let Some(k) = rank {
        r = r.min(k);
    }
    if r == 0 {
        return Err(KoopmanError::AllBelowCutoff);
    }

    Ok(TruncatedSvd {
        u: u.columns(0, r).into_owned(),
        s: DVector::from_column_slice(&full_spectrum[..r]),
        v: v.columns(0, r).into_owned(),
        full_spectrum,
    })
}

/// Thin SVD `M = U diag(s) Vᵀ` with `s` descending.
pub fn svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = f
        .thin_svd()
        .map_err(|e| KoopmanError::Numerical(format!("SVD failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = s.nrows();
    Ok((
        DMatrix::from_fn(m.nrows(), k, |i, j| u[(i, j)]),
        (0..k).map(|i| s[i]).collect(),
        DMatrix::from_fn(m.ncols(), k, |i, j| v[(i, j)]),
    ))
}

/// Thin SVD `M = U diag(s) Vᴴ` with `s` descending.
pub fn svd_complex(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    let f = faer::Mat::<Complex64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = f
        .thin_svd()
        .map_err(|e| KoopmanError::Numerical(format!("SVD failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = s.nrows();
    Ok((
        CMatrix::from_fn(m.nrows(), k, |i, j| u[(i, j)]),
        (0..k).map(|i| s[i].re).collect(),
        CMatrix::from_fn(m.ncols(), k, |i, j| v[(i, j)]),
    ))
}

/// Moore–Penrose pseudo-inverse, dropping singular values at or below `eps`.
pub fn pinv(m: &DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>> {
    let (u, s, v) = svd(m)?;
    let inv = DVector::from_iterator(s.len(), s.iter().map(|&x| if x > eps { 1.0 / x } else { 0.0 }));
    Ok(v * DMatrix::from_diagonal(&inv) * u.transpose())
}

/// Complex pseudo-inverse, dropping singular values at or below `eps`.
pub fn pinv_complex(m: &CMatrix, eps: f64) -> Result<CMatrix> {
    let (u, s, v) = svd_complex(m)?;
    let inv = CVector::from_iterator(
        s.len(),
        s.iter().map(|&x| Complex64::new(if x > eps { 1.0 / x } else { 0.0 }, 0.0)),
    );
    Ok(v * CMatrix::from_diagonal(&inv) * u.adjoint())
}

/// Minimum-norm least-squares solution of `X ≈ C·Z` for C, with a relative
/// singular-value cutoff on Z. Returns C and the rank used.
pub fn lstsq_right(x: &DMatrix<f64>, z: &DMatrix<f64>, cutoff: f64) -> Result<(DMatrix<f64>, usize)> {
    let svd = truncated_svd(z, None, cutoff)?;
    let inv_s = DMatrix::from_diagonal(&svd.s.map(|v| 1.0 / v));
    let c = x * &svd.v * inv_s * svd.u.transpose();
    Ok((c, svd.rank()))
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_complex(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
        .singular_values()
        .map_or(f64::NAN, |s| s.first().copied().unwrap_or(0.0))
}

/// Build a matrix from rows of equal length.
pub fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}
