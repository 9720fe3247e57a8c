//! Right/left eigen-decomposition of real operators with biorthogonal
//! normalization and a fixed, documented eigenvalue order.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{KoopmanError, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::types::{Finding, FindingKind};

/// Eigenvalues closer than this (relative to the operator scale) are treated
/// as one cluster when extracting eigenvectors.
const CLUSTER_TOL: f64 = 1e-9;
/// A cluster whose k-th smallest singular value of `A − λI` exceeds this
/// (relative) is reported as defective.
const DEFECTIVE_TOL: f64 = 1e-7;
const BIORTHO_TOL: f64 = 1e-8;

/// Discrete and continuous eigenvalues with right and left eigenvectors.
///
/// Columns of `right` and `left` are paired with `lambdas` by index and
/// satisfy `leftᴴ · right = I` whenever the eigenvalues are distinct. Each
/// left vector is scaled so its largest-modulus entry equals exactly 1.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub lambdas: Vec<Complex64>,
    pub mus: Vec<Complex64>,
    pub right: CMatrix,
    pub left: CMatrix,
    /// `true` where λ lies on the negative real axis, so μ carries an
    /// imaginary part of π/Δt and is aliasing-ambiguous.
    pub branch_cut: Vec<bool>,
    pub dt: f64,
    pub findings: Vec<Finding>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Recompute continuous eigenvalues for sample interval `dt`.
    pub fn with_dt(mut self, dt: f64) -> Self {
        let (mus, branch_cut, findings) = continuous_from_discrete(&self.lambdas, dt);
        self.mus = mus;
        self.branch_cut = branch_cut;
        self.findings
            .retain(|f| !matches!(f.kind, FindingKind::BranchCut | FindingKind::ZeroEigenvalue));
        self.findings.extend(findings);
        self.dt = dt;
        self
    }

    /// Map vectors from reduced coordinates into the full space spanned by
    /// the orthonormal columns of `basis`.
    pub fn lift_vectors(mut self, basis: &DMatrix<f64>) -> Self {
        let b = linalg::to_complex(basis);
        self.right = &b * &self.right;
        self.left = &b * &self.left;
        self
    }

    /// `max |leftᴴ right − I|`.
    pub fn biorthogonality_error(&self) -> f64 {
        let g = self.left.adjoint() * &self.right;
        let id = CMatrix::identity(g.nrows(), g.ncols());
        linalg::max_abs_complex(&(g - id))
    }
}

/// `μ = ln λ / Δt` on the principal branch. λ = 0 maps to `-∞`.
pub fn continuous_from_discrete(lambdas: &[Complex64], dt: f64) -> (Vec<Complex64>, Vec<bool>, Vec<Finding>) {
    let mut findings = Vec::new();
    let mut flags = Vec::with_capacity(lambdas.len());
    let mus = lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let on_cut = l.im == 0.0 && l.re < 0.0;
            flags.push(on_cut);
            if on_cut {
                findings.push(Finding::new(
                    FindingKind::BranchCut,
                    format!("eigenvalue {j} is negative real; continuous eigenvalue is aliasing-ambiguous"),
                ));
            }
            if l.norm() == 0.0 {
                findings.push(Finding::new(
                    FindingKind::ZeroEigenvalue,
                    format!("eigenvalue {j} is zero; continuous eigenvalue reported as -inf"),
                ));
                Complex64::new(f64::NEG_INFINITY, 0.0)
            } else {
                l.ln() / dt
            }
        })
        .collect();
    (mus, flags, findings)
}

/// Ordering: decreasing modulus, then decreasing real part, then increasing
/// imaginary part.
fn eig_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(a.im.total_cmp(&b.im))
}

/// Eigenvalues of a real matrix with exact conjugate symmetry enforced.
fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n == 1 {
        return Ok(vec![Complex64::new(a[(0, 0)], 0.0)]);
    }
    let schur = nalgebra::Schur::try_new(a.clone(), 1e-15, 0)
        .ok_or_else(|| KoopmanError::Numerical("Schur decomposition did not converge".into()))?;
    let raw: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();

    let scale = linalg::max_abs(a).max(f64::MIN_POSITIVE);
    let mut reals = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for l in raw {
        if l.im.abs() <= 1e-14 * scale {
            reals.push(Complex64::new(l.re, 0.0));
        } else if l.im > 0.0 {
            upper.push(l);
        } else {
            lower.push(l);
        }
    }
    if upper.len() != lower.len() {
        return Err(KoopmanError::Numerical("eigenvalues are not conjugate-symmetric".into()));
    }
    let mut out = reals;
    for l in upper {
        out.push(l);
        out.push(l.conj());
    }
    out.sort_by(eig_order);
    Ok(out)
}

/// Right and left eigenvectors of a square real matrix.
pub fn eig_biorthogonal(a: &DMatrix<f64>) -> Result<EigenSystem> {
    if a.nrows() != a.ncols() {
        return Err(KoopmanError::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
            context: "eigen-decomposition needs a square matrix".into(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Err(KoopmanError::InvalidParameter("empty operator".into()));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(KoopmanError::Numerical("operator has non-finite entries".into()));
    }
    let lambdas = eigenvalues(a)?;
    let scale = linalg::spectral_norm(a).max(f64::MIN_POSITIVE);
    let mut findings = Vec::new();

    let mut right = CMatrix::zeros(n, n);
    let mut done = vec![false; n];
    let mut defective_cluster = vec![false; n];
    for j in 0..n {
        if done[j] {
            continue;
        }
        let lj = lambdas[j];
        if lj.im < 0.0 {
            // handled with its conjugate partner
            continue;
        }
        let cluster: Vec<usize> = (j..n)
            .filter(|&k| !done[k] && (lambdas[k] - lj).norm() <= CLUSTER_TOL * scale.max(1.0))
            .collect();
        let (vectors, defective) = null_vectors(a, lj, cluster.len(), scale)?;
        if defective {
            findings.push(Finding::new(
                FindingKind::Defective,
                format!(
                    "eigenvalue {lj} (multiplicity {}) is defective; biorthogonality is waived for it",
                    cluster.len()
                ),
            ));
        }
        for (slot, &k) in cluster.iter().enumerate() {
            right.set_column(k, &vectors.column(slot));
            done[k] = true;
            defective_cluster[k] = defective;
        }
        if lj.im > 0.0 {
            for &k in &cluster {
                let partner = (0..n)
                    .find(|&p| !done[p] && lambdas[p] == lambdas[k].conj())
                    .ok_or_else(|| KoopmanError::Numerical("missing conjugate eigenvalue".into()))?;
                let conj_col = right.column(k).map(|v| v.conj());
                right.set_column(partner, &conj_col);
                done[partner] = true;
                defective_cluster[partner] = defective;
            }
        }
    }

    for mut col in right.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        }
    }

    let inverse = match right.clone().try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => inv,
        _ => {
            findings.push(Finding::new(
                FindingKind::Defective,
                "right eigenvector matrix is singular; left vectors from pseudo-inverse",
            ));
            linalg::pinv_complex(&right, 1e-12)?
        }
    };
    let mut left = inverse.adjoint();

    // Left vectors: largest-modulus entry scaled to exactly 1, with the right
    // vectors rescaled to keep lᴴw = 1.
    for j in 0..n {
        let col = left.column(j);
        let mut k_max = 0;
        let mut best = -1.0;
        for (k, v) in col.iter().enumerate() {
            if v.norm() > best {
                best = v.norm();
                k_max = k;
            }
        }
        let c = left[(k_max, j)];
        if c.norm() == 0.0 {
            continue;
        }
        let scaled: CVector = left.column(j) / c;
        left.set_column(j, &scaled);
        left[(k_max, j)] = Complex64::new(1.0, 0.0);
        let rescaled: CVector = right.column(j) * c.conj();
        right.set_column(j, &rescaled);
    }
    // exact conjugate symmetry between partner columns
    for j in 0..n {
        if lambdas[j].im > 0.0 {
            if let Some(p) = (j + 1..n).find(|&p| lambdas[p] == lambdas[j].conj()) {
                let r = right.column(j).map(|v| v.conj());
                let l = left.column(j).map(|v| v.conj());
                right.set_column(p, &r);
                left.set_column(p, &l);
            }
        }
    }

    let sys = EigenSystem {
        mus: Vec::new(),
        branch_cut: Vec::new(),
        dt: 1.0,
        lambdas,
        right,
        left,
        findings,
    };
    let err = sys.biorthogonality_error();
    let mut sys = sys.with_dt(1.0);
    if err > BIORTHO_TOL && !defective_cluster.iter().any(|&d| d) {
        sys.findings.push(Finding::new(
            FindingKind::Defective,
            format!("biorthogonality error {err:.3e} exceeds tolerance"),
        ));
    }
    Ok(sys)
}

/// `k` orthonormal vectors spanning the (numerical) null space of `A − λI`,
/// and whether that space is deficient (defective eigenvalue).
fn null_vectors(a: &DMatrix<f64>, lambda: Complex64, k: usize, scale: f64) -> Result<(CMatrix, bool)> {
    let n = a.nrows();
    let (vectors, sigmas): (CMatrix, Vec<f64>) = if lambda.im == 0.0 {
        let shifted = a - DMatrix::identity(n, n) * lambda.re;
        let (_, s, v) = linalg::svd(&shifted)?;
        let (order, sig) = ascending(&s);
        let mut out = CMatrix::zeros(n, k);
        for (slot, &i) in order.iter().take(k).enumerate() {
            for r in 0..n {
                out[(r, slot)] = Complex64::new(v[(r, i)], 0.0);
            }
        }
        (out, sig)
    } else {
        let shifted = linalg::to_complex(a) - CMatrix::identity(n, n) * lambda;
        let (_, s, v) = linalg::svd_complex(&shifted)?;
        let (order, sig) = ascending(&s);
        let mut out = CMatrix::zeros(n, k);
        for (slot, &i) in order.iter().take(k).enumerate() {
            out.set_column(slot, &v.column(i));
        }
        (out, sig)
    };
    let defective = sigmas.get(k - 1).is_some_and(|&s| s > DEFECTIVE_TOL * scale.max(1.0));
    Ok((vectors, defective))
}

fn ascending(s: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let sorted = order.iter().map(|&i| s[i]).collect();
    (order, sorted)
}

/// `max_j ‖A w_j − λ_j w_j‖ / ‖w_j‖`.
pub fn max_eigen_residual(a: &DMatrix<f64>, sys: &EigenSystem) -> f64 {
    let ac = linalg::to_complex(a);
    (0..sys.len())
        .map(|j| {
            let w = sys.right.column(j);
            let r = &ac * w - w * sys.lambdas[j];
            r.norm() / w.norm().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.9]);
        let e = eig_biorthogonal(&a).unwrap();
        assert_eq!(e.lambdas, vec![c(0.9, 0.0), c(0.5, 0.0)]);
        // first eigenvector is e2 (for 0.9), up to the normalization
        assert!(e.right[(0, 0)].norm() < 1e-15);
        assert!((e.right[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(e.biorthogonality_error() < 1e-14);
    }

    #[test]
    fn scaled_rotation() {
        let (rho, theta) = (0.8_f64, 0.3_f64);
        let a = DMatrix::from_row_slice(
            2,
            2,
            &[rho * theta.cos(), -rho * theta.sin(), rho * theta.sin(), rho * theta.cos()],
        );
        let e = eig_biorthogonal(&a).unwrap();
        let expected = Complex64::from_polar(rho, theta);
        assert!((e.lambdas[0] - expected.conj()).norm() < 1e-14);
        assert!((e.lambdas[1] - expected).norm() < 1e-14);
        assert_eq!(e.right.column(0).map(|v| v.conj()), e.right.column(1).into_owned());
        assert!(max_eigen_residual(&a, &e) < 1e-14);
    }

    #[test]
    fn random_matrices_are_biorthogonal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = DMatrix::from_fn(5, 5, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let e = eig_biorthogonal(&a).unwrap();
            assert!(e.biorthogonality_error() <= 1e-8);
            let norm = linalg::spectral_norm(&a);
            assert!(max_eigen_residual(&a, &e) <= 1e-8 * norm);
            for w in e.lambdas.windows(2) {
                assert!(w[0].norm() >= w[1].norm() - 1e-15);
            }
            for j in 0..5 {
                let col = e.left.column(j);
                let max = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
                assert_eq!(max, 1.0);
            }
        }
    }

    #[test]
    fn repeated_eigenvalues_get_independent_vectors() {
        let a = DMatrix::identity(3, 3);
        let e = eig_biorthogonal(&a).unwrap();
        assert!(e.lambdas.iter().all(|&l| l == c(1.0, 0.0)));
        assert!(e.biorthogonality_error() < 1e-12);
        assert!(e.findings.is_empty());
    }

    #[test]
    fn jordan_block_is_reported_defective() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        let e = eig_biorthogonal(&a).unwrap();
        assert!(e.findings.iter().any(|f| f.kind == FindingKind::Defective));
    }

    #[test]
    fn continuous_conversion() {
        let l = vec![c((-0.02f64).exp(), 0.0), c(1.0, 0.0), c(-0.5, 0.0), c(0.0, 0.0)];
        let (mus, cut, findings) = continuous_from_discrete(&l, 0.02);
        assert!((mus[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(mus[1], c(0.0, 0.0));
        assert!(cut[2] && !cut[0]);
        assert!((mus[2].im - std::f64::consts::PI / 0.02).abs() < 1e-9);
        assert_eq!(mus[3].re, f64::NEG_INFINITY);
        assert_eq!(findings.len(), 2);
        // 7-digit rounding of e^{-0.02}: ln(0.9801987)/0.02 = -0.999998638375819
        let (m, _, _) = continuous_from_discrete(&[c(0.9801987, 0.0)], 0.02);
        assert!((m[0].re + 0.999998638375819).abs() < 1e-12);
        assert!((m[0].re + 1.0).abs() < 2e-6);
    }

    #[test]
    fn ordering_ties() {
        let mut v = vec![c(0.0, 0.5), c(0.5, 0.0), c(-0.5, 0.0), c(0.0, -0.5), c(0.9, 0.0)];
        v.sort_by(eig_order);
        assert_eq!(v, vec![c(0.9, 0.0), c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(-0.5, 0.0)]);
    }
}
