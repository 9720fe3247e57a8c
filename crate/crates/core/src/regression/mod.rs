//! Best-fit linear operators on (lifted) snapshot pairs: DMD, EDMD, their
//! controlled variants, Hankel DMD and kernel DMD.

mod eigen;
mod kernel;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KoopmanError, Result};
use crate::linalg::{self, CMatrix, TruncatedSvd, DEFAULT_CUTOFF};
use crate::observables::ObservableLibrary;
use crate::types::{Finding, TrajectoryDataset};

pub use eigen::{continuous_from_discrete, eig_biorthogonal, max_eigen_residual, EigenSystem};
pub use kernel::{fit_kdmd, KernelConfig, KernelKind, KernelLift, KernelRegression};

/// Which vectors are reported as Koopman modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    /// `Z' V S⁻¹ w / λ`, falling back to projected modes where λ = 0.
    #[default]
    Exact,
    /// `U w`.
    Projected,
}

/// Rank selection shared by all regressors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Hard upper bound on the rank.
    pub rank: Option<usize>,
    /// Relative singular-value cutoff σᵢ/σ₁.
    pub cutoff: f64,
    pub modes: ModeKind,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            rank: None,
            cutoff: DEFAULT_CUTOFF,
            modes: ModeKind::Exact,
        }
    }
}

impl FitOptions {
    pub fn with_rank(rank: usize) -> Self {
        FitOptions {
            rank: Some(rank),
            ..Self::default()
        }
    }
}

/// Singular factors of the regression input, `Z ≈ U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl From<TruncatedSvd> for SvdFactors {
    fn from(t: TruncatedSvd) -> Self {
        SvdFactors { u: t.u, s: t.s, v: t.v }
    }
}

/// Fitted operator blocks with their eigen-decomposition.
#[derive(Debug, Clone)]
pub struct RegressionResult {
    /// Full-space state-transition block (`basis · reduced · basisᵀ`).
    pub a: DMatrix<f64>,
    /// Operator in reduced coordinates.
    pub a_reduced: DMatrix<f64>,
    /// Input block, controlled variants only.
    pub b: Option<DMatrix<f64>>,
    /// Orthonormal basis of the reduced coordinates.
    pub basis: DMatrix<f64>,
    pub rank: usize,
    pub svd: SvdFactors,
    /// Eigenvalues of `a_reduced`; vectors mapped to full space (projected).
    pub eigen: EigenSystem,
    /// Reported modes per [`ModeKind`].
    pub modes: CMatrix,
    pub mode_kind: ModeKind,
    /// `‖Z' − A Z − B U‖_F / ‖Z'‖_F` on the training pairs.
    pub residual: f64,
    pub findings: Vec<Finding>,
}

impl RegressionResult {
    pub fn n_lifted(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.as_ref().map_or(0, |b| b.ncols())
    }

    /// Smallest retained singular value of the regression input.
    pub fn sigma_min(&self) -> f64 {
        self.svd.s.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Recompute continuous eigenvalues for a sample interval.
    pub fn with_dt(mut self, dt: f64) -> Self {
        self.eigen = self.eigen.with_dt(dt);
        self
    }
}

fn check_pairs(z: &DMatrix<f64>, zprime: &DMatrix<f64>) -> Result<()> {
    if z.shape() != zprime.shape() {
        return Err(KoopmanError::DimensionMismatch {
            expected: z.ncols(),
            got: zprime.ncols(),
            context: format!("snapshot matrices {:?} vs {:?}", z.shape(), zprime.shape()),
        });
    }
    if z.ncols() < 2 {
        return Err(KoopmanError::InvalidParameter(format!(
            "need at least 2 snapshot pairs, got {}",
            z.ncols()
        )));
    }
    Ok(())
}

fn relative_residual(zprime: &DMatrix<f64>, predicted: &DMatrix<f64>) -> f64 {
    let denom = zprime.norm();
    let r = (zprime - predicted).norm();
    if denom > 0.0 {
        r / denom
    } else {
        r
    }
}

/// Exact-DMD modes `G w / λ` with `G = Z' V S⁻¹`; projected `basis·w` where λ ≈ 0.
fn exact_modes(g: &DMatrix<f64>, reduced_right: &CMatrix, projected: &CMatrix, lambdas: &[Complex64]) -> CMatrix {
    let gc = linalg::to_complex(g);
    let scale = lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let mut out = projected.clone();
    for (j, l) in lambdas.iter().enumerate() {
        if l.norm() > 1e-13 * scale.max(1.0) {
            let col = &gc * reduced_right.column(j) / *l;
            out.set_column(j, &col);
        }
    }
    out
}

/// Extended DMD: truncated SVD of `Z`, reduced operator
/// `Ã = Uᵣᵀ Z' Vᵣ Sᵣ⁻¹`, full operator `A = Uᵣ Ã Uᵣᵀ`.
pub fn fit_edmd(z: &DMatrix<f64>, zprime: &DMatrix<f64>, opts: &FitOptions) -> Result<RegressionResult> {
    check_pairs(z, zprime)?;
    let svd = linalg::truncated_svd(z, opts.rank, opts.cutoff)?;
    let inv_s = DMatrix::from_diagonal(&svd.s.map(|v| 1.0 / v));
    let g = zprime * &svd.v * inv_s;
    let a_reduced = svd.u.transpose() * &g;
    let a = &svd.u * &a_reduced * svd.u.transpose();

    let reduced = eig_biorthogonal(&a_reduced)?;
    let reduced_right = reduced.right.clone();
    let eigen = reduced.lift_vectors(&svd.u);
    let modes = match opts.modes {
        ModeKind::Exact => exact_modes(&g, &reduced_right, &eigen.right, &eigen.lambdas),
        ModeKind::Projected => eigen.right.clone(),
    };
    let residual = relative_residual(zprime, &(&a * z));
    Ok(RegressionResult {
        rank: svd.rank(),
        basis: svd.u.clone(),
        a,
        a_reduced,
        b: None,
        svd: svd.into(),
        eigen,
        modes,
        mode_kind: opts.modes,
        residual,
        findings: Vec::new(),
    })
}

/// SVD-based exact DMD on raw states; identical to [`fit_edmd`] with the
/// identity lifting.
pub fn fit_dmd(x: &DMatrix<f64>, xprime: &DMatrix<f64>, opts: &FitOptions) -> Result<RegressionResult> {
    fit_edmd(x, xprime, opts)
}

/// Rank options for the controlled regressors: `rank_in` truncates the
/// stacked `[Z; U]`, `rank_out` truncates the output space `Z'`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlOptions {
    pub rank_in: Option<usize>,
    pub rank_out: Option<usize>,
    pub fit: FitOptions,
}

/// EDMD with control: regress `Z'` on `Ω = [Z; U]` and split the result into
/// `A` (N columns) and `B` (q columns). The input-evolution rows are not fitted.
pub fn fit_edmdc(
    z: &DMatrix<f64>,
    zprime: &DMatrix<f64>,
    u: &DMatrix<f64>,
    opts: &ControlOptions,
) -> Result<RegressionResult> {
    check_pairs(z, zprime)?;
    let n = z.nrows();
    let q = u.nrows();
    if q == 0 {
        return Err(KoopmanError::InvalidParameter(
            "no input channels; use the unforced regressor".into(),
        ));
    }
    if u.ncols() != z.ncols() {
        return Err(KoopmanError::DimensionMismatch {
            expected: z.ncols(),
            got: u.ncols(),
            context: "input snapshot count".into(),
        });
    }
    if let Some(r) = opts.rank_in {
        if r > n + q {
            return Err(KoopmanError::InvalidParameter(format!(
                "rank_in {r} exceeds stacked dimension {}",
                n + q
            )));
        }
    }
    let mut omega = DMatrix::zeros(n + q, z.ncols());
    omega.rows_mut(0, n).copy_from(z);
    omega.rows_mut(n, q).copy_from(u);

    let svd_in = linalg::truncated_svd(&omega, opts.rank_in, opts.fit.cutoff)?;
    let inv_s = DMatrix::from_diagonal(&svd_in.s.map(|v| 1.0 / v));
    let g = zprime * &svd_in.v * inv_s;
    let a_full = &g * svd_in.u.rows(0, n).transpose();
    let b_full = &g * svd_in.u.rows(n, q).transpose();

    let svd_out = linalg::truncated_svd(zprime, opts.rank_out, opts.fit.cutoff)?;
    let (basis, a, a_reduced, b) = if svd_out.rank() == n {
        (DMatrix::identity(n, n), a_full.clone(), a_full, b_full)
    } else {
        let basis = svd_out.u.clone();
        let a_reduced = basis.transpose() * &a_full * &basis;
        let b_reduced = basis.transpose() * &b_full;
        let a = &basis * &a_reduced * basis.transpose();
        let b = &basis * b_reduced;
        (basis, a, a_reduced, b)
    };

    let reduced = eig_biorthogonal(&a_reduced)?;
    let reduced_right = reduced.right.clone();
    let eigen = reduced.lift_vectors(&basis);
    let modes = match opts.fit.modes {
        ModeKind::Exact => {
            // Z' Ṽ S̃⁻¹ Ũ₁ᵀ applied to the reduced eigenvectors.
            let g_reduced = &g * svd_in.u.rows(0, n).transpose() * &basis;
            exact_modes(&g_reduced, &reduced_right, &eigen.right, &eigen.lambdas)
        }
        ModeKind::Projected => eigen.right.clone(),
    };
    let residual = relative_residual(zprime, &(&a * z + &b * u));
    Ok(RegressionResult {
        rank: basis.ncols(),
        basis,
        a,
        a_reduced,
        b: Some(b),
        svd: svd_in.into(),
        eigen,
        modes,
        mode_kind: opts.fit.modes,
        residual,
        findings: Vec::new(),
    })
}

/// DMD with control on raw states (two-SVD reduction when `rank_out < n`).
pub fn fit_dmdc(
    x: &DMatrix<f64>,
    xprime: &DMatrix<f64>,
    u: &DMatrix<f64>,
    opts: &ControlOptions,
) -> Result<RegressionResult> {
    fit_edmdc(x, xprime, u, opts)
}

/// Lifted snapshot pairs assembled trajectory by trajectory, so pairs never
/// straddle trajectory boundaries.
#[derive(Debug, Clone)]
pub struct LiftedPairs {
    pub z: DMatrix<f64>,
    pub zprime: DMatrix<f64>,
    /// Inputs at the timestamps of `z`, when the dataset has inputs.
    pub u: Option<DMatrix<f64>>,
    /// Raw current state for every column of `z`.
    pub x: DMatrix<f64>,
    pub pairs_per_trajectory: Vec<usize>,
}

/// Lift every trajectory and pair consecutive lifted snapshots. A library
/// with `d` delays turns a trajectory of `T` samples into `T − d − 1` pairs.
pub fn lift_pairs(library: &ObservableLibrary, data: &TrajectoryDataset) -> Result<LiftedPairs> {
    let d = library.delays();
    data.check_lengths(d + 2)?;
    if data.n_states() != library.n_input() {
        return Err(KoopmanError::DimensionMismatch {
            expected: library.n_input(),
            got: data.n_states(),
            context: "dataset state dimension vs observables".into(),
        });
    }
    let counts: Vec<usize> = data.trajectories().iter().map(|t| t.nrows() - d - 1).collect();
    let m: usize = counts.iter().sum();
    let n_out = library.n_output();
    let n = data.n_states();
    let q = data.n_inputs();
    let mut z = DMatrix::zeros(n_out, m);
    let mut zprime = DMatrix::zeros(n_out, m);
    let mut x = DMatrix::zeros(n, m);
    let mut u = data.inputs().map(|_| DMatrix::zeros(q, m));
    let mut col = 0;
    for (i, traj) in data.trajectories().iter().enumerate() {
        let lifted = library.lift_trajectory(traj)?;
        let pairs = counts[i];
        z.columns_mut(col, pairs).copy_from(&lifted.columns(0, pairs));
        zprime.columns_mut(col, pairs).copy_from(&lifted.columns(1, pairs));
        for k in 0..pairs {
            x.set_column(col + k, &traj.row(k + d).transpose());
        }
        if let (Some(u), Some(inputs)) = (u.as_mut(), data.inputs()) {
            for k in 0..pairs {
                u.set_column(col + k, &inputs[i].row(k + d).transpose());
            }
        }
        col += pairs;
    }
    Ok(LiftedPairs {
        z,
        zprime,
        u,
        x,
        pairs_per_trajectory: counts,
    })
}

/// Hankel DMD: `delays`-step time-delay embedding followed by DMD, or by
/// DMDc when the dataset carries inputs.
pub fn fit_hankel(data: &TrajectoryDataset, delays: usize, opts: &ControlOptions) -> Result<RegressionResult> {
    let library = ObservableLibrary::time_delay(data.n_states().max(1), delays)?;
    let pairs = lift_pairs(&library, data)?;
    let result = match &pairs.u {
        Some(u) => fit_edmdc(&pairs.z, &pairs.zprime, u, opts)?,
        None => fit_edmd(&pairs.z, &pairs.zprime, &opts.fit)?,
    };
    Ok(result.with_dt(data.dt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_real(l: &[Complex64]) -> Vec<f64> {
        let mut v: Vec<f64> = l.iter().map(|x| x.re).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Trajectories of `x_{k+1} = M x_k` from each initial condition.
    fn linear_data(m: &DMatrix<f64>, inits: &[Vec<f64>], steps: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = m.nrows();
        let cols = inits.len() * steps;
        let mut x = DMatrix::zeros(n, cols);
        let mut xp = DMatrix::zeros(n, cols);
        let mut c = 0;
        for init in inits {
            let mut s = DVector::from_column_slice(init);
            for _ in 0..steps {
                let next = m * &s;
                x.set_column(c, &s);
                xp.set_column(c, &next);
                s = next;
                c += 1;
            }
        }
        (x, xp)
    }

    fn diag_data() -> (DMatrix<f64>, DMatrix<f64>) {
        let m = DMatrix::from_row_slice(2, 2, &[0.9, 0.0, 0.0, 0.5]);
        linear_data(&m, &[vec![1.0, 0.0], vec![0.0, 1.0]], 10)
    }

    #[test]
    fn dmd_diagonal_map() {
        let (x, xp) = diag_data();
        let r = fit_dmd(&x, &xp, &FitOptions::default()).unwrap();
        assert!((r.eigen.lambdas[0] - c(0.9, 0.0)).norm() < 1e-10);
        assert!((r.eigen.lambdas[1] - c(0.5, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn dmd_rank_one_keeps_slow_mode() {
        let (x, xp) = diag_data();
        // SVD oracle: the dominant singular direction of X is e1 because
        // Σ 0.81^k > Σ 0.25^k
        let s1: f64 = (0..10).map(|k| 0.81f64.powi(k)).sum();
        let s2: f64 = (0..10).map(|k| 0.25f64.powi(k)).sum();
        assert!(s1 > s2);
        let r = fit_dmd(&x, &xp, &FitOptions::with_rank(1)).unwrap();
        assert_eq!(r.rank, 1);
        assert!((r.eigen.lambdas[0] - c(0.9, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constant_trajectory_has_unit_eigenvalue() {
        let x = DMatrix::from_element(2, 5, 3.0);
        let r = fit_dmd(&x, &x, &FitOptions::default()).unwrap();
        assert_eq!(r.rank, 1);
        assert!((r.eigen.lambdas[0] - c(1.0, 0.0)).norm() < 1e-14);
        let zero = DMatrix::zeros(2, 5);
        assert!(matches!(
            fit_dmd(&zero, &zero, &FitOptions::default()),
            Err(KoopmanError::AllBelowCutoff)
        ));
    }

    #[test]
    fn identity_dynamics() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let z = DMatrix::from_fn(3, 20, |_, _| rng.random::<f64>());
        let r = fit_edmd(&z, &z, &FitOptions::default()).unwrap();
        assert!((&r.a - DMatrix::identity(3, 3)).abs().max() < 1e-12);
        assert!(r.eigen.lambdas.iter().all(|l| (l - c(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn recovers_random_linear_map() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let m = DMatrix::from_fn(3, 3, |_, _| rng.random::<f64>() - 0.5);
        let z = DMatrix::from_fn(3, 50, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let zp = &m * &z;
        // normal-equations oracle Z′Zᵀ(ZZᵀ)⁻¹
        let gram = (&z * z.transpose()).cholesky().unwrap();
        let oracle = gram.solve(&(&z * zp.transpose())).transpose();
        let r = fit_edmd(&z, &zp, &FitOptions::default()).unwrap();
        assert!((&r.a - &m).abs().max() < 1e-8);
        assert!((&r.a - &oracle).abs().max() < 1e-8);
        let resid = max_eigen_residual(&r.a, &r.eigen);
        assert!(resid <= 1e-8 * linalg::spectral_norm(&r.a));
    }

    #[test]
    fn least_squares_local_optimality() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let z = DMatrix::from_fn(4, 30, |_, _| rng.random::<f64>() - 0.5);
        let zp = DMatrix::from_fn(4, 30, |_, _| rng.random::<f64>() - 0.5);
        let r = fit_edmd(&z, &zp, &FitOptions::default()).unwrap();
        let base = (&zp - &r.a * &z).norm();
        for _ in 0..20 {
            let e = DMatrix::from_fn(4, 4, |_, _| rng.random::<f64>() - 0.5);
            let perturbed = (&zp - (&r.a + e * 1e-3) * &z).norm();
            assert!(base <= perturbed);
        }
    }

    #[test]
    fn mismatched_or_tiny_inputs() {
        let z = DMatrix::zeros(2, 1);
        assert!(fit_edmd(&z, &z, &FitOptions::default()).is_err());
        assert!(fit_edmd(&DMatrix::zeros(2, 3), &DMatrix::zeros(2, 4), &FitOptions::default()).is_err());
    }

    #[test]
    fn exact_and_projected_modes_coincide_at_full_rank() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let m = DMatrix::from_fn(3, 3, |_, _| rng.random::<f64>() - 0.5);
        let z = DMatrix::from_fn(3, 40, |_, _| rng.random::<f64>() - 0.5);
        let zp = &m * &z;
        let r = fit_edmd(&z, &zp, &FitOptions::default()).unwrap();
        assert!(linalg::max_abs_complex(&(&r.modes - &r.eigen.right)) < 1e-10);
    }

    #[test]
    fn scalar_controlled_system() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let z = DMatrix::from_fn(1, 30, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let u = DMatrix::from_fn(1, 30, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let zp = &z * 0.5 + &u * 1.0;
        let r = fit_edmdc(&z, &zp, &u, &ControlOptions::default()).unwrap();
        assert!((r.a[(0, 0)] - 0.5).abs() < 1e-10);
        assert!((r.b.as_ref().unwrap()[(0, 0)] - 1.0).abs() < 1e-10);
        let r = fit_dmdc(&z, &zp, &u, &ControlOptions::default()).unwrap();
        assert!((r.a[(0, 0)] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn zero_input_reduces_to_unforced_fit() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = DMatrix::from_fn(3, 3, |_, _| rng.random::<f64>() - 0.5);
        let z = DMatrix::from_fn(3, 40, |_, _| rng.random::<f64>() - 0.5);
        let zp = &m * &z;
        let u = DMatrix::zeros(1, 40);
        let ctrl = fit_edmdc(&z, &zp, &u, &ControlOptions::default()).unwrap();
        let free = fit_edmd(&z, &zp, &FitOptions::default()).unwrap();
        let b_norm = linalg::spectral_norm(ctrl.b.as_ref().unwrap());
        assert!(b_norm <= 1e-8 * linalg::spectral_norm(&ctrl.a));
        assert!((&ctrl.a - &free.a).abs().max() < 1e-10);
    }

    #[test]
    fn controlled_argument_errors() {
        let z = DMatrix::zeros(2, 5);
        let u = DMatrix::zeros(0, 5);
        assert!(fit_edmdc(&z, &z, &u, &ControlOptions::default()).is_err());
        let u = DMatrix::zeros(1, 5);
        let opts = ControlOptions {
            rank_in: Some(4),
            ..Default::default()
        };
        assert!(fit_edmdc(&z, &z, &u, &opts).is_err());
    }

    #[test]
    fn two_svd_reduction_on_rank_deficient_outputs() {
        // states confined to a 2-d subspace of R³
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let basis = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let core = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, -0.1, 0.6]);
        let bcore = DMatrix::from_row_slice(2, 1, &[1.0, -0.5]);
        let mut w = DVector::from_vec(vec![1.0, -1.0]);
        let mut x = DMatrix::zeros(3, 60);
        let mut xp = DMatrix::zeros(3, 60);
        let mut u = DMatrix::zeros(1, 60);
        for k in 0..60 {
            let uk: f64 = rng.random::<f64>() - 0.5;
            let next = &core * &w + &bcore * uk;
            x.set_column(k, &(&basis * &w));
            xp.set_column(k, &(&basis * &next));
            u[(0, k)] = uk;
            w = next;
        }
        let r = fit_dmdc(&x, &xp, &u, &ControlOptions::default()).unwrap();
        assert_eq!(r.rank, 2);
        let mut got = sorted_real(&r.eigen.lambdas);
        let mut want: Vec<f64> = eig_biorthogonal(&core).unwrap().lambdas.iter().map(|l| l.re).collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-8);
        }
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn hankel_single_cosine() {
        let (omega, dt) = (1.3_f64, 0.1);
        let traj = DMatrix::from_fn(200, 1, |k, _| (omega * k as f64 * dt).cos());
        let data = TrajectoryDataset::new(vec![traj], dt).unwrap();
        let r = fit_hankel(&data, 1, &ControlOptions::default()).unwrap();
        assert_eq!(r.eigen.len(), 2);
        let expected = Complex64::from_polar(1.0, omega * dt);
        assert!((r.eigen.lambdas[0] - expected.conj()).norm() < 1e-8);
        assert!((r.eigen.lambdas[1] - expected).norm() < 1e-8);
    }

    #[test]
    fn hankel_without_delays_is_dmd() {
        let m = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.0, 0.5]);
        let traj = DMatrix::from_fn(12, 2, |k, j| (m.pow(k as u32) * DVector::from_vec(vec![1.0, 1.0]))[j]);
        let data = TrajectoryDataset::new(vec![traj], 1.0).unwrap();
        let h = fit_hankel(&data, 0, &ControlOptions::default()).unwrap();
        let pairs = crate::types::build_snapshot_pairs(&data).unwrap();
        let d = fit_dmd(&pairs.x, &pairs.xprime, &FitOptions::default()).unwrap();
        assert_eq!(h.eigen.lambdas, d.eigen.lambdas);
    }

    #[test]
    fn hankel_two_tones() {
        let (w1, w2, dt) = (1.0_f64, 2.0_f64.sqrt(), 0.05);
        let traj = DMatrix::from_fn(400, 1, |k, _| {
            let t = k as f64 * dt;
            (w1 * t).cos() + 0.5 * (w2 * t).sin()
        });
        let data = TrajectoryDataset::new(vec![traj], dt).unwrap();
        let r = fit_hankel(&data, 3, &ControlOptions::default()).unwrap();
        assert_eq!(r.eigen.len(), 4);
        for w in [w1, w2] {
            for sign in [1.0, -1.0] {
                let target = Complex64::from_polar(1.0, sign * w * dt);
                let best = r.eigen.lambdas.iter().map(|l| (l - target).norm()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-6, "missing {target}: {best}");
            }
        }
    }

    #[test]
    fn hankel_rank_deficient_embedding_is_exact() {
        // two-state rotation with two delays: 6-dim embedding of rank 2
        let a = DMatrix::from_row_slice(2, 2, &[0.95, 0.1, -0.1, 0.95]);
        let trajs = [[1.0, 0.0], [0.3, -0.7]]
            .iter()
            .map(|x0| DMatrix::from_fn(81, 2, |k, j| (a.pow(k as u32) * DVector::from_row_slice(x0))[j]))
            .collect();
        let data = TrajectoryDataset::new(trajs, 0.1).unwrap();
        let r = fit_hankel(&data, 2, &ControlOptions::default()).unwrap();
        assert_eq!(r.rank, 2);
        assert!(r.residual < 1e-12, "residual {}", r.residual);
        for target in [c(0.95, 0.1), c(0.95, -0.1)] {
            assert!(r.eigen.lambdas.iter().any(|l| (l - target).norm() < 1e-12));
        }
    }

    #[test]
    fn hankel_rejects_short_trajectories() {
        let data = TrajectoryDataset::new(vec![DMatrix::zeros(4, 1)], 1.0).unwrap();
        assert!(matches!(
            fit_hankel(&data, 3, &ControlOptions::default()),
            Err(KoopmanError::TrajectoryTooShort { .. })
        ));
    }
}
