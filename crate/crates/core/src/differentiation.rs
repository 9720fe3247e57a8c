//! Time derivatives of uniformly sampled signals.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{KoopmanError, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffMethod {
    /// Second-order central differences, one-sided second order at the ends.
    Fd2,
    /// Fourth-order central differences, `Fd2` stencils near the ends.
    Fd4,
    /// Local cubic least squares over `window` samples.
    SavitzkyGolay,
    /// Fourier differentiation of a periodic signal.
    Spectral,
    /// Cubic smoothing spline, analytic derivative.
    Spline,
    /// Total-variation regularized derivative.
    TotalVariation,
}

impl std::str::FromStr for DiffMethod {
    type Err = KoopmanError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fd2" | "finite_difference" => DiffMethod::Fd2,
            "fd4" => DiffMethod::Fd4,
            "savitzky_golay" | "sg" => DiffMethod::SavitzkyGolay,
            "spectral" => DiffMethod::Spectral,
            "spline" => DiffMethod::Spline,
            "total_variation" | "tv" => DiffMethod::TotalVariation,
            other => return Err(KoopmanError::InvalidParameter(format!("unknown differentiation method {other}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferentiationConfig {
    pub method: DiffMethod,
    /// Savitzky-Golay window, odd and at least 5.
    pub window: usize,
    /// Spline roughness penalty; 0 interpolates.
    pub smoothing: f64,
    pub tv_lambda: f64,
    pub tv_iters: usize,
    /// Required for the spectral method.
    pub periodic: bool,
}

impl DifferentiationConfig {
    pub fn new(method: DiffMethod) -> Self {
        DifferentiationConfig {
            method,
            window: 7,
            smoothing: 0.0,
            tv_lambda: 1e-4,
            tv_iters: 100,
            periodic: method == DiffMethod::Spectral,
        }
    }

    fn min_samples(&self) -> usize {
        match self.method {
            DiffMethod::Fd2 | DiffMethod::TotalVariation => 3,
            DiffMethod::Fd4 => 5,
            DiffMethod::SavitzkyGolay => self.window,
            DiffMethod::Spectral | DiffMethod::Spline => 4,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.method {
            DiffMethod::SavitzkyGolay if self.window < 5 || self.window % 2 == 0 => Err(
                KoopmanError::InvalidParameter(format!("window must be odd and >= 5, got {}", self.window)),
            ),
            DiffMethod::Spectral if !self.periodic => Err(KoopmanError::InvalidParameter(
                "spectral differentiation requires a periodic signal (set periodic)".into(),
            )),
            DiffMethod::Spline if !(self.smoothing >= 0.0) => {
                Err(KoopmanError::InvalidParameter("smoothing must be non-negative".into()))
            }
            DiffMethod::TotalVariation if self.tv_iters < 1 || !(self.tv_lambda > 0.0) => Err(
                KoopmanError::InvalidParameter("tv_lambda must be positive and tv_iters >= 1".into()),
            ),
            _ => Ok(()),
        }
    }
}

impl Default for DifferentiationConfig {
    fn default() -> Self {
        Self::new(DiffMethod::Fd2)
    }
}

/// Uniform spacing of `t`, rejecting relative deviations above 1e-8.
pub fn uniform_spacing(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(KoopmanError::InvalidDataset("need at least two timestamps".into()));
    }
    let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(KoopmanError::InvalidDataset("timestamps must be strictly increasing".into()));
    }
    for w in t.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-8 * h {
            return Err(KoopmanError::InvalidDataset(format!(
                "non-uniform sampling: step {} differs from {h}",
                w[1] - w[0]
            )));
        }
    }
    Ok(h)
}

/// Differentiate every column of `x` (`m × n`, one row per timestamp).
pub fn differentiate(config: &DifferentiationConfig, x: &DMatrix<f64>, t: &[f64]) -> Result<DMatrix<f64>> {
    config.validate()?;
    let m = x.nrows();
    if t.len() != m {
        return Err(KoopmanError::DimensionMismatch {
            expected: m,
            got: t.len(),
            context: "timestamps vs samples".into(),
        });
    }
    if m < config.min_samples() {
        return Err(KoopmanError::InvalidDataset(format!(
            "{:?} needs at least {} samples, got {m}",
            config.method,
            config.min_samples()
        )));
    }
    let h = uniform_spacing(t)?;
    let mut out = DMatrix::zeros(m, x.ncols());
    for (j, col) in x.column_iter().enumerate() {
        let y: Vec<f64> = col.iter().copied().collect();
        let d = match config.method {
            DiffMethod::Fd2 => fd2(&y, h),
            DiffMethod::Fd4 => fd4(&y, h),
            DiffMethod::SavitzkyGolay => savitzky_golay(&y, h, config.window)?,
            DiffMethod::Spectral => spectral(&y, h),
            DiffMethod::Spline => spline(&y, h, config.smoothing)?,
            DiffMethod::TotalVariation => total_variation(&y, h, config.tv_lambda, config.tv_iters)?,
        };
        out.set_column(j, &DVector::from_vec(d));
    }
    Ok(out)
}

fn fd2(y: &[f64], h: f64) -> Vec<f64> {
    let m = y.len();
    let mut d = vec![0.0; m];
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    d[m - 1] = (3.0 * y[m - 1] - 4.0 * y[m - 2] + y[m - 3]) / (2.0 * h);
    for i in 1..m - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    }
    d
}

fn fd4(y: &[f64], h: f64) -> Vec<f64> {
    let m = y.len();
    let mut d = fd2(y, h);
    for i in 2..m - 2 {
        d[i] = (-y[i + 2] + 8.0 * y[i + 1] - 8.0 * y[i - 1] + y[i - 2]) / (12.0 * h);
    }
    d
}

fn savitzky_golay(y: &[f64], h: f64, window: usize) -> Result<Vec<f64>> {
    let half = (window / 2) as f64;
    // cubic Vandermonde on offsets centred in the window
    let v = DMatrix::from_fn(window, 4, |k, p| (k as f64 - half).powi(p as i32));
    let pinv = linalg::pinv(&v, 1e-14)?;
    // weights for the derivative at every offset position inside the window
    let weights: Vec<Vec<f64>> = (0..window)
        .map(|pos| {
            let s = pos as f64 - half;
            let grad = [0.0, 1.0, 2.0 * s, 3.0 * s * s];
            (0..window)
                .map(|k| (0..4).map(|p| grad[p] * pinv[(p, k)]).sum())
                .collect()
        })
        .collect();
    let m = y.len();
    let hw = window / 2;
    Ok((0..m)
        .map(|i| {
            let start = i.saturating_sub(hw).min(m - window);
            let w = &weights[i - start];
            w.iter().zip(&y[start..start + window]).map(|(a, b)| a * b).sum::<f64>() / h
        })
        .collect())
}

fn spectral(y: &[f64], h: f64) -> Vec<f64> {
    let m = y.len();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(m);
    let inverse = planner.plan_fft_inverse(m);
    let mut buf: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    let period = m as f64 * h;
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if m % 2 == 0 && k == m / 2 {
            0.0
        } else if k <= m / 2 {
            k as f64
        } else {
            k as f64 - m as f64
        };
        let omega = std::f64::consts::TAU * freq / period;
        *c *= Complex64::new(0.0, omega);
    }
    inverse.process(&mut buf);
    buf.iter().map(|c| c.re / m as f64).collect()
}

/// Solve a symmetric positive-definite pentadiagonal system given its main
/// diagonal and first two super-diagonals.
fn solve_pentadiagonal(d0: &[f64], d1: &[f64], d2: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let p = d0.len();
    let mut l0 = vec![0.0; p];
    let mut l1 = vec![0.0; p];
    let mut l2 = vec![0.0; p];
    for i in 0..p {
        if i >= 2 {
            l2[i] = d2[i - 2] / l0[i - 2];
        }
        if i >= 1 {
            let prev = if i >= 2 { l2[i] * l1[i - 1] } else { 0.0 };
            l1[i] = (d1[i - 1] - prev) / l0[i - 1];
        }
        let diag = d0[i] - l1[i] * l1[i] - l2[i] * l2[i];
        if !(diag > 0.0) {
            return Err(KoopmanError::Numerical("spline system is not positive definite".into()));
        }
        l0[i] = diag.sqrt();
    }
    let mut z = vec![0.0; p];
    for i in 0..p {
        let mut s = rhs[i];
        if i >= 1 {
            s -= l1[i] * z[i - 1];
        }
        if i >= 2 {
            s -= l2[i] * z[i - 2];
        }
        z[i] = s / l0[i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = z[i];
        if i + 1 < p {
            s -= l1[i + 1] * x[i + 1];
        }
        if i + 2 < p {
            s -= l2[i + 2] * x[i + 2];
        }
        x[i] = s / l0[i];
    }
    Ok(x)
}

/// Natural cubic smoothing spline minimizing `Σ(yᵢ − f(tᵢ))² + s∫f''²`
/// (Reinsch form), differentiated at the knots.
fn spline(y: &[f64], h: f64, smoothing: f64) -> Result<Vec<f64>> {
    let m = y.len();
    let p = m - 2;
    let s = smoothing;
    let d0 = vec![2.0 * h / 3.0 + s * 6.0 / (h * h); p];
    let d1 = vec![h / 6.0 - s * 4.0 / (h * h); p.saturating_sub(1)];
    let d2 = vec![s / (h * h); p.saturating_sub(2)];
    let rhs: Vec<f64> = (0..p).map(|j| (y[j] - 2.0 * y[j + 1] + y[j + 2]) / h).collect();
    let interior = solve_pentadiagonal(&d0, &d1, &d2, &rhs)?;
    // second derivatives at all knots, natural ends
    let mut gamma = vec![0.0; m];
    gamma[1..m - 1].copy_from_slice(&interior);
    // fitted values f = y − s·Qγ
    let mut f = y.to_vec();
    if s > 0.0 {
        for j in 0..p {
            let g = interior[j] / h;
            f[j] -= s * g;
            f[j + 1] += 2.0 * s * g;
            f[j + 2] -= s * g;
        }
    }
    let mut d = vec![0.0; m];
    for i in 0..m - 1 {
        d[i] = (f[i + 1] - f[i]) / h - h * (2.0 * gamma[i] + gamma[i + 1]) / 6.0;
    }
    d[m - 1] = (f[m - 1] - f[m - 2]) / h + h * (gamma[m - 2] + 2.0 * gamma[m - 1]) / 6.0;
    Ok(d)
}

/// Minimize `½‖A u − (y − y₀)‖² + λ‖D u‖₁` by iteratively reweighted least
/// squares, with `|v| ≈ √(v² + ε)`. `A` is trapezoidal cumulative
/// integration, `D` the first difference.
fn total_variation(y: &[f64], h: f64, lambda: f64, iters: usize) -> Result<Vec<f64>> {
    const EPS: f64 = 1e-8;
    let m = y.len();
    let mut a = DMatrix::zeros(m, m);
    for i in 1..m {
        a[(i, 0)] = h / 2.0;
        for j in 1..i {
            a[(i, j)] = h;
        }
        a[(i, i)] = h / 2.0;
    }
    let ata = a.transpose() * &a;
    let target = DVector::from_iterator(m, y.iter().map(|v| v - y[0]));
    let atb = a.transpose() * target;

    let mut u = DVector::from_vec(fd2(y, h));
    for _ in 0..iters {
        let mut lhs = ata.clone();
        for i in 0..m - 1 {
            let diff = u[i + 1] - u[i];
            let w = lambda / (diff * diff + EPS).sqrt();
            lhs[(i, i)] += w;
            lhs[(i + 1, i + 1)] += w;
            lhs[(i, i + 1)] -= w;
            lhs[(i + 1, i)] -= w;
        }
        let chol = lhs
            .cholesky()
            .ok_or_else(|| KoopmanError::Numerical("total-variation system is not positive definite".into()))?;
        u = chol.solve(&atb);
    }
    Ok(u.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(m: usize, h: f64) -> Vec<f64> {
        (0..m).map(|i| i as f64 * h).collect()
    }

    fn column(t: &[f64], f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        DMatrix::from_iterator(t.len(), 1, t.iter().map(|&v| f(v)))
    }

    fn run(method: DiffMethod, t: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let x = column(t, f);
        differentiate(&DifferentiationConfig::new(method), &x, t)
            .unwrap()
            .iter()
            .copied()
            .collect()
    }

    #[test]
    fn fd2_quadratic() {
        let t = vec![0.0, 1.0, 2.0];
        let d = run(DiffMethod::Fd2, &t, |v| v * v);
        assert_eq!(d[1], 2.0);
        // one-sided second-order stencils are exact on quadratics too
        assert_eq!(d[0], 0.0);
        assert_eq!(d[2], 4.0);
    }

    #[test]
    fn fd4_quartic_interior() {
        let t = grid(11, 0.5);
        let d = run(DiffMethod::Fd4, &t, |v| v.powi(4));
        for i in 2..9 {
            let exact = 4.0 * t[i].powi(3);
            assert!((d[i] - exact).abs() <= 1e-10 * exact.abs().max(1.0), "{i}: {} vs {exact}", d[i]);
        }
    }

    #[test]
    fn savitzky_golay_cubic_everywhere() {
        let t = grid(20, 0.1);
        let d = run(DiffMethod::SavitzkyGolay, &t, |v| v.powi(3));
        for (i, &v) in t.iter().enumerate() {
            assert!((d[i] - 3.0 * v * v).abs() < 1e-10, "{i}");
        }
    }

    #[test]
    fn spectral_sine() {
        let m = 64;
        let h = std::f64::consts::TAU / m as f64;
        let t = grid(m, h);
        let d = run(DiffMethod::Spectral, &t, f64::sin);
        let err = t.iter().zip(&d).map(|(v, d)| (d - v.cos()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        let mut cfg = DifferentiationConfig::new(DiffMethod::Spectral);
        cfg.periodic = false;
        assert!(differentiate(&cfg, &column(&t, f64::sin), &t).is_err());
    }

    #[test]
    fn spline_interpolates_cubics_in_the_interior() {
        // natural end conditions only affect the ends; a straight line is exact
        let t = grid(12, 0.3);
        let d = run(DiffMethod::Spline, &t, |v| 2.0 * v - 1.0);
        assert!(d.iter().all(|v| (v - 2.0).abs() < 1e-12));
        let t = grid(200, 0.01);
        let d = run(DiffMethod::Spline, &t, f64::sin);
        for i in 20..180 {
            assert!((d[i] - t[i].cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn smoothing_spline_flattens_noise() {
        let t = grid(100, 0.1);
        let x = column(&t, |v| v + 0.01 * (37.0 * v).sin());
        let mut cfg = DifferentiationConfig::new(DiffMethod::Spline);
        cfg.smoothing = 1.0;
        let d = differentiate(&cfg, &x, &t).unwrap();
        for i in 10..90 {
            assert!((d[(i, 0)] - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn total_variation_ramp() {
        let t = grid(60, 0.05);
        let x = column(&t, |v| v);
        let mut cfg = DifferentiationConfig::new(DiffMethod::TotalVariation);
        cfg.tv_lambda = 1e-4;
        cfg.tv_iters = 100;
        let d = differentiate(&cfg, &x, &t).unwrap();
        assert!(d.iter().all(|v| (v - 1.0).abs() < 1e-3));
    }

    #[test]
    fn constant_signal_has_zero_derivative() {
        let t = grid(32, std::f64::consts::TAU / 32.0);
        for method in [
            DiffMethod::Fd2,
            DiffMethod::Fd4,
            DiffMethod::SavitzkyGolay,
            DiffMethod::Spectral,
            DiffMethod::Spline,
            DiffMethod::TotalVariation,
        ] {
            let d = run(method, &t, |_| 3.5);
            let tol = if method == DiffMethod::TotalVariation { 1e-6 } else { 1e-10 };
            assert!(d.iter().all(|v| v.abs() < tol), "{method:?}");
        }
    }

    #[test]
    fn argument_errors() {
        let t = vec![0.0, 1.0];
        assert!(differentiate(&DifferentiationConfig::new(DiffMethod::Fd2), &column(&t, |v| v), &t).is_err());
        let t = vec![0.0, 1.0, 2.5, 3.0, 4.0];
        assert!(differentiate(&DifferentiationConfig::new(DiffMethod::Fd2), &column(&t, |v| v), &t).is_err());
        let mut cfg = DifferentiationConfig::new(DiffMethod::SavitzkyGolay);
        cfg.window = 6;
        let t = grid(10, 1.0);
        assert!(differentiate(&cfg, &column(&t, |v| v), &t).is_err());
        assert!("nope".parse::<DiffMethod>().is_err());
    }

    proptest! {
        #[test]
        fn linear_methods_are_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            p in 0.1f64..2.0,
            q in 0.1f64..2.0,
        ) {
            let m = 32;
            let t = grid(m, std::f64::consts::TAU / m as f64);
            let x = column(&t, |v| (p * v).sin() + v * v);
            let y = column(&t, |v| (q * v).cos() - v);
            let combo = &x * a + &y * b;
            for method in [DiffMethod::Fd2, DiffMethod::Fd4, DiffMethod::SavitzkyGolay, DiffMethod::Spectral] {
                let cfg = DifferentiationConfig::new(method);
                let lhs = differentiate(&cfg, &combo, &t).unwrap();
                let rhs = differentiate(&cfg, &x, &t).unwrap() * a + differentiate(&cfg, &y, &t).unwrap() * b;
                prop_assert!((lhs - rhs).abs().max() < 1e-9);
            }
        }
    }
}
