//! Reference systems and a fixed-step RK4 integrator.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{KoopmanError, Result};


#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Continuous,
    Discrete,
}

/// A catalog system with its parameters resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    name: String,
    n: usize,
    q: usize,
    params: BTreeMap<String, f64>,
    kind: SystemKind,
}

fn defaults(name: &str) -> Option<(usize, usize, SystemKind, Vec<(&'static str, f64)>)> {
    use SystemKind::*;
    Some(match name {
        "slow_manifold" => (2, 0, Continuous, vec![("mu", -0.05), ("lambda", -1.0)]),
        "vdp_osc" => (2, 1, Continuous, vec![("mu", 2.0)]),
        "lorenz" => (3, 0, Continuous, vec![("sigma", 10.0), ("rho", 28.0), ("beta", 8.0 / 3.0)]),
        "forced_duffing" => (2, 1, Continuous, vec![("delta", 0.5), ("alpha", -1.0), ("beta", 1.0)]),
        "linear2d" => (2, 0, Discrete, vec![]),
        _ => return None,
    })
}

impl SystemSpec {
    /// Look up `name` in the catalog with default parameters.
    pub fn new(name: &str) -> Result<Self> {
        Self::with_params(name, &[])
    }

    /// Look up `name` and override parameters; unknown keys are rejected.
    pub fn with_params(name: &str, overrides: &[(String, f64)]) -> Result<Self> {
        let (n, q, kind, base) = defaults(name).ok_or_else(|| KoopmanError::UnknownSystem(name.to_string()))?;
        let mut params: BTreeMap<String, f64> = base.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        for (k, v) in overrides {
            match params.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    return Err(KoopmanError::InvalidParameter(format!("unknown parameter {k} for {name}")));
                }
            }
        }
        Ok(SystemSpec { name: name.to_string(), n, q, params, kind })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn n_inputs(&self) -> usize {
        self.q
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    fn p(&self, key: &str) -> f64 {
        self.params[key]
    }

    /// Vector field of a continuous system.
    pub fn rhs(&self, x: &[f64], u: &[f64], _t: f64) -> Result<Vec<f64>> {
        self.check(x, u)?;
        let u0 = u.first().copied().unwrap_or(0.0);
        Ok(match self.name.as_str() {
            "slow_manifold" => vec![self.p("mu") * x[0], self.p("lambda") * (x[1] - x[0] * x[0])],
            "vdp_osc" => vec![x[1], self.p("mu") * (1.0 - x[0] * x[0]) * x[1] - x[0] + u0],
            "lorenz" => vec![
                self.p("sigma") * (x[1] - x[0]),
                x[0] * (self.p("rho") - x[2]) - x[1],
                x[0] * x[1] - self.p("beta") * x[2],
            ],
            "forced_duffing" => vec![
                x[1],
                -self.p("delta") * x[1] - self.p("alpha") * x[0] - self.p("beta") * x[0].powi(3) + u0,
            ],
            other => {
                return Err(KoopmanError::InvalidParameter(format!("{other} is a discrete map, use step")));
            }
        })
    }

    /// One step of a discrete system.
    pub fn step(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check(x, u)?;
        match self.name.as_str() {
            "linear2d" => Ok(linear2d_step(x)),
            other => Err(KoopmanError::InvalidParameter(format!("{other} is continuous, use rhs"))),
        }
    }

    fn check(&self, x: &[f64], u: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(KoopmanError::DimensionMismatch { expected: self.n, got: x.len(), context: "state".into() });
        }
        if !u.is_empty() && u.len() != self.q {
            return Err(KoopmanError::DimensionMismatch { expected: self.q, got: u.len(), context: "input".into() });
        }
        Ok(())
    }
}

/// Evaluate a catalog vector field by name.
pub fn system_rhs(name: &str, x: &[f64], u: &[f64], t: f64, params: &[(String, f64)]) -> Result<Vec<f64>> {
    SystemSpec::with_params(name, params)?.rhs(x, u, t)
}

/// Classical RK4 on an arbitrary vector field, inputs held over each step.
/// `input` has one row per step. Returns `(n_steps + 1) × n`.
pub fn integrate_rk4_with<F>(
    f: F,
    x0: &[f64],
    dt: f64,
    n_steps: usize,
    input: Option<&DMatrix<f64>>,
) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64], &[f64], f64) -> Result<Vec<f64>>,
{
    if !(dt > 0.0) {
        return Err(KoopmanError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if let Some(u) = input {
        if u.nrows() < n_steps {
            return Err(KoopmanError::DimensionMismatch {
                expected: n_steps,
                got: u.nrows(),
                context: "input rows vs steps".into(),
            });
        }
    }
    let n = x0.len();
    let mut out = DMatrix::zeros(n_steps + 1, n);
    let mut x = x0.to_vec();
    out.row_mut(0).copy_from_slice(&x);
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for step in 0..n_steps {
        let u: Vec<f64> = input.map(|m| m.row(step).iter().copied().collect()).unwrap_or_default();
        let t = step as f64 * dt;
        let k1 = f(&x, &u, t)?;
        let k2 = f(&axpy(&x, &k1, dt / 2.0), &u, t + dt / 2.0)?;
        let k3 = f(&axpy(&x, &k2, dt / 2.0), &u, t + dt / 2.0)?;
        let k4 = f(&axpy(&x, &k3, dt), &u, t + dt)?;
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(KoopmanError::NonFiniteState { step: step + 1 });
        }
        out.row_mut(step + 1).copy_from_slice(&x);
    }
    Ok(out)
}

/// Integrate a catalog system, or iterate it if it is a discrete map.
pub fn integrate_rk4(
    spec: &SystemSpec,
    x0: &[f64],
    dt: f64,
    n_steps: usize,
    input: Option<&DMatrix<f64>>,
) -> Result<DMatrix<f64>> {
    if let Some(u) = input {
        if u.ncols() != spec.n_inputs() {
            return Err(KoopmanError::DimensionMismatch {
                expected: spec.n_inputs(),
                got: u.ncols(),
                context: "input channels".into(),
            });
        }
    }
    match spec.kind() {
        SystemKind::Continuous => integrate_rk4_with(|x, u, t| spec.rhs(x, u, t), x0, dt, n_steps, input),
        SystemKind::Discrete => {
            if !(dt > 0.0) {
                return Err(KoopmanError::InvalidParameter(format!("dt must be positive, got {dt}")));
            }
            let mut out = DMatrix::zeros(n_steps + 1, x0.len());
            let mut x = x0.to_vec();
            out.row_mut(0).copy_from_slice(&x);
            for step in 0..n_steps {
                let u: Vec<f64> = input.map(|m| m.row(step).iter().copied().collect()).unwrap_or_default();
                x = spec.step(&x, &u)?;
                out.row_mut(step + 1).copy_from_slice(&x);
            }
            Ok(out)
        }
    }
}

/// Random stable discrete-time system `(A, B)`.
pub fn drss(n: usize, q: usize, seed: u64, rho_max: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n == 0 {
        return Err(KoopmanError::InvalidParameter("drss needs n >= 1".into()));
    }
    if !(rho_max > 0.0 && rho_max < 1.0) {
        return Err(KoopmanError::InvalidParameter(format!("rho_max must lie in (0, 1), got {rho_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = 0.1f64.min(rho_max / 2.0);
    let mut d = DMatrix::zeros(n, n);
    let mut i = 0;
    while i < n {
        let modulus = rng.random_range(lo..rho_max);
        if i + 1 < n && rng.random_bool(0.5) {
            let theta = rng.random_range(0.1..std::f64::consts::PI - 0.1);
            let (re, im) = (modulus * theta.cos(), modulus * theta.sin());
            d[(i, i)] = re;
            d[(i, i + 1)] = -im;
            d[(i + 1, i)] = im;
            d[(i + 1, i + 1)] = re;
            i += 2;
        } else {
            d[(i, i)] = if rng.random_bool(0.5) { modulus } else { -modulus };
            i += 1;
        }
    }
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qm = g.qr().q();
    let a = &qm * d * qm.transpose();
    let b = DMatrix::from_fn(n, q, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok((a, b))
}

pub const LINEAR2D: [[f64; 2]; 2] = [[0.8, -0.1], [0.0, 0.7]];

pub fn linear2d_step(x: &[f64]) -> Vec<f64> {
    vec![
        LINEAR2D[0][0] * x[0] + LINEAR2D[0][1] * x[1],
        LINEAR2D[1][0] * x[0] + LINEAR2D[1][1] * x[1],
    ]
}

pub fn default_torus_freqs() -> Vec<f64> {
    vec![2f64.sqrt() / 5.0, 3f64.sqrt() / 5.0]
}

pub fn default_torus_amps() -> Vec<f64> {
    vec![1.0, 0.5]
}

/// `Σ aᵢ exp(i 2π fᵢ t)` as `len(t) × 2` columns (real, imaginary).
pub fn torus_signal(t: &[f64], freqs: &[f64], amps: &[f64]) -> Result<DMatrix<f64>> {
    if freqs.is_empty() {
        return Err(KoopmanError::InvalidParameter("torus signal needs at least one frequency".into()));
    }
    if freqs.len() != amps.len() {
        return Err(KoopmanError::DimensionMismatch {
            expected: freqs.len(),
            got: amps.len(),
            context: "amplitudes vs frequencies".into(),
        });
    }
    Ok(DMatrix::from_fn(t.len(), 2, |i, c| {
        freqs
            .iter()
            .zip(amps)
            .map(|(f, a)| {
                let arg = std::f64::consts::TAU * f * t[i];
                a * if c == 0 { arg.cos() } else { arg.sin() }
            })
            .sum()
    }))
}

/// Seeded standard-normal inputs, `rows × q`.
pub fn gaussian_inputs(rows: usize, q: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, q, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Drive `x_{k+1} = A x_k + B u_k` with Gaussian inputs. Returns the states
/// (`(n_steps + 1) × n`) and the inputs (`n_steps × q`).
pub fn simulate_linear(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    x0: &[f64],
    n_steps: usize,
    seed: u64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let u = gaussian_inputs(n_steps, b.ncols(), seed);
    let mut x = DMatrix::zeros(n_steps + 1, a.nrows());
    x.row_mut(0).copy_from_slice(x0);
    for k in 0..n_steps {
        let next = a * x.row(k).transpose() + b * u.row(k).transpose();
        x.set_row(k + 1, &next.transpose());
    }
    (x, u)
}
