use std::path::PathBuf;

use koopman_core::benchmarks::{
    default_torus_amps, default_torus_freqs, drss, gaussian_inputs, integrate_rk4, simulate_linear, torus_signal,
    SystemSpec,
};
use koopman_core::differentiation::{differentiate, DiffMethod, DifferentiationConfig};
use koopman_core::io::{default_header, parse_csv, read_trajectories, write_csv};
use koopman_core::nalgebra::DMatrix;
use koopman_core::num_complex::Complex64;
use koopman_core::observables::ObservableConfig;
use koopman_core::pipeline::{fit as fit_model, KoopmanModel, RegressorConfig};
use koopman_core::{KoopmanError, TrajectoryDataset};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::{emit, read_to_string, write_atomic};
use crate::{BenchArgs, DiffArgs, EigArgs, EigFormat, FitArgs, SimulateArgs};

pub struct Context {
    pub seed: u64,
    pub json: bool,
    pub quiet: bool,
}

fn identity_observables() -> ObservableConfig {
    ObservableConfig::Identity { n_input: None }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitConfig {
    #[serde(default = "identity_observables")]
    observables: ObservableConfig,
    regressor: RegressorConfig,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct EigRow {
    index: usize,
    lambda: [f64; 2],
    mu: [f64; 2],
    abs_lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    linearity: Option<f64>,
}

impl EigRow {
    fn new(index: usize, lambda: Complex64, mu: Complex64, linearity: Option<f64>) -> Self {
        EigRow { index, lambda: [lambda.re, lambda.im], mu: [mu.re, mu.im], abs_lambda: lambda.norm(), linearity }
    }
}

#[derive(Serialize)]
struct FitReport {
    m: usize,
    rank: usize,
    residual: f64,
    eigenvalues: Vec<EigRow>,
}

fn eig_table(rows: &[EigRow]) -> String {
    let mut out = format!(
        "{:>4} {:>24} {:>24} {:>24} {:>24} {:>12}",
        "#", "lambda_re", "lambda_im", "mu_re", "mu_im", "|lambda|"
    );
    let scored = rows.iter().any(|r| r.linearity.is_some());
    if scored {
        out.push_str(&format!(" {:>12}", "linearity"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{:>4} {:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e} {:>12.6}",
            r.index, r.lambda[0], r.lambda[1], r.mu[0], r.mu[1], r.abs_lambda
        ));
        if let Some(s) = r.linearity {
            out.push_str(&format!(" {s:>12.3e}"));
        }
        out.push('\n');
    }
    out
}

fn load_dataset(path: &PathBuf, n_inputs: Option<usize>) -> Result<TrajectoryDataset, CliError> {
    Ok(read_trajectories(&read_to_string(path)?, n_inputs)?.dataset)
}

fn load_model(path: &PathBuf) -> Result<KoopmanModel, CliError> {
    KoopmanModel::from_json(&read_to_string(path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn fit(ctx: &Context, args: &FitArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let config: FitConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let out = args
        .out
        .clone()
        .or(config.output.clone())
        .ok_or_else(|| CliError::Config("no output path: pass --out or set \"output\"".into()))?;
    let mut data = load_dataset(&args.data, args.n_inputs)?;
    if let Some(dt) = config.dt {
        let trajs = data.trajectories().to_vec();
        data = match data.inputs() {
            Some(u) => TrajectoryDataset::with_inputs(trajs, u.to_vec(), dt),
            None => TrajectoryDataset::new(trajs, dt),
        }
        .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let model = fit_model(&config.observables, &config.regressor, &data)?;
    let json = model.to_json().map_err(|e| CliError::Config(e.to_string()))?;
    write_atomic(&out, &json)?;

    if !ctx.quiet {
        let meta = model.metadata();
        let eig = model.eigen();
        let report = FitReport {
            m: meta.m,
            rank: meta.rank,
            residual: meta.residual,
            eigenvalues: (0..eig.len().min(10)).map(|j| EigRow::new(j, eig.lambdas[j], eig.mus[j], None)).collect(),
        };
        if ctx.json {
            emit(&format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes")));
        } else {
            emit(&format!(
                "m         {}\nrank      {}\nresidual  {:.6e}\n{}",
                report.m,
                report.rank,
                report.residual,
                eig_table(&report.eigenvalues)
            ));
        }
    }
    Ok(())
}

pub fn simulate(_ctx: &Context, args: &SimulateArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let inputs = match (&args.inputs, model.n_inputs()) {
        (None, 0) => None,
        (None, q) => return Err(CliError::Data(format!("model has {q} inputs; pass --inputs"))),
        (Some(_), 0) => return Err(CliError::Data("model is unforced; --inputs not accepted".into())),
        (Some(path), q) => {
            let csv = parse_csv(&read_to_string(path)?)?;
            let rows: Vec<DMatrix<f64>> = csv.blocks;
            if rows.len() != 1 {
                return Err(CliError::Data(format!("input CSV must hold one block, found {}", rows.len())));
            }
            let block = &rows[0];
            let values = match block.ncols() {
                c if c == q => block.clone(),
                c if c == q + 1 => block.columns(1, q).into_owned(),
                c => {
                    return Err(CliError::Data(format!("input CSV has {c} columns, model has {q} inputs")));
                }
            };
            Some(values.transpose())
        }
    };
    let traj = model.simulate(&args.x0, args.steps, inputs.as_ref())?;
    let dt = model.dt();
    let block = DMatrix::from_fn(traj.nrows(), traj.ncols() + 1, |i, j| {
        if j == 0 {
            i as f64 * dt
        } else {
            traj[(i, j - 1)]
        }
    });
    let header = default_header(model.n_states(), 0);
    write_atomic(&args.out, &write_csv(Some(&header), &[block]))
}

pub fn eig(ctx: &Context, args: &EigArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let scores = match &args.data {
        Some(path) => {
            let data = load_dataset(path, args.n_inputs)?;
            Some(model.linearity_consistency(&data)?.scores)
        }
        None => None,
    };
    let eig = model.eigen();
    let rows: Vec<EigRow> = (0..eig.len())
        .map(|j| EigRow::new(j, eig.lambdas[j], eig.mus[j], scores.as_ref().map(|s| s[j])))
        .collect();
    let format = if ctx.json { EigFormat::Json } else { args.format };
    match format {
        EigFormat::Json => emit(&format!("{}\n", serde_json::to_string_pretty(&rows).expect("rows serialize"))),
        EigFormat::Table => emit(&eig_table(&rows)),
        EigFormat::Csv => {
            let mut out = String::from("index,lambda_re,lambda_im,mu_re,mu_im,abs_lambda");
            if scores.is_some() {
                out.push_str(",linearity");
            }
            out.push('\n');
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}",
                    r.index, r.lambda[0], r.lambda[1], r.mu[0], r.mu[1], r.abs_lambda
                ));
                if let Some(s) = r.linearity {
                    out.push_str(&format!(",{s}"));
                }
                out.push('\n');
            }
            emit(&out);
        }
    }
    Ok(())
}

pub fn diff(_ctx: &Context, args: &DiffArgs) -> Result<(), CliError> {
    let method: DiffMethod = args.method.parse().map_err(|e: KoopmanError| CliError::Config(e.to_string()))?;
    let mut config = DifferentiationConfig::new(method);
    if let Some(w) = args.window {
        config.window = w;
    }
    if let Some(s) = args.smoothing {
        config.smoothing = s;
    }
    if let Some(l) = args.tv_lambda {
        config.tv_lambda = l;
    }
    if let Some(i) = args.tv_iters {
        config.tv_iters = i;
    }
    config.periodic |= args.periodic;

    let csv = parse_csv(&read_to_string(&args.data)?)?;
    if csv.blocks.is_empty() {
        return Err(CliError::Data("no trajectories".into()));
    }
    let mut out_blocks = Vec::with_capacity(csv.blocks.len());
    for (i, block) in csv.blocks.iter().enumerate() {
        if block.ncols() < 2 {
            return Err(CliError::Data("need a time column and at least one signal column".into()));
        }
        let t: Vec<f64> = block.column(0).iter().copied().collect();
        let signals = block.columns(1, block.ncols() - 1).into_owned();
        let d = differentiate(&config, &signals, &t).map_err(|e| match CliError::from(e) {
            CliError::Data(m) => CliError::Data(format!("trajectory {i}: {m}")),
            other => other,
        })?;
        let mut out = block.clone();
        out.columns_mut(1, d.ncols()).copy_from(&d);
        out_blocks.push(out);
    }
    write_atomic(&args.out, &write_csv(csv.header.as_deref(), &out_blocks))
}

fn parse_params(raw: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    raw.iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("parameter {s:?} is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| CliError::Config(format!("parameter {k}: {e}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn take_param(params: &mut Vec<(String, f64)>, key: &str, default: f64) -> f64 {
    match params.iter().position(|(k, _)| k == key) {
        Some(i) => params.remove(i).1,
        None => default,
    }
}

fn reject_leftover(system: &str, params: &[(String, f64)]) -> Result<(), CliError> {
    match params.first() {
        Some((k, _)) => Err(CliError::Config(format!("unknown parameter {k} for {system}"))),
        None => Ok(()),
    }
}

fn as_count(name: &str, v: f64) -> Result<usize, CliError> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(CliError::Config(format!("{name} must be a non-negative integer, got {v}")))
    }
}

fn default_x0(system: &str, n: usize) -> Vec<f64> {
    match system {
        "vdp_osc" => vec![2.0, 0.0],
        "forced_duffing" => vec![1.0, 0.0],
        "linear2d" => vec![1.0, -1.0],
        "drss" => vec![0.0; n],
        _ => vec![1.0; n],
    }
}

fn time_block(dt: f64, states: &DMatrix<f64>, inputs: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let rows = states.nrows();
    let n = states.ncols();
    let q = inputs.map_or(0, |u| u.ncols());
    DMatrix::from_fn(rows, 1 + n + q, |i, j| {
        if j == 0 {
            i as f64 * dt
        } else if j <= n {
            states[(i, j - 1)]
        } else {
            // the last sample has no step after it; repeat the final input
            let u = inputs.expect("q > 0");
            u[(i.min(u.nrows() - 1), j - 1 - n)]
        }
    })
}

pub fn bench(ctx: &Context, args: &BenchArgs) -> Result<(), CliError> {
    if !(args.dt > 0.0) {
        return Err(CliError::Config(format!("dt must be positive, got {}", args.dt)));
    }
    let mut params = parse_params(&args.params)?;
    let system = args.system.as_str();
    let (block, header) = match system {
        "torus" => {
            reject_leftover(system, &params)?;
            let t: Vec<f64> = (0..=args.steps).map(|k| k as f64 * args.dt).collect();
            let sig = torus_signal(&t, &default_torus_freqs(), &default_torus_amps())?;
            (time_block(args.dt, &sig, None), vec!["t".into(), "re".into(), "im".into()])
        }
        "drss" => {
            let n = as_count("n", take_param(&mut params, "n", 3.0))?;
            let q = as_count("q", take_param(&mut params, "q", 1.0))?;
            let rho = take_param(&mut params, "rho_max", 0.9);
            reject_leftover(system, &params)?;
            let (a, b) = drss(n, q, ctx.seed, rho)?;
            let x0 = args.x0.clone().unwrap_or_else(|| default_x0(system, n));
            if x0.len() != n {
                return Err(CliError::Data(format!("x0 has {} entries, system has {n} states", x0.len())));
            }
            let (x, u) = simulate_linear(&a, &b, &x0, args.steps, ctx.seed);
            let block = time_block(args.dt, &x, (q > 0).then_some(&u));
            (block, default_header(n, q))
        }
        _ => {
            let spec = SystemSpec::with_params(system, &params)?;
            let n = spec.n_states();
            let q = spec.n_inputs();
            let x0 = args.x0.clone().unwrap_or_else(|| default_x0(system, n));
            if x0.len() != n {
                return Err(CliError::Data(format!("x0 has {} entries, system has {n} states", x0.len())));
            }
            let inputs = (q > 0).then(|| {
                if args.random_input {
                    gaussian_inputs(args.steps.max(1), q, ctx.seed)
                } else {
                    DMatrix::zeros(args.steps.max(1), q)
                }
            });
            let traj = integrate_rk4(&spec, &x0, args.dt, args.steps, inputs.as_ref())?;
            (time_block(args.dt, &traj, inputs.as_ref()), default_header(n, q))
        }
    };
    let text = write_csv(Some(&header), &[block]);
    match &args.out {
        Some(path) => write_atomic(path, &text),
        None => {
            emit(&text);
            Ok(())
        }
    }
}
