//! Trajectory CSV: optional header, column 0 time, then states, then inputs.
//! Blank lines separate trajectories.

use nalgebra::DMatrix;

use crate::differentiation::uniform_spacing;
use crate::error::{KoopmanError, Result};
use crate::types::TrajectoryDataset;

/// Raw CSV content: optional header and one block per trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvBlocks {
    pub header: Option<Vec<String>>,
    /// Rows are samples, column 0 is time.
    pub blocks: Vec<DMatrix<f64>>,
}

impl CsvBlocks {
    pub fn n_columns(&self) -> usize {
        self.header
            .as_ref()
            .map(|h| h.len())
            .or_else(|| self.blocks.first().map(|b| b.ncols()))
            .unwrap_or(0)
    }

    /// Input channel count from the header: trailing columns named `u…`.
    pub fn header_inputs(&self) -> usize {
        self.header.as_ref().map_or(0, |h| {
            h.iter().skip(1).rev().take_while(|name| name.trim().starts_with('u')).count()
        })
    }
}

pub fn parse_csv(text: &str) -> Result<CsvBlocks> {
    let mut header = None;
    let mut blocks = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut seen_data = false;

    let flush = |rows: &mut Vec<Vec<f64>>, blocks: &mut Vec<DMatrix<f64>>, width: usize| {
        if !rows.is_empty() {
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            blocks.push(DMatrix::from_row_slice(rows.len(), width, &flat));
            rows.clear();
        }
    };

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            if let Some(w) = width {
                flush(&mut rows, &mut blocks, w);
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                let w = *width.get_or_insert(values.len());
                if values.len() != w {
                    return Err(KoopmanError::InvalidDataset(format!(
                        "line {}: {} columns, expected {w}",
                        lineno + 1,
                        values.len()
                    )));
                }
                seen_data = true;
                rows.push(values);
            }
            Err(_) if !seen_data && header.is_none() => {
                width = Some(fields.len());
                header = Some(fields.iter().map(|s| s.to_string()).collect());
            }
            Err(e) => {
                return Err(KoopmanError::InvalidDataset(format!("line {}: {e}", lineno + 1)));
            }
        }
    }
    if let Some(w) = width {
        flush(&mut rows, &mut blocks, w);
    }
    Ok(CsvBlocks { header, blocks })
}

/// Render blocks with `{}` formatting, which round-trips every `f64`.
pub fn write_csv(header: Option<&[String]>, blocks: &[DMatrix<f64>]) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&h.join(","));
        out.push('\n');
    }
    for (i, b) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for row in b.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
    }
    out
}

/// Default header `t,x1..xn,u1..uq`.
pub fn default_header(n: usize, q: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("x{i}")))
        .chain((1..=q).map(|i| format!("u{i}")))
        .collect()
}

/// Parsed trajectories with their time columns.
#[derive(Debug, Clone)]
pub struct TrajectoryCsv {
    pub dataset: TrajectoryDataset,
    pub times: Vec<Vec<f64>>,
    pub header: Option<Vec<String>>,
}

/// Split CSV blocks into states and inputs. `n_inputs` overrides the header.
pub fn dataset_from_csv(csv: CsvBlocks, n_inputs: Option<usize>) -> Result<TrajectoryCsv> {
    if csv.blocks.is_empty() {
        return Err(KoopmanError::NoTrajectories);
    }
    let cols = csv.n_columns();
    let q = n_inputs.unwrap_or_else(|| csv.header_inputs());
    if cols < 2 + q {
        return Err(KoopmanError::InvalidDataset(format!(
            "{cols} columns cannot hold time, at least one state and {q} inputs"
        )));
    }
    let n = cols - 1 - q;
    let mut dt: Option<f64> = None;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut inputs = Vec::new();
    for (index, b) in csv.blocks.iter().enumerate() {
        let t: Vec<f64> = b.column(0).iter().copied().collect();
        if t.len() < 2 {
            return Err(KoopmanError::TrajectoryTooShort { index, len: t.len(), min: 2 });
        }
        let h = uniform_spacing(&t).map_err(|e| KoopmanError::InvalidDataset(format!("trajectory {index}: {e}")))?;
        match dt {
            None => dt = Some(h),
            Some(d) if ((h - d) / d).abs() > 1e-8 => {
                return Err(KoopmanError::InvalidDataset(format!(
                    "trajectory {index} has time step {h}, expected {d}"
                )));
            }
            _ => {}
        }
        times.push(t);
        states.push(b.columns(1, n).into_owned());
        inputs.push(b.columns(1 + n, q).into_owned());
    }
    let dt = dt.expect("at least one block");
    let dataset = if q > 0 {
        TrajectoryDataset::with_inputs(states, inputs, dt)?
    } else {
        TrajectoryDataset::new(states, dt)?
    };
    Ok(TrajectoryCsv { dataset, times, header: csv.header })
}

pub fn read_trajectories(text: &str, n_inputs: Option<usize>) -> Result<TrajectoryCsv> {
    dataset_from_csv(parse_csv(text)?, n_inputs)
}
