//! Model JSON, schema version 1. Matrices are `{rows, cols, data}` in
//! row-major order, complex numbers `[re, im]`, non-finite reals the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{KoopmanModel, Lifting, ModelMetadata};
use crate::error::{KoopmanError, Result};
use crate::observables::{ObservableConfig, ReconstructionMap};
use crate::regression::{EigenSystem, KernelKind, KernelLift, ModeKind};
use crate::linalg::CMatrix;

pub const SCHEMA_VERSION: u32 = 1;

pub(super) mod real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(crate) enum Repr {
        Num(f64),
        Text(String),
    }

    impl Repr {
        pub(crate) fn from_f64(v: f64) -> Self {
            if v.is_finite() {
                Repr::Num(v)
            } else if v.is_nan() {
                Repr::Text("nan".into())
            } else if v > 0.0 {
                Repr::Text("inf".into())
            } else {
                Repr::Text("-inf".into())
            }
        }

        pub(crate) fn to_f64<E: serde::de::Error>(self) -> Result<f64, E> {
            match self {
                Repr::Num(v) => Ok(v),
                Repr::Text(s) => match s.as_str() {
                    "nan" => Ok(f64::NAN),
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    other => Err(E::custom(format!("expected a number, got {other:?}"))),
                },
            }
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        Repr::from_f64(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Repr::deserialize(d)?.to_f64()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MatrixJson {
    fn from(m: &DMatrix<f64>) -> Self {
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().as_slice().to_vec(),
        }
    }

    fn into_matrix(self, name: &str) -> Result<DMatrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(KoopmanError::Serialization(format!(
                "{name}: {} entries for a {}×{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

type ComplexJson = [real::Repr; 2];

fn complex_to_json(c: &Complex64) -> ComplexJson {
    [real::Repr::from_f64(c.re), real::Repr::from_f64(c.im)]
}

fn complex_from_json(c: ComplexJson) -> Result<Complex64> {
    let [re, im] = c;
    let re = re.to_f64::<serde_json::Error>().map_err(|e| KoopmanError::Serialization(e.to_string()))?;
    let im = im.to_f64::<serde_json::Error>().map_err(|e| KoopmanError::Serialization(e.to_string()))?;
    Ok(Complex64::new(re, im))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CMatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<ComplexJson>,
}

impl CMatrixJson {
    fn from(m: &CMatrix) -> Self {
        CMatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.transpose().iter().map(complex_to_json).collect(),
        }
    }

    fn into_matrix(self, name: &str) -> Result<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(KoopmanError::Serialization(format!(
                "{name}: {} entries for a {}×{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        let values = self.data.into_iter().map(complex_from_json).collect::<Result<Vec<_>>>()?;
        Ok(CMatrix::from_row_slice(self.rows, self.cols, &values))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelLiftJson {
    kind: String,
    kernel: KernelKind,
    centers: MatrixJson,
    projection: MatrixJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigenJson {
    lambdas: Vec<ComplexJson>,
    mus: Vec<ComplexJson>,
    #[serde(rename = "W_right")]
    w_right: CMatrixJson,
    #[serde(rename = "W_left")]
    w_left: CMatrixJson,
    branch_cut: Vec<bool>,
    modes: CMatrixJson,
    mode_kind: ModeKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    schema_version: u32,
    dt: f64,
    n: usize,
    q: usize,
    observables: serde_json::Value,
    #[serde(rename = "A")]
    a: MatrixJson,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    b: Option<MatrixJson>,
    #[serde(rename = "C")]
    c: MatrixJson,
    eigen: EigenJson,
    metadata: ModelMetadata,
}

fn ser_err(e: impl std::fmt::Display) -> KoopmanError {
    KoopmanError::Serialization(e.to_string())
}

pub(super) fn to_json(model: &KoopmanModel) -> Result<String> {
    let observables = match &model.lifting {
        Lifting::Library(lib) => serde_json::to_value(lib.to_config()?).map_err(ser_err)?,
        Lifting::Kernel(k) => serde_json::to_value(KernelLiftJson {
            kind: "kernel".into(),
            kernel: k.kernel,
            centers: MatrixJson::from(&k.centers),
            projection: MatrixJson::from(&k.projection),
        })
        .map_err(ser_err)?,
    };
    let e = &model.eigen;
    let doc = ModelJson {
        schema_version: SCHEMA_VERSION,
        dt: model.dt,
        n: model.n,
        q: model.q,
        observables,
        a: MatrixJson::from(&model.a),
        b: model.b.as_ref().map(MatrixJson::from),
        c: MatrixJson::from(model.reconstruction.matrix()),
        eigen: EigenJson {
            lambdas: e.lambdas.iter().map(complex_to_json).collect(),
            mus: e.mus.iter().map(complex_to_json).collect(),
            w_right: CMatrixJson::from(&e.right),
            w_left: CMatrixJson::from(&e.left),
            branch_cut: e.branch_cut.clone(),
            modes: CMatrixJson::from(&model.modes),
            mode_kind: model.mode_kind,
        },
        metadata: model.metadata.clone(),
    };
    serde_json::to_string_pretty(&doc).map_err(ser_err)
}

pub(super) fn from_json(text: &str) -> Result<KoopmanModel> {
    let doc: ModelJson = serde_json::from_str(text).map_err(ser_err)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(KoopmanError::Serialization(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            doc.schema_version
        )));
    }
    if !(doc.dt > 0.0) {
        return Err(KoopmanError::Serialization("dt must be positive".into()));
    }
    let lifting = if doc.observables.get("kind").and_then(|k| k.as_str()) == Some("kernel") {
        let k: KernelLiftJson = serde_json::from_value(doc.observables).map_err(ser_err)?;
        Lifting::Kernel(KernelLift {
            kernel: k.kernel,
            centers: k.centers.into_matrix("centers")?,
            projection: k.projection.into_matrix("projection")?,
        })
    } else {
        let cfg: ObservableConfig = serde_json::from_value(doc.observables).map_err(ser_err)?;
        Lifting::Library(cfg.build(doc.n, None)?)
    };
    let a = doc.a.into_matrix("A")?;
    let b = doc.b.map(|b| b.into_matrix("B")).transpose()?;
    let c = doc.c.into_matrix("C")?;
    let lambdas = doc.eigen.lambdas.into_iter().map(complex_from_json).collect::<Result<Vec<_>>>()?;
    let mus = doc.eigen.mus.into_iter().map(complex_from_json).collect::<Result<Vec<_>>>()?;
    let right = doc.eigen.w_right.into_matrix("W_right")?;
    let left = doc.eigen.w_left.into_matrix("W_left")?;
    let modes = doc.eigen.modes.into_matrix("modes")?;

    let nz = lifting.n_output();
    let r = lambdas.len();
    let d = lifting.delays();
    let shapes_ok = a.shape() == (nz, nz)
        && c.shape() == (doc.n, nz)
        && b.as_ref().map_or(doc.q == 0, |b| b.shape() == (nz, doc.q))
        && mus.len() == r
        && doc.eigen.branch_cut.len() == r
        && right.shape() == (nz, r)
        && left.shape() == (nz, r)
        && modes.shape() == (doc.n, r)
        && doc.metadata.lifted_x0.len() == nz
        && match &lifting {
            Lifting::Library(l) => l.n_input() == doc.n,
            Lifting::Kernel(k) => k.n_input() == doc.n,
        };
    if !shapes_ok {
        return Err(KoopmanError::Serialization(format!(
            "inconsistent shapes for n={}, q={}, lifted dimension {nz}, delays {d}",
            doc.n, doc.q
        )));
    }
    Ok(KoopmanModel {
        lifting,
        a,
        b,
        reconstruction: ReconstructionMap::from_matrix(c),
        eigen: EigenSystem {
            lambdas,
            mus,
            right,
            left,
            branch_cut: doc.eigen.branch_cut,
            dt: doc.dt,
            findings: Vec::new(),
        },
        modes,
        mode_kind: doc.eigen.mode_kind,
        dt: doc.dt,
        n: doc.n,
        q: doc.q,
        metadata: doc.metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{integrate_rk4, SystemSpec};
    use crate::pipeline::{fit, RegressorConfig};
    use crate::types::TrajectoryDataset;

    fn data() -> TrajectoryDataset {
        let spec = SystemSpec::new("slow_manifold").unwrap();
        let trajs = [[0.5, -0.5], [-0.8, 0.3], [0.1, 0.9]]
            .iter()
            .map(|x0| integrate_rk4(&spec, x0, 0.02, 100, None).unwrap())
            .collect();
        TrajectoryDataset::new(trajs, 0.02).unwrap()
    }

    fn round_trip(model: &KoopmanModel) -> KoopmanModel {
        let text = model.to_json().unwrap();
        let back = KoopmanModel::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap(), text);
        back
    }

    #[test]
    fn polynomial_model_round_trips_bitwise() {
        let model = fit(
            &ObservableConfig::Polynomial { n_input: None, degree: 2 },
            &RegressorConfig::edmd(),
            &data(),
        )
        .unwrap();
        let back = round_trip(&model);
        assert_eq!(back.a(), model.a());
        let x0 = [0.3, -0.7];
        assert_eq!(model.simulate(&x0, 50, None).unwrap(), back.simulate(&x0, 50, None).unwrap());
        assert_eq!(model.eigenfunctions(&x0).unwrap(), back.eigenfunctions(&x0).unwrap());
    }

    #[test]
    fn kernel_and_fourier_models_round_trip() {
        let kdmd = RegressorConfig::Kdmd {
            kernel: KernelKind::Gaussian { sigma: 2.0 },
            reg_eps: 1e-8,
            rank: Some(8),
            cutoff: None,
        };
        let model = fit(&ObservableConfig::Identity { n_input: None }, &kdmd, &data()).unwrap();
        let back = round_trip(&model);
        assert_eq!(model.simulate(&[0.2, 0.2], 10, None).unwrap(), back.simulate(&[0.2, 0.2], 10, None).unwrap());

        let rff = ObservableConfig::RandomFourier { n_input: None, n_features: 20, sigma: 1.0, seed: 3, include_state: true };
        let model = fit(&rff, &RegressorConfig::edmd(), &data()).unwrap();
        let back = round_trip(&model);
        assert_eq!(model.simulate(&[0.2, 0.2], 10, None).unwrap(), back.simulate(&[0.2, 0.2], 10, None).unwrap());
    }

    #[test]
    fn non_finite_reals_survive() {
        #[derive(Serialize, Deserialize)]
        struct W(#[serde(with = "real")] f64);
        for v in [f64::INFINITY, f64::NEG_INFINITY, 1.5e-300] {
            let s = serde_json::to_string(&W(v)).unwrap();
            assert_eq!(serde_json::from_str::<W>(&s).unwrap().0, v);
        }
        let s = serde_json::to_string(&W(f64::NAN)).unwrap();
        assert!(serde_json::from_str::<W>(&s).unwrap().0.is_nan());
    }

    #[test]
    fn rejects_bad_documents() {
        let model = fit(&ObservableConfig::Identity { n_input: None }, &RegressorConfig::dmd(), &data()).unwrap();
        let text = model.to_json().unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["schema_version"] = 2.into();
        assert!(KoopmanModel::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["extra"] = 1.into();
        assert!(KoopmanModel::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["A"]["rows"] = 3.into();
        assert!(KoopmanModel::from_json(&v.to_string()).is_err());
        assert!(KoopmanModel::from_json("{").is_err());
    }
}
