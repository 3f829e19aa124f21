//! JSON formats for matrices and ensembles.
//!
//! A matrix literal is `{"re": [[...]], "im": [[...]]}` in row-major order;
//! `im` may be omitted for real matrices. An ensemble file is
//! `{"dim": d, "labels": [...], "weights": [...], "states": [matrix, ...]}`
//! where `labels` and `weights` are optional.

use serde::{Deserialize, Serialize};

use crate::divergences::Ensemble;
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::operators::{DensityOperator, Tolerances};

/// Row-major real and imaginary parts of a complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixLiteral {
    /// Literal of `m`, omitting `im` when every imaginary part is zero.
    pub fn from_matrix(m: &CMat) -> Self {
        let rows = |f: &dyn Fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        let im = rows(&|z| z.im);
        let real = im.iter().flatten().all(|&x| x == 0.0);
        Self {
            re: rows(&|z| z.re),
            im: (!real).then_some(im),
        }
    }

    /// Convert to a matrix, checking that both parts are rectangular and agree in shape.
    pub fn to_matrix(&self) -> Result<CMat> {
        let r = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        if self.re.iter().any(|row| row.len() != cols) {
            return Err(Error::Parse("re: rows have different lengths".into()));
        }
        if let Some(im) = &self.im {
            if im.len() != r || im.iter().any(|row| row.len() != cols) {
                return Err(Error::Parse(format!("im: expected a {r}x{cols} array")));
            }
        }
        Ok(CMat::from_fn(r, cols, |i, j| {
            C64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }
}

/// Matrix literal that must be a square Hermitian matrix.
///
/// The error names the first offending `(row, col)` pair.
pub fn hermitian_from_literal(lit: &MatrixLiteral, tol: f64) -> Result<CMat> {
    let m = lit.to_matrix()?;
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Parse(format!(
            "expected a non-empty square matrix, found {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                return Err(Error::Parse(format!("matrix is not Hermitian at row {i}, col {j}")));
            }
        }
    }
    Ok(m)
}

/// On-disk form of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub states: Vec<MatrixLiteral>,
}

impl EnsembleFile {
    pub fn from_ensemble(ensemble: &Ensemble) -> Self {
        Self {
            dim: ensemble.dim(),
            labels: Some(ensemble.labels().to_vec()),
            weights: ensemble.weights().map(<[f64]>::to_vec),
            states: ensemble
                .states()
                .iter()
                .map(|s| MatrixLiteral::from_matrix(s.matrix()))
                .collect(),
        }
    }

    /// Validate every state and build the ensemble.
    pub fn to_ensemble(&self) -> Result<Ensemble> {
        if self.states.is_empty() {
            return Err(Error::Parse("states: expected ≥ 1".into()));
        }
        let tol = Tolerances::default();
        let mut states = Vec::with_capacity(self.states.len());
        for (k, lit) in self.states.iter().enumerate() {
            let m = hermitian_from_literal(lit, tol.hermitian)
                .map_err(|e| Error::Parse(format!("states[{k}]: {}", strip(&e))))?;
            if m.nrows() != self.dim {
                return Err(Error::Parse(format!(
                    "states[{k}]: expected dimension {}, found {}",
                    self.dim,
                    m.nrows()
                )));
            }
            let s = DensityOperator::new(m).map_err(|e| Error::Parse(format!("states[{k}]: {e}")))?;
            states.push(s);
        }
        let labels = self
            .labels
            .clone()
            .unwrap_or_else(|| (0..states.len()).map(|i| i.to_string()).collect());
        Ensemble::new(labels, states, self.weights.clone()).map_err(|e| Error::Parse(strip(&e)))
    }
}

fn strip(e: &Error) -> String {
    match e {
        Error::Parse(msg) => msg.clone(),
        other => other.to_string(),
    }
}

/// Parse an ensemble from JSON text.
pub fn parse_ensemble(text: &str) -> Result<Ensemble> {
    let file: EnsembleFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_ensemble()
}

/// Serialize an ensemble to pretty JSON.
pub fn ensemble_to_json(ensemble: &Ensemble) -> Result<String> {
    serde_json::to_string_pretty(&EnsembleFile::from_ensemble(ensemble)).map_err(|e| Error::Parse(e.to_string()))
}

/// Serde adapter storing a `CMat` as a [`MatrixLiteral`].
pub mod matrix_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixLiteral::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let lit = MatrixLiteral::deserialize(d)?;
        lit.to_matrix().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ensemble_is_rejected() {
        let err = parse_ensemble(r#"{"dim": 2, "states": []}"#).unwrap_err();
        assert_eq!(err, Error::Parse("states: expected ≥ 1".into()));
    }

    #[test]
    fn non_hermitian_reports_position() {
        let text = r#"{"dim": 2, "states": [{"re": [[1, 0.5], [0, 0]]}]}"#;
        let msg = parse_ensemble(text).unwrap_err().to_string();
        assert!(msg.contains("row 0, col 1"), "{msg}");
    }

    #[test]
    fn round_trip() {
        let text = r#"{"dim": 2, "weights": [0.25, 0.75],
            "states": [{"re": [[0.5, 0], [0, 0.5]], "im": [[0, 0.5], [-0.5, 0]]},
                       {"re": [[1, 0], [0, 0]]}]}"#;
        let e = parse_ensemble(text).unwrap();
        let back = parse_ensemble(&ensemble_to_json(&e).unwrap()).unwrap();
        assert_eq!(e, back);
    }
}
