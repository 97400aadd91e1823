//! On-disk formats: JSON state and POM documents (with a `named:` shorthand
//! for benchmark states and a `spin:` shorthand for two-outcome qubit
//! measurements) and CSV emission for matrices, vectors, and series.
//!
//! Numeric fields round-trip exactly: values are written in shortest
//! form that reparses to the same f64.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{c, CMatrix, CVector, RMatrix};
use crate::measurement::{MaximalPOM, MeasurementError};
use crate::state::{named_state, DensityOperator, NamedStateSpec, StateError};

#[derive(Debug, Error)]
pub enum FilesError {
    #[error("state document needs either `named` or both `dims` and `matrix`")]
    IncompleteStateDocument,
    #[error("POM document needs either `spin` or both `dim` and `kets`")]
    IncompletePomDocument,
    #[error("matrix has {got} rows, expected {expected}")]
    MatrixShape { got: usize, expected: usize },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Measurement(#[from] MeasurementError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// State document: `dims` + complex `matrix` rows in row-major composite
/// index order, or a `named` shorthand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub named: Option<NamedStateSpec>,
}

impl StateDocument {
    pub fn from_state(rho: &DensityOperator) -> Self {
        let n = rho.total_dim();
        let m = rho.matrix();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self {
            dims: Some([rho.d1(), rho.d2()]),
            matrix: Some(matrix),
            named: None,
        }
    }

    pub fn to_state(&self) -> Result<DensityOperator, FilesError> {
        if let Some(spec) = &self.named {
            return Ok(named_state(spec)?);
        }
        let (Some(dims), Some(rows)) = (&self.dims, &self.matrix) else {
            return Err(FilesError::IncompleteStateDocument);
        };
        let n = dims[0] * dims[1];
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(FilesError::MatrixShape {
                got: rows.len(),
                expected: n,
            });
        }
        let m = CMatrix::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1]));
        Ok(DensityOperator::new(m, dims[0], dims[1])?)
    }
}

pub fn read_state(path: &Path) -> Result<DensityOperator, FilesError> {
    let text = fs::read_to_string(path)?;
    let doc: StateDocument = serde_json::from_str(&text)?;
    doc.to_state()
}

/// Writes the explicit `dims` + `matrix` form.
pub fn write_state(path: &Path, rho: &DensityOperator) -> Result<(), FilesError> {
    let doc = StateDocument::from_state(rho);
    let mut file = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &doc)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// POM document: `dim` + `kets` rows, or the `spin: [ax, ay, az]` shorthand
/// expanding to the rank-one pair `{(1 + a.s)/2, (1 - a.s)/2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PomDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kets: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin: Option<[f64; 3]>,
}

impl PomDocument {
    pub fn from_pom(pom: &MaximalPOM) -> Self {
        let kets = pom
            .kets()
            .iter()
            .map(|k| (0..k.len()).map(|i| [k[i].re, k[i].im]).collect())
            .collect();
        Self {
            dim: Some(pom.dim()),
            kets: Some(kets),
            spin: None,
        }
    }

    pub fn to_pom(&self) -> Result<MaximalPOM, FilesError> {
        if let Some(direction) = self.spin {
            return Ok(MaximalPOM::spin(direction)?);
        }
        let (Some(dim), Some(rows)) = (self.dim, &self.kets) else {
            return Err(FilesError::IncompletePomDocument);
        };
        let kets: Vec<CVector> = rows
            .iter()
            .map(|row| CVector::from_fn(row.len(), |i, _| c(row[i][0], row[i][1])))
            .collect();
        Ok(MaximalPOM::new(kets, dim)?)
    }
}

pub fn read_pom(path: &Path) -> Result<MaximalPOM, FilesError> {
    let text = fs::read_to_string(path)?;
    let doc: PomDocument = serde_json::from_str(&text)?;
    doc.to_pom()
}

pub fn write_pom(path: &Path, pom: &MaximalPOM) -> Result<(), FilesError> {
    let doc = PomDocument::from_pom(pom);
    let mut file = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, &doc)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Matrix entries as `p,q,value` rows, row-major.
pub fn write_matrix_csv(path: &Path, m: &RMatrix) -> Result<(), FilesError> {
    let mut out = String::from("p,q,value\n");
    for p in 0..m.nrows() {
        for q in 0..m.ncols() {
            out.push_str(&format!("{},{},{}\n", p, q, m[(p, q)]));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Vector entries as `p,q,value` rows with `q = 0`.
pub fn write_vector_csv(path: &Path, v: &[f64]) -> Result<(), FilesError> {
    let mut out = String::from("p,q,value\n");
    for (p, value) in v.iter().enumerate() {
        out.push_str(&format!("{},0,{}\n", p, value));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Series rows under the fixed `x,value` header, order preserved.
pub fn write_series_csv(path: &Path, series: &[(f64, f64)]) -> Result<(), FilesError> {
    let mut out = String::from("x,value\n");
    for (x, value) in series {
        out.push_str(&format!("{},{}\n", x, value));
    }
    fs::write(path, out)?;
    Ok(())
}
