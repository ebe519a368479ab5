//! JSON file formats.
//!
//! Complex numbers are `[re, im]` pairs and matrices are lists of rows.
//!
//! - measurement: `{"dim": d, "label": "...", "outcomes": [matrix, ...]}`
//! - fiducial: `{"dim": d, "fiducial": [[re, im], ...]}`
//! - state: `{"dim": d, "matrix": matrix}`

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::Povm;
use crate::opspace::{DensityState, Operator};
use crate::C64;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &DMatrix<C64>) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix, dim: usize) -> Result<DMatrix<C64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Format(format!("expected a {dim}x{dim} matrix")));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementFile {
    pub dim: usize,
    #[serde(default)]
    pub label: String,
    pub outcomes: Vec<JsonMatrix>,
}

impl MeasurementFile {
    pub fn from_povm(p: &Povm) -> Self {
        Self {
            dim: p.dim(),
            label: p.label().to_string(),
            outcomes: p
                .outcomes()
                .iter()
                .map(|o| matrix_to_json(o.matrix()))
                .collect(),
        }
    }

    /// Builds the POVM without validating positivity or completeness.
    pub fn to_povm(&self) -> Result<Povm> {
        let mats = self
            .outcomes
            .iter()
            .map(|m| matrix_from_json(m, self.dim))
            .collect::<Result<Vec<_>>>()?;
        Povm::from_matrices(self.dim, mats, self.label.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiducialFile {
    pub dim: usize,
    pub fiducial: Vec<[f64; 2]>,
}

impl FiducialFile {
    pub fn to_ket(&self) -> Result<DVector<C64>> {
        if self.fiducial.len() != self.dim {
            return Err(Error::Format(format!(
                "fiducial has {} entries, expected {}",
                self.fiducial.len(),
                self.dim
            )));
        }
        Ok(DVector::from_iterator(
            self.dim,
            self.fiducial.iter().map(|c| C64::new(c[0], c[1])),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub matrix: JsonMatrix,
}

impl StateFile {
    pub fn from_state(rho: &DensityState) -> Self {
        Self {
            dim: rho.dim(),
            matrix: matrix_to_json(rho.operator().matrix()),
        }
    }

    pub fn to_state(&self) -> Result<DensityState> {
        DensityState::new(Operator::new(matrix_from_json(&self.matrix, self.dim)?)?)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn read_povm(path: &Path) -> Result<Povm> {
    read_json::<MeasurementFile>(path)?.to_povm()
}

pub fn write_povm(path: &Path, p: &Povm) -> Result<()> {
    let text = serde_json::to_string_pretty(&MeasurementFile::from_povm(p))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn read_fiducial(path: &Path) -> Result<DVector<C64>> {
    read_json::<FiducialFile>(path)?.to_ket()
}

pub fn read_state(path: &Path) -> Result<DensityState> {
    read_json::<StateFile>(path)?.to_state()
}
