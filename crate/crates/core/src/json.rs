// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Matrix interchange format: `{"rows", "cols", "data": [[re, im], ...]}`,
//! row-major, with `"kind": "density"` on density matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{GeomError, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
            kind: None,
        }
    }

    pub fn from_density(d: &DensityMatrix) -> Self {
        MatrixJson {
            kind: Some("density".into()),
            ..Self::from_matrix(d.as_matrix())
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.rows == 0 || self.cols == 0 {
            return Err(GeomError::InvalidInput("matrix has zero rows or columns".into()));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(GeomError::ShapeMismatch {
                expected: format!("{} entries", self.rows * self.cols),
                got: format!("{} entries", self.data.len()),
            });
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        Ok(CMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|[re, im]| Complex64::new(*re, *im)),
        ))
    }
}

pub fn matrix_to_json(m: &CMatrix) -> serde_json::Value {
    serde_json::to_value(MatrixJson::from_matrix(m)).expect("matrix serialises")
}

pub fn density_to_json(d: &DensityMatrix) -> serde_json::Value {
    serde_json::to_value(MatrixJson::from_density(d)).expect("matrix serialises")
}

pub fn matrix_from_value(v: &serde_json::Value) -> Result<CMatrix> {
    let mj: MatrixJson = serde_json::from_value(v.clone())
        .map_err(|e| GeomError::InvalidInput(format!("matrix JSON: {e}")))?;
    mj.to_matrix()
}

pub fn matrix_from_str(s: &str) -> Result<CMatrix> {
    let mj: MatrixJson = serde_json::from_str(s)
        .map_err(|e| GeomError::InvalidInput(format!("matrix JSON: {e}")))?;
    mj.to_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = CMatrix::from_fn(2, 3, |r, c| Complex64::new(r as f64 + 0.1, -(c as f64) / 3.0));
        let s = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        let back = matrix_from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn wrong_length_rejected() {
        let s = r#"{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0]]}"#;
        assert!(matches!(matrix_from_str(s), Err(GeomError::ShapeMismatch { .. })));
        assert!(matrix_from_str(r#"{"rows":1}"#).is_err());
    }

    #[test]
    fn density_kind_tag() {
        let d = DensityMatrix::maximally_mixed(2);
        let v = density_to_json(&d);
        assert_eq!(v["kind"], "density");
        assert_eq!(matrix_from_value(&v).unwrap(), *d.as_matrix());
    }
}
