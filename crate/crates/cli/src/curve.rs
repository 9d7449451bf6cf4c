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

//! Curve descriptions: `{"type": "geodesic" | "hamiltonian" | "samples", ...}`.

use bures_geom::curves::{hamiltonian_curve, Curve, SampledCurve};
use bures_geom::geodesic::geodesic_arc;
use bures_geom::json::MatrixJson;
use bures_geom::{DensityMatrix, GeomError, HSVector, HermitianMatrix, Result, Tolerances};
use serde::{Deserialize, Serialize};

fn unit_domain() -> (f64, f64) {
    (0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveDesc {
    Geodesic {
        nu: MatrixJson,
        rho: MatrixJson,
    },
    Hamiltonian {
        rho0: MatrixJson,
        h: MatrixJson,
        #[serde(default = "unit_domain")]
        domain: (f64, f64),
    },
    Samples {
        t: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        states: Option<Vec<MatrixJson>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        implementations: Option<Vec<MatrixJson>>,
    },
}

pub fn density(m: &MatrixJson, tol: &Tolerances) -> Result<DensityMatrix> {
    DensityMatrix::with_tolerances(m.to_matrix()?, *tol)
}

impl CurveDesc {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| GeomError::InvalidInput(format!("curve description: {e}")))
    }

    pub fn build(&self, tol: &Tolerances) -> Result<Box<dyn Curve>> {
        match self {
            CurveDesc::Geodesic { nu, rho } => {
                Ok(Box::new(geodesic_arc(&density(nu, tol)?, &density(rho, tol)?)?))
            }
            CurveDesc::Hamiltonian { rho0, h, domain } => {
                let h = HermitianMatrix::new(h.to_matrix()?)?;
                Ok(Box::new(hamiltonian_curve(&density(rho0, tol)?, &h, *domain)?))
            }
            CurveDesc::Samples {
                t,
                states,
                implementations,
            } => {
                let imps = implementations
                    .as_ref()
                    .map(|v| {
                        v.iter()
                            .map(|m| m.to_matrix().map(HSVector))
                            .collect::<Result<Vec<_>>>()
                    })
                    .transpose()?;
                let states = match (states, &imps) {
                    (Some(s), _) => s.iter().map(|m| density(m, tol)).collect::<Result<Vec<_>>>()?,
                    (None, Some(cs)) => cs
                        .iter()
                        .map(|c| DensityMatrix::with_tolerances(c.gram().into_matrix(), *tol))
                        .collect::<Result<Vec<_>>>()?,
                    (None, None) => {
                        return Err(GeomError::InvalidInput(
                            "samples need states or implementations".into(),
                        ))
                    }
                };
                Ok(Box::new(SampledCurve::new(t.clone(), states, imps)?))
            }
        }
    }
}
