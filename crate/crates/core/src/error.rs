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

use thiserror::Error;

/// Errors raised by the geometry routines.
///
/// Validation failures (shape, symmetry, positivity, trace) are kept apart from
/// numeric failures so front ends can map them to different exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {deviation:.3e}, allowed {allowed:.3e})")]
    NonHermitian { deviation: f64, allowed: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("not a density matrix: {reason} ({value:.6e})")]
    NotDensity { reason: DensityViolation, value: f64 },

    #[error("not a positive decomposition of the identity: {0}")]
    NotADecomposition(String),

    #[error("geodesic endpoints coincide (||nu - rho||_F = {0:.3e})")]
    DegenerateEndpoints(f64),

    #[error("parameter {value} outside [{lo}, {hi}]")]
    ParamOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("form is not tangent at the base state (off-support block norm {residual:.3e})")]
    NotInTangentSpace { residual: f64 },

    #[error("matrix is not of full rank (min eigenvalue {min_eigenvalue:.3e})")]
    NotFullRank { min_eigenvalue: f64 },

    #[error("point {t} is not interior to the curve domain [{lo}, {hi}]")]
    BoundaryPoint { t: f64, lo: f64, hi: f64 },

    #[error("curve has no Hilbert-Schmidt implementation")]
    NoImplementation,

    #[error("difference quotients failed to stabilise (spread {spread:.3e})")]
    NotDifferentiable { spread: f64 },

    #[error("implementation does not yield a state: {0}")]
    NotAState(String),

    #[error("state is not in the leaf of the reference state: {0}")]
    NotInLeaf(String),

    #[error("basis is not orthonormal and complete (defect {0:.3e})")]
    BasisIncomplete(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Which density-matrix invariant failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityViolation {
    Trace,
    Negativity,
    Hermiticity,
}

impl std::fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DensityViolation::Trace => write!(f, "trace"),
            DensityViolation::Negativity => write!(f, "min eigenvalue"),
            DensityViolation::Hermiticity => write!(f, "hermiticity"),
        }
    }
}

impl GeomError {
    /// True for errors caused by malformed or out-of-contract input, as opposed
    /// to a numeric condition discovered while computing.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            GeomError::ShapeMismatch { .. }
                | GeomError::DimMismatch(..)
                | GeomError::NotSquare(..)
                | GeomError::NonFinite
                | GeomError::NonHermitian { .. }
                | GeomError::NotPsd { .. }
                | GeomError::NotDensity { .. }
                | GeomError::NotADecomposition(_)
                | GeomError::ParamOutOfRange { .. }
                | GeomError::BasisIncomplete(_)
                | GeomError::InvalidInput(_)
        )
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            GeomError::ShapeMismatch { .. } => "ShapeMismatch",
            GeomError::DimMismatch(..) => "DimMismatch",
            GeomError::NotSquare(..) => "NotSquare",
            GeomError::NonFinite => "NonFinite",
            GeomError::NonHermitian { .. } => "NonHermitian",
            GeomError::NotPsd { .. } => "NotPSD",
            GeomError::NotDensity { .. } => "NotDensity",
            GeomError::NotADecomposition(_) => "NotADecomposition",
            GeomError::DegenerateEndpoints(_) => "DegenerateEndpoints",
            GeomError::ParamOutOfRange { .. } => "ParamOutOfRange",
            GeomError::NotInTangentSpace { .. } => "NotInTangentSpace",
            GeomError::NotFullRank { .. } => "NotFullRank",
            GeomError::BoundaryPoint { .. } => "BoundaryPoint",
            GeomError::NoImplementation => "NoImplementation",
            GeomError::NotDifferentiable { .. } => "NotDifferentiable",
            GeomError::NotAState(_) => "NotAState",
            GeomError::NotInLeaf(_) => "NotInLeaf",
            GeomError::BasisIncomplete(_) => "BasisIncomplete",
            GeomError::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
