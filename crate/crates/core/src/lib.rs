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

//! Bures geometry of finite-dimensional density matrices.
//!
//! States are realised in the Hilbert–Schmidt picture: a state ν is implemented
//! by any matrix W with W W* = ν, and distances are chordal or arc distances
//! between such implementations.

pub mod error;
pub mod linalg;
pub mod density;
pub mod json;
pub mod quadrature;
pub mod fidelity;
pub mod geodesic;
pub mod tangent;
pub mod curves;
pub mod strata;

pub use density::{validate_density, DensityMatrix, PositiveForm, PsdState};
pub use error::{DensityViolation, GeomError, Result};
pub use linalg::{
    abs_op, hermitian_eig, hs_inner, hs_norm, polar, sqrt_psd, support_projector, trace_norm,
    CMatrix, CVector, EigenSystem, HSVector, HermitianMatrix, PolarFactors, Projector, Tolerances,
};
