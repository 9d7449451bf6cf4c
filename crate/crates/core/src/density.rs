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

//! Density matrices and positive forms with cached spectral data.

use num_complex::Complex64;

use crate::error::{DensityViolation, GeomError, Result};
use crate::linalg::{
    check_psd, hermitian_eig, sqrt_from_eig, CMatrix, CVector, EigenSystem, HermitianMatrix,
    Projector, Tolerances,
};

const TRACE_TOL: f64 = 1e-10;

/// Positive semidefinite, trace-one Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    eig: EigenSystem,
    support: Projector,
    rank: usize,
    tol: Tolerances,
}

/// Checks trace and positivity, clamps eigenvalue dust and renormalises.
pub fn validate_density(m: &HermitianMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    let tr = m.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(GeomError::NotDensity {
            reason: DensityViolation::Trace,
            value: tr,
        });
    }
    let mut es = hermitian_eig(m);
    let lmin = es.min_eigenvalue();
    if lmin < -tol.psd_dust {
        return Err(GeomError::NotDensity {
            reason: DensityViolation::Negativity,
            value: lmin,
        });
    }
    let clamped = es.eigvals.iter().any(|&l| l < 0.0);
    for l in es.eigvals.iter_mut() {
        *l = l.max(0.0);
    }
    let sum: f64 = es.eigvals.iter().sum();
    if (sum - 1.0).abs() > TRACE_TOL {
        return Err(GeomError::NotDensity {
            reason: DensityViolation::Trace,
            value: sum,
        });
    }
    for l in es.eigvals.iter_mut() {
        *l /= sum;
    }
    let matrix = if clamped {
        es.reconstruct()
    } else {
        m.scale(1.0 / tr)
    };
    Ok(DensityMatrix::assemble(matrix, es, *tol))
}

impl DensityMatrix {
    fn assemble(matrix: HermitianMatrix, eig: EigenSystem, tol: Tolerances) -> Self {
        let cut = tol.rank_cutoff(eig.max_eigenvalue());
        let support = eig.support_above(cut);
        let rank = eig.eigvals.iter().filter(|&&l| l > cut).count();
        DensityMatrix {
            matrix,
            eig,
            support,
            rank,
            tol,
        }
    }

    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerances(m, Tolerances::default())
    }

    pub fn with_tolerances(m: CMatrix, tol: Tolerances) -> Result<Self> {
        let h = HermitianMatrix::new(m).map_err(|e| match e {
            GeomError::NonHermitian { deviation, .. } => GeomError::NotDensity {
                reason: DensityViolation::Hermiticity,
                value: deviation,
            },
            other => other,
        })?;
        validate_density(&h, &tol)
    }

    pub fn from_hermitian(h: &HermitianMatrix) -> Result<Self> {
        validate_density(h, &Tolerances::default())
    }

    /// Computed matrices whose trace may have drifted by rounding.
    pub(crate) fn from_computed(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        validate_density(&HermitianMatrix::symmetrized(m), tol)
    }

    pub fn diagonal(p: &[f64]) -> Result<Self> {
        validate_density(&HermitianMatrix::from_real_diagonal(p), &Tolerances::default())
    }

    /// p_ψ for a nonzero vector ψ (normalised first).
    pub fn pure(psi: &CVector) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeomError::InvalidInput("pure state from zero vector".into()));
        }
        let v = psi / Complex64::new(n, 0.0);
        validate_density(&HermitianMatrix::outer(&v), &Tolerances::default())
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = vec![1.0 / n as f64; n];
        Self::diagonal(&d).expect("maximally mixed state is valid")
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.matrix.as_matrix()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eig(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn eigvals(&self) -> &[f64] {
        &self.eig.eigvals
    }

    pub fn eigvecs(&self) -> &CMatrix {
        &self.eig.eigvecs
    }

    pub fn support(&self) -> &Projector {
        &self.support
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min_eigenvalue()
    }

    /// Eigenvalues at or below this value are outside the support.
    pub fn rank_cutoff(&self) -> f64 {
        self.tol.rank_cutoff(self.eig.max_eigenvalue())
    }

    pub fn sqrt(&self) -> HermitianMatrix {
        sqrt_from_eig(&self.eig, &self.tol)
    }

    /// tr(ρ x).
    pub fn expectation(&self, x: &CMatrix) -> Complex64 {
        (self.as_matrix() * x).trace()
    }

    pub fn to_form(&self) -> PositiveForm {
        PositiveForm {
            matrix: self.matrix.clone(),
            eig: self.eig.clone(),
            support: self.support.clone(),
            tol: self.tol,
        }
    }
}

/// Positive semidefinite matrix with trace at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveForm {
    matrix: HermitianMatrix,
    eig: EigenSystem,
    support: Projector,
    tol: Tolerances,
}

impl PositiveForm {
    pub fn new(m: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let tr = m.trace();
        if tr > 1.0 + TRACE_TOL {
            return Err(GeomError::NotDensity {
                reason: DensityViolation::Trace,
                value: tr,
            });
        }
        Self::new_unbounded(m, tol)
    }

    /// Positive matrix without the trace cap (e.g. ψψ* for a long tangent vector).
    pub fn new_unbounded(m: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        let mut eig = hermitian_eig(&m);
        check_psd(&eig, tol)?;
        for l in eig.eigvals.iter_mut() {
            *l = l.max(0.0);
        }
        // Forms carry weight at most one, so eigenvalue dust below psd_dust is
        // no support even when the whole form is that small.
        let cut = tol.rank_cutoff(eig.max_eigenvalue()).max(tol.psd_dust);
        let support = eig.support_above(cut);
        Ok(PositiveForm {
            matrix: m,
            eig,
            support,
            tol: *tol,
        })
    }

    pub fn zero(n: usize) -> Self {
        PositiveForm::new(HermitianMatrix::zeros(n), &Tolerances::default())
            .expect("zero form is valid")
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.matrix.as_matrix()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn weight(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn eig(&self) -> &EigenSystem {
        &self.eig
    }

    /// Support projector; empty for the zero form.
    pub fn support(&self) -> &Projector {
        &self.support
    }

    pub fn sqrt(&self) -> HermitianMatrix {
        sqrt_from_eig(&self.eig, &self.tol)
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }
}

/// √ and support of both states and positive forms.
pub trait PsdState {
    fn dim(&self) -> usize;
    fn sqrt_op(&self) -> HermitianMatrix;
    fn support_proj(&self) -> &Projector;
    fn hermitian(&self) -> &HermitianMatrix;
}

impl PsdState for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }
    fn sqrt_op(&self) -> HermitianMatrix {
        self.sqrt()
    }
    fn support_proj(&self) -> &Projector {
        self.support()
    }
    fn hermitian(&self) -> &HermitianMatrix {
        self.matrix()
    }
}

impl PsdState for PositiveForm {
    fn dim(&self) -> usize {
        PositiveForm::dim(self)
    }
    fn sqrt_op(&self) -> HermitianMatrix {
        self.sqrt()
    }
    fn support_proj(&self) -> &Projector {
        self.support()
    }
    fn hermitian(&self) -> &HermitianMatrix {
        self.matrix()
    }
}
