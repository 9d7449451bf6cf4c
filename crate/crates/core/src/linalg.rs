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

//! Dense complex matrix primitives: Hermitian eigendecomposition, square roots
//! of positive operators, operator absolute value, polar decomposition with a
//! deterministic unitary completion, support projectors and Hilbert–Schmidt
//! quantities.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{GeomError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;


/// Numerical thresholds shared by every routine that has to decide what
/// counts as "zero".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues at or below `rank * λ_max` are outside the support.
    pub rank: f64,
    /// Absolute amount of negative eigenvalue dust that is clamped to zero
    /// instead of being rejected.
    pub psd_dust: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: 1e-12,
            psd_dust: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn with_rank(rank: f64) -> Self {
        Tolerances {
            rank,
            ..Default::default()
        }
    }

    /// Threshold below which an eigenvalue is treated as zero, given the
    /// largest eigenvalue of the operator.
    pub fn rank_cutoff(&self, lambda_max: f64) -> f64 {
        self.rank * lambda_max.max(0.0)
    }
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(GeomError::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

pub(crate) fn ensure_same_shape(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(GeomError::ShapeMismatch {
            expected: format!("{}x{}", a.nrows(), a.ncols()),
            got: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    Ok(())
}

/// (A + A*)/2.
pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Complex matrix that is Hermitian up to `1e-12 · (1 + ‖A‖_max)`.
///
/// The stored matrix is always exactly Hermitian: accepted input is replaced
/// by its Hermitian part.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub const SYMMETRY_TOL: f64 = 1e-12;

    pub fn new(m: CMatrix) -> Result<Self> {
        ensure_square(&m)?;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let deviation = max_abs(&(&m - m.adjoint()));
        let allowed = Self::SYMMETRY_TOL * (1.0 + max_abs(&m));
        if deviation > allowed {
            return Err(GeomError::NonHermitian { deviation, allowed });
        }
        Ok(HermitianMatrix(hermitian_part(&m)))
    }

    /// Hermitian part of a matrix known to be Hermitian up to rounding.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        HermitianMatrix(hermitian_part(&m))
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(CMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix(CMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let v = CVector::from_iterator(d.len(), d.iter().map(|&x| Complex64::new(x, 0.0)));
        HermitianMatrix(CMatrix::from_diagonal(&v))
    }

    /// Rank-one projector-like matrix v v*.
    pub fn outer(v: &CVector) -> Self {
        HermitianMatrix::symmetrized(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix(self.0.scale(s))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Self {
        HermitianMatrix(&self.0 - &other.0)
    }

    /// X A X* for an arbitrary conformable X.
    pub fn congruence(&self, x: &CMatrix) -> Self {
        HermitianMatrix::symmetrized(x * &self.0 * x.adjoint())
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    pub fn eig(&self) -> EigenSystem {
        hermitian_eig(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eig().eigvals.last().expect("non-empty matrix")
    }
}

/// Orthogonal projector (P² = P = P*).
#[derive(Debug, Clone, PartialEq)]
pub struct Projector(HermitianMatrix);

impl Projector {
    /// Projector onto the span of the given orthonormal columns.
    pub fn from_orthonormal_columns(v: &CMatrix) -> Self {
        Projector(HermitianMatrix::symmetrized(v * v.adjoint()))
    }

    pub fn identity(n: usize) -> Self {
        Projector(HermitianMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Projector(HermitianMatrix::zeros(n))
    }

    /// Validates idempotence and self-adjointness within 1e-10.
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        let defect = (m.as_matrix() * m.as_matrix() - m.as_matrix()).norm();
        if defect > 1e-10 {
            return Err(GeomError::InvalidInput(format!(
                "not a projector: ||P^2 - P||_F = {defect:.3e}"
            )));
        }
        Ok(Projector(m))
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.0.as_matrix()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.0.trace().round().max(0.0) as usize
    }

    pub fn complement(&self) -> Projector {
        Projector(HermitianMatrix::identity(self.dim()).sub(&self.0))
    }

    /// ‖(1 − Q) P‖_F: zero exactly when P ≤ Q.
    pub fn excess_over(&self, other: &Projector) -> f64 {
        (other.complement().as_matrix() * self.as_matrix()).norm()
    }

    pub fn is_below(&self, other: &Projector, tol: f64) -> bool {
        self.excess_over(other) <= tol
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub eigvals: Vec<f64>,
    pub eigvecs: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    /// One-dimensional projector onto the k-th eigenvector.
    pub fn projector(&self, k: usize) -> Projector {
        Projector::from_orthonormal_columns(&self.eigvecs.columns(k, 1).into_owned())
    }

    /// V f(Λ) V*.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let weights: Vec<f64> = self.eigvals.iter().map(|&l| f(l)).collect();
        self.weighted(&weights)
    }

    /// V diag(w) V* for real weights.
    pub fn weighted(&self, w: &[f64]) -> HermitianMatrix {
        let n = self.dim();
        let mut scaled = self.eigvecs.clone();
        for (k, &wk) in w.iter().enumerate() {
            scaled.column_mut(k).scale_mut(wk);
        }
        let _ = n;
        HermitianMatrix::symmetrized(scaled * self.eigvecs.adjoint())
    }

    /// V diag(z) V* for complex weights (not Hermitian in general).
    pub fn weighted_complex(&self, z: &[Complex64]) -> CMatrix {
        let mut scaled = self.eigvecs.clone();
        for (k, &zk) in z.iter().enumerate() {
            for r in 0..scaled.nrows() {
                scaled[(r, k)] *= zk;
            }
        }
        scaled * self.eigvecs.adjoint()
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.weighted(&self.eigvals)
    }

    /// Express `m` in the eigenbasis: V* m V.
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.eigvecs.adjoint() * m * &self.eigvecs
    }

    /// Map a matrix given in the eigenbasis back: V m V*.
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.eigvecs * m * self.eigvecs.adjoint()
    }

    /// Projector onto the eigenvectors whose eigenvalue exceeds `cutoff`.
    pub fn support_above(&self, cutoff: f64) -> Projector {
        let idx: Vec<usize> = (0..self.dim()).filter(|&k| self.eigvals[k] > cutoff).collect();
        let cols = self.eigvecs.select_columns(idx.iter());
        Projector::from_orthonormal_columns(&cols)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigvals.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigvals.last().copied().unwrap_or(0.0)
    }
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
///
/// Ties keep the order produced by the underlying solver.
pub fn hermitian_eig(a: &HermitianMatrix) -> EigenSystem {
    let n = a.dim();
    let se = a.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigvals = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let eigvecs = se.eigenvectors.select_columns(order.iter());
    EigenSystem { eigvals, eigvecs }
}

/// Validating entry point for raw matrices.
pub fn hermitian_eig_checked(a: &CMatrix) -> Result<EigenSystem> {
    Ok(hermitian_eig(&HermitianMatrix::new(a.clone())?))
}

/// Reject eigenvalues below `-psd_dust · max(1, λ_max)`.
pub(crate) fn check_psd(es: &EigenSystem, tol: &Tolerances) -> Result<()> {
    let lmin = es.min_eigenvalue();
    if lmin < -tol.psd_dust * es.max_eigenvalue().max(1.0) {
        return Err(GeomError::NotPsd {
            min_eigenvalue: lmin,
        });
    }
    Ok(())
}

/// Square root of an eigendecomposed positive operator; eigenvalues inside the
/// rank cutoff map to zero.
pub(crate) fn sqrt_from_eig(es: &EigenSystem, tol: &Tolerances) -> HermitianMatrix {
    let cut = tol.rank_cutoff(es.max_eigenvalue());
    es.apply(|l| if l > cut { l.sqrt() } else { 0.0 })
}

/// Positive square root of a positive semidefinite matrix.
pub fn sqrt_psd(a: &HermitianMatrix, tol: &Tolerances) -> Result<HermitianMatrix> {
    let es = hermitian_eig(a);
    check_psd(&es, tol)?;
    Ok(sqrt_from_eig(&es, tol))
}

/// Inverse of a positive definite matrix.
pub fn inverse_pd(a: &HermitianMatrix, tol: &Tolerances) -> Result<HermitianMatrix> {
    let es = hermitian_eig(a);
    let lmin = es.min_eigenvalue();
    if lmin <= tol.rank_cutoff(es.max_eigenvalue()) {
        return Err(GeomError::NotFullRank {
            min_eigenvalue: lmin,
        });
    }
    Ok(es.apply(|l| 1.0 / l))
}

/// exp(−i h t) for Hermitian h.
pub fn unitary_flow(h: &HermitianMatrix, t: f64) -> CMatrix {
    let es = hermitian_eig(h);
    let phases: Vec<Complex64> = es
        .eigvals
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -l * t))
        .collect();
    es.weighted_complex(&phases)
}

#[derive(Clone)]
struct Svd {
    left: CMatrix,
    sigma: Vec<f64>,
    right: CMatrix,
}

fn raw_svd(a: &CMatrix) -> Svd {
    let s = a.clone().svd(true, true);
    Svd {
        left: s.u.expect("left singular vectors requested"),
        sigma: s.singular_values.iter().copied().collect(),
        right: s.v_t.expect("right singular vectors requested").adjoint(),
    }
}

/// Reconstruction error plus the orthonormality defects of both factors.
fn factorization_error(a: &CMatrix, s: &Svd) -> f64 {
    let mut us = s.left.clone();
    for (k, sig) in s.sigma.iter().enumerate() {
        us.column_mut(k).scale_mut(*sig);
    }
    let recon = (us * s.right.adjoint() - a).norm() / (1.0 + a.norm());
    let il = CMatrix::identity(s.left.ncols(), s.left.ncols());
    let ir = CMatrix::identity(s.right.ncols(), s.right.ncols());
    recon + (s.left.adjoint() * &s.left - il).norm() + (s.right.adjoint() * &s.right - ir).norm()
}

/// SVD with a consistency check. The bidiagonal routine occasionally returns
/// an inconsistent factorization for nearly rank-deficient complex input, so
/// the adjoint and QR-preconditioned factorizations are tried in turn.
fn svd(a: &CMatrix) -> Svd {
    let allowed = 1e-12 * (a.nrows().max(a.ncols()) as f64);
    let direct = raw_svd(a);
    let err = factorization_error(a, &direct);
    if err <= allowed {
        return direct;
    }
    let mut best = (err, direct);
    let mut consider = |s: Svd| -> bool {
        let e = factorization_error(a, &s);
        let ok = e <= allowed;
        if e < best.0 {
            best = (e, s);
        }
        ok
    };
    let t = raw_svd(&a.adjoint());
    let swapped = Svd {
        left: t.right,
        sigma: t.sigma,
        right: t.left,
    };
    if consider(swapped) || a.nrows() != a.ncols() {
        return best.1;
    }
    let qr = a.clone().qr();
    let t = raw_svd(&qr.r());
    if consider(Svd {
        left: qr.q() * t.left,
        sigma: t.sigma,
        right: t.right,
    }) {
        return best.1;
    }
    let qr = a.adjoint().qr();
    let t = raw_svd(&qr.r());
    consider(Svd {
        left: t.right,
        sigma: t.sigma,
        right: qr.q() * t.left,
    });
    best.1
}

/// Singular values of `a` in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s = svd(a).sigma;
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// |A| = (A*A)^{1/2}, assembled from the singular value decomposition.
pub fn abs_op(a: &CMatrix) -> Result<HermitianMatrix> {
    ensure_square(a)?;
    let s = svd(a);
    let es = EigenSystem {
        eigvals: s.sigma,
        eigvecs: s.right,
    };
    Ok(es.reconstruct())
}

/// Polar decomposition A = u|A| plus a unitary completion U of u.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarFactors {
    pub partial_isometry: CMatrix,
    pub modulus: HermitianMatrix,
    pub unitary_completion: CMatrix,
    /// Projector onto the support of |A| (the initial space of u).
    pub support: Projector,
}

/// Orthonormal basis of the range of a projector, selected column by column
/// in index order (pivoting only to skip nearly dependent columns).
fn range_basis(p: &CMatrix, rank: usize) -> CMatrix {
    let n = p.nrows();
    let mut basis: Vec<CVector> = Vec::with_capacity(rank);
    let mut used = vec![false; n];
    while basis.len() < rank {
        let residual = |j: usize| -> CVector {
            let mut r: CVector = p.column(j).into_owned();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dotc(&r);
                    r -= b * c;
                }
            }
            r
        };
        let norms: Vec<f64> = (0..n)
            .map(|j| if used[j] { -1.0 } else { residual(j).norm() })
            .collect();
        let best = norms.iter().cloned().fold(f64::MIN, f64::max);
        if best <= 0.0 {
            break;
        }
        let j = (0..n)
            .find(|&j| !used[j] && norms[j] >= 0.5 * best)
            .expect("a pivot column exists");
        used[j] = true;
        let r = residual(j);
        let nr = r.norm();
        basis.push(r / Complex64::new(nr, 0.0));
    }
    let mut out = CMatrix::zeros(n, basis.len());
    for (k, b) in basis.iter().enumerate() {
        out.set_column(k, b);
    }
    out
}

pub fn polar(a: &CMatrix, tol: &Tolerances) -> Result<PolarFactors> {
    polar_scaled(a, tol, 0.0)
}

/// Polar decomposition in which singular values at or below
/// `rank · max(σ_max, scale)` count as zero. Products such as √ν√ρ have a
/// natural scale independent of their own size; passing it keeps rounding
/// noise of a vanishing product out of the support.
pub fn polar_scaled(a: &CMatrix, tol: &Tolerances, scale: f64) -> Result<PolarFactors> {
    let n = ensure_square(a)?;
    let mut s = svd(a);
    let smax = s.sigma.iter().cloned().fold(0.0, f64::max);
    let cut = tol.rank_cutoff(smax.max(scale));
    for x in s.sigma.iter_mut() {
        if *x <= cut {
            *x = 0.0;
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&k| s.sigma[k] > 0.0).collect();
    let r = keep.len();

    let lw = s.left.select_columns(keep.iter());
    let rv = s.right.select_columns(keep.iter());
    let partial_isometry = &lw * rv.adjoint();
    let modulus = EigenSystem {
        eigvals: s.sigma.clone(),
        eigvecs: s.right.clone(),
    }
    .reconstruct();

    let left_null = CMatrix::identity(n, n) - &lw * lw.adjoint();
    let right_null = CMatrix::identity(n, n) - &rv * rv.adjoint();
    let lb = range_basis(&left_null, n - r);
    let rb = range_basis(&right_null, n - r);
    let unitary_completion = &partial_isometry + &lb * rb.adjoint();

    Ok(PolarFactors {
        partial_isometry,
        modulus,
        unitary_completion,
        support: Projector::from_orthonormal_columns(&rv),
    })
}

/// Projector onto the span of eigenvectors with eigenvalue above `rank · λ_max`.
pub fn support_projector(a: &HermitianMatrix, tol: &Tolerances) -> Result<Projector> {
    let es = hermitian_eig(a);
    check_psd(&es, tol)?;
    Ok(es.support_above(tol.rank_cutoff(es.max_eigenvalue())))
}

/// Sum of singular values.
pub fn trace_norm(a: &CMatrix) -> f64 {
    svd(a).sigma.iter().sum()
}

/// ⟨A, B⟩ = tr(A B*), linear in the first argument.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    ensure_same_shape(a, b)?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum())
}

pub fn hs_norm(a: &CMatrix) -> f64 {
    a.norm()
}

/// Hilbert–Schmidt vector: an n×n matrix W implementing the state W W*.
#[derive(Debug, Clone, PartialEq)]
pub struct HSVector(pub CMatrix);

impl HSVector {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// W W*.
    pub fn gram(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrized(&self.0 * self.0.adjoint())
    }

    /// W* W.
    pub fn co_gram(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.0.adjoint() * &self.0)
    }

    pub fn inner(&self, other: &HSVector) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(x, y)| x * y.conj())
            .sum()
    }
}
