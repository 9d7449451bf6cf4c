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

//! Fidelity, Bures and inner distances, aligned implementations and the
//! residual-form calculus between two states.

use crate::density::{DensityMatrix, PositiveForm, PsdState};
use crate::error::{GeomError, Result};
use crate::linalg::{
    hermitian_eig, inverse_pd, polar_scaled, trace_norm, CMatrix, HSVector, HermitianMatrix,
    PolarFactors, Projector, Tolerances,
};

/// Support inclusion and orthogonality tolerance.
pub const SUPPORT_TOL: f64 = 1e-9;
/// A residual form with trace below this is treated as zero.
pub const RESIDUAL_TOL: f64 = 1e-10;

pub(crate) fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(GeomError::DimMismatch(a, b));
    }
    Ok(())
}

/// Upper bound √(λ_max(ν) λ_max(ρ)) on the singular values of √ν√ρ.
fn product_scale(nu: &DensityMatrix, rho: &DensityMatrix) -> f64 {
    (nu.eig().max_eigenvalue() * rho.eig().max_eigenvalue()).max(0.0).sqrt()
}

/// tr|√a √b| for states or positive forms, without clamping.
pub fn form_fidelity<A: PsdState, B: PsdState>(a: &A, b: &B) -> Result<f64> {
    same_dim(a.dim(), b.dim())?;
    let prod = a.sqrt_op().as_matrix() * b.sqrt_op().as_matrix();
    Ok(trace_norm(&prod).max(0.0))
}

/// F(ν, ρ) = tr|√ν √ρ|, clamped into [0, 1].
pub fn fidelity(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    Ok(form_fidelity(nu, rho)?.clamp(0.0, 1.0))
}

/// F via tr (√ρ ν √ρ)^{1/2}; kept for cross-checking.
pub fn fidelity_root_route(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    same_dim(nu.dim(), rho.dim())?;
    let inner = nu.matrix().congruence(rho.sqrt().as_matrix());
    let es = hermitian_eig(&inner);
    let f: f64 = es.eigvals.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Transition probability P = F².
pub fn transition_probability(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    Ok(fidelity(nu, rho)?.powi(2))
}

/// d_B = √(2 − 2F), evaluated as ‖√ν − √ρU*‖_HS for the aligned pair so
/// that nearby states keep full relative accuracy.
pub fn bures_distance(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    let p = aligned_pair(nu, rho)?;
    Ok((p.phi.matrix() - p.zeta.matrix()).norm().min(std::f64::consts::SQRT_2))
}

/// Inner distance arccos F ∈ [0, π/2], evaluated as 2 arcsin(d_B/2).
pub fn geodesic_distance(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    Ok(2.0 * (0.5 * bures_distance(nu, rho)?).asin())
}

/// Σ_k √(tr(ν x_k) tr(ρ x_k)) for a positive decomposition {x_k} of the identity.
pub fn decomposition_bound(
    nu: &DensityMatrix,
    rho: &DensityMatrix,
    parts: &[HermitianMatrix],
) -> Result<f64> {
    same_dim(nu.dim(), rho.dim())?;
    let n = nu.dim();
    if parts.is_empty() {
        return Err(GeomError::NotADecomposition("no parts".into()));
    }
    let mut sum = CMatrix::zeros(n, n);
    for (k, x) in parts.iter().enumerate() {
        same_dim(n, x.dim())?;
        let lmin = x.min_eigenvalue();
        if lmin < -1e-10 * (1.0 + x.frobenius()) {
            return Err(GeomError::NotADecomposition(format!(
                "part {k} has eigenvalue {lmin:.3e}"
            )));
        }
        sum += x.as_matrix();
    }
    let defect = (sum - CMatrix::identity(n, n)).norm();
    if defect > 1e-9 {
        return Err(GeomError::NotADecomposition(format!(
            "parts sum to identity only within {defect:.3e}"
        )));
    }
    Ok(parts
        .iter()
        .map(|x| {
            let a = nu.expectation(x.as_matrix()).re.max(0.0);
            let b = rho.expectation(x.as_matrix()).re.max(0.0);
            (a * b).sqrt()
        })
        .sum())
}

/// √(tr(ν x) tr(ρ x⁻¹)) for positive invertible x.
pub fn variational_bound(nu: &DensityMatrix, rho: &DensityMatrix, x: &HermitianMatrix) -> Result<f64> {
    same_dim(nu.dim(), rho.dim())?;
    same_dim(nu.dim(), x.dim())?;
    let xinv = inverse_pd(x, nu.tolerances())?;
    let a = nu.expectation(x.as_matrix()).re;
    let b = rho.expectation(xinv.as_matrix()).re;
    Ok((a * b).max(0.0).sqrt())
}

/// Implementations φ = √ν, ζ = √ρ U* with ⟨ζ, φ⟩ = F.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub phi: HSVector,
    pub zeta: HSVector,
    /// Polar data of √ν √ρ.
    pub completion: PolarFactors,
    pub fidelity: f64,
    pub transition: f64,
}

impl AlignedPair {
    /// Matrix K = φ*ζ = U|√ν√ρ|U*.
    pub fn commutant_matrix(&self) -> HermitianMatrix {
        HermitianMatrix::symmetrized(self.phi.matrix().adjoint() * self.zeta.matrix())
    }

    /// s(K) = U s(|√ν√ρ|) U*, read off the polar data.
    pub fn commutant_support(&self) -> Projector {
        let u = &self.completion.unitary_completion;
        Projector::from_orthonormal_columns(&(u * support_basis(&self.completion.support)))
    }

    /// ζ*ζ = U ρ U*.
    pub fn zeta_co_gram(&self) -> HermitianMatrix {
        self.zeta.co_gram()
    }

    /// ζφ* + φζ*.
    pub fn cross(&self) -> HermitianMatrix {
        let zp = self.zeta.matrix() * self.phi.matrix().adjoint();
        HermitianMatrix::symmetrized(&zp + zp.adjoint())
    }
}

pub fn aligned_pair(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<AlignedPair> {
    same_dim(nu.dim(), rho.dim())?;
    let sn = nu.sqrt();
    let sr = rho.sqrt();
    let a = sn.as_matrix() * sr.as_matrix();
    let completion = polar_scaled(&a, nu.tolerances(), product_scale(nu, rho))?;
    let zeta = sr.as_matrix() * completion.unitary_completion.adjoint();
    let f: f64 = completion
        .modulus
        .eig()
        .eigvals
        .iter()
        .map(|l| l.max(0.0))
        .sum::<f64>()
        .clamp(0.0, 1.0);
    Ok(AlignedPair {
        phi: HSVector(sn.into_matrix()),
        zeta: HSVector(zeta),
        completion,
        fidelity: f,
        transition: f * f,
    })
}

/// ρ_ν = √ρ (1 − s(|√ν√ρ|)) √ρ: the largest positive form below ρ orthogonal to ν.
pub fn residual_form(rho: &DensityMatrix, nu: &DensityMatrix) -> Result<PositiveForm> {
    same_dim(nu.dim(), rho.dim())?;
    let sr = rho.sqrt();
    let a = nu.sqrt().as_matrix() * sr.as_matrix();
    let p = polar_scaled(&a, rho.tolerances(), product_scale(nu, rho))?;
    let off = p.support.complement();
    let r = off.matrix().congruence(sr.as_matrix());
    let tol = Tolerances {
        psd_dust: rho.tolerances().psd_dust.max(1e-10),
        ..*rho.tolerances()
    };
    PositiveForm::new(r, &tol)
}

/// True when one of ρ_ν, ν_ρ vanishes.
pub fn arc_unique(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<bool> {
    let a = residual_form(rho, nu)?.weight();
    let b = residual_form(nu, rho)?.weight();
    Ok(a <= RESIDUAL_TOL || b <= RESIDUAL_TOL)
}

/// Orthonormal columns spanning the range of a projector.
pub(crate) fn support_basis(p: &Projector) -> CMatrix {
    let es = p.matrix().eig();
    let idx: Vec<usize> = (0..es.dim()).filter(|&k| es.eigvals[k] > 0.5).collect();
    es.eigvecs.select_columns(idx.iter())
}

/// s(ρ) ≤ s(ν).
pub fn abs_continuous(rho: &DensityMatrix, nu: &DensityMatrix) -> Result<bool> {
    same_dim(nu.dim(), rho.dim())?;
    Ok(rho.support().is_below(nu.support(), SUPPORT_TOL))
}

/// s(ρ) = s(ν).
pub fn same_stratum(rho: &DensityMatrix, nu: &DensityMatrix) -> Result<bool> {
    Ok(abs_continuous(rho, nu)? && abs_continuous(nu, rho)?)
}

/// ‖s(a) s(b)‖_F ≤ 1e-9.
pub fn supports_orthogonal(a: &Projector, b: &Projector) -> bool {
    (a.as_matrix() * b.as_matrix()).norm() <= SUPPORT_TOL
}

/// (‖√ρ − √σ‖²_HS, ‖ρ − σ‖₁).
pub fn hellinger_sqrt_bound(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(f64, f64)> {
    same_dim(rho.dim(), sigma.dim())?;
    let d = rho.sqrt().as_matrix() - sigma.sqrt().as_matrix();
    let lhs = d.norm_squared();
    let rhs = trace_norm(&(rho.as_matrix() - sigma.as_matrix()));
    Ok((lhs, rhs))
}

/// (d_B(ν, ρ), √‖ν − ρ‖₁).
pub fn upper_root_bound(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<(f64, f64)> {
    let d = bures_distance(nu, rho)?;
    let r = trace_norm(&(nu.as_matrix() - rho.as_matrix())).sqrt();
    Ok((d, r))
}
