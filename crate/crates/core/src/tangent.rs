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

//! Tangent forms at a state and the Bures length element: Lyapunov
//! solutions, the optimal implementation derivative ψ̂₀, the spectral norm
//! formula, decomposition lower bounds, the derivative of √ρ and the
//! canonical curve through a state.

use crate::density::{DensityMatrix, PositiveForm};
use crate::error::{GeomError, Result};
use crate::fidelity::same_dim;
use crate::linalg::{CMatrix, HSVector, HermitianMatrix};
use crate::quadrature::GaussLegendre;

/// Off-support block tolerance for tangent-space membership.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-10;

/// Traceless Hermitian T representing f(x) = tr(T x), tangent at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentForm {
    matrix: HermitianMatrix,
    base: DensityMatrix,
}

impl TangentForm {
    pub fn new(base: &DensityMatrix, t: HermitianMatrix) -> Result<Self> {
        same_dim(base.dim(), t.dim())?;
        let tr = t.trace();
        if tr.abs() > TRACE_TOL * (1.0 + t.frobenius()) {
            return Err(GeomError::NotInTangentSpace { residual: tr.abs() });
        }
        let residual = block_residual(base, &t);
        if residual > MEMBERSHIP_TOL {
            return Err(GeomError::NotInTangentSpace { residual });
        }
        Ok(TangentForm {
            matrix: t,
            base: base.clone(),
        })
    }

    pub fn from_matrix(base: &DensityMatrix, t: CMatrix) -> Result<Self> {
        Self::new(base, HermitianMatrix::new(t)?)
    }

    pub fn zero(base: &DensityMatrix) -> Self {
        TangentForm {
            matrix: HermitianMatrix::zeros(base.dim()),
            base: base.clone(),
        }
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn base(&self) -> &DensityMatrix {
        &self.base
    }

    /// f(x) = tr(T x).
    pub fn apply(&self, x: &CMatrix) -> f64 {
        (self.matrix.as_matrix() * x).trace().re
    }
}

/// ‖(1 − s) T (1 − s)‖_F with s the support of `base`.
pub fn block_residual(base: &DensityMatrix, t: &HermitianMatrix) -> f64 {
    let q = base.support().complement();
    (q.as_matrix() * t.as_matrix() * q.as_matrix()).norm()
}

/// Lyapunov coordinate x together with ψ̂₀ = x√ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    pub x: HermitianMatrix,
    pub psi0: HSVector,
}

/// Eigenvalues of the base with everything inside the rank cutoff set to 0,
/// and T expressed in the eigenbasis.
struct Spectral {
    lam: Vec<f64>,
    t: CMatrix,
}

fn spectral(t: &TangentForm) -> Spectral {
    let b = t.base();
    let cut = b.rank_cutoff();
    let lam = b
        .eigvals()
        .iter()
        .map(|&l| if l > cut { l } else { 0.0 })
        .collect();
    Spectral {
        lam,
        t: b.eig().to_eigenbasis(t.matrix().as_matrix()),
    }
}

fn map_entries(s: &Spectral, f: impl Fn(usize, usize, f64, f64) -> f64) -> CMatrix {
    let n = s.lam.len();
    CMatrix::from_fn(n, n, |j, k| s.t[(j, k)] * f(j, k, s.lam[j], s.lam[k]))
}

/// Hermitian x with xρ + ρx = T on the support; x_jk = T_jk/(λ_j + λ_k) in
/// the eigenbasis of ρ and 0 where both eigenvalues vanish.
pub fn lyapunov_solve(t: &TangentForm) -> HermitianMatrix {
    let s = spectral(t);
    let xt = map_entries(&s, |_, _, a, b| if a + b > 0.0 { 1.0 / (a + b) } else { 0.0 });
    HermitianMatrix::symmetrized(t.base().eig().from_eigenbasis(&xt))
}

/// x = ∫₀^∞ e^{−tρ} T e^{−tρ} dt, evaluated per eigen-entry after the
/// substitution u = e^{−λ t} with λ the smallest nonzero eigenvalue.
pub fn lyapunov_integral(t: &TangentForm, rule: &GaussLegendre) -> HermitianMatrix {
    let s = spectral(t);
    let lref = s
        .lam
        .iter()
        .copied()
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    let xt = map_entries(&s, |_, _, a, b| {
        if a + b <= 0.0 {
            return 0.0;
        }
        let p = (a + b) / lref - 1.0;
        rule.integrate(0.0, 1.0, |u| u.powf(p)) / lref
    });
    HermitianMatrix::symmetrized(t.base().eig().from_eigenbasis(&xt))
}

/// ψ̂₀ with entries √λ_k/(λ_j + λ_k) T_jk over columns with λ_k > 0.
pub fn psi0(t: &TangentForm) -> HSVector {
    let s = spectral(t);
    let pt = map_entries(&s, |_, _, a, b| if b > 0.0 { b.sqrt() / (a + b) } else { 0.0 });
    HSVector(t.base().eig().from_eigenbasis(&pt))
}

pub fn one_form(t: &TangentForm) -> OneForm {
    OneForm {
        x: lyapunov_solve(t),
        psi0: psi0(t),
    }
}

/// ‖xρ + ρx − T‖_F.
pub fn lyapunov_residual(t: &TangentForm, x: &HermitianMatrix) -> f64 {
    let r = t.base().as_matrix();
    (x.as_matrix() * r + r * x.as_matrix() - t.matrix().as_matrix()).norm()
}

/// The tangent norm by its three routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentNormRoutes {
    /// √(Σ_jk λ_k/(λ_j+λ_k)² |T_jk|²).
    pub spectral: f64,
    /// ‖ψ̂₀‖_HS.
    pub psi0_hs: f64,
    /// √tr(ρ x²).
    pub trace: f64,
}

impl TangentNormRoutes {
    pub fn spread(&self) -> f64 {
        let v = [self.spectral, self.psi0_hs, self.trace];
        let hi = v.iter().cloned().fold(f64::MIN, f64::max);
        let lo = v.iter().cloned().fold(f64::MAX, f64::min);
        hi - lo
    }
}

pub fn tangent_norm_routes(t: &TangentForm) -> TangentNormRoutes {
    let s = spectral(t);
    let n = s.lam.len();
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            let d = s.lam[j] + s.lam[k];
            if s.lam[k] > 0.0 {
                acc += s.lam[k] / (d * d) * s.t[(j, k)].norm_sqr();
            }
        }
    }
    let p = psi0(t);
    let x = lyapunov_solve(t);
    let rx2 = (t.base().as_matrix() * x.as_matrix() * x.as_matrix()).trace().re;
    TangentNormRoutes {
        spectral: acc.sqrt(),
        psi0_hs: p.norm(),
        trace: rx2.max(0.0).sqrt(),
    }
}

/// ‖T‖_ρ.
pub fn tangent_norm(t: &TangentForm) -> f64 {
    tangent_norm_routes(t).spectral
}

/// ½ √(Σ′ f(x_j)² / ρ(x_j)) for a positive decomposition {x_j} of the identity.
pub fn decomposition_value(t: &TangentForm, parts: &[HermitianMatrix]) -> Result<f64> {
    let n = t.base().dim();
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
    let cut = t.base().rank_cutoff().max(1e-300);
    let acc: f64 = parts
        .iter()
        .filter_map(|x| {
            let w = t.base().expectation(x.as_matrix()).re;
            (w > cut).then(|| t.apply(x.as_matrix()).powi(2) / w)
        })
        .sum();
    Ok(0.5 * acc.sqrt())
}

/// Rank-one eigenprojectors of the Lyapunov coordinate x.
pub fn spectral_partition_of_x(t: &TangentForm) -> Vec<HermitianMatrix> {
    let es = lyapunov_solve(t).eig();
    (0..es.dim()).map(|k| es.projector(k).matrix().clone()).collect()
}

/// Outcome of the decomposition lower-bound oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Values of the supplied partitions, in order.
    pub sampled: Vec<f64>,
    /// Value at the eigenprojectors of x.
    pub spectral: f64,
    /// max(sampled ∪ {spectral}).
    pub best: f64,
}

pub fn tangent_norm_oracle<I>(t: &TangentForm, partitions: I) -> Result<OracleReport>
where
    I: IntoIterator<Item = Vec<HermitianMatrix>>,
{
    let sampled = partitions
        .into_iter()
        .map(|p| decomposition_value(t, &p))
        .collect::<Result<Vec<f64>>>()?;
    let spectral = decomposition_value(t, &spectral_partition_of_x(t))?;
    let best = sampled.iter().cloned().fold(spectral, f64::max);
    Ok(OracleReport {
        sampled,
        spectral,
        best,
    })
}

/// ds² = ‖x√ρ‖²_HS.
pub fn ds2_leaf(t: &TangentForm) -> f64 {
    let x = lyapunov_solve(t);
    let xs = x.as_matrix() * t.base().sqrt().as_matrix();
    xs.norm_squared()
}

/// Derivative of √ρ in direction T: D_jk = T_jk/(√λ_j + √λ_k).
pub fn sqrt_derivative(t: &TangentForm) -> Result<HermitianMatrix> {
    let b = t.base();
    if !b.is_full_rank() {
        return Err(GeomError::NotFullRank {
            min_eigenvalue: b.min_eigenvalue(),
        });
    }
    let s = spectral(t);
    let dt = map_entries(&s, |_, _, a, c| 1.0 / (a.sqrt() + c.sqrt()));
    Ok(HermitianMatrix::symmetrized(b.eig().from_eigenbasis(&dt)))
}

/// t ↦ (ν + tT + t²ω)/(1 + t²‖T‖²_ν) on [−1, 1], ω = ψ̂₀ψ̂₀*.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalCurve {
    pub base: DensityMatrix,
    pub tangent: HermitianMatrix,
    pub psi0: HSVector,
    pub omega: PositiveForm,
    pub norm_sq: f64,
    sqrt_base: HermitianMatrix,
}

pub fn canonical_curve(t: &TangentForm) -> Result<CanonicalCurve> {
    let p = psi0(t);
    let gram = p.gram();
    let norm_sq = p.norm().powi(2);
    let omega = PositiveForm::new_unbounded(gram, t.base().tolerances())?;
    Ok(CanonicalCurve {
        base: t.base().clone(),
        tangent: t.matrix().clone(),
        psi0: p,
        omega,
        norm_sq,
        sqrt_base: t.base().sqrt(),
    })
}

impl CanonicalCurve {
    pub fn domain(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    /// (√ν + tψ̂₀)/√(1 + t²‖ψ̂₀‖²).
    pub fn implementation(&self, s: f64) -> HSVector {
        let den = (1.0 + s * s * self.norm_sq).sqrt();
        HSVector((self.sqrt_base.as_matrix() + self.psi0.matrix().scale(s)).scale(1.0 / den))
    }

    pub fn state(&self, s: f64) -> Result<DensityMatrix> {
        DensityMatrix::from_computed(
            self.implementation(s).gram().into_matrix(),
            self.base.tolerances(),
        )
    }

    /// The defining rational expression, for comparison with `state`.
    pub fn state_expanded(&self, s: f64) -> HermitianMatrix {
        self.base
            .matrix()
            .add(&self.tangent.scale(s))
            .add(&self.omega.matrix().scale(s * s))
            .scale(1.0 / (1.0 + s * s * self.norm_sq))
    }
}
