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

//! Block partitions and conditional expectations, leaves of commuting
//! faithful states, minimal rank-one decompositions and maximal rank-one
//! subtraction.

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{GeomError, Result};
use crate::fidelity::{aligned_pair, arc_unique, same_dim};
use crate::geodesic::geodesic_arc;
use crate::linalg::{
    hermitian_eig, inverse_pd, singular_values, CMatrix, CVector, HermitianMatrix, Projector,
    Tolerances,
};

pub const COMMUTATOR_TOL: f64 = 1e-9;
pub const DEGENERACY_TOL: f64 = 1e-9;
const PARTITION_TOL: f64 = 1e-10;

/// Mutually orthogonal projectors summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    projectors: Vec<Projector>,
}

impl BlockPartition {
    pub fn new(projectors: Vec<Projector>) -> Result<Self> {
        let n = projectors
            .first()
            .ok_or_else(|| GeomError::NotADecomposition("empty partition".into()))?
            .dim();
        let mut sum = CMatrix::zeros(n, n);
        for (j, p) in projectors.iter().enumerate() {
            same_dim(n, p.dim())?;
            for q in &projectors[j + 1..] {
                let overlap = (p.as_matrix() * q.as_matrix()).norm();
                if overlap > PARTITION_TOL {
                    return Err(GeomError::NotADecomposition(format!(
                        "blocks overlap ({overlap:.3e})"
                    )));
                }
            }
            sum += p.as_matrix();
        }
        let defect = (sum - CMatrix::identity(n, n)).norm();
        if defect > PARTITION_TOL {
            return Err(GeomError::NotADecomposition(format!(
                "blocks sum to identity only within {defect:.3e}"
            )));
        }
        Ok(BlockPartition { projectors })
    }

    pub fn trivial(n: usize) -> Self {
        BlockPartition {
            projectors: vec![Projector::identity(n)],
        }
    }

    /// Coordinate blocks of the given sizes, in order.
    pub fn coordinate_blocks(sizes: &[usize]) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        let mut start = 0;
        let mut ps = Vec::with_capacity(sizes.len());
        for &s in sizes {
            let mut d = vec![0.0; n];
            d[start..start + s].iter_mut().for_each(|x| *x = 1.0);
            ps.push(Projector::new(HermitianMatrix::from_real_diagonal(&d))?);
            start += s;
        }
        BlockPartition::new(ps)
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.projectors.iter().map(Projector::rank).collect()
    }
}

/// Eigenprojectors of μ, grouping eigenvalues within `tol · λ_max` of the
/// first eigenvalue of their block.
pub fn spectral_partition(mu: &DensityMatrix, tol: f64) -> BlockPartition {
    let es = mu.eig();
    let gap = tol * es.max_eigenvalue();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (k, &l) in es.eigvals.iter().enumerate() {
        match blocks.last_mut() {
            Some(b) if es.eigvals[b[0]] - l <= gap => b.push(k),
            _ => blocks.push(vec![k]),
        }
    }
    let projectors = blocks
        .iter()
        .map(|b| Projector::from_orthonormal_columns(&es.eigvecs.select_columns(b.iter())))
        .collect();
    BlockPartition { projectors }
}

/// Φ(x) = Σ_k P_k x P_k.
pub fn conditional_expectation(x: &CMatrix, p: &BlockPartition) -> Result<CMatrix> {
    same_dim(x.nrows(), p.dim())?;
    same_dim(x.ncols(), p.dim())?;
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    for q in p.projectors() {
        out += q.as_matrix() * x * q.as_matrix();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafMembership {
    pub full_rank: bool,
    /// ‖ρμ − μρ‖_F.
    pub commutator: f64,
    /// ‖Φ_μ(ρ) − ρ‖_F for the spectral partition of μ.
    pub conditional_residual: f64,
    pub member: bool,
}

pub fn leaf_membership_report(rho: &DensityMatrix, mu: &DensityMatrix) -> Result<LeafMembership> {
    same_dim(rho.dim(), mu.dim())?;
    let r = rho.as_matrix();
    let m = mu.as_matrix();
    let commutator = (r * m - m * r).norm();
    let phi = conditional_expectation(r, &spectral_partition(mu, DEGENERACY_TOL))?;
    let full_rank = rho.is_full_rank();
    Ok(LeafMembership {
        full_rank,
        commutator,
        conditional_residual: (phi - r).norm(),
        member: full_rank && commutator <= COMMUTATOR_TOL,
    })
}

/// ρ is faithful and commutes with μ.
pub fn leaf_membership(rho: &DensityMatrix, mu: &DensityMatrix) -> Result<bool> {
    Ok(leaf_membership_report(rho, mu)?.member)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafConvexityReport {
    pub samples: usize,
    pub max_commutator: f64,
    /// Smallest eigenvalue over all samples.
    pub min_eigenvalue: f64,
    pub all_full_rank: bool,
    pub arc_unique: bool,
    pub passed: bool,
}

/// Samples the geodesic arc between two members of the μ-leaf.
pub fn leaf_convexity_check(
    rho: &DensityMatrix,
    nu: &DensityMatrix,
    mu: &DensityMatrix,
    grid: usize,
) -> Result<LeafConvexityReport> {
    for (name, s) in [("nu", nu), ("rho", rho)] {
        let m = leaf_membership_report(s, mu)?;
        if !m.member {
            return Err(GeomError::NotInLeaf(format!(
                "{name}: full rank {}, commutator {:.3e}",
                m.full_rank, m.commutator
            )));
        }
    }
    let grid = grid.max(2);
    let unique = arc_unique(nu, rho)?;
    let samples: Vec<DensityMatrix> = match geodesic_arc(nu, rho) {
        Ok(arc) => (0..grid)
            .map(|j| arc.eval_t(j as f64 / (grid - 1) as f64))
            .collect::<Result<_>>()?,
        Err(GeomError::DegenerateEndpoints(_)) => vec![nu.clone(); grid],
        Err(e) => return Err(e),
    };
    let m = mu.as_matrix();
    let mut max_commutator: f64 = 0.0;
    let mut min_eigenvalue = f64::INFINITY;
    let mut all_full_rank = true;
    for s in &samples {
        let r = s.as_matrix();
        max_commutator = max_commutator.max((r * m - m * r).norm());
        min_eigenvalue = min_eigenvalue.min(s.min_eigenvalue());
        all_full_rank &= s.is_full_rank();
    }
    Ok(LeafConvexityReport {
        samples: samples.len(),
        max_commutator,
        min_eigenvalue,
        all_full_rank,
        arc_unique: unique,
        passed: unique && all_full_rank && max_commutator <= COMMUTATOR_TOL,
    })
}

/// ρ = Σ_k λ_k p_{ψ_k}.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalDecomposition {
    pub weights: Vec<f64>,
    pub vectors: Vec<CVector>,
}

impl MinimalDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.vectors[0].len();
        let mut m = CMatrix::zeros(n, n);
        for (w, v) in self.weights.iter().zip(&self.vectors) {
            m += (v * v.adjoint()).scale(*w);
        }
        m
    }

    /// Rank of span{ψ_j : j ≠ k} for each k.
    pub fn leave_one_out_ranks(&self) -> Vec<usize> {
        let n = self.vectors[0].len();
        (0..self.vectors.len())
            .map(|k| {
                let cols: Vec<&CVector> = self
                    .vectors
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, v)| v)
                    .collect();
                if cols.is_empty() {
                    return 0;
                }
                let m = CMatrix::from_fn(n, cols.len(), |r, c| cols[c][r]);
                let s = singular_values(&m);
                let cut = 1e-10 * s[0];
                s.iter().filter(|&&x| x > cut).count()
            })
            .collect()
    }

    /// No term can be dropped without losing part of the support.
    pub fn is_minimal(&self) -> bool {
        let n = self.vectors[0].len();
        self.leave_one_out_ranks().iter().all(|&r| r < n)
    }
}

/// ψ_k = √ρ η_k/‖√ρ η_k‖, λ_k = ‖√ρ η_k‖², for the columns η_k of `basis`.
pub fn minimal_decomposition(rho: &DensityMatrix, basis: &CMatrix) -> Result<MinimalDecomposition> {
    if !rho.is_full_rank() {
        return Err(GeomError::NotFullRank {
            min_eigenvalue: rho.min_eigenvalue(),
        });
    }
    let n = rho.dim();
    if basis.nrows() != n || basis.ncols() != n {
        return Err(GeomError::BasisIncomplete(f64::INFINITY));
    }
    let defect = (basis.adjoint() * basis - CMatrix::identity(n, n)).norm();
    if defect > 1e-10 {
        return Err(GeomError::BasisIncomplete(defect));
    }
    let s = rho.sqrt();
    let mut weights = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for k in 0..n {
        let v: CVector = s.as_matrix() * basis.column(k);
        let nv = v.norm();
        weights.push(nv * nv);
        vectors.push(v / Complex64::new(nv, 0.0));
    }
    Ok(MinimalDecomposition { weights, vectors })
}

/// λ₀ = 1/⟨Λ⁻¹ψ, ψ⟩: the largest λ with Λ − λ p_ψ positive.
pub fn max_subtraction(lambda: &HermitianMatrix, psi: &CVector) -> Result<f64> {
    same_dim(lambda.dim(), psi.len())?;
    let nv = psi.norm();
    if (nv - 1.0).abs() > 1e-10 {
        return Err(GeomError::InvalidInput(format!("psi has norm {nv}")));
    }
    let tol = Tolerances::default();
    let es = hermitian_eig(lambda);
    crate::linalg::check_psd(&es, &tol)?;
    let inv = inverse_pd(lambda, &tol)?;
    let q = psi.dotc(&(inv.as_matrix() * psi)).re;
    Ok(1.0 / q)
}

/// ω ∝ (ζ + φ)(ζ + φ)* for the aligned pair of two faithful states.
pub fn intermediate_faithfulness_witness(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    for s in [nu, rho] {
        if !s.is_full_rank() {
            return Err(GeomError::NotFullRank {
                min_eigenvalue: s.min_eigenvalue(),
            });
        }
    }
    let p = aligned_pair(nu, rho)?;
    let x = p.zeta.matrix() + p.phi.matrix();
    let g = &x * x.adjoint();
    let tr = g.trace().re;
    DensityMatrix::from_computed(g.scale(1.0 / tr), nu.tolerances())
}
