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

//! Seeded random instances for bures-geom: states of given rank, tangent
//! forms, unitaries, commuting pairs and positive partitions of the identity.
//!
//! Every generator draws from a ChaCha8 stream seeded with a `u64`, so a seed
//! fully determines the output.

use bures_geom::{CMatrix, CVector, DensityMatrix, HermitianMatrix, Result};
use bures_geom::tangent::TangentForm;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

/// Default diagonal loading for full-rank states, relative to tr(AA*)/n.
pub const FULL_RANK_EPS: f64 = 0.1;

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.random_range(lo..=hi_inclusive)
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Entries with independent N(0, ½) real and imaginary parts.
    pub fn complex_gaussian(&mut self, rows: usize, cols: usize) -> CMatrix {
        let s = 0.5f64.sqrt();
        CMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(s * self.normal(), s * self.normal())
        })
    }

    pub fn complex_vector(&mut self, n: usize) -> CVector {
        let m = self.complex_gaussian(n, 1);
        m.column(0).into_owned()
    }

    pub fn unit_vector(&mut self, n: usize) -> CVector {
        let v = self.complex_vector(n);
        let nv = v.norm();
        v / Complex64::new(nv, 0.0)
    }

    /// Hermitian matrix (G + G*)/2 with G complex Gaussian.
    pub fn hermitian(&mut self, n: usize) -> HermitianMatrix {
        let g = self.complex_gaussian(n, n);
        HermitianMatrix::new((&g + g.adjoint()).scale(0.5)).expect("Hermitian by construction")
    }

    /// Haar-distributed unitary from the QR factorisation of a Gaussian matrix.
    pub fn unitary(&mut self, n: usize) -> CMatrix {
        let g = self.complex_gaussian(n, n);
        let qr = g.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for k in 0..n {
            let d = r[(k, k)];
            let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..n {
                q[(i, k)] *= ph;
            }
        }
        q
    }

    /// (AA* + ε·tr(AA*)/n · 1)/tr with A an n×n Gaussian matrix.
    pub fn full_rank_with(&mut self, n: usize, eps: f64) -> DensityMatrix {
        let a = self.complex_gaussian(n, n);
        let g = &a * a.adjoint();
        let tr = g.trace().re;
        let m = g + CMatrix::identity(n, n).scale(eps * tr / n as f64);
        let t = m.trace().re;
        density(m.scale(1.0 / t))
    }

    pub fn full_rank(&mut self, n: usize) -> DensityMatrix {
        self.full_rank_with(n, FULL_RANK_EPS)
    }

    /// AA*/tr with A an n×r Gaussian matrix.
    pub fn rank_r(&mut self, n: usize, r: usize) -> DensityMatrix {
        let a = self.complex_gaussian(n, r.clamp(1, n));
        let g = &a * a.adjoint();
        let t = g.trace().re;
        density(g.scale(1.0 / t))
    }

    pub fn pure(&mut self, n: usize) -> DensityMatrix {
        self.rank_r(n, 1)
    }

    /// Probability vector with entries bounded below by `floor`.
    pub fn probability_vector(&mut self, n: usize, floor: f64) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| self.rng.sample::<f64, _>(Exp1) + floor).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / s).collect()
    }

    /// Probability vector in which each entry is zero with probability `p_zero`
    /// (at least one entry stays positive).
    pub fn sparse_probability_vector(&mut self, n: usize, p_zero: f64) -> Vec<f64> {
        let mut raw: Vec<f64> = (0..n)
            .map(|_| {
                if self.uniform() < p_zero {
                    0.0
                } else {
                    self.rng.sample::<f64, _>(Exp1)
                }
            })
            .collect();
        if raw.iter().all(|&x| x == 0.0) {
            let k = self.index(0, n - 1);
            raw[k] = 1.0;
        }
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / s).collect()
    }

    /// Diagonal states V diag(p) V*, V diag(q) V* in a shared random basis.
    pub fn commuting_pair(&mut self, n: usize) -> CommutingPair {
        let v = self.unitary(n);
        let p = self.probability_vector(n, 0.05);
        let q = self.probability_vector(n, 0.05);
        CommutingPair {
            nu: conjugated_diag(&v, &p),
            rho: conjugated_diag(&v, &q),
            p,
            q,
            basis: v,
        }
    }

    /// Traceless Hermitian T with vanishing off-support block at `base`.
    pub fn tangent(&mut self, base: &DensityMatrix, scale: f64) -> Result<TangentForm> {
        let n = base.dim();
        let h = self.hermitian(n).into_matrix().scale(scale);
        let s = base.support().as_matrix().clone();
        let q = base.support().complement().as_matrix().clone();
        let t = &h - &q * &h * &q;
        let r = base.rank().max(1) as f64;
        let tr = t.trace().re;
        let t = t - s.scale(tr / r);
        TangentForm::new(base, HermitianMatrix::new((&t + t.adjoint()).scale(0.5))?)
    }

    /// Random orthonormal basis split into contiguous groups of random sizes;
    /// each group becomes one projector.
    pub fn projector_partition(&mut self, n: usize) -> Vec<HermitianMatrix> {
        let v = self.unitary(n);
        let mut parts = Vec::new();
        let mut start = 0;
        while start < n {
            let size = self.index(1, n - start);
            let cols = v.columns(start, size).into_owned();
            parts.push(hermitian(&cols * cols.adjoint()));
            start += size;
        }
        parts
    }

    /// Commuting positive decomposition x_k = V diag(w_k) V* with Σ_k w_k = 1.
    pub fn commuting_positive_partition(&mut self, n: usize, parts: usize) -> Vec<HermitianMatrix> {
        let v = self.unitary(n);
        let m = parts.max(1);
        let mut w = vec![vec![0.0; n]; m];
        for j in 0..n {
            let col = self.probability_vector(m, 0.0);
            for k in 0..m {
                w[k][j] = col[k];
            }
        }
        w.iter()
            .map(|wk| hermitian(&v * HermitianMatrix::from_real_diagonal(wk).as_matrix() * v.adjoint()))
            .collect()
    }

    /// Random merge of neighbouring parts of a partition.
    pub fn coarse_grain(&mut self, parts: &[HermitianMatrix]) -> Vec<HermitianMatrix> {
        let mut out: Vec<HermitianMatrix> = Vec::new();
        for p in parts {
            match out.last_mut() {
                Some(last) if self.uniform() < 0.5 => *last = last.add(p),
                _ => out.push(p.clone()),
            }
        }
        out
    }

    /// Full-rank state commuting with the coordinate block projectors of `sizes`.
    pub fn block_diagonal_state(&mut self, sizes: &[usize]) -> DensityMatrix {
        let n: usize = sizes.iter().sum();
        let mut m = CMatrix::zeros(n, n);
        let mut start = 0;
        for &s in sizes {
            let a = self.complex_gaussian(s, s);
            let g = &a * a.adjoint() + CMatrix::identity(s, s).scale(0.2 * s as f64);
            m.view_mut((start, start), (s, s)).copy_from(&g);
            start += s;
        }
        let t = m.trace().re;
        density(m.scale(1.0 / t))
    }
}

/// Two states diagonal in a common basis, with their spectra.
#[derive(Debug, Clone)]
pub struct CommutingPair {
    pub nu: DensityMatrix,
    pub rho: DensityMatrix,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub basis: CMatrix,
}

fn hermitian(m: CMatrix) -> HermitianMatrix {
    HermitianMatrix::new((&m + m.adjoint()).scale(0.5)).expect("Hermitian by construction")
}

fn density(m: CMatrix) -> DensityMatrix {
    DensityMatrix::new((&m + m.adjoint()).scale(0.5)).expect("generated state is valid")
}

/// V diag(p) V*.
pub fn conjugated_diag(v: &CMatrix, p: &[f64]) -> DensityMatrix {
    let d = HermitianMatrix::from_real_diagonal(p);
    density(v * d.as_matrix() * v.adjoint())
}
