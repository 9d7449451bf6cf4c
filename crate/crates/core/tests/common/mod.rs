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

//! Helpers shared by the integration tests.

#![allow(dead_code)]

use bures_geom::{CMatrix, CVector, DensityMatrix, HermitianMatrix};
use bures_geom_gen::Gen;
use num_complex::Complex64;

pub fn e(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Full rank with probability 2/3, otherwise a random rank below n.
pub fn mixed_rank_state(g: &mut Gen, n: usize) -> DensityMatrix {
    if n > 1 && g.uniform() < 1.0 / 3.0 {
        let r = g.index(1, n - 1);
        g.rank_r(n, r)
    } else {
        g.full_rank(n)
    }
}

/// Two orthonormal vectors from a random unitary.
pub fn orthonormal_pair(g: &mut Gen, n: usize) -> (CVector, CVector) {
    let u = g.unitary(n);
    (u.column(0).into_owned(), u.column(1).into_owned())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn min_eig(m: &CMatrix) -> f64 {
    HermitianMatrix::new(m.clone()).expect("Hermitian").min_eigenvalue()
}

/// √ρ by eigendecomposition of a raw positive matrix.
pub fn sqrt_raw(m: &CMatrix) -> CMatrix {
    let h = HermitianMatrix::new((m + m.adjoint()).scale(0.5)).expect("Hermitian");
    bures_geom::sqrt_psd(&h, &Default::default())
        .expect("psd")
        .into_matrix()
}
