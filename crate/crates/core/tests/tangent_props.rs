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

mod common;

use bures_geom::curves::{local_dilation, DilationSteps, SampledCurve};
use bures_geom::tangent::{
    block_residual, decomposition_value, ds2_leaf, lyapunov_residual, lyapunov_solve, one_form,
    psi0, spectral_partition_of_x, tangent_norm, tangent_norm_routes, TangentForm,
};
use bures_geom::{CMatrix, DensityMatrix, GeomError, HermitianMatrix};
use bures_geom_gen::Gen;
use common::mixed_rank_state;
use num_complex::Complex64;
use proptest::prelude::*;

fn herm(m: CMatrix) -> HermitianMatrix {
    HermitianMatrix::new((&m + m.adjoint()).scale(0.5)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_tangents_are_members(seed in any::<u64>(), n in 2usize..=10) {
        let mut g = Gen::new(seed);
        let base = mixed_rank_state(&mut g, n);
        let t = g.tangent(&base, 1.0).unwrap();
        prop_assert!(t.matrix().trace().abs() <= 1e-10);
        prop_assert!(block_residual(&base, t.matrix()) <= 1e-9);
    }

    #[test]
    fn one_form_solves_on_the_support(seed in any::<u64>(), n in 2usize..=12) {
        let mut g = Gen::new(seed);
        let base = mixed_rank_state(&mut g, n);
        let t = g.tangent(&base, 1.0 / n as f64).unwrap();
        let w = one_form(&t);
        prop_assert!(lyapunov_residual(&t, &w.x) <= 1e-10);
        let direct = w.x.as_matrix() * base.sqrt().as_matrix();
        prop_assert!((direct - w.psi0.matrix()).norm() <= 1e-10);
        let off = base.support().complement();
        prop_assert!((w.psi0.matrix() * off.as_matrix()).norm() <= 1e-10);
        // ψ̂₀ is orthogonal to the implementation √ρ
        let phi = bures_geom::HSVector(base.sqrt().into_matrix());
        prop_assert!(w.psi0.inner(&phi).re.abs() <= 1e-10);
    }

    #[test]
    fn routes_agree_at_any_rank(seed in any::<u64>(), n in 2usize..=12) {
        let mut g = Gen::new(seed);
        let base = mixed_rank_state(&mut g, n);
        let t = g.tangent(&base, 1.0 / n as f64).unwrap();
        let r = tangent_norm_routes(&t);
        prop_assert!((r.spectral - r.psi0_hs).abs() <= 1e-10);
        prop_assert!((ds2_leaf(&t) - psi0(&t).norm().powi(2)).abs() <= 1e-10);
        if base.is_full_rank() {
            prop_assert!(r.spread() <= 1e-10);
        }
    }

    #[test]
    fn norm_is_basis_invariant(seed in any::<u64>(), n in 2usize..=10) {
        let mut g = Gen::new(seed);
        let base = mixed_rank_state(&mut g, n);
        let t = g.tangent(&base, 1.0).unwrap();
        let u = g.unitary(n);
        let rb = DensityMatrix::from_hermitian(&herm(&u * base.as_matrix() * u.adjoint())).unwrap();
        let rt = TangentForm::new(&rb, herm(&u * t.matrix().as_matrix() * u.adjoint())).unwrap();
        prop_assert!((tangent_norm(&t) - tangent_norm(&rt)).abs() <= 1e-10 * (1.0 + tangent_norm(&t)));
    }

    #[test]
    fn refinement_never_lowers_the_decomposition_value(seed in any::<u64>(), n in 2usize..=8) {
        let mut g = Gen::new(seed);
        let base = g.full_rank(n);
        let t = g.tangent(&base, 1.0 / n as f64).unwrap();
        let fine = g.projector_partition(n);
        let mid = g.coarse_grain(&fine);
        let coarse = g.coarse_grain(&mid);
        let v = |p: &[HermitianMatrix]| decomposition_value(&t, p).unwrap();
        prop_assert!(v(&coarse) <= v(&mid) + 1e-12);
        prop_assert!(v(&mid) <= v(&fine) + 1e-12);
        prop_assert!(v(&fine) <= tangent_norm(&t) + 1e-9);
        let best = v(&spectral_partition_of_x(&t));
        prop_assert!((best - tangent_norm(&t)).abs() <= 1e-9);
    }

    #[test]
    fn straight_lines_are_no_faster_than_the_norm(seed in any::<u64>(), n in 2usize..=6) {
        let mut g = Gen::new(seed);
        // rank one leaves no traceless direction inside the support
        let r = g.index(2, n);
        let base = g.rank_r(n, r);
        // keep the direction inside the support so that ν + sT stays positive
        let s = base.support().as_matrix().clone();
        let h = g.hermitian(n);
        let mut tm = &s * h.as_matrix() * &s;
        let shift = tm.trace().re / r as f64;
        tm -= &s * Complex64::new(shift, 0.0);
        let lmin = base.eigvals()[r - 1];
        let scale = 0.5 * lmin / tm.norm();
        let t = TangentForm::new(&base, herm(tm.scale(scale))).unwrap();
        let ts: Vec<f64> = (0..=20).map(|j| -1.0 + 0.1 * j as f64).collect();
        let states = ts
            .iter()
            .map(|&x| DensityMatrix::from_hermitian(&base.matrix().add(&t.matrix().scale(x))).unwrap())
            .collect();
        let c = SampledCurve::new(ts, states, None).unwrap();
        let d = local_dilation(&c, 0.0, &DilationSteps::default()).unwrap();
        prop_assert!(d.value >= tangent_norm(&t) - 1e-3);
    }
}

#[test]
fn kernel_rows_keep_the_limit_value() {
    let base = DensityMatrix::diagonal(&[0.6, 0.4, 0.0]).unwrap();
    let a = Complex64::new(0.3, -0.2);
    let mut m = CMatrix::zeros(3, 3);
    m[(2, 0)] = a;
    m[(0, 2)] = a.conj();
    let t = TangentForm::from_matrix(&base, m).unwrap();
    let p = psi0(&t);
    assert!((p.matrix()[(2, 0)] - a / 0.6f64.sqrt()).norm() < 1e-14);
    assert!(p.matrix()[(0, 2)].norm() < 1e-14);
    let expect = (0.6 * a.norm_sqr() / 0.36).sqrt();
    assert!((tangent_norm(&t) - expect).abs() < 1e-14);
}

#[test]
fn weighted_coordinate_norm_matches_classical_fisher() {
    // diagonal base and diagonal direction: ‖T‖²_ν = ¼ Σ T_kk²/λ_k
    let lam = [0.5, 0.3, 0.2];
    let dt = [0.1, -0.04, -0.06];
    let base = DensityMatrix::diagonal(&lam).unwrap();
    let t = TangentForm::new(&base, HermitianMatrix::from_real_diagonal(&dt)).unwrap();
    let fisher: f64 = lam.iter().zip(&dt).map(|(l, d)| d * d / l).sum();
    assert!((tangent_norm(&t) - 0.5 * fisher.sqrt()).abs() < 1e-14);
    let x = lyapunov_solve(&t);
    for k in 0..3 {
        assert!((x.as_matrix()[(k, k)].re - dt[k] / (2.0 * lam[k])).abs() < 1e-14);
    }
}

#[test]
fn non_members_are_rejected() {
    let base = DensityMatrix::diagonal(&[0.7, 0.3, 0.0]).unwrap();
    let traced = HermitianMatrix::from_real_diagonal(&[0.1, 0.0, 0.0]);
    assert!(matches!(
        TangentForm::new(&base, traced),
        Err(GeomError::NotInTangentSpace { .. })
    ));
    let kernel = HermitianMatrix::from_real_diagonal(&[0.1, 0.0, -0.1]);
    assert!(matches!(
        TangentForm::new(&base, kernel),
        Err(GeomError::NotInTangentSpace { .. })
    ));
}
