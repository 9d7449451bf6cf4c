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

use bures_geom::curves::{
    bures_length, hamiltonian_curve, pythagoras, Curve, HsCurve, LengthOptions, PythagorasOptions,
    SampledCurve,
};
use bures_geom::fidelity::geodesic_distance;
use bures_geom::geodesic::{geodesic_arc, GammaCurve};
use bures_geom::tangent::{canonical_curve, lyapunov_solve, TangentForm};
use bures_geom::{DensityMatrix, GeomError, HSVector};
use bures_geom_gen::Gen;
use common::mixed_rank_state;
use proptest::prelude::*;

/// One of the implemented test curves, chosen by `kind`, over a state of
/// the given rank profile.
fn implemented_curve(g: &mut Gen, n: usize, kind: usize, faithful: bool) -> Box<dyn Curve> {
    let state = |g: &mut Gen| {
        if faithful {
            g.full_rank(n)
        } else {
            mixed_rank_state(g, n)
        }
    };
    match kind {
        0 => Box::new(geodesic_arc(&state(g), &state(g)).unwrap()),
        1 => {
            let h = g.hermitian(n);
            Box::new(hamiltonian_curve(&state(g), &h, (0.0, 1.0)).unwrap())
        }
        2 => {
            let base = state(g);
            let t = g.tangent(&base, 0.5 / n as f64).unwrap();
            // ‖x‖ < 1 keeps 1 + sx invertible, so the curve stays faithful
            let xn = lyapunov_solve(&t).eig().eigvals.iter().fold(0.0f64, |m, l| m.max(l.abs()));
            let t = if faithful && xn > 0.5 {
                TangentForm::new(&base, t.matrix().scale(0.5 / xn)).unwrap()
            } else {
                t
            };
            Box::new(canonical_curve(&t).unwrap())
        }
        _ => Box::new(GammaCurve::new(&state(g), &state(g)).unwrap()),
    }
}

fn interior(c: &dyn Curve, v: f64) -> f64 {
    let (a, b) = c.domain();
    a + (b - a) * (0.1 + 0.8 * v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn pythagorean_residual_is_small(seed in any::<u64>(), n in 2usize..=6, kind in 0usize..4) {
        let mut g = Gen::new(seed);
        let c = implemented_curve(&mut g, n, kind, false);
        let t = interior(c.as_ref(), g.uniform());
        let d = pythagoras(c.as_ref(), t, &PythagorasOptions::default()).unwrap();
        prop_assert!(d.residual.abs() <= 1e-3f64.max(1e-2 * d.dil * d.dil), "{:?}", d);
        prop_assert!(d.dil >= d.tangent_norm_val - 1e-3);
        prop_assert!(d.psi0_overlap.abs() <= 1e-8);
    }

    #[test]
    fn faithful_curves_are_finslerian_everywhere(seed in any::<u64>(), n in 2usize..=6, kind in 0usize..3) {
        let mut g = Gen::new(seed);
        let c = implemented_curve(&mut g, n, kind, true);
        for j in 0..=8 {
            let d = pythagoras(c.as_ref(), interior(c.as_ref(), j as f64 / 8.0), &PythagorasOptions::default()).unwrap();
            prop_assert!(d.finslerian);
            prop_assert!((d.dil - d.tangent_norm_val).abs() <= 1e-4);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn length_is_at_least_the_distance(seed in any::<u64>(), n in 2usize..=5, kind in 0usize..4) {
        let mut g = Gen::new(seed);
        let c: Box<dyn Curve> = if kind == 3 {
            // straight segment between two states
            let a = mixed_rank_state(&mut g, n);
            let b = mixed_rank_state(&mut g, n);
            Box::new(SampledCurve::new(vec![0.0, 1.0], vec![a, b], None).unwrap())
        } else {
            implemented_curve(&mut g, n, kind, false)
        };
        let (lo, hi) = c.domain();
        let d = geodesic_distance(&c.state_at(lo).unwrap(), &c.state_at(hi).unwrap()).unwrap();
        let len = bures_length(c.as_ref(), &LengthOptions::default()).unwrap();
        prop_assert!(len.partition_sup >= d - 1e-4);
        prop_assert!(len.quadrature >= d - 1e-4, "{:?} vs {}", len, d);
        let sums: Vec<f64> = len.partition_sums.iter().map(|p| p.1).collect();
        prop_assert!(sums.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn estimators_agree_on_faithful_curves(seed in any::<u64>(), n in 2usize..=5, kind in 0usize..3) {
        let mut g = Gen::new(seed);
        let c = implemented_curve(&mut g, n, kind, true);
        let len = bures_length(c.as_ref(), &LengthOptions::default()).unwrap();
        prop_assert!((len.quadrature - len.partition_sup).abs() <= 1e-4, "{:?}", len);
    }
}

#[test]
fn geodesic_length_is_the_angle() {
    let mut g = Gen::new(21);
    for n in 2..=5 {
        let arc = geodesic_arc(&mixed_rank_state(&mut g, n), &g.full_rank(n)).unwrap();
        let len = bures_length(&arc, &LengthOptions::default()).unwrap();
        assert!((len.quadrature - arc.theta0).abs() < 1e-6, "{len:?}");
        assert!(len.partition_sup <= arc.theta0 + 1e-12);
    }
}

#[test]
fn unnormalised_implementations_are_not_states() {
    let s = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap().sqrt().into_matrix();
    let c = HsCurve::new((0.0, 1.0), move |t| HSVector(s.scale(1.0 + t)));
    assert!(matches!(c.state_at(0.5), Err(GeomError::NotAState(_))));
}

#[test]
fn sampled_curves_validate_their_grid() {
    let a = DensityMatrix::maximally_mixed(2);
    let b = DensityMatrix::diagonal(&[0.9, 0.1]).unwrap();
    let e = SampledCurve::new(vec![1.0, 0.0], vec![a.clone(), b.clone()], None).unwrap_err();
    assert!(e.is_validation());
    assert!(SampledCurve::new(vec![0.0], vec![a.clone()], None).is_err());
    let wrong = HSVector(b.sqrt().into_matrix());
    let e = SampledCurve::new(vec![0.0, 1.0], vec![a.clone(), a], Some(vec![wrong.clone(), wrong]));
    assert!(matches!(e, Err(GeomError::NotAState(_))));
}

#[test]
fn endpoints_are_excluded_from_diagnostics() {
    let mut g = Gen::new(2);
    let arc = geodesic_arc(&g.full_rank(3), &g.full_rank(3)).unwrap();
    let e = pythagoras(&arc, 0.0, &PythagorasOptions::default()).unwrap_err();
    assert!(matches!(e, GeomError::BoundaryPoint { .. }));
}
