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

//! Geodesic arcs between states, their two-sided extension through the
//! initial state, geodesic loops and extension predicates.

use crate::density::DensityMatrix;
use crate::error::{GeomError, Result};
use crate::fidelity::{aligned_pair, same_dim, support_basis, AlignedPair, SUPPORT_TOL};
use crate::linalg::{support_projector, CMatrix, HSVector, HermitianMatrix, Projector, Tolerances};
use crate::quadrature::CompositeGauss;

const ENDPOINT_TOL: f64 = 1e-12;

fn check_range(value: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(value >= lo - ENDPOINT_TOL && value <= hi + ENDPOINT_TOL) {
        return Err(GeomError::ParamOutOfRange { value, lo, hi });
    }
    Ok(value.clamp(lo, hi))
}

/// Geodesic arc from ν to ρ, implemented by φ_t = tζ + λ(t)φ.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicArc {
    pub nu: DensityMatrix,
    pub rho: DensityMatrix,
    pub pair: AlignedPair,
    pub fidelity: f64,
    pub transition: f64,
    pub theta0: f64,
    /// ζφ* + φζ*.
    pub cross: HermitianMatrix,
}

pub fn geodesic_arc(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<GeodesicArc> {
    same_dim(nu.dim(), rho.dim())?;
    let gap = (nu.as_matrix() - rho.as_matrix()).norm();
    if gap <= ENDPOINT_TOL {
        return Err(GeomError::DegenerateEndpoints(gap));
    }
    let pair = aligned_pair(nu, rho)?;
    let f = pair.fidelity;
    Ok(GeodesicArc {
        nu: nu.clone(),
        rho: rho.clone(),
        cross: pair.cross(),
        fidelity: f,
        transition: f * f,
        theta0: f.acos(),
        pair,
    })
}

/// λ(t) = −tF + √(1 − t²(1 − P)).
fn lambda(f: f64, p: f64, t: f64) -> f64 {
    -t * f + (1.0 - t * t * (1.0 - p)).max(0.0).sqrt()
}

impl GeodesicArc {
    pub fn dim(&self) -> usize {
        self.nu.dim()
    }

    pub fn lambda(&self, t: f64) -> f64 {
        lambda(self.fidelity, self.transition, t)
    }

    /// φ_t, without range checks.
    pub(crate) fn implementation_unchecked(&self, t: f64) -> HSVector {
        let l = self.lambda(t);
        HSVector(self.pair.zeta.matrix().scale(t) + self.pair.phi.matrix().scale(l))
    }

    pub fn implementation_t(&self, t: f64) -> Result<HSVector> {
        let t = check_range(t, 0.0, 1.0)?;
        Ok(self.implementation_unchecked(t))
    }

    /// ν_t = φ_t φ_t*.
    pub fn eval_t(&self, t: f64) -> Result<DensityMatrix> {
        let phi = self.implementation_t(t)?;
        DensityMatrix::from_computed(phi.gram().into_matrix(), self.nu.tolerances())
    }

    /// t²ρ + λ(t)²ν + tλ(t)(ζφ* + φζ*).
    pub fn eval_t_expanded(&self, t: f64) -> Result<HermitianMatrix> {
        let t = check_range(t, 0.0, 1.0)?;
        let l = self.lambda(t);
        Ok(self
            .rho
            .matrix()
            .scale(t * t)
            .add(&self.nu.matrix().scale(l * l))
            .add(&self.cross.scale(t * l)))
    }

    /// t(θ) = sin θ / sin θ₀.
    pub fn t_of_theta(&self, theta: f64) -> Result<f64> {
        if self.theta0 <= 0.0 {
            return Err(GeomError::DegenerateEndpoints(0.0));
        }
        let theta = check_range(theta, 0.0, self.theta0)?;
        Ok((theta.sin() / self.theta0.sin()).clamp(0.0, 1.0))
    }

    /// State at arc-length parameter θ ∈ [0, θ₀].
    pub fn eval_theta(&self, theta: f64) -> Result<DensityMatrix> {
        self.eval_t(self.t_of_theta(theta)?)
    }

    /// Metric speed of t ↦ ν_t: √((1 − P)/(1 − s²(1 − P))).
    pub fn dilation_at(&self, s: f64) -> Result<f64> {
        let s = check_range(s, 0.0, 1.0)?;
        let q = 1.0 - self.transition;
        let den = 1.0 - s * s * q;
        if den <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok((q / den).sqrt())
    }

    /// θ₀ = arccos F.
    pub fn arc_length(&self) -> f64 {
        self.theta0
    }

    /// ∫₀¹ dilation_at(s) ds.
    ///
    /// The substitution s = 1 − (1 − v)² absorbs the inverse square-root
    /// endpoint singularity that appears as P → 0.
    pub fn quadrature_length(&self, rule: &CompositeGauss) -> f64 {
        let q = 1.0 - self.transition;
        rule.integrate(0.0, 1.0, |v| {
            let w = 1.0 - v;
            let s = 1.0 - w * w;
            // 1 − s²q = (1 − q) + q(1 − s)(1 + s)
            let den = (1.0 - q) + q * w * w * (1.0 + s);
            2.0 * w * (q / den).sqrt()
        })
    }

    /// μ_C = (ν₁ + ν₂ − cos Δθ · cross₁₂) / (2 sin² Δθ), with cross₁₂ taken
    /// from the aligned pair of the sub-arc endpoints.
    pub fn osculating_center(&self, theta1: f64, theta2: f64) -> Result<DensityMatrix> {
        let t1 = check_range(theta1, 0.0, self.theta0)?;
        let t2 = check_range(theta2, 0.0, self.theta0)?;
        if t2 <= t1 {
            return Err(GeomError::ParamOutOfRange {
                value: theta2,
                lo: theta1,
                hi: self.theta0,
            });
        }
        let n1 = self.eval_theta(t1)?;
        let n2 = self.eval_theta(t2)?;
        let sub = aligned_pair(&n1, &n2)?;
        let d = t2 - t1;
        let m = n1
            .matrix()
            .add(n2.matrix())
            .sub(&sub.cross().scale(d.cos()))
            .scale(0.5 / d.sin().powi(2));
        DensityMatrix::from_computed(m.into_matrix(), self.nu.tolerances())
    }

    /// Partition t_j = sin(θ_j)/sin θ₀ with θ_j equally spaced.
    pub fn normal_partition(&self, intervals: usize) -> Vec<f64> {
        let s0 = self.theta0.sin();
        (0..=intervals)
            .map(|j| {
                let th = self.theta0 * j as f64 / intervals as f64;
                (th.sin() / s0).clamp(0.0, 1.0)
            })
            .collect()
    }
}

/// Σ‖φ_{t_j} − φ_{t_{j+1}}‖_HS over a partition of [0, 1].
pub fn implementing_path_length(arc: &GeodesicArc, partition: &[f64]) -> Result<f64> {
    let mut prev: Option<HSVector> = None;
    let mut total = 0.0;
    for &t in partition {
        let cur = arc.implementation_t(t)?;
        if let Some(p) = prev {
            total += (cur.matrix() - p.matrix()).norm();
        }
        prev = Some(cur);
    }
    Ok(total)
}

/// The arc implementation continued to t ∈ [−1, 1], passing through ν at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaCurve {
    pub arc: GeodesicArc,
}

impl GammaCurve {
    pub fn new(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<Self> {
        Ok(GammaCurve {
            arc: geodesic_arc(nu, rho)?,
        })
    }

    pub fn implementation(&self, t: f64) -> Result<HSVector> {
        let t = check_range(t, -1.0, 1.0)?;
        Ok(self.arc.implementation_unchecked(t))
    }

    pub fn state(&self, t: f64) -> Result<DensityMatrix> {
        let phi = self.implementation(t)?;
        DensityMatrix::from_computed(phi.gram().into_matrix(), self.arc.nu.tolerances())
    }

    /// Metric speed at t = 0: √(1 − P).
    pub fn dilation_at_origin(&self) -> f64 {
        (1.0 - self.arc.transition).max(0.0).sqrt()
    }
}

/// θ ↦ φ_θ = sin θ · ζ + cos θ · φ for orthonormal rank-one φ, ζ with
/// orthogonal ranges and a common initial space.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicLoop {
    pub phi: HSVector,
    pub zeta: HSVector,
}

impl GeodesicLoop {
    pub fn new(phi: HSVector, zeta: HSVector) -> Result<Self> {
        let n = phi.matrix().nrows();
        same_dim(n, zeta.matrix().nrows())?;
        for (name, v) in [("phi", &phi), ("zeta", &zeta)] {
            if (v.norm() - 1.0).abs() > 1e-10 {
                return Err(GeomError::InvalidInput(format!("{name} is not a unit vector")));
            }
        }
        if (phi.matrix().adjoint() * zeta.matrix()).norm() > 1e-10 {
            return Err(GeomError::InvalidInput("ranges of phi and zeta are not orthogonal".into()));
        }
        let tol = Tolerances::default();
        let sp = support_projector(&phi.co_gram(), &tol)?;
        let sz = support_projector(&zeta.co_gram(), &tol)?;
        if !(sp.is_below(&sz, SUPPORT_TOL) && sz.is_below(&sp, SUPPORT_TOL)) {
            return Err(GeomError::InvalidInput("phi and zeta have different initial spaces".into()));
        }
        Ok(GeodesicLoop { phi, zeta })
    }

    /// φ = a f*, ζ = b f* for orthonormal a, b and a unit vector f.
    pub fn from_vectors(a: &crate::CVector, b: &crate::CVector, f: &crate::CVector) -> Result<Self> {
        let phi: CMatrix = a * f.adjoint();
        let zeta: CMatrix = b * f.adjoint();
        GeodesicLoop::new(HSVector(phi), HSVector(zeta))
    }

    pub fn implementation(&self, theta: f64) -> HSVector {
        HSVector(self.zeta.matrix().scale(theta.sin()) + self.phi.matrix().scale(theta.cos()))
    }

    pub fn state(&self, theta: f64) -> Result<DensityMatrix> {
        DensityMatrix::from_computed(
            self.implementation(theta).gram().into_matrix(),
            &Tolerances::default(),
        )
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::PI
    }
}

/// s(ν) ≤ s(K) with K = U|√ν√ρ|U*.
pub fn extendable_beyond(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<bool> {
    let pair = aligned_pair(nu, rho)?;
    Ok(nu.support().is_below(&pair.commutant_support(), SUPPORT_TOL))
}

/// s(ν) ≤ s(K + ζ*ζ).
///
/// K + ζ*ζ = U(|√ν√ρ| + ρ)U*, so the support is computed before conjugation.
pub fn geodesically_extendable(nu: &DensityMatrix, rho: &DensityMatrix) -> Result<bool> {
    let pair = aligned_pair(nu, rho)?;
    let inner = pair.completion.modulus.add(rho.matrix());
    let s = support_projector(&inner, nu.tolerances())?;
    let u = &pair.completion.unitary_completion;
    let k = Projector::from_orthonormal_columns(&(u * support_basis(&s)));
    Ok(nu.support().is_below(&k, SUPPORT_TOL))
}

/// Both sides of Σ√(ξ_j η_j) ≤ 1 − ⅛ Σ_{η_j ≠ 0} (ξ_j − η_j)²/max(ξ_j, η_j).
pub fn prob_vector_bound(xi: &[f64], eta: &[f64]) -> Result<(f64, f64)> {
    same_dim(xi.len(), eta.len())?;
    for v in [xi, eta] {
        if v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(GeomError::InvalidInput("probability vector has negative entries".into()));
        }
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-10 {
            return Err(GeomError::InvalidInput(format!("probability vector sums to {s}")));
        }
    }
    let lhs = xi.iter().zip(eta).map(|(a, b)| (a * b).sqrt()).sum();
    let pen: f64 = xi
        .iter()
        .zip(eta)
        .filter(|(_, &b)| b != 0.0)
        .map(|(&a, &b)| (a - b).powi(2) / a.max(b))
        .sum();
    Ok((lhs, 1.0 - pen / 8.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::geodesic_distance;
    use crate::CVector;
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn e(n: usize, k: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn orthogonal_pure_arc() {
        let p1 = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let p2 = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        let arc = geodesic_arc(&p1, &p2).unwrap();
        assert!((arc.theta0 - FRAC_PI_2).abs() < 1e-15);
        let c = arc.cross.as_matrix();
        assert!(c[(0, 0)].norm() < 1e-15 && c[(1, 1)].norm() < 1e-15);
        for &t in &[0.0, 0.3, 0.7, 1.0] {
            let s = arc.eval_t(t).unwrap();
            let want = HermitianMatrix::from_real_diagonal(&[1.0 - t * t, t * t]);
            assert!((s.as_matrix() - want.as_matrix()).norm() < 1e-12);
        }
        assert!(!extendable_beyond(&p1, &p2).unwrap());
        assert!(!geodesically_extendable(&p1, &p2).unwrap());
    }

    #[test]
    fn degenerate_and_out_of_range() {
        let r = DensityMatrix::diagonal(&[0.4, 0.6]).unwrap();
        assert!(matches!(geodesic_arc(&r, &r), Err(GeomError::DegenerateEndpoints(_))));
        let s = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
        let arc = geodesic_arc(&r, &s).unwrap();
        assert!(matches!(arc.eval_t(1.5), Err(GeomError::ParamOutOfRange { .. })));
        assert!((arc.lambda(0.0) - 1.0).abs() < 1e-15);
        assert!(arc.lambda(1.0).abs() < 1e-15);
    }

    #[test]
    fn dilation_values() {
        let p1 = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let p2 = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        let arc = geodesic_arc(&p1, &p2).unwrap();
        assert!((arc.dilation_at(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(arc.dilation_at(1.0).unwrap().is_infinite());
        let len = arc.quadrature_length(&CompositeGauss::length_default());
        assert!((len - FRAC_PI_2).abs() < 1e-10, "{len}");
    }

    #[test]
    fn half_transition_dilation() {
        // Pure states with P = 1/2.
        let a = DensityMatrix::pure(&e(2, 0)).unwrap();
        let b = DensityMatrix::pure(&(e(2, 0) + e(2, 1))).unwrap();
        let arc = geodesic_arc(&a, &b).unwrap();
        assert!((arc.transition - 0.5).abs() < 1e-12);
        let d = arc.dilation_at(0.5).unwrap();
        assert!((d - (0.5f64 / 0.875).sqrt()).abs() < 1e-12);
        assert!((d - 0.755929).abs() < 1e-6);
        assert!((arc.arc_length() - FRAC_PI_4).abs() < 1e-12);
        let mid = arc.eval_theta(FRAC_PI_4 / 2.0).unwrap();
        assert!((geodesic_distance(&a, &mid).unwrap() - FRAC_PI_4 / 2.0).abs() < 1e-8);
    }

    #[test]
    fn osculating_center_orthogonal_pure() {
        let p1 = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let p2 = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        let arc = geodesic_arc(&p1, &p2).unwrap();
        let m = arc.osculating_center(0.0, FRAC_PI_2).unwrap();
        let want = DensityMatrix::maximally_mixed(2);
        assert!((m.as_matrix() - want.as_matrix()).norm() < 1e-12);
    }

    #[test]
    fn loop_is_periodic_and_pure() {
        let lp = GeodesicLoop::from_vectors(&e(3, 0), &e(3, 1), &e(3, 2)).unwrap();
        for k in 0..16 {
            let th = k as f64 * 0.37;
            let a = lp.state(th).unwrap();
            let b = lp.state(th + lp.period()).unwrap();
            assert!((a.as_matrix() - b.as_matrix()).norm() < 1e-10);
        }
        let q = lp.state(FRAC_PI_4).unwrap();
        assert!((q.eigvals()[0] - 1.0).abs() < 1e-12);
        assert_eq!(q.rank(), 1);
        assert!(GeodesicLoop::from_vectors(&e(3, 0), &e(3, 0), &e(3, 2)).is_err());
    }

    #[test]
    fn prob_vectors() {
        let (l, r) = prob_vector_bound(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert!((l - 1.0).abs() < 1e-15 && (r - 1.0).abs() < 1e-15);
        let (l, r) = prob_vector_bound(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(l <= r);
        assert!(prob_vector_bound(&[0.5, 0.6], &[0.5, 0.5]).is_err());
    }
}
