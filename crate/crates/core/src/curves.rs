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

//! Curves of states with optional Hilbert–Schmidt implementations, their
//! numeric local dilation and Bures length, and the decomposition of the
//! implementation speed into a tangent part and an off-support part.

use crate::density::DensityMatrix;
use crate::error::{GeomError, Result};
use crate::fidelity::bures_distance;
use crate::geodesic::{GammaCurve, GeodesicArc, GeodesicLoop};
use crate::linalg::{
    support_projector, unitary_flow, CMatrix, HSVector, HermitianMatrix, Tolerances,
};
use crate::quadrature::CompositeGauss;
use crate::tangent::{lyapunov_solve, tangent_norm, CanonicalCurve, TangentForm};

/// Off-support invariant below which a point counts as Finslerian.
pub const FINSLER_TOL: f64 = 1e-6;
/// Largest allowed gap between dilation and tangent norm at a Finslerian point.
pub const FINSLER_AGREEMENT: f64 = 1e-4;
const DRIFT_TOL: f64 = 1e-10;

/// A curve t ↦ ρ_t over a closed interval.
pub trait Curve: Sync {
    fn domain(&self) -> (f64, f64);
    fn state_at(&self, t: f64) -> Result<DensityMatrix>;
    /// c_t with c_t c_t* = ρ_t, when the curve carries one.
    fn implementation_at(&self, _t: f64) -> Option<Result<HSVector>> {
        None
    }
}

fn in_domain(t: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if !(t >= lo && t <= hi) {
        return Err(GeomError::ParamOutOfRange { value: t, lo, hi });
    }
    Ok(())
}

fn interior(t: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if !(t > lo && t < hi) {
        return Err(GeomError::BoundaryPoint { t, lo, hi });
    }
    Ok(())
}

/// State c c*, renormalised when its trace drifted by at most 1e-10.
fn state_of(c: &HSVector) -> Result<DensityMatrix> {
    let g = c.gram();
    let tr = g.trace();
    if (tr - 1.0).abs() > DRIFT_TOL {
        return Err(GeomError::NotAState(format!("trace {tr:.12}")));
    }
    crate::density::validate_density(&g.scale(1.0 / tr), &Tolerances::default())
        .map_err(|e| GeomError::NotAState(e.to_string()))
}

impl Curve for GeodesicArc {
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        self.eval_t(t)
    }
    fn implementation_at(&self, t: f64) -> Option<Result<HSVector>> {
        Some(self.implementation_t(t))
    }
}

impl Curve for GammaCurve {
    fn domain(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        self.state(t)
    }
    fn implementation_at(&self, t: f64) -> Option<Result<HSVector>> {
        Some(self.implementation(t))
    }
}

impl Curve for GeodesicLoop {
    fn domain(&self) -> (f64, f64) {
        (0.0, self.period())
    }
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        in_domain(t, self.domain())?;
        self.state(t)
    }
    fn implementation_at(&self, t: f64) -> Option<Result<HSVector>> {
        Some(in_domain(t, self.domain()).map(|_| self.implementation(t)))
    }
}

impl Curve for CanonicalCurve {
    fn domain(&self) -> (f64, f64) {
        CanonicalCurve::domain(self)
    }
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        in_domain(t, Curve::domain(self))?;
        self.state(t)
    }
    fn implementation_at(&self, t: f64) -> Option<Result<HSVector>> {
        Some(in_domain(t, Curve::domain(self)).map(|_| self.implementation(t)))
    }
}

/// Curve given by an implementation t ↦ c_t.
pub struct HsCurve {
    domain: (f64, f64),
    imp: Box<dyn Fn(f64) -> HSVector + Send + Sync>,
}

impl HsCurve {
    pub fn new(domain: (f64, f64), c: impl Fn(f64) -> HSVector + Send + Sync + 'static) -> Self {
        HsCurve {
            domain,
            imp: Box::new(c),
        }
    }

    /// c_t = cos t · e f* + sin t · e' f'* for orthonormal pairs (e, e'), (f, f').
    pub fn schmidt_rotation(
        e: (&crate::CVector, &crate::CVector),
        f: (&crate::CVector, &crate::CVector),
        domain: (f64, f64),
    ) -> Self {
        let a: CMatrix = e.0 * f.0.adjoint();
        let b: CMatrix = e.1 * f.1.adjoint();
        HsCurve::new(domain, move |t| HSVector(a.scale(t.cos()) + b.scale(t.sin())))
    }
}

impl Curve for HsCurve {
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        in_domain(t, self.domain)?;
        state_of(&(self.imp)(t))
    }
    fn implementation_at(&self, t: f64) -> Option<Result<HSVector>> {
        Some(in_domain(t, self.domain).map(|_| (self.imp)(t)))
    }
}

/// ρ_t = e^{−iht} ρ₀ e^{iht}, implemented by e^{−iht}√ρ₀.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianCurve {
    pub rho0: DensityMatrix,
    pub h: HermitianMatrix,
    pub domain: (f64, f64),
    sqrt0: HermitianMatrix,
}

pub fn hamiltonian_curve(
    rho0: &DensityMatrix,
    h: &HermitianMatrix,
    domain: (f64, f64),
) -> Result<HamiltonianCurve> {
    crate::fidelity::same_dim(rho0.dim(), h.dim())?;
    if !(domain.0 < domain.1) {
        return Err(GeomError::InvalidInput("empty curve domain".into()));
    }
    Ok(HamiltonianCurve {
        rho0: rho0.clone(),
        h: h.clone(),
        domain,
        sqrt0: rho0.sqrt(),
    })
}

impl Curve for HamiltonianCurve {
    fn domain(&self) -> (f64, f64) {
        self.domain
    }
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        in_domain(t, self.domain)?;
        let u = unitary_flow(&self.h, t);
        DensityMatrix::from_computed(&u * self.rho0.as_matrix() * u.adjoint(), self.rho0.tolerances())
    }
    fn implementation_at(&self, t: f64) -> Option<Result<HSVector>> {
        Some(in_domain(t, self.domain).map(|_| HSVector(unitary_flow(&self.h, t) * self.sqrt0.as_matrix())))
    }
}

/// Piecewise-linear curve through sampled states. When implementations are
/// supplied they are interpolated linearly and renormalised, and the states
/// are derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    ts: Vec<f64>,
    states: Vec<DensityMatrix>,
    imps: Option<Vec<HSVector>>,
}

impl SampledCurve {
    pub fn new(ts: Vec<f64>, states: Vec<DensityMatrix>, imps: Option<Vec<HSVector>>) -> Result<Self> {
        if ts.len() < 2 || ts.len() != states.len() {
            return Err(GeomError::InvalidInput(
                "samples need at least two parameters, one state each".into(),
            ));
        }
        if ts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(GeomError::InvalidInput("sample parameters must increase".into()));
        }
        let n = states[0].dim();
        for s in &states {
            crate::fidelity::same_dim(n, s.dim())?;
        }
        if let Some(cs) = &imps {
            if cs.len() != ts.len() {
                return Err(GeomError::InvalidInput("one implementation per sample".into()));
            }
            for (c, s) in cs.iter().zip(&states) {
                let err = (c.gram().as_matrix() - s.as_matrix()).norm();
                if err > DRIFT_TOL {
                    return Err(GeomError::NotAState(format!(
                        "implementation misses its state by {err:.3e}"
                    )));
                }
            }
        }
        Ok(SampledCurve { ts, states, imps })
    }

    pub fn params(&self) -> &[f64] {
        &self.ts
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let j = match self.ts.partition_point(|&s| s <= t) {
            0 => 0,
            p => (p - 1).min(self.ts.len() - 2),
        };
        let w = (t - self.ts[j]) / (self.ts[j + 1] - self.ts[j]);
        (j, w)
    }

    fn interp_imp(&self, cs: &[HSVector], t: f64) -> HSVector {
        let (j, w) = self.locate(t);
        let m = cs[j].matrix().scale(1.0 - w) + cs[j + 1].matrix().scale(w);
        let n = m.norm();
        HSVector(if n > 0.0 { m.scale(1.0 / n) } else { m })
    }
}

impl Curve for SampledCurve {
    fn domain(&self) -> (f64, f64) {
        (self.ts[0], *self.ts.last().expect("non-empty"))
    }
    fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        in_domain(t, self.domain())?;
        if let Some(cs) = &self.imps {
            return state_of(&self.interp_imp(cs, t));
        }
        let (j, w) = self.locate(t);
        let m = self.states[j].matrix().scale(1.0 - w).add(&self.states[j + 1].matrix().scale(w));
        DensityMatrix::from_computed(m.into_matrix(), self.states[0].tolerances())
    }
    fn implementation_at(&self, t: f64) -> Option<Result<HSVector>> {
        let cs = self.imps.as_ref()?;
        Some(in_domain(t, self.domain()).map(|_| self.interp_imp(cs, t)))
    }
}

/// Step ladder for difference quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationSteps {
    pub h0: f64,
    pub ratio: f64,
    pub rungs: usize,
}

impl Default for DilationSteps {
    fn default() -> Self {
        DilationSteps {
            h0: 1e-2,
            ratio: 0.5,
            rungs: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationEstimate {
    pub value: f64,
    /// Difference of the last two extrapolants, worse side.
    pub error: f64,
    pub forward: f64,
    pub backward: f64,
}

/// Extrapolate q(h_k) to h → 0 assuming an expansion in powers of h.
fn richardson(q: &[f64], ratio: f64) -> (f64, f64) {
    let mut table = q.to_vec();
    let mut prev_best = table[table.len() - 1];
    let mut best = prev_best;
    let mut factor = 1.0;
    for _ in 1..q.len() {
        factor /= ratio;
        let next: Vec<f64> = table
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        prev_best = best;
        best = next[next.len() - 1];
        table = next;
    }
    (best, (best - prev_best).abs())
}

/// Metric speed limsup d_B(ρ_{t+δ}, ρ_t)/|δ| at an interior point.
pub fn local_dilation(curve: &dyn Curve, t: f64, steps: &DilationSteps) -> Result<DilationEstimate> {
    let dom = curve.domain();
    interior(t, dom)?;
    let h0 = steps.h0.min(0.5 * (t - dom.0).min(dom.1 - t));
    let base = curve.state_at(t)?;
    let side = |sign: f64| -> Result<(f64, f64)> {
        let mut q = Vec::with_capacity(steps.rungs);
        let mut h = h0;
        for _ in 0..steps.rungs.max(1) {
            let s = curve.state_at(t + sign * h)?;
            q.push(bures_distance(&s, &base)? / h);
            h *= steps.ratio;
        }
        Ok(richardson(&q, steps.ratio))
    };
    let (fwd, ef) = side(1.0)?;
    let (bwd, eb) = side(-1.0)?;
    Ok(DilationEstimate {
        value: fwd.max(bwd).max(0.0),
        error: ef.max(eb),
        forward: fwd,
        backward: bwd,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthOptions {
    pub quadrature: CompositeGauss,
    pub steps: DilationSteps,
    /// Coarsest partition for the chord sums.
    pub base_intervals: usize,
    /// Number of doublings after the coarsest partition.
    pub refinements: u32,
}

impl Default for LengthOptions {
    fn default() -> Self {
        LengthOptions {
            quadrature: CompositeGauss::length_default(),
            steps: DilationSteps::default(),
            base_intervals: 64,
            refinements: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthEstimate {
    /// ∫ dil dt by composite Gauss–Legendre.
    pub quadrature: f64,
    /// sup of the chord sums Σ d_B(ρ_{t_j}, ρ_{t_{j+1}}).
    pub partition_sup: f64,
    /// (intervals, chord sum) for each refinement level.
    pub partition_sums: Vec<(usize, f64)>,
}

/// Bures length by dilation quadrature and by refined chord sums.
///
/// Quadrature nodes are graded towards both ends (t = a + (b − a)(3v² − 2v³))
/// so that endpoint singularities of the dilation stay integrable.
pub fn bures_length(curve: &dyn Curve, opts: &LengthOptions) -> Result<LengthEstimate> {
    let (lo, hi) = curve.domain();
    let w = hi - lo;
    let mut quad = 0.0;
    for (v, wt) in opts.quadrature.points(0.0, 1.0) {
        let t = lo + w * v * v * (3.0 - 2.0 * v);
        let jac = w * 6.0 * v * (1.0 - v);
        if jac == 0.0 {
            continue;
        }
        quad += wt * jac * local_dilation(curve, t, &opts.steps)?.value;
    }

    let finest = opts.base_intervals.max(1) << opts.refinements;
    let states = (0..=finest)
        .map(|j| curve.state_at(lo + w * j as f64 / finest as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut partition_sums = Vec::new();
    for k in 0..=opts.refinements {
        let n = opts.base_intervals.max(1) << k;
        let stride = finest / n;
        let mut s = 0.0;
        for j in 0..n {
            s += bures_distance(&states[j * stride], &states[(j + 1) * stride])?;
        }
        partition_sums.push((n, s));
    }
    let partition_sup = partition_sums.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(LengthEstimate {
        quadrature: quad,
        partition_sup,
        partition_sums,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PythagorasOptions {
    /// Step of the central difference for ∂c_t.
    pub fd_step: f64,
    pub steps: DilationSteps,
}

impl Default for PythagorasOptions {
    fn default() -> Self {
        PythagorasOptions {
            fd_step: 1e-3,
            steps: DilationSteps::default(),
        }
    }
}

/// Speed decomposition dil² = ‖f‖²_ν + I² at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveDiagnostics {
    pub t: f64,
    pub dil: f64,
    pub dil_error: f64,
    pub tangent_norm_val: f64,
    /// ‖(1 − s_L) ψ (1 − s_R)‖_HS.
    pub pyth_invariant: f64,
    pub finslerian: bool,
    /// Re⟨ψ̂₀, φ⟩.
    pub psi0_overlap: f64,
    /// dil² − ‖f‖²_ν − I².
    pub residual: f64,
}

/// ∂c_t by a Richardson-improved central difference, with a check that the
/// one-sided quotients close up as the step halves.
fn implementation_derivative(curve: &dyn Curve, t: f64, h: f64) -> Result<HSVector> {
    let c = |s: f64| -> Result<CMatrix> {
        curve
            .implementation_at(s)
            .ok_or(GeomError::NoImplementation)?
            .map(|v| v.0)
    };
    let c0 = c(t)?;
    let (p1, m1) = (c(t + h)?, c(t - h)?);
    let (p2, m2) = (c(t + 0.5 * h)?, c(t - 0.5 * h)?);
    let d1 = (&p1 - &m1).scale(0.5 / h);
    let d2 = (&p2 - &m2).scale(1.0 / h);
    let gap1 = (&p1 + &m1 - c0.scale(2.0)).norm() / h;
    let gap2 = (&p2 + &m2 - c0.scale(2.0)).norm() / (0.5 * h);
    if gap2 > 1e-6 && gap2 > 0.75 * gap1 {
        return Err(GeomError::NotDifferentiable { spread: gap2 });
    }
    Ok(HSVector((d2.scale(4.0) - d1).scale(1.0 / 3.0)))
}

pub fn pythagoras(curve: &dyn Curve, t: f64, opts: &PythagorasOptions) -> Result<CurveDiagnostics> {
    let phi = curve
        .implementation_at(t)
        .ok_or(GeomError::NoImplementation)??;
    let dom = curve.domain();
    interior(t, dom)?;
    let h = opts.fd_step.min(0.5 * (t - dom.0).min(dom.1 - t));
    let psi = implementation_derivative(curve, t, h)?;

    let tol = Tolerances::default();
    let base = state_of(&phi)?;
    let pm = psi.matrix() * phi.matrix().adjoint();
    let tmat = HermitianMatrix::symmetrized(&pm + pm.adjoint());
    let tf = TangentForm::new(&base, tmat)?;
    let x = lyapunov_solve(&tf);
    let psi0 = HSVector(x.as_matrix() * phi.matrix());
    let fnorm = tangent_norm(&tf);

    let sl = base.support().complement();
    let sr = support_projector(&phi.co_gram(), &tol)?.complement();
    let inv = (sl.as_matrix() * psi.matrix() * sr.as_matrix()).norm();

    let dil = local_dilation(curve, t, &opts.steps)?;
    Ok(CurveDiagnostics {
        t,
        dil: dil.value,
        dil_error: dil.error,
        tangent_norm_val: fnorm,
        pyth_invariant: inv,
        finslerian: inv <= FINSLER_TOL,
        psi0_overlap: psi0.inner(&phi).re,
        residual: dil.value.powi(2) - fnorm * fnorm - inv * inv,
    })
}

/// True when the off-support invariant vanishes. A Finslerian verdict whose
/// dilation and tangent norm disagree by more than 1e-4 is reported as
/// `NotDifferentiable` rather than trusted.
pub fn finslerian_check(curve: &dyn Curve, t: f64, opts: &PythagorasOptions) -> Result<bool> {
    let d = pythagoras(curve, t, opts)?;
    if d.finslerian {
        let gap = (d.dil - d.tangent_norm_val).abs();
        if gap > FINSLER_AGREEMENT {
            return Err(GeomError::NotDifferentiable { spread: gap });
        }
    }
    Ok(d.finslerian)
}
