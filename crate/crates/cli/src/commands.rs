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

use std::fs;
use std::path::Path;

use bures_geom::curves::{
    bures_length, local_dilation, pythagoras, Curve, CurveDiagnostics, DilationSteps,
    LengthOptions, PythagorasOptions,
};
use bures_geom::fidelity::{bures_distance, fidelity, geodesic_distance};
use bures_geom::geodesic::geodesic_arc;
use bures_geom::json::MatrixJson;
use bures_geom::strata::{
    leaf_convexity_check, leaf_membership_report, max_subtraction, minimal_decomposition,
};
use bures_geom::tangent::{tangent_norm_routes, TangentForm};
use bures_geom::{CMatrix, CVector, DensityMatrix, GeomError, HermitianMatrix, Tolerances};
use bures_geom_gen::Gen;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{Cli, Command, DistanceKind, Format, GenKind, Param};
use crate::output::{num, Failure, Report, Table};
use crate::curve::CurveDesc;

/// What a command produced: a JSON report, optionally with a sample table.
pub enum Artifact {
    Report(Report, Option<Table>),
    Raw(Value),
}

pub struct Settings {
    pub tol: Tolerances,
    pub grid: usize,
    pub fd_step: Option<f64>,
    pub seed: u64,
}

impl Settings {
    pub fn from_cli(cli: &Cli) -> Self {
        let tol = match cli.tol_rank {
            Some(r) => Tolerances::with_rank(r),
            None => Tolerances::default(),
        };
        Settings {
            tol,
            grid: cli.grid as usize,
            fd_step: cli.fd_step,
            seed: cli.seed,
        }
    }

    fn steps(&self) -> DilationSteps {
        let mut s = DilationSteps::default();
        if let Some(h) = self.fd_step {
            s.h0 = h;
        }
        s
    }

    fn tolerances_used(&self) -> Value {
        json!({
            "rank": self.tol.rank,
            "psd_dust": self.tol.psd_dust,
            "fd_step": self.fd_step.unwrap_or(PythagorasOptions::default().fd_step),
            "dilation_h0": self.steps().h0,
            "grid": self.grid,
        })
    }

    fn report(&self, result: Value, diagnostics: Value) -> Report {
        Report {
            result,
            diagnostics,
            tolerances_used: self.tolerances_used(),
        }
    }

    /// Uniform grid of `self.grid` points on [lo, hi].
    fn nodes(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.grid - 1;
        (0..=n)
            .map(|j| if j == n { hi } else { lo + (hi - lo) * j as f64 / n as f64 })
            .collect()
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        kind: "Io".into(),
        message: format!("{}: {e}", path.display()),
    })
}

fn matrix(path: &Path) -> Result<CMatrix, Failure> {
    bures_geom::json::matrix_from_str(&read(path)?).map_err(|e| in_file(path, e))
}

fn state(path: &Path, tol: &Tolerances) -> Result<DensityMatrix, Failure> {
    DensityMatrix::with_tolerances(matrix(path)?, *tol).map_err(|e| in_file(path, e))
}

fn in_file(path: &Path, e: GeomError) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

fn mj(m: &CMatrix) -> Value {
    serde_json::to_value(MatrixJson::from_matrix(m)).expect("matrix serialises")
}

fn mj_state(d: &DensityMatrix) -> Value {
    serde_json::to_value(MatrixJson::from_density(d)).expect("matrix serialises")
}

fn flat_header(prefix: &str, n: usize) -> Vec<String> {
    let mut h = Vec::with_capacity(2 * n * n);
    for r in 0..n {
        for c in 0..n {
            h.push(format!("{prefix}_{r}{c}_re"));
            h.push(format!("{prefix}_{r}{c}_im"));
        }
    }
    h
}

fn flat(m: &CMatrix) -> Vec<String> {
    let mut v = Vec::with_capacity(2 * m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(num(m[(r, c)].re));
            v.push(num(m[(r, c)].im));
        }
    }
    v
}

fn diagnostics_json(d: &CurveDiagnostics) -> Value {
    json!({
        "t": d.t,
        "dil": d.dil,
        "dil_error": d.dil_error,
        "tangent_norm_val": d.tangent_norm_val,
        "pyth_invariant": d.pyth_invariant,
        "finslerian": d.finslerian,
        "psi0_overlap": d.psi0_overlap,
        "residual": d.residual,
    })
}

fn table_only(format: Format, verb: &str) -> Result<(), Failure> {
    if format == Format::Csv {
        return Err(Failure::usage(format!(
            "`{verb}` has no sample table; use --format json"
        )));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Artifact, Failure> {
    let s = Settings::from_cli(cli);
    let tol = s.tol;
    let plain = |r: Report| Ok(Artifact::Report(r, None));
    match &cli.command {
        Command::Fidelity { a, b } => {
            table_only(cli.format, "fidelity")?;
            let (a, b) = (state(a, &tol)?, state(b, &tol)?);
            let f = fidelity(&a, &b)?;
            plain(s.report(json!(f), json!({ "dim": a.dim(), "ranks": [a.rank(), b.rank()] })))
        }
        Command::Distance { kind, a, b } => {
            table_only(cli.format, "distance")?;
            let (a, b) = (state(a, &tol)?, state(b, &tol)?);
            let d = match kind {
                DistanceKind::Bures => bures_distance(&a, &b)?,
                DistanceKind::Geodesic => geodesic_distance(&a, &b)?,
            };
            let kind = match kind {
                DistanceKind::Bures => "bures",
                DistanceKind::Geodesic => "geodesic",
            };
            plain(s.report(json!(d), json!({ "kind": kind, "fidelity": fidelity(&a, &b)? })))
        }
        Command::Geodesic { a, b, param } => geodesic(&s, cli.format, &state(a, &tol)?, &state(b, &tol)?, *param),
        Command::TangentNorm { rho, tangent } => {
            table_only(cli.format, "tangent-norm")?;
            let rho = state(rho, &tol)?;
            let t = TangentForm::from_matrix(&rho, matrix(tangent)?)?;
            let r = tangent_norm_routes(&t);
            plain(s.report(
                json!({ "spectral": r.spectral, "psi0_hs": r.psi0_hs, "trace": r.trace }),
                json!({ "spread": r.spread(), "rank": rho.rank() }),
            ))
        }
        Command::CurveLength { curve } => {
            let curve = CurveDesc::parse(&read(curve)?)?.build(&tol)?;
            curve_length(&s, cli.format, curve.as_ref())
        }
        Command::Pythagoras { curve } => {
            let curve = CurveDesc::parse(&read(curve)?)?.build(&tol)?;
            pythagoras_table(&s, cli.format, curve.as_ref())
        }
        Command::Leaf { mu, rho, nu } => {
            table_only(cli.format, "leaf")?;
            let mu = state(mu, &tol)?;
            let rho = state(rho, &tol)?;
            let m = leaf_membership_report(&rho, &mu)?;
            let mut result = json!({
                "member": m.member,
                "full_rank": m.full_rank,
                "commutator": m.commutator,
                "conditional_residual": m.conditional_residual,
            });
            if let Some(nu) = nu {
                let nu = state(nu, &tol)?;
                let c = leaf_convexity_check(&rho, &nu, &mu, s.grid)?;
                result["convexity"] = json!({
                    "samples": c.samples,
                    "max_commutator": c.max_commutator,
                    "min_eigenvalue": c.min_eigenvalue,
                    "all_full_rank": c.all_full_rank,
                    "arc_unique": c.arc_unique,
                    "passed": c.passed,
                });
            }
            plain(s.report(result, json!({ "dim": mu.dim() })))
        }
        Command::Mindec { rho, basis } => {
            table_only(cli.format, "mindec")?;
            let rho = state(rho, &tol)?;
            let basis = match basis {
                Some(p) => matrix(p)?,
                None => CMatrix::identity(rho.dim(), rho.dim()),
            };
            let d = minimal_decomposition(&rho, &basis)?;
            let err = (d.reconstruct() - rho.as_matrix()).norm();
            let vectors: Vec<Value> = d
                .vectors
                .iter()
                .map(|v| mj(&CMatrix::from_column_slice(v.len(), 1, v.as_slice())))
                .collect();
            plain(s.report(
                json!({ "weights": d.weights, "vectors": vectors }),
                json!({
                    "is_minimal": d.is_minimal(),
                    "terms": d.weights.len(),
                    "rank": rho.rank(),
                    "reconstruction_error": err,
                }),
            ))
        }
        Command::Maxsub { lambda, psi } => {
            table_only(cli.format, "maxsub")?;
            let l = HermitianMatrix::new(matrix(lambda)?)?;
            let p = matrix(psi)?;
            if p.ncols() != 1 {
                return Err(GeomError::ShapeMismatch {
                    expected: "a column vector".into(),
                    got: format!("{}x{}", p.nrows(), p.ncols()),
                }
                .into());
            }
            let p = CVector::from_column_slice(p.as_slice());
            let v = max_subtraction(&l, &p)?;
            plain(s.report(json!(v), json!({ "psi_norm": p.norm() })))
        }
        Command::Gen { dim, kind, rank } => {
            table_only(cli.format, "gen")?;
            generate(s.seed, *dim as usize, *kind, rank.map(|r| r as usize)).map(Artifact::Raw)
        }
    }
}

fn geodesic(
    s: &Settings,
    format: Format,
    a: &DensityMatrix,
    b: &DensityMatrix,
    param: Param,
) -> Result<Artifact, Failure> {
    let arc = geodesic_arc(a, b)?;
    let theta0 = arc.theta0;
    let points: Vec<(f64, f64)> = match param {
        Param::Theta => s
            .nodes(0.0, theta0)
            .into_iter()
            .map(|th| Ok((th, arc.t_of_theta(th)?)))
            .collect::<bures_geom::Result<_>>()?,
        Param::T => s
            .nodes(0.0, 1.0)
            .into_iter()
            .map(|t| ((t * theta0.sin()).clamp(-1.0, 1.0).asin(), t))
            .collect(),
    };
    let rows = points
        .par_iter()
        .map(|&(theta, t)| {
            let st = arc.eval_t(t)?;
            let dt = arc.dilation_at(t)?;
            // speed w.r.t. θ is dil_t · dt/dθ
            let dil = match param {
                Param::T => dt,
                Param::Theta => dt * theta.cos() / theta0.sin(),
            };
            Ok((theta, t, st, dil))
        })
        .collect::<bures_geom::Result<Vec<_>>>()?;
    let n = a.dim();
    match format {
        Format::Csv => {
            let mut header = vec!["theta".to_string(), "t".to_string()];
            header.extend(flat_header("nu", n));
            header.extend(["dilation".to_string(), "length".to_string()]);
            let rows = rows
                .iter()
                .map(|(th, t, st, d)| {
                    let mut r = vec![num(*th), num(*t)];
                    r.extend(flat(st.as_matrix()));
                    r.extend([num(*d), num(*th)]);
                    r
                })
                .collect();
            let report = s.report(json!({ "theta0": theta0 }), json!({ "samples": points.len() }));
            Ok(Artifact::Report(report, Some(Table { header, rows })))
        }
        Format::Json => {
            let samples: Vec<Value> = rows
                .iter()
                .map(|(th, t, st, d)| {
                    json!({ "theta": th, "t": t, "state": mj_state(st), "dilation": d, "length": th })
                })
                .collect();
            Ok(Artifact::Report(
                s.report(
                    json!({ "theta0": theta0, "samples": samples }),
                    json!({
                        "fidelity": arc.fidelity,
                        "transition": arc.transition,
                        "param": match param { Param::Theta => "theta", Param::T => "t" },
                    }),
                ),
                None,
            ))
        }
    }
}

fn curve_length(s: &Settings, format: Format, curve: &dyn Curve) -> Result<Artifact, Failure> {
    let opts = LengthOptions {
        steps: s.steps(),
        ..LengthOptions::default()
    };
    let est = bures_length(curve, &opts)?;
    let sums: Vec<Value> = est
        .partition_sums
        .iter()
        .map(|(n, v)| json!({ "intervals": n, "sum": v }))
        .collect();
    let report = s.report(
        json!({ "quadrature": est.quadrature, "partition_sup": est.partition_sup }),
        json!({
            "partition_sums": sums,
            "discrepancy": (est.quadrature - est.partition_sup).abs(),
        }),
    );
    if format == Format::Json {
        return Ok(Artifact::Report(report, None));
    }
    let (lo, hi) = curve.domain();
    let ts = s.nodes(lo, hi);
    let states = ts
        .par_iter()
        .map(|&t| curve.state_at(t))
        .collect::<bures_geom::Result<Vec<_>>>()?;
    let dils = ts
        .par_iter()
        .enumerate()
        .map(|(j, &t)| {
            if j == 0 || j + 1 == ts.len() {
                Ok(None)
            } else {
                local_dilation(curve, t, &opts.steps).map(Some)
            }
        })
        .collect::<bures_geom::Result<Vec<_>>>()?;
    let mut chord = 0.0;
    let mut rows = Vec::with_capacity(ts.len());
    for (j, t) in ts.iter().enumerate() {
        if j > 0 {
            chord += bures_distance(&states[j - 1], &states[j])?;
        }
        let (d, e) = match dils[j] {
            Some(d) => (num(d.value), num(d.error)),
            None => (String::new(), String::new()),
        };
        rows.push(vec![num(*t), d, e, num(chord)]);
    }
    let header = ["t", "dil", "dil_error", "chord_length"].map(String::from).to_vec();
    Ok(Artifact::Report(report, Some(Table { header, rows })))
}

fn pythagoras_table(s: &Settings, format: Format, curve: &dyn Curve) -> Result<Artifact, Failure> {
    let mut opts = PythagorasOptions {
        steps: s.steps(),
        ..PythagorasOptions::default()
    };
    if let Some(h) = s.fd_step {
        opts.fd_step = h;
    }
    let (lo, hi) = curve.domain();
    let ts = s.nodes(lo, hi);
    let interior = &ts[1..ts.len() - 1];
    let diags = interior
        .par_iter()
        .map(|&t| pythagoras(curve, t, &opts))
        .collect::<bures_geom::Result<Vec<_>>>()?;
    let worst = diags.iter().map(|d| d.residual).fold(0.0, f64::max);
    let report = s.report(
        json!(diags.iter().map(diagnostics_json).collect::<Vec<_>>()),
        json!({
            "points": diags.len(),
            "max_residual": worst,
            "all_finslerian": diags.iter().all(|d| d.finslerian),
        }),
    );
    let table = (format == Format::Csv).then(|| Table {
        header: [
            "t",
            "dil",
            "dil_error",
            "tangent_norm_val",
            "pyth_invariant",
            "finslerian",
            "psi0_overlap",
            "residual",
        ]
        .map(String::from)
        .to_vec(),
        rows: diags
            .iter()
            .map(|d| {
                vec![
                    num(d.t),
                    num(d.dil),
                    num(d.dil_error),
                    num(d.tangent_norm_val),
                    num(d.pyth_invariant),
                    d.finslerian.to_string(),
                    num(d.psi0_overlap),
                    num(d.residual),
                ]
            })
            .collect(),
    });
    Ok(Artifact::Report(report, table))
}

fn generate(seed: u64, n: usize, kind: GenKind, rank: Option<usize>) -> Result<Value, Failure> {
    let mut g = Gen::new(seed);
    let rank_in = |r: usize| -> Result<usize, Failure> {
        if r == 0 || r > n {
            return Err(Failure::usage(format!("--rank {r} is not in 1..={n}")));
        }
        Ok(r)
    };
    let desc = |c: CurveDesc| serde_json::to_value(c).expect("curve description serialises");
    Ok(match kind {
        GenKind::FullRank => mj_state(&g.full_rank(n)),
        GenKind::RankR => {
            let r = rank.ok_or_else(|| Failure::usage("`--kind rank-r` needs --rank".into()))?;
            let r = rank_in(r)?;
            mj_state(&g.rank_r(n, r))
        }
        GenKind::Pure => mj_state(&g.pure(n)),
        GenKind::Tangent => {
            let r = rank_in(rank.unwrap_or(n))?;
            let base = if r == n { g.full_rank(n) } else { g.rank_r(n, r) };
            let t = g.tangent(&base, 1.0)?;
            json!({ "base": mj_state(&base), "tangent": mj(t.matrix().as_matrix()) })
        }
        GenKind::CommutingPair => {
            let p = g.commuting_pair(n);
            json!({ "nu": mj_state(&p.nu), "rho": mj_state(&p.rho) })
        }
        GenKind::GeodesicCurve => {
            let nu = g.full_rank(n);
            let rho = g.full_rank(n);
            desc(CurveDesc::Geodesic {
                nu: MatrixJson::from_density(&nu),
                rho: MatrixJson::from_density(&rho),
            })
        }
        GenKind::HamiltonianCurve => {
            let rho0 = g.full_rank(n);
            let h = g.hermitian(n);
            desc(CurveDesc::Hamiltonian {
                rho0: MatrixJson::from_density(&rho0),
                h: MatrixJson::from_matrix(h.as_matrix()),
                domain: (0.0, 1.0),
            })
        }
    })
}
