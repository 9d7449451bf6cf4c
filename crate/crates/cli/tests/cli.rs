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

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bures_geom::json::{matrix_from_str, matrix_from_value, MatrixJson};
use bures_geom::tangent::block_residual;
use bures_geom::{validate_density, DensityMatrix, HermitianMatrix, Tolerances};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bures-geom"));
    c.env_remove("BURES_GEOM_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let o = run(args);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn error_of(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stderr).expect("stderr is JSON");
    v["error"].clone()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const PURE0: &str = r#"{"rows":2,"cols":2,"data":[[1,0],[0,0],[0,0],[0,0]]}"#;
const PURE1: &str = r#"{"rows":2,"cols":2,"data":[[0,0],[0,0],[0,0],[1,0]]}"#;

#[test]
fn identical_files_have_unit_fidelity() {
    let d = TempDir::new().unwrap();
    let a = write(d.path(), "a.json", &String::from_utf8(run(&["gen", "--dim", "3", "--kind", "full-rank"]).stdout).unwrap());
    let v = ok_json(&["fidelity", s(&a), s(&a)]);
    assert_eq!(v["result"].as_f64().unwrap(), 1.0);
    assert!(v["tolerances_used"]["rank"].is_number());
}

#[test]
fn orthogonal_pure_pair_is_a_quarter_turn() {
    let d = TempDir::new().unwrap();
    let a = write(d.path(), "a.json", PURE0);
    let b = write(d.path(), "b.json", PURE1);
    let g = ok_json(&["distance", "--kind", "geodesic", s(&a), s(&b)]);
    assert!((g["result"].as_f64().unwrap() - FRAC_PI_2).abs() <= 1e-12);
    let b_ = ok_json(&["distance", "--kind", "bures", s(&a), s(&b)]);
    assert!((b_["result"].as_f64().unwrap() - 2f64.sqrt()).abs() <= 1e-12);
}

#[test]
fn gen_is_byte_identical_per_seed() {
    for kind in ["full-rank", "pure", "tangent", "commuting-pair", "geodesic-curve", "hamiltonian-curve"] {
        let a = run(&["gen", "--dim", "4", "--seed", "7", "--kind", kind]);
        let b = run(&["gen", "--dim", "4", "--seed", "7", "--kind", kind]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{kind}");
    }
    let c = run(&["gen", "--dim", "4", "--seed", "8", "--kind", "full-rank"]);
    let a = run(&["gen", "--dim", "4", "--seed", "7", "--kind", "full-rank"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generated_states_validate() {
    let o = run(&["gen", "--dim", "2", "--seed", "0", "--kind", "full-rank"]);
    let m = matrix_from_str(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    let d = validate_density(&HermitianMatrix::new(m).unwrap(), &Tolerances::default()).unwrap();
    assert!(d.is_full_rank());

    let o = run(&["gen", "--dim", "5", "--seed", "3", "--kind", "pure"]);
    let d = DensityMatrix::new(matrix_from_str(std::str::from_utf8(&o.stdout).unwrap()).unwrap()).unwrap();
    assert_eq!(d.rank(), 1);

    let o = run(&["gen", "--dim", "6", "--seed", "4", "--kind", "rank-r", "--rank", "3"]);
    let d = DensityMatrix::new(matrix_from_str(std::str::from_utf8(&o.stdout).unwrap()).unwrap()).unwrap();
    assert_eq!(d.rank(), 3);
}

#[test]
fn generated_tangent_at_thin_base_is_block_diagonal() {
    for seed in 0..5 {
        let v = ok_json(&["gen", "--dim", "5", "--rank", "2", "--seed", &seed.to_string(), "--kind", "tangent"]);
        let base = DensityMatrix::new(matrix_from_value(&v["base"]).unwrap()).unwrap();
        assert_eq!(base.rank(), 2);
        let t = HermitianMatrix::new(matrix_from_value(&v["tangent"]).unwrap()).unwrap();
        assert!(block_residual(&base, &t) <= 1e-12);
        assert!(t.as_matrix().trace().norm() <= 1e-12);
    }
}

#[test]
fn emitted_matrices_round_trip() {
    for seed in 0..10 {
        let o = run(&["gen", "--dim", "4", "--seed", &seed.to_string(), "--kind", "full-rank"]);
        let text = std::str::from_utf8(&o.stdout).unwrap();
        let m = matrix_from_str(text).unwrap();
        let again = matrix_from_str(&serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap()).unwrap();
        assert!((&m - &again).iter().all(|z| z.norm() <= 1e-15));
        let parsed: MatrixJson = serde_json::from_str(text).unwrap();
        assert_eq!(parsed.kind.as_deref(), Some("density"));
    }
}

#[test]
fn geodesic_table_has_grid_rows_and_matching_length() {
    let d = TempDir::new().unwrap();
    let v = ok_json(&["gen", "--dim", "3", "--kind", "commuting-pair", "--seed", "2"]);
    let a = write(d.path(), "a.json", &v["nu"].to_string());
    let b = write(d.path(), "b.json", &v["rho"].to_string());
    let j = ok_json(&["geodesic", "--grid", "9", s(&a), s(&b)]);
    let samples = j["result"]["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 9);
    let theta0 = j["result"]["theta0"].as_f64().unwrap();
    assert_eq!(samples[8]["length"].as_f64().unwrap(), theta0);
    for smp in samples {
        assert!((smp["dilation"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    }

    let o = run(&["geodesic", "--grid", "9", "--param", "t", "--format", "csv", s(&a), s(&b)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines[0].starts_with("theta,t,nu_00_re,nu_00_im"));
    assert!(lines[0].ends_with("dilation,length"));
    assert_eq!(lines[1].split(',').count(), 2 + 18 + 2);
}

#[test]
fn curve_commands_accept_every_curve_type() {
    let d = TempDir::new().unwrap();
    let geo = write(d.path(), "g.json", &String::from_utf8(run(&["gen", "--dim", "3", "--kind", "geodesic-curve"]).stdout).unwrap());
    let v = ok_json(&["curve-length", s(&geo)]);
    let q = v["result"]["quadrature"].as_f64().unwrap();
    let p = v["result"]["partition_sup"].as_f64().unwrap();
    assert!((q - p).abs() <= 1e-6);

    let ham = write(d.path(), "h.json", &String::from_utf8(run(&["gen", "--dim", "3", "--kind", "hamiltonian-curve"]).stdout).unwrap());
    let v = ok_json(&["pythagoras", "--grid", "5", s(&ham)]);
    let rows = v["result"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r["residual"].as_f64().unwrap() <= 1e-3);
    }

    let samples = format!(r#"{{"type":"samples","t":[0,1],"states":[{PURE0},{PURE1}]}}"#);
    let smp = write(d.path(), "s.json", &samples);
    let o = run(&["curve-length", "--format", "csv", "--grid", "3", s(&smp)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("t,dil,dil_error,chord_length"));
}

#[test]
fn tangent_norm_routes_agree() {
    let d = TempDir::new().unwrap();
    let v = ok_json(&["gen", "--dim", "4", "--kind", "tangent", "--seed", "5"]);
    let rho = write(d.path(), "rho.json", &v["base"].to_string());
    let t = write(d.path(), "t.json", &v["tangent"].to_string());
    let r = ok_json(&["tangent-norm", s(&rho), s(&t)]);
    assert!(r["diagnostics"]["spread"].as_f64().unwrap() <= 1e-8);
    assert!(r["result"]["spectral"].as_f64().unwrap() > 0.0);
}

#[test]
fn strata_commands() {
    let d = TempDir::new().unwrap();
    let mixed = write(d.path(), "m.json", r#"{"rows":2,"cols":2,"data":[[0.75,0],[0,0],[0,0],[0.25,0]]}"#);
    let mu = write(d.path(), "mu.json", r#"{"rows":2,"cols":2,"data":[[0.6,0],[0,0],[0,0],[0.4,0]]}"#);
    let nu = write(d.path(), "nu.json", r#"{"rows":2,"cols":2,"data":[[0.3,0],[0,0],[0,0],[0.7,0]]}"#);
    let l = ok_json(&["leaf", "--mu", s(&mu), s(&mixed), s(&nu)]);
    assert_eq!(l["result"]["member"], Value::Bool(true));
    assert_eq!(l["result"]["convexity"]["passed"], Value::Bool(true));

    let m = ok_json(&["mindec", s(&mixed)]);
    assert_eq!(m["result"]["weights"].as_array().unwrap().len(), 2);
    assert!(m["diagnostics"]["reconstruction_error"].as_f64().unwrap() <= 1e-14);

    let psi = write(d.path(), "psi.json", r#"{"rows":2,"cols":1,"data":[[1,0],[0,0]]}"#);
    let x = ok_json(&["maxsub", s(&mixed), s(&psi)]);
    assert!((x["result"].as_f64().unwrap() - 0.75).abs() <= 1e-12);
}

#[test]
fn out_flag_writes_the_file() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("r.json");
    let o = run(&["gen", "--dim", "2", "--kind", "pure", "--out", s(&out)]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(matrix_from_str(&fs::read_to_string(out).unwrap()).is_ok());
}

#[test]
fn thread_count_does_not_change_output() {
    let d = TempDir::new().unwrap();
    let c = write(d.path(), "c.json", &String::from_utf8(run(&["gen", "--dim", "3", "--kind", "hamiltonian-curve"]).stdout).unwrap());
    let args = ["pythagoras", "--grid", "7", "--format", "csv", s(&c)];
    let one = bin().args(args).env("BURES_GEOM_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("BURES_GEOM_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = bin().args(args).env("BURES_GEOM_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn malformed_inputs_exit_with_validation_status() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let good = write(p, "good.json", PURE0);
    let cases: Vec<(&str, String)> = vec![
        ("not json", "{".into()),
        ("wrong count", r#"{"rows":2,"cols":2,"data":[[1,0]]}"#.into()),
        ("not square", r#"{"rows":1,"cols":2,"data":[[1,0],[0,0]]}"#.into()),
        ("non hermitian", r#"{"rows":2,"cols":2,"data":[[0.5,0],[0.1,0],[0,0],[0.5,0]]}"#.into()),
        ("negative", r#"{"rows":2,"cols":2,"data":[[1.5,0],[0,0],[0,0],[-0.5,0]]}"#.into()),
        ("trace", r#"{"rows":2,"cols":2,"data":[[0.5,0],[0,0],[0,0],[0.2,0]]}"#.into()),
        ("unknown field", r#"{"rows":1,"cols":1,"data":[[1,0]],"extra":3}"#.into()),
        ("zero size", r#"{"rows":0,"cols":0,"data":[]}"#.into()),
    ];
    for (name, body) in &cases {
        let bad = write(p, &format!("{}.json", name.replace(' ', "_")), body);
        let o = run(&["fidelity", s(&good), s(&bad)]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        let e = error_of(&o);
        assert_eq!(e["exit_code"], 2, "{name}");
        assert!(e["kind"].is_string() && e["message"].is_string());
    }
    let big = write(p, "big.json", &String::from_utf8(run(&["gen", "--dim", "3", "--kind", "pure"]).stdout).unwrap());
    assert_eq!(run(&["fidelity", s(&good), s(&big)]).status.code(), Some(2));

    let missing = p.join("absent.json");
    assert_eq!(run(&["fidelity", s(&good), s(&missing)]).status.code(), Some(2));

    for args in [
        vec!["frobnicate"],
        vec!["fidelity", s(&good)],
        vec!["fidelity", "--bogus", s(&good), s(&good)],
        vec!["--grid", "1", "fidelity", s(&good), s(&good)],
        vec!["--tol-rank", "-1", "fidelity", s(&good), s(&good)],
        vec!["--format", "xml", "fidelity", s(&good), s(&good)],
        vec!["--format", "csv", "fidelity", s(&good), s(&good)],
        vec!["gen", "--dim", "3", "--kind", "rank-r"],
        vec!["gen", "--dim", "3", "--kind", "rank-r", "--rank", "4"],
        vec!["gen", "--dim", "3", "--kind", "mystery"],
        vec!["gen", "--dim", "0", "--kind", "pure"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(error_of(&o)["exit_code"], 2);
    }

    let desc = write(p, "desc.json", r#"{"type":"spiral","nu":1}"#);
    assert_eq!(run(&["curve-length", s(&desc)]).status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_with_status_one() {
    let d = TempDir::new().unwrap();
    let p = d.path();
    let a = write(p, "a.json", PURE0);
    // Q T Q ≠ 0 on the kernel of a pure state
    let t = write(p, "t.json", r#"{"rows":2,"cols":2,"data":[[-0.5,0],[0,0],[0,0],[0.5,0]]}"#);
    let o = run(&["tangent-norm", s(&a), s(&t)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_of(&o)["kind"], "NotInTangentSpace");

    let o = run(&["geodesic", s(&a), s(&a)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_of(&o)["kind"], "DegenerateEndpoints");
}

#[test]
fn help_and_version_succeed() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
}
