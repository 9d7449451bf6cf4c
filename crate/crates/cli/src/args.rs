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

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bures-geom", version, about = "Bures geometry of density matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Number of sample points for sampled tables.
    #[arg(long, global = true, default_value_t = 65, value_parser = clap::value_parser!(u64).range(2..=100_000))]
    pub grid: u64,

    /// Relative rank cutoff τ_rank.
    #[arg(long, global = true, value_parser = unit_interval)]
    pub tol_rank: Option<f64>,

    /// Step for the finite-difference derivative of implementations.
    #[arg(long, global = true, value_parser = unit_interval)]
    pub fd_step: Option<f64>,

    /// Seed for `gen`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceKind {
    Bures,
    Geodesic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Param {
    Theta,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    FullRank,
    RankR,
    Pure,
    Tangent,
    CommutingPair,
    GeodesicCurve,
    HamiltonianCurve,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fidelity F = tr|√a √b| of two density matrices.
    Fidelity { a: PathBuf, b: PathBuf },
    /// Bures or geodesic distance.
    Distance {
        #[arg(long, value_enum, default_value_t = DistanceKind::Geodesic)]
        kind: DistanceKind,
        a: PathBuf,
        b: PathBuf,
    },
    /// Sample the geodesic arc from `a` to `b`.
    Geodesic {
        a: PathBuf,
        b: PathBuf,
        /// Uniform grid in arc length (theta) or in the normal parameter (t).
        #[arg(long, value_enum, default_value_t = Param::Theta)]
        param: Param,
    },
    /// Tangent norm of T at ρ by all three routes.
    TangentNorm { rho: PathBuf, tangent: PathBuf },
    /// Bures length of a curve description.
    CurveLength { curve: PathBuf },
    /// Pythagorean diagnostics at interior grid points of a curve description.
    Pythagoras { curve: PathBuf },
    /// Leaf membership of ρ (and geodesic convexity towards ν) for μ.
    Leaf {
        #[arg(long)]
        mu: PathBuf,
        rho: PathBuf,
        nu: Option<PathBuf>,
    },
    /// Minimal pure-state decomposition generated by an orthonormal basis.
    Mindec {
        rho: PathBuf,
        /// Unitary whose columns generate the decomposition (default: identity).
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Largest λ with Λ − λ p_ψ positive.
    Maxsub { lambda: PathBuf, psi: PathBuf },
    /// Seeded random instances.
    Gen {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=256))]
        dim: u64,
        #[arg(long, value_enum)]
        kind: GenKind,
        /// Rank for `rank-r`, and the base rank for `tangent`.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        rank: Option<u64>,
    },
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances_must_lie_in_the_open_unit_interval() {
        assert_eq!(unit_interval("1e-9"), Ok(1e-9));
        for bad in ["0", "1", "-1e-3", "nan", "inf", "x"] {
            assert!(unit_interval(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn global_flags_after_the_verb() {
        let c = Cli::try_parse_from(["bures-geom", "fidelity", "a", "b", "--grid", "9", "--seed", "4"]).unwrap();
        assert_eq!((c.grid, c.seed), (9, 4));
        assert!(Cli::try_parse_from(["bures-geom", "--grid", "1", "fidelity", "a", "b"]).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
