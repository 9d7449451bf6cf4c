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

mod args;
mod commands;
mod output;
mod curve;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::Artifact;
use output::{emit, json_text, Failure};

const THREADS_VAR: &str = "BURES_GEOM_THREADS";

fn fail(f: &Failure) -> ExitCode {
    eprint!("{}", json_text(&f.to_json()));
    ExitCode::from(f.code)
}

fn pool() -> Result<Option<rayon::ThreadPool>, Failure> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(None);
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_VAR}={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Failure {
            code: 1,
            kind: "Io".into(),
            message: e.to_string(),
        })
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let artifact = match pool()? {
        Some(p) => p.install(|| commands::run(cli))?,
        None => commands::run(cli)?,
    };
    let text = match artifact {
        Artifact::Raw(v) => json_text(&v),
        Artifact::Report(_, Some(table)) => table.render()?,
        Artifact::Report(r, None) => json_text(&r),
    };
    emit(&text, cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            let msg: Vec<&str> = text
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(str::trim)
                .collect();
            let msg = msg.join(" ");
            return fail(&Failure::usage(msg.trim_start_matches("error: ").to_string()));
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(&f),
    }
}
