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
use std::io::{self, Write};
use std::path::Path;

use bures_geom::GeomError;
use serde::Serialize;
use serde_json::Value;

/// Error surfaced to the caller together with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn usage(message: String) -> Self {
        Failure {
            code: 2,
            kind: "Usage".into(),
            message,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "error": {
                "kind": self.kind,
                "message": self.message,
                "exit_code": self.code,
            }
        })
    }
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Self {
        Failure {
            code: if e.is_validation() { 2 } else { 1 },
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 2,
            kind: "Io".into(),
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: 1,
            kind: "Io".into(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub result: Value,
    pub diagnostics: Value,
    pub tolerances_used: Value,
}

/// Header plus rows, written with the csv crate.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn render(&self) -> Result<String, Failure> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Failure {
            code: 1,
            kind: "Io".into(),
            message: e.to_string(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut o = io::stdout().lock();
            o.write_all(text.as_bytes())?;
            o.flush()?;
        }
    }
    Ok(())
}

pub fn json_text<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialise");
    s.push('\n');
    s
}
