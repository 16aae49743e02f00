//! Report envelope and output routing. Everything written here is a pure
//! function of the run configuration, so reruns are byte-identical.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use fluxlab::error::Result;
use serde::Serialize;
use serde_json::Value;

#[derive(Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: &'a C,
    pub quadrature: Value,
    pub tolerances: Value,
    pub result: R,
}

impl<'a, C: Serialize, R: Serialize> Report<'a, C, R> {
    pub fn new(command: &'static str, seed: u64, config: &'a C, result: R) -> Self {
        Report {
            tool: "fluxlab",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
            quadrature: Value::Null,
            tolerances: Value::Null,
            result,
        }
    }

    pub fn quadrature(mut self, v: Value) -> Self {
        self.quadrature = v;
        self
    }

    pub fn tolerances(mut self, v: Value) -> Self {
        self.tolerances = v;
        self
    }
}

pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Sink { dir })
    }

    pub fn dir(&self) -> Option<&PathBuf> {
        self.dir.as_ref()
    }

    /// Writes `<command>.json` (and `<command>.csv` when given) under the
    /// output directory, or prints the JSON when there is none.
    pub fn emit<C: Serialize, R: Serialize>(&self, report: &Report<'_, C, R>, csv: Option<String>) -> Result<()> {
        let mut json = serde_json::to_string_pretty(report).expect("reports serialize");
        json.push('\n');
        match &self.dir {
            Some(d) => {
                fs::write(d.join(format!("{}.json", report.command)), json)?;
                if let Some(c) = csv {
                    fs::write(d.join(format!("{}.csv", report.command)), c)?;
                }
            }
            None => {
                std::io::stdout().lock().write_all(json.as_bytes())?;
            }
        }
        Ok(())
    }

    pub fn text(&self, name: &str, body: &str) -> Result<()> {
        match &self.dir {
            Some(d) => fs::write(d.join(name), body)?,
            None => std::io::stdout().lock().write_all(body.as_bytes())?,
        }
        Ok(())
    }
}
