use std::path::Path;

use quasilocal::io::{matrix_to_csv, MatrixFile};
use quasilocal::CMatrix;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::fail::CliError;

/// Provenance stamped on every output.
#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub tool_version: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Envelope {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            tool_version: quasilocal::VERSION,
            config_hash: cfg.hash(),
            seed: cfg.seed(),
        }
    }

    pub fn csv_header(&self) -> String {
        format!(
            "# tool_version={} config_hash={} seed={}\n",
            self.tool_version, self.config_hash, self.seed
        )
    }
}

#[derive(Serialize)]
struct Stamped<'a, T> {
    #[serde(flatten)]
    envelope: &'a Envelope,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

pub struct Artifact {
    pub name: String,
    pub body: String,
}

/// What a command produced: a JSON summary for stdout, files for `--out`,
/// short human-readable lines for stderr and an optional failure that sets
/// the exit code after everything has been written.
pub struct Output {
    pub summary: String,
    pub notes: Vec<String>,
    pub artifacts: Vec<Artifact>,
    pub failure: Option<CliError>,
}

pub struct Writer {
    pub envelope: Envelope,
    pub command: &'static str,
    pub format: Format,
    artifacts: Vec<Artifact>,
}

impl Writer {
    pub fn new(cfg: &RunConfig, command: &'static str) -> Self {
        Self {
            envelope: Envelope::new(cfg),
            command,
            format: cfg.format(),
            artifacts: Vec::new(),
        }
    }

    /// Compact JSON document with the envelope in front.
    pub fn stamp<T: Serialize>(&self, body: T) -> String {
        let doc = Stamped {
            envelope: &self.envelope,
            command: self.command,
            body,
        };
        let mut text = serde_json::to_string(&doc).expect("report serialization");
        text.push('\n');
        text
    }

    pub fn names(&self) -> Vec<String> {
        self.artifacts.iter().map(|a| a.name.clone()).collect()
    }

    pub fn add(&mut self, name: impl Into<String>, body: String) {
        self.artifacts.push(Artifact { name: name.into(), body });
    }

    /// `name.json` with the matrix fields next to `meta`, or `name.csv`.
    pub fn matrix<T: Serialize>(&mut self, name: &str, meta: T, m: &CMatrix) {
        #[derive(Serialize)]
        struct Doc<T> {
            #[serde(flatten)]
            meta: T,
            #[serde(flatten)]
            matrix: MatrixFile,
        }
        match self.format {
            Format::Json => {
                let body = self.stamp(Doc {
                    meta,
                    matrix: MatrixFile::from_matrix(m),
                });
                self.add(format!("{name}.json"), body);
            }
            Format::Csv => {
                let body = self.envelope.csv_header() + &matrix_to_csv(m);
                self.add(format!("{name}.csv"), body);
            }
        }
    }

    /// JSON lines: a stamped header object, then one object per row.
    pub fn json_lines<H: Serialize, R: Serialize>(&mut self, name: &str, header: H, rows: &[R]) {
        let mut body = serde_json::to_string(&Stamped {
            envelope: &self.envelope,
            command: self.command,
            body: header,
        })
        .expect("header serialization");
        body.push('\n');
        for r in rows {
            body.push_str(&serde_json::to_string(r).expect("row serialization"));
            body.push('\n');
        }
        self.add(format!("{name}.jsonl"), body);
    }

    pub fn csv(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<String>>) {
        let mut body = self.envelope.csv_header();
        body.push_str(&columns.join(","));
        body.push('\n');
        for r in rows {
            body.push_str(&r.join(","));
            body.push('\n');
        }
        self.add(format!("{name}.csv"), body);
    }

    pub fn finish<T: Serialize>(self, summary: T, notes: Vec<String>, failure: Option<CliError>) -> Output {
        let doc = Stamped {
            envelope: &self.envelope,
            command: self.command,
            body: summary,
        };
        Output {
            summary: serde_json::to_string_pretty(&doc).expect("summary serialization") + "\n",
            notes,
            artifacts: self.artifacts,
            failure,
        }
    }
}

pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        std::fs::write(&path, &a.body)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
