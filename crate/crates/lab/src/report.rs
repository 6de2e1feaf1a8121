//! Experiment reports: a JSON summary plus CSV tables.

use std::path::Path;

use serde::Serialize;

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::io::{write_atomic, Table};
use crate::LabError;

/// One pass/fail diagnostic and the result it tests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub theorem: String,
    pub pass: bool,
    pub value: f64,
    /// Human-readable acceptance condition.
    pub limit: String,
}

impl Check {
    pub fn new(
        name: &str,
        theorem: &str,
        pass: bool,
        value: f64,
        limit: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            theorem: theorem.into(),
            pass,
            value,
            limit: limit.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub summary: serde_json::Value,
    pub tables: Vec<Table>,
    /// Extra files written verbatim (certificates, dumps).
    pub attachments: Vec<(String, Vec<u8>)>,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    schema_version: u32,
    kind: &'static str,
    pass: bool,
    config: &'a ExperimentConfig,
    checks: &'a [Check],
    summary: &'a serde_json::Value,
    tables: Vec<String>,
    attachments: Vec<&'a str>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn prefix(&self) -> &'static str {
        self.config.kind.name()
    }

    fn table_file(&self, t: &Table) -> String {
        format!("{}_{}.csv", self.prefix(), t.name)
    }

    /// Every output file with its bytes, summary first.
    pub fn render(&self) -> Vec<(String, Vec<u8>)> {
        let file = SummaryFile {
            schema_version: SCHEMA_VERSION,
            kind: self.prefix(),
            pass: self.pass(),
            config: &self.config,
            checks: &self.checks,
            summary: &self.summary,
            tables: self.tables.iter().map(|t| self.table_file(t)).collect(),
            attachments: self.attachments.iter().map(|(n, _)| n.as_str()).collect(),
        };
        let mut json = serde_json::to_vec_pretty(&file).expect("report serializes");
        json.push(b'\n');
        let mut out = vec![(format!("{}_summary.json", self.prefix()), json)];
        out.extend(self.tables.iter().map(|t| (self.table_file(t), t.to_csv())));
        out.extend(self.attachments.iter().cloned());
        out
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<String>, LabError> {
        let mut names = Vec::new();
        for (name, bytes) in self.render() {
            write_atomic(&dir.join(&name), &bytes)?;
            names.push(name);
        }
        Ok(names)
    }
}
