//! Report documents and their JSON and CSV renderings.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Format, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
    pub result: Value,
}

/// Header and rows for the CSV rendering.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

const CSV_CONFIG: &str = "# config: ";
const CSV_VERDICT: &str = "# verdict: ";

impl Report {
    pub fn render(&self, table: &Table) -> String {
        match self.config.format {
            Format::Json => {
                let mut text = serde_json::to_string_pretty(self).expect("serializable");
                text.push('\n');
                text
            }
            Format::Csv => {
                let mut text = String::new();
                text.push_str(CSV_CONFIG);
                text.push_str(&serde_json::to_string(&self.config).expect("serializable"));
                text.push('\n');
                text.push_str(CSV_VERDICT);
                text.push_str(&serde_json::to_string(&self.verdict).expect("serializable"));
                text.push('\n');
                for d in &self.diagnostics {
                    text.push_str("# ");
                    text.push_str(d);
                    text.push('\n');
                }
                if table.header.is_empty() {
                    return text;
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.header).expect("in memory");
                for row in &table.rows {
                    w.write_record(row).expect("in memory");
                }
                text.push_str(&String::from_utf8(w.into_inner().expect("in memory")).expect("utf-8"));
                text
            }
        }
    }
}

/// What a stored report file holds: the full report for JSON, the
/// configuration alone for CSV.
#[derive(Clone, Debug, PartialEq)]
pub enum Stored {
    Json(Report),
    Csv(RunConfig),
}

impl Stored {
    pub fn parse(text: &str) -> Result<Stored, String> {
        if let Some(rest) = text.strip_prefix(CSV_CONFIG) {
            let line = rest.lines().next().unwrap_or_default();
            return serde_json::from_str(line)
                .map(Stored::Csv)
                .map_err(|e| format!("unreadable CSV config line: {e}"));
        }
        serde_json::from_str(text)
            .map(Stored::Json)
            .map_err(|e| format!("not a report: {e}"))
    }

    pub fn config(&self) -> &RunConfig {
        match self {
            Stored::Json(r) => &r.config,
            Stored::Csv(c) => c,
        }
    }
}
