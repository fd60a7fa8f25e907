use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

/// One analytic-vs-simulation agreement check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Diagnostic {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Diagnostic {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Diagnostic {
            name: name.into(),
            value,
            threshold,
            passed: value > threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: Provenance,
    pub diagnostics: Vec<Diagnostic>,
}

impl ResultTable {
    pub fn passed(&self) -> bool {
        self.diagnostics.iter().all(|d| d.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Diagnostic> + '_ {
        self.diagnostics.iter().filter(|d| !d.passed)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV with `#` provenance lines above the header and `#` diagnostic
    /// lines after the data.
    pub fn to_csv(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        writeln!(out, "# experiment: {}", p.experiment).unwrap();
        writeln!(out, "# config_hash: {}", p.config_hash).unwrap();
        writeln!(out, "# seed: {}", p.seed).unwrap();
        writeln!(out, "# version: {}", p.version).unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        for d in &self.diagnostics {
            let verdict = if d.passed { "pass" } else { "fail" };
            writeln!(
                out,
                "# diagnostic: {},{},{},{}",
                d.name, d.value, d.threshold, verdict
            )
            .unwrap();
        }
        out
    }
}
