//! Result tables and their CSV encoding.
//!
//! Every CSV starts with a `# schema=<name>/<version>` comment line. Wall
//! clock timings are kept out of `results.csv` so that file stays
//! byte-identical across runs; they go to `timings.csv`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const RESULTS_SCHEMA: &str = "moe-paging-results/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub trace_id: String,
    pub policy: String,
    pub k: u32,
    pub faults: u64,
    /// faults / OPT faults on the same (trace, k); absent when OPT was not
    /// computed for that pair.
    pub normalized: Option<f64>,
    #[serde(skip)]
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    trace_id: &'a str,
    policy: &'a str,
    k: u32,
    runtime_ms: f64,
}

impl ResultTable {
    /// Orders rows by (trace, policy, k) so output does not depend on the
    /// order in which parallel runs finished.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            (&a.trace_id, &a.policy, a.k).cmp(&(&b.trace_id, &b.policy, b.k))
        });
    }

    pub fn find(&self, trace_id: &str, policy: &str, k: u32) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.trace_id == trace_id && r.policy == policy && r.k == k)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_csv(path, RESULTS_SCHEMA, &self.rows)
    }

    pub fn write_timings(&self, path: &Path) -> Result<()> {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| TimingRow {
                trace_id: &r.trace_id,
                policy: &r.policy,
                k: r.k,
                runtime_ms: r.runtime_ms,
            })
            .collect();
        write_csv(path, "moe-paging-timings/1", &rows)
    }
}

/// Writes `rows` as CSV under a schema comment line.
pub fn write_csv<T: Serialize>(path: &Path, schema: &str, rows: &[T]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# schema={schema}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`].
pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    r.deserialize().map(|row| Ok(row?)).collect()
}

/// Five-number summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSummary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxSummary {
    /// Quartiles by linear interpolation between order statistics. `None`
    /// for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            count: v.len(),
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}
