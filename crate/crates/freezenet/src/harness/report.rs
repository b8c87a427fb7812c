//! Result persistence: JSON-lines raw histories, plot-ready CSV
//! aggregates, and a completion manifest. Output files are written to a
//! temporary sibling and renamed into place, so readers never observe a
//! partial file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AggregateRow, HarnessError, SignificanceRow, TrialHistory};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn histories_to_jsonl(histories: &[TrialHistory]) -> String {
    let mut out = String::new();
    for h in histories {
        out.push_str(&serde_json::to_string(h).expect("history serialization cannot fail"));
        out.push('\n');
    }
    out
}

pub fn read_histories_jsonl(text: &str) -> Result<Vec<TrialHistory>, HarnessError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| HarnessError::Config(format!("bad record: {e}")))
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// CSV: condition,train_size,hidden_size,metric,median,p25,p75,success_rate,n_trials
pub fn render_aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out =
        String::from("condition,train_size,hidden_size,metric,median,p25,p75,success_rate,n_trials\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.condition.name(),
            r.train_size,
            r.hidden_size,
            r.metric,
            opt(r.median),
            opt(r.p25),
            opt(r.p75),
            r.success_rate,
            r.n_trials
        ));
    }
    out
}

/// CSV: train_size,hidden_size,condition_a,condition_b,u,p_raw,p_adjusted
pub fn render_significance_csv(rows: &[SignificanceRow]) -> String {
    let mut out = String::from("train_size,hidden_size,condition_a,condition_b,u,p_raw,p_adjusted\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.train_size,
            r.hidden_size,
            r.condition_a.name(),
            r.condition_b.name(),
            r.u_statistic,
            r.p_raw,
            r.p_adjusted
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub status: String,
    pub records: usize,
}

pub fn write_manifest(path: &Path, complete: bool, records: usize) -> Result<(), HarnessError> {
    let manifest = Manifest {
        status: if complete { "complete" } else { "incomplete" }.into(),
        records,
    };
    write_atomic(
        path,
        serde_json::to_string_pretty(&manifest)
            .expect("manifest serialization cannot fail")
            .as_bytes(),
    )
}
