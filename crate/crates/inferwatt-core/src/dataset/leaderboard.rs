//! Published end-to-end benchmark results used as validation ground truth.
//!
//! Leaderboard files come from external sources and accumulate rows over
//! time, so the loader is deliberately lenient: a malformed row is skipped
//! and reported as a diagnostic instead of voiding the whole file. The
//! curated sample loaders in [`super::io`] stay strict; only this
//! third-party format gets the tolerant treatment.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};

/// Canonical columns every leaderboard file must declare, in this order
/// when written by us. Extra columns are preserved as row metadata.
const CANONICAL_COLUMNS: [&str; 5] = [
    "model_name",
    "model_params_b",
    "e2e_latency_s",
    "tokens_per_kwh",
    "optimizations",
];

/// Extra columns whose values are folded into the optimization tag set
/// rather than kept as opaque metadata.
const OPTIMIZATION_COLUMNS: [&str; 3] = ["optimizations", "quantization", "attention"];

/// One published benchmark row: a model, its measured end-to-end latency
/// for the reference workload, and its energy efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderboardEntry {
    pub model_name: String,
    pub model_params_b: f64,
    pub e2e_latency_s: f64,
    pub tokens_per_kwh: f64,
    /// Inference-time tricks the submission used (quantization, pruned
    /// attention, ...). Empty means an unmodified deployment.
    pub optimizations: BTreeSet<String>,
    /// Any columns beyond the canonical schema, preserved verbatim.
    pub metadata: BTreeMap<String, String>,
}

/// A skipped leaderboard row and why it was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct RowIssue {
    /// 1-based data row number (the header is row 0).
    pub row: usize,
    pub message: String,
}

/// Result of a lenient leaderboard load: the usable rows plus diagnostics
/// for every row that had to be dropped.
#[derive(Debug, Clone)]
pub struct LeaderboardLoad {
    pub entries: Vec<LeaderboardEntry>,
    pub skipped: Vec<RowIssue>,
}

pub fn load_leaderboard(path: &Path) -> Result<LeaderboardLoad> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::CsvFormat {
            path: path.to_path_buf(),
            message: format!("unreadable header: {}", e),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    // Missing canonical columns are a file-level defect, not a row-level one.
    let mut column_of = BTreeMap::new();
    for (idx, name) in headers.iter().enumerate() {
        column_of.entry(name.as_str()).or_insert(idx);
    }
    for required in CANONICAL_COLUMNS {
        if !column_of.contains_key(required) {
            return Err(Error::CsvFormat {
                path: path.to_path_buf(),
                message: format!("missing required column `{}`", required),
            });
        }
    }

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                skipped.push(RowIssue {
                    row,
                    message: e.to_string(),
                });
                continue;
            }
        };
        match parse_row(&headers, &column_of, &record) {
            Ok(entry) => entries.push(entry),
            Err(message) => skipped.push(RowIssue { row, message }),
        }
    }
    Ok(LeaderboardLoad { entries, skipped })
}

fn parse_row(
    headers: &[String],
    column_of: &BTreeMap<&str, usize>,
    record: &csv::StringRecord,
) -> std::result::Result<LeaderboardEntry, String> {
    let field = |name: &str| -> std::result::Result<&str, String> {
        let idx = column_of[name];
        record
            .get(idx)
            .map(str::trim)
            .ok_or_else(|| format!("column `{}`: missing field", name))
    };
    let positive = |name: &str| -> std::result::Result<f64, String> {
        let raw = field(name)?;
        let value: f64 = raw
            .parse()
            .map_err(|_| format!("column `{}`: `{}` is not a number", name, raw))?;
        if !(value.is_finite() && value > 0.0) {
            return Err(format!(
                "column `{}`: `{}` must be strictly positive",
                name, raw
            ));
        }
        Ok(value)
    };

    let model_name = field("model_name")?.to_string();
    if model_name.is_empty() {
        return Err("column `model_name`: must not be empty".to_string());
    }
    let model_params_b = positive("model_params_b")?;
    let e2e_latency_s = positive("e2e_latency_s")?;
    let tokens_per_kwh = positive("tokens_per_kwh")?;

    let mut optimizations = BTreeSet::new();
    let mut metadata = BTreeMap::new();
    for (idx, header) in headers.iter().enumerate() {
        let value = record.get(idx).map(str::trim).unwrap_or("");
        if OPTIMIZATION_COLUMNS.contains(&header.as_str()) {
            for tag in value.split(';') {
                let tag = tag.trim();
                if !tag.is_empty() && !tag.eq_ignore_ascii_case("none") {
                    optimizations.insert(tag.to_string());
                }
            }
        } else if !CANONICAL_COLUMNS.contains(&header.as_str()) && !value.is_empty() {
            metadata.insert(header.clone(), value.to_string());
        }
    }

    Ok(LeaderboardEntry {
        model_name,
        model_params_b,
        e2e_latency_s,
        tokens_per_kwh,
        optimizations,
        metadata,
    })
}

pub fn write_leaderboard(path: &Path, entries: &[LeaderboardEntry]) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = csv::Writer::from_writer(file);
    let io_err = |e: csv::Error| Error::CsvFormat {
        path: path.to_path_buf(),
        message: e.to_string(),
    };

    let mut extra_keys = BTreeSet::new();
    for entry in entries {
        extra_keys.extend(entry.metadata.keys().cloned());
    }

    let mut header: Vec<&str> = CANONICAL_COLUMNS.to_vec();
    header.extend(extra_keys.iter().map(String::as_str));
    writer.write_record(&header).map_err(io_err)?;

    for entry in entries {
        let tags: Vec<&str> = entry.optimizations.iter().map(String::as_str).collect();
        let mut record = vec![
            entry.model_name.clone(),
            entry.model_params_b.to_string(),
            entry.e2e_latency_s.to_string(),
            entry.tokens_per_kwh.to_string(),
            tags.join(";"),
        ];
        for key in &extra_keys {
            record.push(entry.metadata.get(key).cloned().unwrap_or_default());
        }
        writer.write_record(&record).map_err(io_err)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Validation compares against vanilla deployments, so entries that used
/// any inference-time optimization are excluded. Exact duplicates of
/// (name, parameter count) keep their first occurrence.
pub fn filter_unoptimized(entries: &[LeaderboardEntry]) -> Vec<LeaderboardEntry> {
    let mut seen = BTreeSet::new();
    entries
        .iter()
        .filter(|e| e.optimizations.is_empty())
        .filter(|e| seen.insert((e.model_name.clone(), e.model_params_b.to_bits())))
        .cloned()
        .collect()
}
