//! CSV readers and writers for the three curated sample schemas.
//!
//! Sample loaders are strict: a malformed or invariant-violating row fails
//! the whole load with an error naming the row and column. Floats are
//! written with `Display`, whose shortest-roundtrip output makes
//! write-then-read an identity.

use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};

use super::{
    EncodingSample, MinDeviceSample, PerTokenSample, SampleKind, CURATED_PROMPT_TOKENS_MAX,
};

/// Rows that passed validation, plus any non-fatal warnings the loader
/// produced (e.g. prompt lengths outside the curated measurement range).
#[derive(Debug, Clone)]
pub struct CsvLoad<T> {
    pub rows: Vec<T>,
    pub warnings: Vec<String>,
}

pub fn load_encoding_samples(path: &Path) -> Result<CsvLoad<EncodingSample>> {
    let mut warnings = Vec::new();
    let rows = read_rows(path, SampleKind::Encoding, |ctx| {
        let sample = EncodingSample {
            model_params_b: ctx.positive_f64(0)?,
            prompt_tokens: ctx.positive_u32(1)?,
            encoding_latency_s: ctx.positive_f64(2)?,
        };
        if sample.prompt_tokens > CURATED_PROMPT_TOKENS_MAX {
            warnings.push(format!(
                "{}: row {}: prompt_tokens {} is outside the curated range 1..={}",
                path.display(),
                ctx.row,
                sample.prompt_tokens,
                CURATED_PROMPT_TOKENS_MAX
            ));
        }
        Ok(sample)
    })?;
    Ok(CsvLoad { rows, warnings })
}

pub fn load_per_token_samples(path: &Path) -> Result<CsvLoad<PerTokenSample>> {
    let rows = read_rows(path, SampleKind::PerToken, |ctx| {
        Ok(PerTokenSample {
            model_params_b: ctx.positive_f64(0)?,
            per_token_latency_s: ctx.positive_f64(1)?,
        })
    })?;
    Ok(CsvLoad {
        rows,
        warnings: Vec::new(),
    })
}

pub fn load_min_device_samples(path: &Path) -> Result<CsvLoad<MinDeviceSample>> {
    let rows = read_rows(path, SampleKind::MinDevice, |ctx| {
        Ok(MinDeviceSample {
            model_params_b: ctx.positive_f64(0)?,
            device_count: ctx.positive_u32(1)?,
            hardware_name: ctx.non_empty_string(2)?,
        })
    })?;
    Ok(CsvLoad {
        rows,
        warnings: Vec::new(),
    })
}

pub fn write_encoding_samples(path: &Path, rows: &[EncodingSample]) -> Result<()> {
    write_rows(path, SampleKind::Encoding, rows, |s| {
        vec![
            s.model_params_b.to_string(),
            s.prompt_tokens.to_string(),
            s.encoding_latency_s.to_string(),
        ]
    })
}

pub fn write_per_token_samples(path: &Path, rows: &[PerTokenSample]) -> Result<()> {
    write_rows(path, SampleKind::PerToken, rows, |s| {
        vec![
            s.model_params_b.to_string(),
            s.per_token_latency_s.to_string(),
        ]
    })
}

pub fn write_min_device_samples(path: &Path, rows: &[MinDeviceSample]) -> Result<()> {
    write_rows(path, SampleKind::MinDevice, rows, |s| {
        vec![
            s.model_params_b.to_string(),
            s.device_count.to_string(),
            s.hardware_name.clone(),
        ]
    })
}

/// Per-row parsing context: the raw record plus its position, with helpers
/// that produce column-named errors.
struct RowCtx<'a> {
    pub path: &'a Path,
    pub row: usize,
    header: &'a [&'a str],
    record: &'a csv::StringRecord,
}

impl RowCtx<'_> {
    fn field(&self, idx: usize) -> Result<&str> {
        // Headers are validated before any row is parsed, so indexing into
        // `self.header` never goes out of bounds here.
        self.record.get(idx).ok_or_else(|| Error::InvalidField {
            path: self.path.to_path_buf(),
            row: self.row,
            column: self.header[idx].to_string(),
            message: "missing field".to_string(),
        })
    }

    fn invalid(&self, idx: usize, message: String) -> Error {
        Error::InvalidField {
            path: self.path.to_path_buf(),
            row: self.row,
            column: self.header[idx].to_string(),
            message,
        }
    }

    fn positive_f64(&self, idx: usize) -> Result<f64> {
        let raw = self.field(idx)?.trim();
        let value: f64 = raw
            .parse()
            .map_err(|_| self.invalid(idx, format!("`{}` is not a number", raw)))?;
        if !value.is_finite() {
            return Err(self.invalid(idx, format!("`{}` is not finite", raw)));
        }
        if value <= 0.0 {
            return Err(self.invalid(idx, format!("`{}` must be strictly positive", raw)));
        }
        Ok(value)
    }

    fn positive_u32(&self, idx: usize) -> Result<u32> {
        let raw = self.field(idx)?.trim();
        let value: u32 = raw
            .parse()
            .map_err(|_| self.invalid(idx, format!("`{}` is not a positive integer", raw)))?;
        if value == 0 {
            return Err(self.invalid(idx, "must be at least 1".to_string()));
        }
        Ok(value)
    }

    fn non_empty_string(&self, idx: usize) -> Result<String> {
        let raw = self.field(idx)?.trim();
        if raw.is_empty() {
            return Err(self.invalid(idx, "must not be empty".to_string()));
        }
        Ok(raw.to_string())
    }
}

fn read_rows<T>(
    path: &Path,
    kind: SampleKind,
    mut parse: impl FnMut(&RowCtx<'_>) -> Result<T>,
) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);
    check_header(path, &mut reader, kind.header())?;

    let header = kind.header();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::CsvFormat {
            path: path.to_path_buf(),
            message: format!("row {}: {}", row, e),
        })?;
        let ctx = RowCtx {
            path,
            row,
            header,
            record: &record,
        };
        rows.push(parse(&ctx)?);
    }
    Ok(rows)
}

fn check_header<R: std::io::Read>(
    path: &Path,
    reader: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<()> {
    let headers = reader.headers().map_err(|e| Error::CsvFormat {
        path: path.to_path_buf(),
        message: format!("unreadable header: {}", e),
    })?;
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::CsvFormat {
            path: path.to_path_buf(),
            message: format!(
                "header mismatch: expected `{}`, got `{}`",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn write_rows<T>(
    path: &Path,
    kind: SampleKind,
    rows: &[T],
    to_fields: impl Fn(&T) -> Vec<String>,
) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = csv::Writer::from_writer(file);
    let io_err = |e: csv::Error| Error::CsvFormat {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    writer.write_record(kind.header()).map_err(io_err)?;
    for row in rows {
        writer.write_record(to_fields(row)).map_err(io_err)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}
