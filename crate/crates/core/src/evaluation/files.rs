//! Text formats consumed by the evaluation commands.
//!
//! * Vectors (embeddings, truth labels, scores): one vector per line,
//!   values separated by commas. Blank lines and lines starting with `#`
//!   are skipped.
//! * Classifier probabilities: JSON, either one object mapping tag to
//!   probability or an array of such objects (one per clip).
//! * Rater labels: tab-separated, `subject<TAB>label<TAB>label...`, one
//!   label per rater.
//! * Rating counts: one subject per line, non-negative integers separated
//!   by commas or whitespace.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FileError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("probability file: {0}")]
    Json(String),
    #[error("file has no data rows")]
    Empty,
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_vectors(text: &str) -> Result<Vec<Vec<f64>>, FileError> {
    let rows = data_lines(text)
        .map(|(line, l)| {
            l.split(',')
                .map(|v| {
                    let v = v.trim();
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| FileError::Malformed {
                            line,
                            reason: format!("`{v}` is not a finite number"),
                        })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err(FileError::Empty);
    }
    Ok(rows)
}

pub fn parse_counts(text: &str) -> Result<Vec<Vec<u32>>, FileError> {
    let rows = data_lines(text)
        .map(|(line, l)| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|v| !v.is_empty())
                .map(|v| {
                    v.parse::<u32>().map_err(|_| FileError::Malformed {
                        line,
                        reason: format!("`{v}` is not a non-negative count"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err(FileError::Empty);
    }
    Ok(rows)
}

pub fn parse_probabilities(text: &str) -> Result<Vec<BTreeMap<String, f64>>, FileError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| FileError::Json(e.to_string()))?;
    let clips = match value {
        serde_json::Value::Array(items) => items,
        object @ serde_json::Value::Object(_) => vec![object],
        _ => return Err(FileError::Json("expected an object or array".into())),
    };
    let parsed: Vec<BTreeMap<String, f64>> = clips
        .into_iter()
        .map(|c| serde_json::from_value(c).map_err(|e| FileError::Json(e.to_string())))
        .collect::<Result<_, _>>()?;
    for clip in &parsed {
        if let Some((tag, p)) = clip.iter().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(FileError::Json(format!("probability {p} for `{tag}`")));
        }
    }
    if parsed.is_empty() {
        return Err(FileError::Empty);
    }
    Ok(parsed)
}

/// Returns (subject, labels) rows with labels lowercased.
pub fn parse_rater_labels(text: &str) -> Result<Vec<(String, Vec<String>)>, FileError> {
    let rows: Vec<(String, Vec<String>)> = data_lines(text)
        .map(|(line, l)| {
            let mut fields = l.split('\t').map(str::trim);
            let subject = fields.next().unwrap_or_default().to_string();
            let labels: Vec<String> = fields
                .filter(|f| !f.is_empty())
                .map(str::to_lowercase)
                .collect();
            if labels.len() < 2 {
                return Err(FileError::Malformed {
                    line,
                    reason: "need a subject and at least two ratings".into(),
                });
            }
            Ok((subject, labels))
        })
        .collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(FileError::Empty);
    }
    Ok(rows)
}
