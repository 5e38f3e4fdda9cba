//! Multilabel tagging metrics, embedding relevance, inter-rater agreement
//! and the per-clip emotion check.

mod files;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::emotion::{angular_distance_deg, Emotion, MoodMapping};

pub use files::{parse_counts, parse_probabilities, parse_rater_labels, parse_vectors, FileError};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_TOLERANCE_DEG: f64 = 45.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("length mismatch: {0} labels vs {1} scores")]
    LengthMismatch(usize, usize),
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("no positive labels; average precision is undefined")]
    NoPositives,
    #[error("zero-length embedding vector")]
    ZeroVector,
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("invalid rating matrix: {0}")]
    InvalidRatings(String),
    /// Every rating falls in one category, so chance agreement is 1 and
    /// kappa is 0/0.
    #[error("all ratings fall in a single category; kappa is undefined")]
    DegenerateAgreement,
    #[error("none of the top tags has an emotion mapping")]
    NoMappableTags,
    #[error("top_m must be at least 1")]
    ZeroTopM,
}

/// Ground truth and predicted probabilities for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilabelPair {
    truth: Vec<bool>,
    scores: Vec<f64>,
    threshold: f64,
}

impl MultilabelPair {
    pub fn new(truth: Vec<bool>, scores: Vec<f64>) -> Result<Self, MetricError> {
        if truth.len() != scores.len() {
            return Err(MetricError::LengthMismatch(truth.len(), scores.len()));
        }
        if let Some(&bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(MetricError::ScoreOutOfRange(bad));
        }
        Ok(Self {
            truth,
            scores,
            threshold: DEFAULT_THRESHOLD,
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn truth(&self) -> &[bool] {
        &self.truth
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn predictions(&self) -> impl Iterator<Item = bool> + '_ {
        self.scores.iter().map(move |&s| s >= self.threshold)
    }
}

/// Fraction of label positions where the thresholded prediction equals the
/// truth (one minus the Hamming loss). An empty label set scores 1.
pub fn hamming_score(pair: &MultilabelPair) -> f64 {
    if pair.truth.is_empty() {
        return 1.0;
    }
    let agree = pair
        .truth
        .iter()
        .zip(pair.predictions())
        .filter(|(t, p)| **t == *p)
        .count();
    agree as f64 / pair.truth.len() as f64
}

/// Intersection over union of the true and predicted label sets; 1 when
/// both are empty.
pub fn jaccard_accuracy(pair: &MultilabelPair) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&t, p) in pair.truth.iter().zip(pair.predictions()) {
        inter += usize::from(t && p);
        union += usize::from(t || p);
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Average precision: items ranked by descending score (equal scores keep
/// their input order), precision averaged over the ranks of the positives.
pub fn auprc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    if scores.len() != labels.len() {
        return Err(MetricError::LengthMismatch(labels.len(), scores.len()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps input order among ties
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if labels[i] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / positives as f64)
}

/// Cosine similarity scaled to [-100, 100].
pub fn clap_style_score(audio_emb: &[f64], text_emb: &[f64]) -> Result<f64, MetricError> {
    if audio_emb.len() != text_emb.len() {
        return Err(MetricError::DimMismatch(audio_emb.len(), text_emb.len()));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nt) = (norm(audio_emb), norm(text_emb));
    if na == 0.0 || nt == 0.0 || audio_emb.is_empty() {
        return Err(MetricError::ZeroVector);
    }
    let dot: f64 = audio_emb.iter().zip(text_emb).map(|(a, b)| a * b).sum();
    Ok((100.0 * dot / (na * nt)).clamp(-100.0, 100.0))
}

/// Subjects × categories count matrix; each row sums to the number of
/// raters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    counts: Vec<Vec<u32>>,
    raters: u32,
}

impl RatingMatrix {
    pub fn new(counts: Vec<Vec<u32>>) -> Result<Self, MetricError> {
        let invalid = |m: String| Err(MetricError::InvalidRatings(m));
        let Some(first) = counts.first() else {
            return invalid("no subjects".into());
        };
        let k = first.len();
        if k < 2 {
            return invalid("need at least two categories".into());
        }
        let raters: u32 = first.iter().sum();
        if raters < 2 {
            return invalid("need at least two raters per subject".into());
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != k {
                return invalid(format!(
                    "row {} has {} categories, expected {k}",
                    i + 1,
                    row.len()
                ));
            }
            let n: u32 = row.iter().sum();
            if n != raters {
                return invalid(format!("row {} sums to {n}, expected {raters}", i + 1));
            }
        }
        Ok(Self { counts, raters })
    }

    /// Builds counts from categorical labels: one row per subject, one
    /// label per rater. Categories are the sorted set of labels seen.
    pub fn from_labels<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<(Self, Vec<String>), MetricError> {
        let categories: Vec<String> = rows
            .iter()
            .flatten()
            .map(|s| s.as_ref().to_string())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&str, usize> = categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let mut counts = Vec::with_capacity(rows.len());
        for row in rows {
            let mut r = vec![0u32; categories.len().max(2)];
            for label in row {
                r[index[label.as_ref()]] += 1;
            }
            counts.push(r);
        }
        Ok((Self::new(counts)?, categories))
    }

    pub fn subjects(&self) -> usize {
        self.counts.len()
    }

    pub fn categories(&self) -> usize {
        self.counts[0].len()
    }

    pub fn raters(&self) -> u32 {
        self.raters
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.counts
    }
}

/// Fleiss' kappa. Fails with [`MetricError::DegenerateAgreement`] when all
/// ratings share one category.
pub fn fleiss_kappa(matrix: &RatingMatrix) -> Result<f64, MetricError> {
    if matrix.subjects() < 2 {
        return Err(MetricError::InvalidRatings(
            "need at least two subjects".into(),
        ));
    }
    let n = f64::from(matrix.raters);
    let subjects = matrix.subjects() as f64;
    let mut totals = vec![0u64; matrix.categories()];
    let mut p_sum = 0.0;
    for row in &matrix.counts {
        let squares: u64 = row.iter().map(|&c| u64::from(c) * u64::from(c)).sum();
        p_sum += (squares as f64 - n) / (n * (n - 1.0));
        for (t, &c) in totals.iter_mut().zip(row) {
            *t += u64::from(c);
        }
    }
    let p_bar = p_sum / subjects;
    let all = subjects * n;
    let p_e: f64 = totals.iter().map(|&t| (t as f64 / all).powi(2)).sum();
    if totals.iter().filter(|&&t| t > 0).count() < 2 {
        return Err(MetricError::DegenerateAgreement);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchVerdict {
    pub matched: bool,
    /// Smallest circumplex angle between the intended emotion and any
    /// mapped top tag, in degrees.
    pub error_deg: f64,
    /// Tag achieving `error_deg`.
    pub closest_tag: String,
    pub closest_emotion: Emotion,
    /// Top tags that had a mapping, in rank order.
    pub mapped: Vec<(String, Emotion)>,
}

/// Takes the `top_m` most probable tags (ties by tag name), maps those that
/// have a mapping, and matches when any lands within `tolerance_deg` of
/// `intended`.
pub fn emotion_match(
    probs: &BTreeMap<String, f64>,
    intended: Emotion,
    mapping: &MoodMapping,
    top_m: usize,
    tolerance_deg: f64,
) -> Result<MatchVerdict, MetricError> {
    if top_m == 0 {
        return Err(MetricError::ZeroTopM);
    }
    let mut ranked: Vec<(&String, f64)> = probs.iter().map(|(t, &p)| (t, p)).collect();
    // BTreeMap order is by tag, and the sort is stable
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mapped: Vec<(String, Emotion)> = ranked
        .iter()
        .take(top_m)
        .filter_map(|(tag, _)| mapping.get(tag).map(|e| (tag.to_string(), e)))
        .collect();
    let (closest_tag, closest_emotion, error_deg) = mapped
        .iter()
        .map(|(t, e)| (t.clone(), *e, angular_distance_deg(intended, *e)))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .ok_or(MetricError::NoMappableTags)?;
    Ok(MatchVerdict {
        matched: error_deg <= tolerance_deg,
        error_deg,
        closest_tag,
        closest_emotion,
        mapped,
    })
}

#[cfg(test)]
mod tests;
