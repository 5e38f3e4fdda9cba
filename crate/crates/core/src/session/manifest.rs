use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SessionConfig, SessionError};
use crate::emotion::Emotion;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// `session.wav` → `session.manifest.json`.
pub fn manifest_path_for(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub matched: bool,
    /// Absent when none of the top tags had a mapping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closest_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closest_emotion: Option<Emotion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub index: usize,
    pub emotion: Emotion,
    pub prompt: String,
    pub mood_tag: String,
    pub instrument: String,
    pub genre: String,
    pub instrument_redrawn: bool,
    pub genre_redrawn: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub empty_distribution: Vec<String>,
    /// Seed of the attempt that was kept.
    pub seed: u64,
    pub retries: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictRecord>,
    /// Validation never matched and the last attempt was kept anyway.
    #[serde(default)]
    pub validation_exhausted: bool,
    pub generated_samples: usize,
    pub trimmed_head: usize,
    pub trimmed_tail: usize,
    pub pre_normalization_peak: f32,
    pub normalization_gain: f64,
    /// Samples of the clip as it enters assembly.
    pub samples: usize,
    pub content_digest: String,
}

/// Everything needed to reproduce a session. Contains no timestamps or
/// output locations, so identical runs produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub format_version: u32,
    pub config: SessionConfig,
    pub seed: u64,
    pub backend: String,
    pub mapping_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats_digest: Option<String>,
    pub path: Vec<Emotion>,
    pub allocation: Vec<usize>,
    pub segments: Vec<SegmentRecord>,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_digest: Option<String>,
}

impl SessionManifest {
    pub fn validation_exhausted(&self) -> bool {
        self.segments.iter().any(|s| s.validation_exhausted)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, SessionError> {
        let manifest: Self =
            serde_json::from_str(text).map_err(|e| SessionError::Manifest(e.to_string()))?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            return Err(SessionError::Manifest(format!(
                "unsupported format version {}",
                manifest.format_version
            )));
        }
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self, SessionError> {
        let text = std::fs::read_to_string(path).map_err(|source| SessionError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), SessionError> {
        std::fs::write(path, self.to_json()).map_err(|source| SessionError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}
