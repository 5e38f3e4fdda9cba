use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use super::{Emotion, EmotionError};

const DEFAULT_MAPPING: &str = include_str!("../../data/mood_mapping.tsv");

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("mapping has no entries")]
    Empty,
    #[error("reading mapping file: {0}")]
    Io(#[from] std::io::Error),
}

/// Mood/theme tag to circumplex emotion table.
///
/// File format: UTF-8, one `tag<TAB>emotion` pair per line. Blank lines
/// and lines starting with `#` are ignored. Tags are stored lowercase and
/// must be unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoodMapping {
    entries: BTreeMap<String, Emotion>,
}

impl MoodMapping {
    pub fn parse(text: &str) -> Result<Self, MappingError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| MappingError::Malformed { line, reason };
            let (tag, emotion) = trimmed
                .split_once('\t')
                .ok_or_else(|| malformed("expected `tag<TAB>emotion`".into()))?;
            let tag = tag.trim().to_ascii_lowercase();
            if tag.is_empty() {
                return Err(malformed("empty tag".into()));
            }
            let emotion: Emotion = emotion
                .trim()
                .parse()
                .map_err(|e: EmotionError| malformed(e.to_string()))?;
            if entries.insert(tag.clone(), emotion).is_some() {
                return Err(malformed(format!("duplicate tag `{tag}`")));
            }
        }
        if entries.is_empty() {
            return Err(MappingError::Empty);
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, MappingError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The shipped table covering the 56 MTG-Jamendo mood/theme tags.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_MAPPING).expect("built-in mapping is valid")
    }

    pub fn get(&self, tag: &str) -> Option<Emotion> {
        self.entries.get(&tag.trim().to_ascii_lowercase()).copied()
    }

    /// Tags mapped to `emotion`, in lexicographic order.
    pub fn tags_for(&self, emotion: Emotion) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(move |(_, &e)| e == emotion)
            .map(|(t, _)| t.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Emotion)> {
        self.entries.iter().map(|(t, &e)| (t.as_str(), e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for MoodMapping {
    fn default() -> Self {
        Self::builtin()
    }
}

pub fn map_mood_tag(tag: &str, mapping: &MoodMapping) -> Result<Emotion, EmotionError> {
    mapping
        .get(tag)
        .ok_or_else(|| EmotionError::UnmappedTag(tag.to_string()))
}
