//! Text prompts for the generator and the temperature-governed
//! instrument/genre transitions between segments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emotion::{Emotion, MoodMapping};
use crate::rng::{domain, Stream};
use crate::tags::{TagCategory, TagStats};

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("prompt field `{0}` must be a non-empty lowercase label")]
    BadField(&'static str),
    #[error("temperature {0} outside [0, 1]")]
    BadTemperature(f64),
}

/// The four tags of a generation prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub mood_tag: String,
    pub emotion: Emotion,
    pub instrument: String,
    pub genre: String,
}

impl PromptSpec {
    pub fn new(
        mood_tag: impl Into<String>,
        emotion: Emotion,
        instrument: impl Into<String>,
        genre: impl Into<String>,
    ) -> Result<Self, PromptError> {
        let spec = Self {
            mood_tag: mood_tag.into(),
            emotion,
            instrument: instrument.into(),
            genre: genre.into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        for (name, value) in [
            ("mood_tag", &self.mood_tag),
            ("instrument", &self.instrument),
            ("genre", &self.genre),
        ] {
            if value.trim().is_empty() || value.chars().any(|c| c.is_uppercase()) {
                return Err(PromptError::BadField(name));
            }
        }
        Ok(())
    }
}

/// `"<mood>, <emotion>, <instrument>, <genre>"`, with the emotion token
/// dropped when it repeats the mood tag.
pub fn render_prompt(spec: &PromptSpec) -> String {
    let emotion = spec.emotion.as_str();
    if spec.mood_tag == emotion {
        format!("{}, {}, {}", spec.mood_tag, spec.instrument, spec.genre)
    } else {
        format!(
            "{}, {}, {}, {}",
            spec.mood_tag, emotion, spec.instrument, spec.genre
        )
    }
}

/// Per-field switch probability and the seed of the transition streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPolicy {
    temperature: f64,
    pub rng_seed: u64,
}

impl TransitionPolicy {
    pub fn new(temperature: f64, rng_seed: u64) -> Result<Self, PromptError> {
        if !(0.0..=1.0).contains(&temperature) {
            return Err(PromptError::BadTemperature(temperature));
        }
        Ok(Self {
            temperature,
            rng_seed,
        })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

/// Outcome of one transition, with everything the manifest records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub spec: PromptSpec,
    pub instrument_redrawn: bool,
    pub genre_redrawn: bool,
    /// Categories whose redraw found no data for the mood and kept the
    /// previous label instead.
    pub empty_distribution: Vec<String>,
}

/// The mood tag used to prompt for `emotion`: among mapping tags for the
/// emotion, the one with most tracks in `stats`, ties to the
/// lexicographically first. Falls back to the emotion label itself when
/// no tag maps to it.
pub fn mood_for_emotion(emotion: Emotion, stats: &TagStats, mapping: &MoodMapping) -> String {
    let mut best: Option<(&str, u64)> = None;
    for tag in mapping.tags_for(emotion) {
        let count = stats.track_count(tag);
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((tag, count));
        }
    }
    best.map_or_else(|| emotion.as_str().to_string(), |(t, _)| t.to_string())
}

/// Moves the prompt to `next_emotion`, redrawing instrument and genre each
/// with probability equal to the temperature.
///
/// Draws four uniforms from stream `(rng_seed, step_index)` in a fixed
/// order: instrument switch, instrument pick, genre switch, genre pick.
/// A field switches when its switch draw is below the temperature; the
/// pick draw then selects from the mood's distribution by walking labels
/// in lexicographic order until the cumulative mass exceeds it.
pub fn sample_transition(
    prev: &PromptSpec,
    next_emotion: Emotion,
    stats: &TagStats,
    mapping: &MoodMapping,
    policy: &TransitionPolicy,
    step_index: u64,
) -> Transition {
    let mood = mood_for_emotion(next_emotion, stats, mapping);
    let mut stream = Stream::derive(policy.rng_seed, domain::TRANSITION, &[step_index]);
    let draws = [
        stream.uniform(),
        stream.uniform(),
        stream.uniform(),
        stream.uniform(),
    ];
    let tau = policy.temperature;
    let mood_stats = stats.get(&mood);
    let mut empty_distribution = Vec::new();

    let mut redraw = |category: TagCategory, switch: f64, pick: f64, previous: &str| {
        if switch >= tau {
            return (previous.to_string(), false);
        }
        let drawn = mood_stats
            .map(|m| m.distribution(category))
            .and_then(|dist| sample_categorical(dist, pick));
        match drawn {
            Some(label) => (label.to_string(), true),
            None => {
                empty_distribution.push(category.as_str().to_string());
                (previous.to_string(), false)
            }
        }
    };
    let (instrument, instrument_redrawn) = redraw(
        TagCategory::Instrument,
        draws[0],
        draws[1],
        &prev.instrument,
    );
    let (genre, genre_redrawn) = redraw(TagCategory::Genre, draws[2], draws[3], &prev.genre);

    Transition {
        spec: PromptSpec {
            mood_tag: mood,
            emotion: next_emotion,
            instrument,
            genre,
        },
        instrument_redrawn,
        genre_redrawn,
        empty_distribution,
    }
}

fn sample_categorical(dist: &BTreeMap<String, f64>, u: f64) -> Option<&str> {
    let total: f64 = dist.values().sum();
    if dist.is_empty() || total <= 0.0 {
        return None;
    }
    let target = u * total;
    let mut cumulative = 0.0;
    for (label, &p) in dist {
        cumulative += p;
        if target < cumulative {
            return Some(label);
        }
    }
    dist.keys().next_back().map(String::as_str)
}
