//! Circumplex geometry: the 15 canonical emotions, their valence/arousal
//! coordinates, the mood-tag mapping and iso-path planning.

mod mapping;
mod path;

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use mapping::{map_mood_tag, MappingError, MoodMapping};
pub use path::{plan_path, IsoPath};

/// Radius of the drawn circumplex; figure coordinates are divided by it.
const FIGURE_RADIUS: f64 = 2.5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmotionError {
    #[error("unknown emotion `{0}`")]
    UnknownEmotion(String),
    #[error("mood tag `{0}` has no mapping")]
    UnmappedTag(String),
}

macro_rules! emotions {
    ($($variant:ident => $name:literal, ($x:expr, $y:expr);)*) => {
        /// One of the 15 labelled emotions on the circumplex.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Emotion {
            $($variant,)*
        }

        impl Emotion {
            pub const ALL: [Emotion; 15] = [$(Emotion::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Emotion::$variant => $name,)*
                }
            }

            /// Label position as drawn, before normalization to the unit disc.
            fn figure_coords(self) -> (f64, f64) {
                match self {
                    $(Emotion::$variant => ($x, $y),)*
                }
            }
        }
    };
}

emotions! {
    Alert => "alert", (0.5, 2.3);
    Excited => "excited", (1.25, 1.8125);
    Elated => "elated", (1.75, 1.0625);
    Happy => "happy", (1.9, 0.375);
    Contented => "contented", (1.8, -0.1875);
    Serene => "serene", (1.75, -1.0625);
    Relaxed => "relaxed", (1.25, -1.6875);
    Calm => "calm", (0.375, -2.2);
    Bored => "bored", (-0.5, -2.1875);
    Depressed => "depressed", (-1.3625, -1.25);
    Sad => "sad", (-2.125, -0.375);
    Upset => "upset", (-2.075, 0.1875);
    Stressed => "stressed", (-1.55, 1.0625);
    Nervous => "nervous", (-1.05, 1.7125);
    Tense => "tense", (-0.4125, 2.2125);
}

impl Emotion {
    pub fn valence(self) -> f64 {
        self.figure_coords().0 / FIGURE_RADIUS
    }

    pub fn arousal(self) -> f64 {
        self.figure_coords().1 / FIGURE_RADIUS
    }

    /// Polar angle in radians, in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        normalize_angle(self.arousal().atan2(self.valence()))
    }

    pub fn point(self) -> EmotionPoint {
        EmotionPoint {
            name: self,
            valence: self.valence(),
            arousal: self.arousal(),
            angle: self.angle(),
        }
    }

    /// Position of this emotion in [`angular_ring`].
    pub fn ring_index(self) -> usize {
        angular_ring()
            .iter()
            .position(|&e| e == self)
            .expect("every emotion is on the ring")
    }
}

fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = EmotionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim().to_ascii_lowercase();
        Emotion::ALL
            .iter()
            .copied()
            .find(|e| e.as_str() == needle)
            .ok_or_else(|| EmotionError::UnknownEmotion(s.to_string()))
    }
}

impl Serialize for Emotion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Emotion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A named emotion with its unit-disc coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionPoint {
    pub name: Emotion,
    pub valence: f64,
    pub arousal: f64,
    pub angle: f64,
}

/// Looks up an emotion by label, case-insensitively.
pub fn emotion_coords(name: &str) -> Result<EmotionPoint, EmotionError> {
    Ok(name.parse::<Emotion>()?.point())
}

/// The 15 emotions sorted by increasing polar angle (counterclockwise
/// from the positive valence axis). Neighbours in this ring are the
/// adjacent states of an iso path; the last entry wraps to the first.
pub fn angular_ring() -> &'static [Emotion; 15] {
    static RING: OnceLock<[Emotion; 15]> = OnceLock::new();
    RING.get_or_init(|| {
        let mut ring = Emotion::ALL;
        ring.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
        ring
    })
}

/// Smallest angle between two emotions on the circle, in degrees.
pub fn angular_distance_deg(a: Emotion, b: Emotion) -> f64 {
    let d = (a.angle() - b.angle()).abs();
    d.min(TAU - d).to_degrees()
}
